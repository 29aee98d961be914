"""posibench: planted-optimum QUBO benchmark instances and solver harness.

Generates QUBO instances on arbitrary target graphs whose unique global
optimum is known by construction, solves them with built-in simulated
annealing and exact branch-and-bound, and scores solvers with success-rate,
time-to-solution, and energy-gap metrics.
"""

__version__ = "0.1.0"

from .kernels import BACKEND as KERNEL_BACKEND

__all__ = ["KERNEL_BACKEND", "__version__"]
