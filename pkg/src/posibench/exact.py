"""Deterministic exact minimization: exhaustive scan and branch-and-bound.

These are the ground-truth oracles for the whole package — sub-problem
optima during instance generation, and the independent check behind every
uniqueness claim.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .qubo import Assignment, Qubo, QuboArrays

BRUTE_FORCE_CAP = 26


class ExactSolverError(ValueError):
    pass


@dataclass
class ExactResult:
    optimum_energy: int
    optima: list[Assignment]
    proved: bool
    nodes_explored: int
    wall_time: float
    num_optima: int = 1

    def witness(self) -> Assignment:
        return self.optima[0]


def _mask_to_assignment(mask: int, variables: tuple[int, ...]) -> Assignment:
    return {v: (mask >> i) & 1 for i, v in enumerate(variables)}


def _array_to_assignment(bits, variables: tuple[int, ...]) -> Assignment:
    return {v: int(bits[i]) for i, v in enumerate(variables)}


def brute_force(qubo: Qubo, enumerate_all: bool = False, max_variables: int = BRUTE_FORCE_CAP) -> ExactResult:
    """Scan all 2^n assignments in Gray-code order with incremental deltas."""
    n = qubo.num_variables
    if n > max_variables:
        raise ExactSolverError(
            f"brute force refused: {n} variables exceeds the cap of {max_variables}"
        )
    start = time.perf_counter()
    if n == 0:
        masks = [0]
        best, count, witness = qubo.offset, 1, 0
    else:
        arr = qubo.to_arrays()
        best, count, witness, mask_arr = kernels.gray_scan(
            arr.lin, arr.nbr_ptr, arr.nbr_idx, arr.nbr_coef, arr.offset, bool(enumerate_all)
        )
        masks = [int(m) for m in mask_arr] if enumerate_all else [witness]
    elapsed = time.perf_counter() - start
    optima = [_mask_to_assignment(m, qubo.variables) for m in masks]
    return ExactResult(int(best), optima, True, 1 << n, elapsed, int(count))


def _greedy_descent(arr: QuboArrays) -> tuple[np.ndarray, int]:
    """Deterministic steepest single-flip descent from all-zeros."""
    n = arr.num_variables
    lin = arr.lin.tolist()
    ptr = arr.nbr_ptr.tolist()
    idx = arr.nbr_idx.tolist()
    coef = arr.nbr_coef.tolist()
    x = [0] * n
    field = list(lin)
    energy = arr.offset
    while True:
        best_v, best_delta = -1, 0
        for v in range(n):
            delta = -field[v] if x[v] else field[v]
            if delta < best_delta:
                best_v, best_delta = v, delta
        if best_v < 0:
            break
        v = best_v
        x[v] ^= 1
        energy += best_delta
        sign = 1 if x[v] else -1
        for t in range(ptr[v], ptr[v + 1]):
            field[idx[t]] += sign * coef[t]
    return np.array(x, dtype=np.uint8), energy


def _search_order(arr: QuboArrays) -> np.ndarray:
    """Descending total incident coefficient magnitude, ties to lower id."""
    n = arr.num_variables
    weight = np.abs(arr.lin).copy()
    for v in range(n):
        lo, hi = int(arr.nbr_ptr[v]), int(arr.nbr_ptr[v + 1])
        weight[v] += np.abs(arr.nbr_coef[lo:hi]).sum()
    return np.lexsort((np.arange(n), -weight)).astype(np.int32)


def branch_and_bound(qubo: Qubo, time_limit: float = 60.0) -> ExactResult:
    """Depth-first branch and bound with a term-wise admissible bound.

    Variables are fixed in descending order of total incident coefficient
    magnitude, the 1-branch before the 0-branch; the initial incumbent is a
    greedy steepest-descent state.  ``proved`` is True iff the search tree
    was exhausted within the time limit.
    """
    start = time.perf_counter()
    n = qubo.num_variables
    if n == 0:
        return ExactResult(qubo.offset, [{}], True, 0, time.perf_counter() - start)
    arr = qubo.to_arrays()
    greedy_x, greedy_e = _greedy_descent(arr)
    if time_limit <= 0:
        return ExactResult(
            greedy_e,
            [_array_to_assignment(greedy_x, qubo.variables)],
            False,
            0,
            time.perf_counter() - start,
        )
    order = _search_order(arr)
    best_e, best_x, proved, nodes = kernels.bnb_search(
        arr.lin, arr.nbr_ptr, arr.nbr_idx, arr.nbr_coef, arr.offset,
        order, greedy_x, greedy_e, float(time_limit),
    )
    return ExactResult(
        int(best_e),
        [_array_to_assignment(best_x, qubo.variables)],
        bool(proved),
        int(nodes),
        time.perf_counter() - start,
    )


def count_ground_states(qubo: Qubo, max_variables: int = BRUTE_FORCE_CAP) -> int:
    """Number of minimizers, by exhaustive scan."""
    return brute_force(qubo, enumerate_all=False, max_variables=max_variables).num_optima
