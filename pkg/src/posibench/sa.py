"""Simulated annealing sampler: geometric inverse-temperature schedule and
fixed-order Metropolis sweeps, deterministic per seed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .qubo import Qubo, format_milli
from .rng import derive_seed


class SaError(ValueError):
    pass


@dataclass(frozen=True)
class SaConfig:
    num_sweeps: int
    num_reads: int
    beta_min: float
    beta_max: float
    seed: int

    def __post_init__(self):
        if self.num_sweeps < 1 or self.num_reads < 1:
            raise SaError("num_sweeps and num_reads must be >= 1")
        if not (0 < self.beta_min < self.beta_max):
            raise SaError("need 0 < beta_min < beta_max")

    def as_dict(self) -> dict:
        return {
            "num_sweeps": self.num_sweeps,
            "num_reads": self.num_reads,
            "beta_min": self.beta_min,
            "beta_max": self.beta_max,
            "seed": self.seed,
        }


@dataclass
class SampleSet:
    """Deduplicated reads in first-appearance order (by read index)."""

    records: list[tuple[str, int, int]]  # bitstring, energy (milli), occurrences
    config: SaConfig
    wall_time_per_read: float
    variables: tuple[int, ...]

    @property
    def num_reads(self) -> int:
        return sum(occ for _, _, occ in self.records)

    def best_energy(self) -> int:
        return min(e for _, e, _ in self.records)


def _min_nonzero_flip_magnitude(lin_v: int, coefs) -> int | None:
    """Smallest nonzero |lin_v + subset-sum(coefs)| over all neighbor states.

    Bitset subset-sum: bit p means some neighbor subset reaches sum p + neg,
    where neg is the total of the negative coefficients.
    """
    neg = sum(c for c in coefs if c < 0)
    width = sum(abs(c) for c in coefs)
    bits = 1 << (-neg)
    for c in coefs:
        if c > 0:
            bits |= bits << c
        else:
            bits |= bits >> (-c)
    target = -lin_v - neg  # bit index where delta would be exactly 0
    best = None
    shift = max(target + 1, 0)
    above = bits >> shift
    if above:
        p = (above & -above).bit_length() - 1 + shift
        best = p - target
    if target >= 1:
        below = bits & ((1 << min(target, width + 1)) - 1)
        if below:
            d = target - (below.bit_length() - 1)
            if best is None or d < best:
                best = d
    return best


def default_beta_range(qubo: Qubo) -> tuple[float, float]:
    """Schedule endpoints from single-flip energy-change bounds.

    beta_min = ln(2) / D_max with D_max the largest per-variable bound
    (|linear| plus the incident quadratic magnitudes), so the hottest sweep
    accepts the worst uphill move with probability ~1/2.  beta_max =
    ln(1000) / D_min with D_min the smallest nonzero single-flip magnitude
    attainable anywhere, so the coldest sweep accepts the gentlest uphill
    move with probability 1/1000.
    """
    if not qubo.linear and not qubo.quadratic:
        raise SaError("beta range undefined for a qubo with no terms")
    d_max = 0
    d_min = None
    for v in qubo.variables:
        lin_v = qubo.linear.get(v, 0)
        coefs = [c for _, c in qubo.by_var[v]]
        if lin_v == 0 and not coefs:
            continue
        d_max = max(d_max, abs(lin_v) + sum(abs(c) for c in coefs))
        m = _min_nonzero_flip_magnitude(lin_v, coefs)
        if m is not None and (d_min is None or m < d_min):
            d_min = m
    if d_min is None:
        raise SaError("every single-flip energy change is zero")
    return math.log(2) / (d_max / 1000.0), math.log(1000) / (d_min / 1000.0)


def beta_schedule(cfg: SaConfig) -> np.ndarray:
    """Geometric interpolation from beta_min to beta_max; a single sweep
    runs at beta_min."""
    if cfg.num_sweeps == 1:
        return np.array([cfg.beta_min], dtype=np.float64)
    exponents = np.arange(cfg.num_sweeps, dtype=np.float64) / (cfg.num_sweeps - 1)
    return cfg.beta_min * (cfg.beta_max / cfg.beta_min) ** exponents


def sample(qubo: Qubo, cfg: SaConfig) -> SampleSet:
    """One independent annealing run per read, merged by read index.

    Each read starts from a uniform random state drawn from its own derived
    seed and performs ``num_sweeps`` Metropolis sweeps over the variables in
    ascending id order.
    """
    arr = qubo.to_arrays()
    if arr.num_variables == 0:
        raise SaError("cannot sample a qubo with no variables")
    betas_milli = beta_schedule(cfg) * 0.001
    seeds = np.array(
        [derive_seed(cfg.seed, "READ", r) for r in range(cfg.num_reads)],
        dtype=np.uint64,
    )
    start = time.perf_counter()
    states, energies = kernels.sa_sample(
        arr.lin, arr.nbr_ptr, arr.nbr_idx, arr.nbr_coef, arr.offset, betas_milli, seeds
    )
    elapsed = time.perf_counter() - start

    merged: dict[str, list[int]] = {}
    order: list[str] = []
    for r in range(cfg.num_reads):
        bits = "".join("1" if b else "0" for b in states[r])
        slot = merged.get(bits)
        if slot is None:
            merged[bits] = [int(energies[r]), 1]
            order.append(bits)
        else:
            slot[1] += 1
    records = [(bits, merged[bits][0], merged[bits][1]) for bits in order]
    return SampleSet(records, cfg, elapsed / cfg.num_reads, qubo.variables)


def ground_state_rate(samples: SampleSet, planted_bitstring: str) -> float:
    hits = sum(occ for bits, _, occ in samples.records if bits == planted_bitstring)
    return hits / samples.num_reads


def samples_to_csv(samples: SampleSet) -> str:
    lines = ["bitstring,energy,occurrences"]
    for bits, energy, occ in samples.records:
        lines.append(f"{bits},{format_milli(energy)},{occ}")
    return "\n".join(lines) + "\n"


def samples_metadata(samples: SampleSet, backend: str | None = None) -> dict:
    return {
        "config": samples.config.as_dict(),
        "wall_time_per_read_s": samples.wall_time_per_read,
        "variables": list(samples.variables),
        "kernel_backend": backend or kernels.BACKEND,
    }
