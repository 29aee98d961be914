#!/usr/bin/env python3
"""Time the compiled kernels against the pure-Python fallback.

Both backends produce bit-identical results (asserted here on every cell);
this script only measures the speed gap.  Run from the repo root:

    python benchmarks/bench_kernels.py
"""

from __future__ import annotations

import time

import numpy as np

from posibench.exact import _greedy_descent, _search_order
from posibench.graphs import _local_csr, chimera_graph
from posibench.kernels import _pure
from posibench.qubo import LIN2, LIN20, random_qubo

try:
    from posibench.kernels import _core
except ImportError:
    raise SystemExit("compiled kernels not built; run `pip install -e . --no-build-isolation`")


def timed(fn, *args, repeat=3):
    best = float("inf")
    result = None
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def equal(a, b):
    if isinstance(a, tuple):
        return all(equal(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    return a == b


def row(name, pure_s, core_s):
    print(f"{name:<28} {pure_s * 1e3:>12.2f} ms {core_s * 1e3:>12.2f} ms {pure_s / core_s:>9.1f}x")


def bench_sa():
    qubo = random_qubo(chimera_graph(4, 4, 4), LIN20, seed=1)
    arr = qubo.to_arrays()
    betas = (np.geomspace(0.1, 10.0, 200) * 0.001).astype(np.float64)
    seeds = np.arange(100, 120, dtype=np.uint64)
    args = (arr.lin, arr.nbr_ptr, arr.nbr_idx, arr.nbr_coef, arr.offset, betas, seeds)
    t_pure, r_pure = timed(_pure.sa_sample, *args, repeat=1)
    t_core, r_core = timed(_core.sa_sample, *args)
    assert equal(r_pure, r_core)
    row("sa_sample (256v, 200 sweeps)", t_pure, t_core)


def bench_gray():
    qubo = random_qubo(chimera_graph(1, 3, 3), LIN2, seed=2)  # 18 variables
    arr = qubo.to_arrays()
    args = (arr.lin, arr.nbr_ptr, arr.nbr_idx, arr.nbr_coef, arr.offset, False)
    t_pure, r_pure = timed(_pure.gray_scan, *args, repeat=1)
    t_core, r_core = timed(_core.gray_scan, *args)
    assert r_pure[:3] == r_core[:3]
    row("gray_scan (2^18 states)", t_pure, t_core)


def bench_bnb():
    qubo = random_qubo(chimera_graph(2, 2, 3), LIN2, seed=3)  # 24 variables
    arr = qubo.to_arrays()
    order = _search_order(arr)
    greedy_x, greedy_e = _greedy_descent(arr)
    args = (arr.lin, arr.nbr_ptr, arr.nbr_idx, arr.nbr_coef, arr.offset, order, greedy_x, greedy_e, 600.0)
    t_pure, r_pure = timed(_pure.bnb_search, *args, repeat=1)
    t_core, r_core = timed(_core.bnb_search, *args)
    assert r_pure[0] == r_core[0] and r_pure[3] == r_core[3]
    row(f"bnb_search (24v, {r_core[3]} nodes)", t_pure, t_core)


def bench_kl():
    graph = chimera_graph(6, 6, 4)  # 288 nodes
    nodes = list(graph.nodes)
    ptr, idx = _local_csr(graph, nodes)
    side = np.zeros(len(nodes), dtype=np.uint8)
    side[len(nodes) // 2:] = 1

    def run(impl):
        s = side.copy()
        return impl.kl_pass(ptr, idx, s)

    t_pure, r_pure = timed(run, _pure, repeat=1)
    t_core, r_core = timed(run, _core)
    assert equal(r_pure, r_core)
    row("kl_pass (288v, one pass)", t_pure, t_core)


def main():
    print(f"{'kernel':<28} {'pure-python':>15} {'cython':>15} {'speedup':>9}")
    bench_sa()
    bench_gray()
    bench_bnb()
    bench_kl()


if __name__ == "__main__":
    main()
