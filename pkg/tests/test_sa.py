import math
import random

import pytest

from oracles import min_flip_magnitude_direct, random_test_qubo
from posibench import sa
from posibench.graphs import chimera_graph
from posibench.planting import build_planted_instance
from posibench.qubo import LIN2, Qubo, evaluate, random_qubo, scale
from posibench.sa import (
    SaConfig,
    SaError,
    beta_schedule,
    default_beta_range,
    sample,
)


def test_beta_range_single_variable():
    q = Qubo.build({1: -1000})
    beta_min, beta_max = default_beta_range(q)
    assert beta_min == pytest.approx(math.log(2), rel=1e-12)
    assert beta_max == pytest.approx(math.log(1000), rel=1e-12)


def test_beta_range_scales_inversely_with_coefficients():
    rnd = random.Random(1)
    q = random_test_qubo(rnd, 8, density=0.4, scale=100)
    q10 = scale(q, 10_000)  # every coefficient times 10
    b1 = default_beta_range(q)
    b10 = default_beta_range(q10)
    assert b10[0] == pytest.approx(b1[0] / 10, rel=1e-12)
    assert b10[1] == pytest.approx(b1[1] / 10, rel=1e-12)


def test_beta_range_rejects_empty():
    with pytest.raises(SaError):
        default_beta_range(Qubo.build({}, {}, offset=3, variables=[1]))


def test_min_flip_magnitude_matches_subset_enumeration():
    rnd = random.Random(2)
    for _ in range(400):
        lin_v = rnd.choice([0, rnd.randint(-2000, 2000)])
        coefs = [c for c in (rnd.randint(-1500, 1500) for _ in range(rnd.randint(0, 7))) if c]
        expect = min_flip_magnitude_direct(lin_v, coefs)
        got = sa._min_nonzero_flip_magnitude(lin_v, coefs)
        assert got == expect, (lin_v, coefs)


def test_beta_range_against_direct_oracle():
    rnd = random.Random(3)
    for _ in range(25):
        q = random_test_qubo(rnd, rnd.randint(1, 7), density=0.6)
        if not q.linear and not q.quadratic:
            continue
        d_max = 0
        d_min = None
        for v in q.variables:
            lin_v = q.linear.get(v, 0)
            coefs = [c for _, c in q.by_var[v]]
            if lin_v == 0 and not coefs:
                continue
            d_max = max(d_max, abs(lin_v) + sum(abs(c) for c in coefs))
            m = min_flip_magnitude_direct(lin_v, coefs)
            if m is not None and (d_min is None or m < d_min):
                d_min = m
        beta_min, beta_max = default_beta_range(q)
        assert beta_min == pytest.approx(math.log(2) / (d_max / 1000), rel=1e-12)
        assert beta_max == pytest.approx(math.log(1000) / (d_min / 1000), rel=1e-12)


def test_small_alpha_widens_the_cold_end():
    # posiform granularity: with alpha = 0.01 some flip changes energy by
    # at most 0.01, so the cold endpoint reaches ln(1000)/0.01
    inst = build_planted_instance(
        chimera_graph(1, 1, 4), 4, LIN2, alpha_milli=10, master_seed=202, topology_id="t"
    )
    _, beta_max = default_beta_range(inst.qubo)
    assert beta_max >= math.log(1000) / 0.01 - 1e-9


def test_beta_schedule_shapes():
    cfg = SaConfig(num_sweeps=1, num_reads=1, beta_min=0.5, beta_max=5.0, seed=0)
    assert list(beta_schedule(cfg)) == [0.5]
    cfg = SaConfig(num_sweeps=64, num_reads=1, beta_min=0.5, beta_max=5.0, seed=0)
    sched = beta_schedule(cfg)
    assert sched[0] == pytest.approx(0.5) and sched[-1] == pytest.approx(5.0)
    ratios = sched[1:] / sched[:-1]
    assert ratios.max() - ratios.min() < 1e-9  # geometric


def test_config_validation():
    with pytest.raises(SaError):
        SaConfig(num_sweeps=0, num_reads=1, beta_min=0.1, beta_max=1.0, seed=0)
    with pytest.raises(SaError):
        SaConfig(num_sweeps=1, num_reads=1, beta_min=1.0, beta_max=0.5, seed=0)


def test_unfrustrated_instance_always_reaches_all_ones():
    n = 16
    q = Qubo.build({v: -1000 for v in range(n)})
    beta_min, beta_max = default_beta_range(q)
    cfg = SaConfig(num_sweeps=100, num_reads=100, beta_min=beta_min, beta_max=beta_max, seed=7)
    result = sample(q, cfg)
    optimal = sum(occ for bits, e, occ in result.records if e == -1000 * n)
    assert optimal >= 99
    assert result.num_reads == 100


def test_sample_deterministic_and_energies_exact():
    g = chimera_graph(1, 1, 3)
    q = random_qubo(g, LIN2, seed=5)
    beta_min, beta_max = default_beta_range(q)
    cfg = SaConfig(num_sweeps=30, num_reads=40, beta_min=beta_min, beta_max=beta_max, seed=123)
    s1 = sample(q, cfg)
    s2 = sample(q, cfg)
    assert s1.records == s2.records
    assert sum(occ for _, _, occ in s1.records) == 40
    for bits, energy, _ in s1.records:
        a = {v: int(b) for v, b in zip(q.variables, bits)}
        assert evaluate(q, a) == energy


def test_one_sweep_is_nearly_hopeless_on_a_hard_instance():
    inst = build_planted_instance(
        chimera_graph(2, 2, 3), 12, LIN2, alpha_milli=10, master_seed=31, topology_id="t"
    )
    assert inst.certified
    beta_min, beta_max = default_beta_range(inst.qubo)
    lo = sample(inst.qubo, SaConfig(1, 200, beta_min, beta_max, seed=1))
    hi = sample(inst.qubo, SaConfig(1000, 200, beta_min, beta_max, seed=1))
    planted = inst.planted_bitstring
    rate = lambda s: sum(o for b, _, o in s.records if b == planted) / 200
    assert rate(lo) < 0.2
    assert rate(lo) <= rate(hi)


def test_samples_csv_format():
    q = Qubo.build({0: -1000, 1: -1000})
    cfg = SaConfig(num_sweeps=50, num_reads=10, beta_min=0.5, beta_max=7.0, seed=2)
    s = sample(q, cfg)
    text = sa.samples_to_csv(s)
    lines = text.strip().split("\n")
    assert lines[0] == "bitstring,energy,occurrences"
    bits, energy, occ = lines[1].split(",")
    assert set(bits) <= {"0", "1"} and len(bits) == 2
    assert "." in energy and len(energy.split(".")[1]) == 3
