"""Scoring: success rates, time-to-solution, energy gaps, ensemble sweeps.

Success means sampling the exact planted bitstring.  Every scored sample
set from a certified instance passes through the no-undercut guard: a
single energy below the planted optimum would contradict the uniqueness
construction, so it aborts the run instead of producing a quiet bad row.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
import warnings
from dataclasses import dataclass
from fractions import Fraction

from . import sa
from .exact import branch_and_bound
from .planting import PlantedInstance
from .qubo import format_milli

TTS_CONFIDENCE = 0.01  # miss probability target: expected time to >= 99% hit


class MetricsError(ValueError):
    pass


class EnergyUndercutError(RuntimeError):
    """A solver reported an energy below a certified planted optimum."""


# process-wide tally so a whole test run can assert the invariant never fired
UNDERCUT_VIOLATIONS: list[dict] = []


@dataclass
class BenchRecord:
    instance_id: str
    solver_id: str
    params: dict
    total_samples: int
    success_count: int
    p: Fraction
    t_per_sample: float
    tts: float | None
    best_energy: int
    gap: int


@dataclass(frozen=True)
class ExactConfig:
    """Benchmark cell for the exact solver: one solve counts as one sample."""

    time_limit: float = 60.0


def success_rate(samples: sa.SampleSet, planted_bitstring: str) -> Fraction:
    """Occurrence-weighted share of reads matching the planted bitstring."""
    total = samples.num_reads
    if total == 0:
        raise MetricsError("empty sample set")
    hits = sum(occ for bits, _, occ in samples.records if bits == planted_bitstring)
    return Fraction(hits, total)


def tts(p, t_per_sample: float) -> float | None:
    """Expected time to sample an optimum at least once with 99% confidence.

    Undefined (None) at p = 0; one sample suffices at p = 1.  ``p`` is
    treated as an exact rational so grid values like 99/100 cancel exactly.
    """
    p = Fraction(p)
    if p < 0 or p > 1:
        raise MetricsError(f"p = {p} outside [0, 1]")
    if p == 0:
        return None
    if p == 1:
        return t_per_sample
    return t_per_sample * (math.log(TTS_CONFIDENCE) / math.log(float(1 - p)))


def energy_gap(samples: sa.SampleSet, planted_energy: int) -> int:
    """Best sampled energy minus the planted energy, in milliunits."""
    if not samples.records:
        raise MetricsError("empty sample set")
    return samples.best_energy() - planted_energy


def check_no_undercut(instance_id: str, planted_energy: int, best_energy: int) -> None:
    if best_energy < planted_energy:
        violation = {
            "instance_id": instance_id,
            "planted_energy": planted_energy,
            "reported_energy": best_energy,
        }
        UNDERCUT_VIOLATIONS.append(violation)
        raise EnergyUndercutError(
            f"instance {instance_id}: reported energy {format_milli(best_energy)} "
            f"undercuts planted optimum {format_milli(planted_energy)}"
        )


def score_samples(
    instance_id: str,
    solver_id: str,
    params: dict,
    samples: sa.SampleSet,
    planted_bitstring: str,
    planted_energy: int,
) -> BenchRecord:
    check_no_undercut(instance_id, planted_energy, samples.best_energy())
    p = success_rate(samples, planted_bitstring)
    return BenchRecord(
        instance_id=instance_id,
        solver_id=solver_id,
        params=params,
        total_samples=samples.num_reads,
        success_count=int(p * samples.num_reads),
        p=p,
        t_per_sample=samples.wall_time_per_read,
        tts=tts(p, samples.wall_time_per_read),
        best_energy=samples.best_energy(),
        gap=energy_gap(samples, planted_energy),
    )


def _pooled_record(instance_id: str, records: list[BenchRecord]) -> BenchRecord:
    """Pool every sample across the grid; the per-sample time is the plain
    mean of the per-config times."""
    total = sum(r.total_samples for r in records)
    successes = sum(r.success_count for r in records)
    t_mean = sum(r.t_per_sample for r in records) / len(records)
    p = Fraction(successes, total)
    best = min(r.best_energy for r in records)
    return BenchRecord(
        instance_id=instance_id,
        solver_id="sa-pooled",
        params={"pooled_configs": len(records)},
        total_samples=total,
        success_count=successes,
        p=p,
        t_per_sample=t_mean,
        tts=tts(p, t_mean),
        best_energy=best,
        gap=min(r.gap for r in records),
    )


def run_sweep(instances, grid) -> list[BenchRecord]:
    """Score every (instance, config) cell plus one pooled row per instance.

    ``instances`` is a list of (instance_id, PlantedInstance); uncertified
    instances are skipped with a warning.  Grid entries are SaConfig cells
    or ExactConfig cells; pooled rows aggregate the SA cells only.
    """
    out: list[BenchRecord] = []
    for instance_id, inst in instances:
        if not inst.certified:
            warnings.warn(f"skipping uncertified instance {instance_id}")
            continue
        planted_bits = inst.planted_bitstring
        sa_records: list[BenchRecord] = []
        for cfg in grid:
            if isinstance(cfg, ExactConfig):
                out.append(_run_exact_cell(instance_id, inst, cfg))
                continue
            samples = sa.sample(inst.qubo, cfg)
            record = score_samples(
                instance_id, "sa", cfg.as_dict(), samples, planted_bits, inst.planted_energy
            )
            sa_records.append(record)
            out.append(record)
        if sa_records:
            out.append(_pooled_record(instance_id, sa_records))
    return out


def _run_exact_cell(instance_id: str, inst: PlantedInstance, cfg: ExactConfig) -> BenchRecord:
    result = branch_and_bound(inst.qubo, time_limit=cfg.time_limit)
    check_no_undercut(instance_id, inst.planted_energy, result.optimum_energy)
    hit = int(result.witness() == inst.planted)
    p = Fraction(hit, 1)
    return BenchRecord(
        instance_id=instance_id,
        solver_id="exact-bnb",
        params={"time_limit": cfg.time_limit, "proved": result.proved},
        total_samples=1,
        success_count=hit,
        p=p,
        t_per_sample=result.wall_time,
        tts=tts(p, result.wall_time),
        best_energy=result.optimum_energy,
        gap=result.optimum_energy - inst.planted_energy,
    )


# ---------------------------------------------------------------------------
# Canonical report files

_CSV_HEADER = [
    "instance_id",
    "solver_id",
    "params_json",
    "total_samples",
    "success_count",
    "p",
    "t_per_sample_s",
    "tts_s",
    "best_energy",
    "gap",
]


def records_to_csv(records: list[BenchRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_CSV_HEADER)
    for r in records:
        writer.writerow(
            [
                r.instance_id,
                r.solver_id,
                json.dumps(r.params, sort_keys=True),
                r.total_samples,
                r.success_count,
                repr(float(r.p)),
                repr(r.t_per_sample),
                "" if r.tts is None else repr(r.tts),
                format_milli(r.best_energy),
                format_milli(r.gap),
            ]
        )
    return buf.getvalue()


def records_from_csv(text: str) -> list[BenchRecord]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != _CSV_HEADER:
        raise MetricsError(f"unexpected results header: {header}")
    out = []
    for row in reader:
        total = int(row[3])
        successes = int(row[4])
        out.append(
            BenchRecord(
                instance_id=row[0],
                solver_id=row[1],
                params=json.loads(row[2]),
                total_samples=total,
                success_count=successes,
                p=Fraction(successes, total),
                t_per_sample=float(row[6]),
                tts=None if row[7] == "" else float(row[7]),
                best_energy=round(float(row[8]) * 1000),
                gap=round(float(row[9]) * 1000),
            )
        )
    return out


def summarize(records: list[BenchRecord]) -> dict:
    """Per-(solver, params) ensemble summary: percent of instances solved at
    least once, and min/mean/max TTS over the solved subset."""
    groups: dict[tuple[str, str], list[BenchRecord]] = {}
    for r in records:
        key = (r.solver_id, json.dumps(r.params, sort_keys=True))
        groups.setdefault(key, []).append(r)
    summary = {}
    for (solver_id, params_json), rows in sorted(groups.items()):
        solved = [r for r in rows if r.success_count > 0]
        tts_values = [r.tts for r in solved if r.tts is not None]
        entry = {
            "solver_id": solver_id,
            "params": json.loads(params_json),
            "num_instances": len(rows),
            "percent_solved": 100.0 * len(solved) / len(rows),
            "mean_p": float(sum(float(r.p) for r in rows) / len(rows)),
            "median_p": float(statistics.median(float(r.p) for r in rows)),
            "mean_gap": sum(r.gap for r in rows) / len(rows) / 1000.0,
        }
        if tts_values:
            entry["tts_min"] = min(tts_values)
            entry["tts_mean"] = sum(tts_values) / len(tts_values)
            entry["tts_max"] = max(tts_values)
        summary[f"{solver_id} {params_json}"] = entry
    return summary
