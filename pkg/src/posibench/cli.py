"""Command-line surface: generate ensembles, solve, verify, benchmark, report.

Every command that produces files writes them atomically and drops a
manifest listing parameters, master seed, and outputs.  Artifact files are
byte-identical across re-runs with the same inputs and seeds (the manifest
itself carries a timestamp and is not an artifact).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from pathlib import Path

from . import __version__, kernels, metrics, sa
from .exact import branch_and_bound, brute_force
from .graphs import Graph, chimera_graph, load_edge_list
from .planting import (
    PlantingError,
    build_planted_instance,
    dumps_instance,
    loads_instance,
)
from .qubo import (
    COEFFICIENT_SETS,
    delta_flip,
    evaluate,
    format_milli,
    from_json_dict,
    parse_milli,
)
from .rng import derive_seed

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class CliError(Exception):
    pass


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_manifest(out_dir: Path, command: str, params: dict, master_seed, outputs) -> None:
    manifest = {
        "command": command,
        "params": params,
        "master_seed": master_seed,
        "outputs": sorted(str(p) for p in outputs),
        "tool_version": __version__,
        "kernel_backend": kernels.BACKEND,
        "created_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    _write_atomic(out_dir / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def load_topology(spec: str) -> tuple[Graph, str]:
    """Parse a topology spec: ``chimera:m,n,t`` or ``file:<edge-list path>``."""
    kind, _, arg = spec.partition(":")
    if kind == "chimera":
        try:
            m, n, t = (int(x) for x in arg.split(","))
        except ValueError:
            raise CliError(f"bad chimera spec {spec!r}; expected chimera:m,n,t") from None
        return chimera_graph(m, n, t), spec
    if kind == "file":
        path = Path(arg)
        if not path.exists():
            raise CliError(f"topology file not found: {path}")
        return load_edge_list(path.read_text()), f"file:{path.name}"
    raise CliError(f"unknown topology kind {kind!r}; use chimera:... or file:...")


def _parse_sweeps(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise CliError(f"bad sweeps grid {text!r}") from None
    if not values or any(v < 1 for v in values):
        raise CliError("sweeps grid must be positive integers")
    return values


def _load_instances(instances_dir: Path):
    paths = sorted(p for p in instances_dir.glob("*.json") if p.name != "manifest.json")
    if not paths:
        raise CliError(f"no instance files in {instances_dir}")
    return [(p.stem, loads_instance(p.read_text())) for p in paths]


# ---------------------------------------------------------------------------
# Commands


def cmd_generate(args) -> int:
    graph, topology_id = load_topology(args.topology)
    cset = COEFFICIENT_SETS[args.cset]
    alpha = parse_milli(args.alpha)
    out_dir = Path(args.out)
    outputs = []
    errors = []
    for i in range(args.count):
        instance_seed = derive_seed(args.seed, "INSTANCE", i)
        name = f"instance_{i:04d}.json"
        try:
            inst = build_planted_instance(
                graph,
                max_part_size=args.max_part_size,
                cset=cset,
                alpha_milli=alpha,
                master_seed=instance_seed,
                batch_size=args.batch_size,
                sub_solver_limit=args.sub_solver_limit,
                topology_id=topology_id,
            )
        except PlantingError as exc:
            errors.append({"instance": name, "error": str(exc)})
            print(f"FAIL {name}: {exc}", file=sys.stderr)
            continue
        if not inst.certified:
            errors.append({"instance": name, "error": "uncertified", "certification": inst.certification})
            print(f"FAIL {name}: uncertified ({inst.certification})", file=sys.stderr)
            continue
        path = out_dir / name
        _write_atomic(path, dumps_instance(inst))
        outputs.append(path)
        print(f"wrote {path}")
    params = {
        "topology": args.topology,
        "count": args.count,
        "max_part_size": args.max_part_size,
        "cset": args.cset,
        "alpha": args.alpha,
        "batch_size": args.batch_size,
        "sub_solver_limit": args.sub_solver_limit,
        "errors": errors,
    }
    _write_manifest(out_dir, "generate", params, args.seed, outputs)
    print(f"generated {len(outputs)}/{args.count} certified instances in {out_dir}")
    return EXIT_FAILURE if errors else EXIT_OK


def cmd_solve_sa(args) -> int:
    path = Path(args.instance)
    inst = loads_instance(path.read_text())
    sweeps = _parse_sweeps(args.sweeps)
    beta_min, beta_max = sa.default_beta_range(inst.qubo)
    out_dir = Path(args.out)
    outputs = []
    for s in sweeps:
        cfg = sa.SaConfig(
            num_sweeps=s,
            num_reads=args.reads,
            beta_min=beta_min,
            beta_max=beta_max,
            seed=derive_seed(args.seed, "SWEEPS", s),
        )
        samples = sa.sample(inst.qubo, cfg)
        stem = f"{path.stem}_sweeps{s}"
        csv_path = out_dir / f"{stem}.csv"
        _write_atomic(csv_path, sa.samples_to_csv(samples))
        meta_path = out_dir / f"{stem}.meta.json"
        _write_atomic(
            meta_path,
            json.dumps(sa.samples_metadata(samples), indent=2, sort_keys=True) + "\n",
        )
        outputs.append(csv_path)
        rate = sa.ground_state_rate(samples, inst.planted_bitstring)
        print(f"{stem}: ground-state rate {rate:.3f}, best {format_milli(samples.best_energy())}")
    params = {"instance": str(path), "sweeps": sweeps, "reads": args.reads}
    _write_manifest(out_dir, "solve-sa", params, args.seed, outputs)
    return EXIT_OK


def cmd_solve_exact(args) -> int:
    data = json.loads(Path(args.qubo).read_text())
    qubo = from_json_dict(data["qubo"] if "qubo" in data else data)
    result = branch_and_bound(qubo, time_limit=args.time_limit)
    payload = {
        "optimum_energy": format_milli(result.optimum_energy),
        "witness_bitstring": "".join(
            "1" if result.witness()[v] else "0" for v in qubo.variables
        ),
        "proved": result.proved,
        "nodes_explored": result.nodes_explored,
        "wall_time_s": result.wall_time,
    }
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        _write_atomic(Path(args.out), text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = loads_instance(Path(args.instance).read_text())
    planted_e = evaluate(inst.qubo, inst.planted)
    if planted_e != inst.planted_energy:
        print(
            f"FAIL: stored planted_energy {format_milli(inst.planted_energy)} "
            f"!= evaluated {format_milli(planted_e)}"
        )
        return EXIT_FAILURE
    if args.mode == "flip-scan":
        for v in inst.qubo.variables:
            d = delta_flip(inst.qubo, inst.planted, v)
            if d <= 0:
                print(f"FAIL: flipping variable {v} changes energy by {format_milli(d)}")
                return EXIT_FAILURE
        print(f"PASS flip-scan: all {inst.qubo.num_variables} single-flip moves strictly uphill")
        return EXIT_OK
    result = brute_force(inst.qubo, enumerate_all=False)
    if result.num_optima != 1 or result.optima[0] != inst.planted:
        witness = result.optima[0]
        bits = "".join("1" if witness[v] else "0" for v in inst.qubo.variables)
        print(
            f"FAIL brute-force: {result.num_optima} ground state(s) at "
            f"{format_milli(result.optimum_energy)}; witness {bits}"
        )
        return EXIT_FAILURE
    print("PASS brute-force: unique ground state equals the planted bitstring")
    return EXIT_OK


def cmd_bench(args) -> int:
    instances = _load_instances(Path(args.instances))
    sweeps = _parse_sweeps(args.sweeps)
    out_dir = Path(args.out)
    records: list[metrics.BenchRecord] = []
    for instance_id, inst in instances:
        beta_min, beta_max = sa.default_beta_range(inst.qubo)
        grid = [
            sa.SaConfig(
                num_sweeps=s,
                num_reads=args.reads,
                beta_min=beta_min,
                beta_max=beta_max,
                seed=derive_seed(args.seed, instance_id, s),
            )
            for s in sweeps
        ]
        if args.exact_time_limit > 0:
            grid.append(metrics.ExactConfig(time_limit=args.exact_time_limit))
        records.extend(metrics.run_sweep([(instance_id, inst)], grid))
    csv_path = out_dir / "records.csv"
    _write_atomic(csv_path, metrics.records_to_csv(records))
    summary_path = out_dir / "summary.json"
    _write_atomic(
        summary_path,
        json.dumps(metrics.summarize(records), indent=2, sort_keys=True) + "\n",
    )
    params = {
        "instances": str(args.instances),
        "sweeps": sweeps,
        "reads": args.reads,
        "exact_time_limit": args.exact_time_limit,
    }
    _write_manifest(out_dir, "bench", params, args.seed, [csv_path, summary_path])
    print(f"wrote {csv_path} and {summary_path}")
    return EXIT_OK


def cmd_report(args) -> int:
    results_dir = Path(args.results)
    csv_paths = sorted(results_dir.glob("*.csv"))
    if not csv_paths:
        raise CliError(f"no records CSV found in {results_dir}")
    records = []
    for p in csv_paths:
        records.extend(metrics.records_from_csv(p.read_text()))
    summary_path = results_dir / "summary.json"
    _write_atomic(
        summary_path,
        json.dumps(metrics.summarize(records), indent=2, sort_keys=True) + "\n",
    )
    print(f"wrote {summary_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="posibench",
        description="Generate, solve, verify, and benchmark planted-optimum QUBOs.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate certified planted instances")
    p.add_argument("--topology", required=True, help="chimera:m,n,t or file:<edge list>")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--max-part-size", type=int, default=50)
    p.add_argument("--cset", choices=sorted(COEFFICIENT_SETS), default="lin2")
    p.add_argument("--alpha", default="0.1", help="posiform scale factor (decimal)")
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--sub-solver-limit", type=float, default=60.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve-sa", help="sample an instance with simulated annealing")
    p.add_argument("--instance", required=True)
    p.add_argument("--sweeps", default="1,10,100,1000", help="comma-separated grid")
    p.add_argument("--reads", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_solve_sa)

    p = sub.add_parser("solve-exact", help="solve a QUBO JSON file exactly")
    p.add_argument("--qubo", required=True, help="qubo json or instance json")
    p.add_argument("--time-limit", type=float, default=60.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_solve_exact)

    p = sub.add_parser("verify", help="check an instance's planted optimum")
    p.add_argument("--instance", required=True)
    p.add_argument("--mode", choices=["flip-scan", "brute-force"], default="flip-scan")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="run the SA grid over an instance directory")
    p.add_argument("--instances", required=True)
    p.add_argument("--sweeps", default="1,10,100,1000,10000")
    p.add_argument("--reads", type=int, default=100)
    p.add_argument("--exact-time-limit", type=float, default=0.0, help="add an exact-solver cell when > 0")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="summarize existing records CSVs")
    p.add_argument("--results", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (PlantingError, metrics.EnergyUndercutError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except (CliError, FileNotFoundError, ValueError) as exc:
        # covers malformed files, bad specs, bad parameters
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
