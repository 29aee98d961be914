"""Solution planting: grow a 2-SAT posiform until a target bitstring is its
unique solution, and the end-to-end pipeline that fuses exactly-solved
random sub-QUBOs with that posiform into one certified instance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .exact import BRUTE_FORCE_CAP, branch_and_bound, brute_force
from .graphs import Graph, Partition, induced_subgraph, recursive_bisection
from .qubo import (
    Assignment,
    CoefficientSet,
    Qubo,
    assignment_to_bitstring,
    bitstring_to_assignment,
    delta_flip,
    evaluate,
    format_milli,
    from_json_dict,
    glue,
    parse_milli,
    random_qubo,
    to_json_dict,
)
from .rng import Stream, derive_seed
from .twosat import (
    Literal,
    TwoSatFormula,
    formula_to_posiform_qubo,
    is_unique_solution,
    unpinned_variables,
)

# the four polarity patterns a binary clause can take on an edge
_PATTERNS = ((True, True), (True, False), (False, True), (False, False))


class PlantingError(RuntimeError):
    pass


def sample_clause(graph: Graph, target: Assignment, rng: Stream):
    """Draw a uniform edge, then one of its three target-satisfying
    polarity patterns uniformly."""
    edges = graph.sorted_edges
    if not edges:
        raise PlantingError("clause sampling needs at least one edge")
    u, v = edges[rng.randrange(len(edges))]
    violating = (target[u] == 0, target[v] == 0)
    satisfied = [p for p in _PATTERNS if p != violating]
    pu, pv = satisfied[rng.randrange(3)]
    return Literal(u, pu), Literal(v, pv)


def default_batch_size(graph: Graph) -> int:
    return max(32, -(-graph.num_nodes // 10))


def default_max_clauses(graph: Graph) -> int:
    return 10 * graph.num_edges


def plant_posiform(
    graph: Graph,
    target: Assignment,
    batch_size: int | None = None,
    max_clauses: int | None = None,
    seed: int = 0,
    allow_unit_clauses: bool = True,
) -> TwoSatFormula:
    """Grow clauses in batches until ``target`` is the unique solution.

    Binary clauses live on graph edges only; every sampled clause is
    satisfied by ``target`` by construction.  Isolated nodes are pinned
    with unit clauses (or rejected when ``allow_unit_clauses`` is off).
    Uniqueness is re-checked once per batch; variables already pinned stay
    pinned as clauses accumulate, so each check only probes the remainder.
    """
    for v in graph.nodes:
        if v not in target:
            raise PlantingError(f"target is missing node {v}")
    if batch_size is None:
        batch_size = default_batch_size(graph)
    if max_clauses is None:
        max_clauses = default_max_clauses(graph)
    if batch_size < 1:
        raise PlantingError("batch_size must be >= 1")

    formula = TwoSatFormula(graph.nodes)
    isolated = [v for v in graph.nodes if not graph.adjacency[v]]
    if isolated:
        if not allow_unit_clauses:
            raise PlantingError(
                f"graph has isolated nodes {isolated[:8]} and unit clauses are disabled"
            )
        for v in isolated:
            formula.add_clause(Literal(v, target[v] == 1))

    rng = Stream(seed)
    unpinned = unpinned_variables(formula, target)
    batches = 0
    attempts = 0
    max_attempts = 30 * max(max_clauses, batch_size)
    while unpinned:
        if formula.num_clauses >= max_clauses or attempts >= max_attempts:
            raise PlantingError(
                f"no unique solution after {formula.num_clauses} clauses; "
                f"unpinned variables: {sorted(unpinned)[:16]}"
            )
        added = 0
        while added < batch_size and formula.num_clauses < max_clauses:
            attempts += 1
            if attempts >= max_attempts:
                break
            if formula.add_clause(*sample_clause(graph, target, rng)):
                added += 1
        batches += 1
        unpinned = unpinned_variables(formula, target, candidates=unpinned)

    # stamp how many grow-and-check rounds it took (instance provenance)
    formula.batches_used = batches
    assert is_unique_solution(formula, target)
    return formula


@dataclass
class PlantedInstance:
    """A glued instance with its planted optimum and full provenance."""

    qubo: Qubo
    planted: Assignment
    planted_energy: int
    alpha: int
    cset: str
    partition: Partition
    per_part: list[dict]
    formula_stats: dict
    seeds: dict
    topology_id: str
    certification: dict

    @property
    def certified(self) -> bool:
        return bool(self.certification.get("certified"))

    @property
    def planted_bitstring(self) -> str:
        return assignment_to_bitstring(self.planted, self.qubo.variables)


def _certify(qubo: Qubo, planted: Assignment, all_proved: bool, brute_cap: int) -> dict:
    """Certification scans: per-part proofs, strict 1-flip domination, and
    (at desk scale) a full ground-state count."""
    flip_ok = all(delta_flip(qubo, planted, v) > 0 for v in qubo.variables)
    cert = {
        "sub_solves_proved": all_proved,
        "flip_scan_strict": flip_ok,
        "method": "flip-scan",
        "unique_verified": False,
    }
    if qubo.num_variables <= brute_cap:
        result = brute_force(qubo, enumerate_all=False)
        unique = result.num_optima == 1 and result.optima[0] == planted
        cert["method"] = "brute-force"
        cert["unique_verified"] = bool(unique)
        cert["ground_states"] = result.num_optima
        cert["certified"] = all_proved and flip_ok and unique
    else:
        cert["certified"] = all_proved and flip_ok
    return cert


def build_planted_instance(
    graph: Graph,
    max_part_size: int,
    cset: CoefficientSet,
    alpha_milli: int,
    master_seed: int,
    batch_size: int | None = None,
    max_clauses: int | None = None,
    sub_solver_limit: float = 60.0,
    brute_cap: int = BRUTE_FORCE_CAP,
    topology_id: str = "custom",
) -> PlantedInstance:
    """Run the whole pipeline: partition, draw and exactly solve sub-QUBOs,
    concatenate their optima, plant a posiform on the concatenation, glue.

    The returned instance is certified when every sub-solve was proved
    optimal and the verification scans pass; uncertified instances are
    still returned so callers can report them.
    """
    if not graph.nodes:
        raise PlantingError("cannot build an instance on an empty graph")

    partition_seed = derive_seed(master_seed, "PARTITION")
    partition = recursive_bisection(graph, max_part_size, partition_seed)

    randoms: list[Qubo] = []
    per_part: list[dict] = []
    target: Assignment = {}
    all_proved = True
    sub_seeds = []
    for i, part in enumerate(partition.parts):
        if not part:
            per_part.append({"seed": None, "energy": 0, "proved": True, "size": 0})
            sub_seeds.append(None)
            continue
        sub_seed = derive_seed(master_seed, "SUBQUBO", i)
        sub_seeds.append(sub_seed)
        sub = random_qubo(induced_subgraph(graph, part), cset, sub_seed)
        result = branch_and_bound(sub, time_limit=sub_solver_limit)
        all_proved = all_proved and result.proved
        randoms.append(sub)
        target.update(result.witness())
        per_part.append(
            {
                "seed": sub_seed,
                "energy": result.optimum_energy,
                "proved": result.proved,
                "size": len(part),
            }
        )

    plant_seed = derive_seed(master_seed, "PLANT")
    formula = plant_posiform(
        graph, target, batch_size=batch_size, max_clauses=max_clauses, seed=plant_seed
    )
    posiform = formula_to_posiform_qubo(formula)
    qubo = glue(randoms, posiform, alpha_milli)

    planted_energy = evaluate(qubo, target)
    certification = _certify(qubo, target, all_proved, brute_cap)
    return PlantedInstance(
        qubo=qubo,
        planted=target,
        planted_energy=planted_energy,
        alpha=alpha_milli,
        cset=cset.tag,
        partition=partition,
        per_part=per_part,
        formula_stats={"clauses": formula.num_clauses, "batches": formula.batches_used},
        seeds={
            "master": master_seed,
            "partition": partition_seed,
            "subqubo": sub_seeds,
            "plant": plant_seed,
        },
        topology_id=topology_id,
        certification=certification,
    )


# ---------------------------------------------------------------------------
# Canonical instance files


def instance_to_json_dict(inst: PlantedInstance) -> dict:
    return {
        "format": "posibench-instance-v1",
        "topology_id": inst.topology_id,
        "qubo": to_json_dict(inst.qubo),
        "planted_bitstring": inst.planted_bitstring,
        "planted_energy": format_milli(inst.planted_energy),
        "alpha": format_milli(inst.alpha),
        "cset": inst.cset,
        "partition": [sorted(p) for p in inst.partition.parts],
        "per_part": inst.per_part,
        "formula_stats": inst.formula_stats,
        "seeds": inst.seeds,
        "certification": inst.certification,
    }


def instance_from_json_dict(data: dict) -> PlantedInstance:
    qubo = from_json_dict(data["qubo"])
    planted = bitstring_to_assignment(data["planted_bitstring"], qubo.variables)
    partition = Partition(
        tuple(frozenset(p) for p in data["partition"]), data["seeds"]["partition"]
    )
    return PlantedInstance(
        qubo=qubo,
        planted=planted,
        planted_energy=parse_milli(data["planted_energy"]),
        alpha=parse_milli(data["alpha"]),
        cset=data["cset"],
        partition=partition,
        per_part=data["per_part"],
        formula_stats=data["formula_stats"],
        seeds=data["seeds"],
        topology_id=data["topology_id"],
        certification=data["certification"],
    )


def dumps_instance(inst: PlantedInstance) -> str:
    return json.dumps(instance_to_json_dict(inst), indent=2, sort_keys=True) + "\n"


def loads_instance(text: str) -> PlantedInstance:
    return instance_from_json_dict(json.loads(text))
