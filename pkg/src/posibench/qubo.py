"""Exact fixed-point QUBO algebra.

Every coefficient is an integer number of *milliunits* (thousandths of the
nominal coefficient unit), so the whole pipeline — coefficient grids with
step 0.1, posiform penalties of 1, scale factors 0.1 and 0.01 — stays in
exact integer arithmetic and energy comparisons never need a tolerance.

An energy of -1.234 units is the integer -1234 throughout this package.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .graphs import Graph
from .rng import Stream

MILLI = 1000

Assignment = dict[int, int]


class QuboError(ValueError):
    pass


def format_milli(value: int) -> str:
    """Render integer milliunits as a decimal string with 3 fractional digits."""
    sign = "-" if value < 0 else ""
    units, frac = divmod(abs(value), MILLI)
    return f"{sign}{units}.{frac:03d}"


def parse_milli(text: str) -> int:
    """Parse a decimal string into integer milliunits, exactly."""
    text = text.strip()
    sign = 1
    if text.startswith(("-", "+")):
        sign = -1 if text[0] == "-" else 1
        text = text[1:]
    if "." in text:
        units, _, frac = text.partition(".")
        if len(frac) > 3 or not (units + frac).isdigit():
            raise QuboError(f"not a milliunit decimal: {text!r}")
        frac = frac.ljust(3, "0")
    else:
        if not text.isdigit():
            raise QuboError(f"not a milliunit decimal: {text!r}")
        units, frac = text, "000"
    return sign * (int(units) * MILLI + int(frac))


@dataclass(frozen=True)
class CoefficientSet:
    """A discrete pool of allowed coefficients, in milliunits."""

    tag: str
    values: tuple[int, ...]


LIN2 = CoefficientSet("lin2", (-MILLI, MILLI))
LIN20 = CoefficientSet("lin20", tuple(v for v in range(-MILLI, MILLI + 1, 100) if v != 0))

COEFFICIENT_SETS = {cs.tag: cs for cs in (LIN2, LIN20)}


class QuboArrays:
    """Flat CSR view of a Qubo over its canonical variable order.

    The compiled and pure-Python kernels both consume this form.  Each
    quadratic term appears twice in the neighbor arrays (once per endpoint);
    neighbor lists are sorted by variable index.
    """

    __slots__ = ("variables", "lin", "nbr_ptr", "nbr_idx", "nbr_coef", "offset")

    def __init__(self, variables, lin, nbr_ptr, nbr_idx, nbr_coef, offset):
        self.variables = variables
        self.lin = lin
        self.nbr_ptr = nbr_ptr
        self.nbr_idx = nbr_idx
        self.nbr_coef = nbr_coef
        self.offset = offset

    @property
    def num_variables(self) -> int:
        return len(self.variables)


@dataclass(frozen=True)
class Qubo:
    """Sparse quadratic polynomial over binary variables, in milliunits.

    ``variables`` is the canonical (ascending) variable set; zero
    coefficients are never stored; quadratic keys are (i, j) with i < j.
    Instances are immutable values — all operations return new objects.
    """

    variables: tuple[int, ...]
    linear: dict[int, int]
    quadratic: dict[tuple[int, int], int]
    offset: int = 0

    @staticmethod
    def build(
        linear: Mapping[int, int] | None = None,
        quadratic: Mapping[tuple[int, int], int] | None = None,
        offset: int = 0,
        variables: Iterable[int] | None = None,
    ) -> "Qubo":
        """Canonicalize and validate raw term maps.

        Pair keys are reordered to (min, max), zero coefficients dropped,
        and the variable set defaults to the ids appearing in any term.
        """
        seen: set[int] = set()
        lin: dict[int, int] = {}
        for v, c in (linear or {}).items():
            v, c = int(v), int(c)
            seen.add(v)
            if c:
                lin[v] = c
        quad: dict[tuple[int, int], int] = {}
        for (u, v), c in (quadratic or {}).items():
            u, v, c = int(u), int(v), int(c)
            if u == v:
                raise QuboError(f"self-pair ({u},{v}) is not a quadratic term")
            seen.add(u)
            seen.add(v)
            if c == 0:
                continue
            key = (u, v) if u < v else (v, u)
            quad[key] = quad.get(key, 0) + c
        quad = {k: c for k, c in quad.items() if c != 0}
        if variables is None:
            var_tuple = tuple(sorted(seen))
        else:
            var_tuple = tuple(sorted({int(v) for v in variables}))
            missing = seen - set(var_tuple)
            if missing:
                raise QuboError(f"terms reference variables outside the set: {sorted(missing)}")
        if any(v < 0 for v in var_tuple):
            raise QuboError("variable ids must be non-negative")
        return Qubo(var_tuple, lin, quad, int(offset))

    @cached_property
    def by_var(self) -> dict[int, tuple[tuple[int, int], ...]]:
        """Per-variable incident quadratic terms: v -> ((other, coeff), ...)."""
        inc: dict[int, list[tuple[int, int]]] = {v: [] for v in self.variables}
        for (u, v), c in self.quadratic.items():
            inc[u].append((v, c))
            inc[v].append((u, c))
        return {v: tuple(sorted(pairs)) for v, pairs in inc.items()}

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    def to_arrays(self) -> QuboArrays:
        n = len(self.variables)
        index = {v: i for i, v in enumerate(self.variables)}
        lin = np.zeros(n, dtype=np.int64)
        for v, c in self.linear.items():
            lin[index[v]] = c
        counts = np.zeros(n + 1, dtype=np.int64)
        for u, v in self.quadratic:
            counts[index[u] + 1] += 1
            counts[index[v] + 1] += 1
        nbr_ptr = np.cumsum(counts)
        nbr_idx = np.zeros(int(nbr_ptr[-1]), dtype=np.int32)
        nbr_coef = np.zeros(int(nbr_ptr[-1]), dtype=np.int64)
        cursor = nbr_ptr[:-1].copy()
        for (u, v), c in sorted(
            ((index[u], index[v]), c) for (u, v), c in self.quadratic.items()
        ):
            for a, b in ((u, v), (v, u)):
                nbr_idx[cursor[a]] = b
                nbr_coef[cursor[a]] = c
                cursor[a] += 1
        # entries were appended in sorted-pair order, so each list needs one
        # final sort by neighbor index to be canonical
        for i in range(n):
            lo, hi = int(nbr_ptr[i]), int(nbr_ptr[i + 1])
            order = np.argsort(nbr_idx[lo:hi], kind="stable")
            nbr_idx[lo:hi] = nbr_idx[lo:hi][order]
            nbr_coef[lo:hi] = nbr_coef[lo:hi][order]
        return QuboArrays(self.variables, lin, nbr_ptr, nbr_idx, nbr_coef, self.offset)


def _require_total(qubo: Qubo, a: Assignment) -> None:
    for v in qubo.variables:
        if v not in a:
            raise QuboError(f"assignment is missing variable {v}")


def evaluate(qubo: Qubo, a: Assignment) -> int:
    """Exact energy in milliunits."""
    _require_total(qubo, a)
    e = qubo.offset
    for v, c in qubo.linear.items():
        if a[v]:
            e += c
    for (u, v), c in qubo.quadratic.items():
        if a[u] and a[v]:
            e += c
    return e


def delta_flip(qubo: Qubo, a: Assignment, v: int) -> int:
    """Energy change of flipping variable v, from v's incident terms only."""
    if v not in qubo.by_var:
        raise QuboError(f"unknown variable {v}")
    for u, _ in qubo.by_var[v]:
        if u not in a:
            raise QuboError(f"assignment is missing variable {u}")
    if v not in a:
        raise QuboError(f"assignment is missing variable {v}")
    local = qubo.linear.get(v, 0)
    for u, c in qubo.by_var[v]:
        if a[u]:
            local += c
    return -local if a[v] else local


def flip(a: Assignment, v: int) -> Assignment:
    out = dict(a)
    out[v] = 1 - out[v]
    return out


def random_qubo(subgraph: Graph, cset: CoefficientSet, seed: int) -> Qubo:
    """Independent uniform draws from ``cset`` for every node and edge."""
    if not subgraph.nodes:
        raise QuboError("cannot draw a random qubo on an empty graph")
    rng = Stream(seed)
    linear = {v: rng.choice(cset.values) for v in subgraph.nodes}
    quadratic = {e: rng.choice(cset.values) for e in subgraph.sorted_edges}
    return Qubo.build(linear, quadratic, 0, variables=subgraph.nodes)


def scale(qubo: Qubo, factor_milli: int) -> Qubo:
    """Multiply all terms by a milliunit factor; requires exactness."""
    def mul(c: int) -> int:
        prod = c * factor_milli
        if prod % MILLI:
            raise QuboError(
                f"scaling {format_milli(c)} by {format_milli(factor_milli)} "
                "does not land on a milliunit"
            )
        return prod // MILLI

    return Qubo.build(
        {v: mul(c) for v, c in qubo.linear.items()},
        {k: mul(c) for k, c in qubo.quadratic.items()},
        mul(qubo.offset),
        variables=qubo.variables,
    )


def glue(randoms: list[Qubo], posiform: Qubo, alpha_milli: int) -> Qubo:
    """Term-wise sum of disjoint sub-QUBOs with an alpha-scaled posiform."""
    if alpha_milli <= 0:
        raise QuboError("alpha must be positive")
    seen: set[int] = set()
    for r in randoms:
        overlap = seen & set(r.variables)
        if overlap:
            raise QuboError(f"sub-qubos overlap on variables {sorted(overlap)}")
        seen.update(r.variables)

    scaled = scale(posiform, alpha_milli)
    linear: dict[int, int] = dict(scaled.linear)
    quadratic: dict[tuple[int, int], int] = dict(scaled.quadratic)
    offset = scaled.offset
    variables = set(scaled.variables) | seen
    for r in randoms:
        for v, c in r.linear.items():
            linear[v] = linear.get(v, 0) + c
        for k, c in r.quadratic.items():
            quadratic[k] = quadratic.get(k, 0) + c
        offset += r.offset
    return Qubo.build(linear, quadratic, offset, variables=variables)


@dataclass(frozen=True)
class IsingModel:
    """Spin (+1/-1) model in quarter-milliunits, the exact image of a Qubo.

    Quarter-milliunit resolution absorbs the /2 and /4 of the binary-to-spin
    substitution x = (1 + s) / 2 without rounding.
    """

    variables: tuple[int, ...]
    h: dict[int, int]
    j: dict[tuple[int, int], int]
    offset: int = 0


def to_ising(qubo: Qubo) -> IsingModel:
    h: dict[int, int] = {v: 0 for v in qubo.variables}
    j: dict[tuple[int, int], int] = {}
    offset = 4 * qubo.offset
    for v, c in qubo.linear.items():
        h[v] += 2 * c
        offset += 2 * c
    for (u, v), c in qubo.quadratic.items():
        j[(u, v)] = c
        h[u] += c
        h[v] += c
        offset += c
    return IsingModel(
        qubo.variables,
        {v: c for v, c in h.items() if c},
        {k: c for k, c in j.items() if c},
        offset,
    )


def from_ising(model: IsingModel) -> Qubo:
    """Inverse substitution s = 2x - 1; rejects models whose image is not
    exactly representable in milliunits."""
    j_sum: dict[int, int] = {v: 0 for v in model.variables}
    quadratic: dict[tuple[int, int], int] = {}
    for (u, v), c in model.j.items():
        quadratic[(u, v) if u < v else (v, u)] = c
        j_sum[u] += c
        j_sum[v] += c
    linear: dict[int, int] = {}
    for v in model.variables:
        num = 2 * (model.h.get(v, 0) - j_sum[v])
        if num % 4:
            raise QuboError(f"spin model is not milliunit-exact at variable {v}")
        linear[v] = num // 4
    off_num = model.offset - sum(model.h.values()) + sum(model.j.values())
    if off_num % 4:
        raise QuboError("spin model offset is not milliunit-exact")
    return Qubo.build(linear, quadratic, off_num // 4, variables=model.variables)


def ising_energy(model: IsingModel, spins: dict[int, int]) -> int:
    """Energy in quarter-milliunits at a +1/-1 spin state."""
    e = model.offset
    for v, c in model.h.items():
        e += c * spins[v]
    for (u, v), c in model.j.items():
        e += c * spins[u] * spins[v]
    return e


# ---------------------------------------------------------------------------
# Canonical interchange formats


def to_json_dict(qubo: Qubo) -> dict:
    return {
        "variables": list(qubo.variables),
        "linear": {str(v): format_milli(c) for v, c in sorted(qubo.linear.items())},
        "quadratic": [
            [str(u), str(v), format_milli(qubo.quadratic[(u, v)])]
            for u, v in sorted(qubo.quadratic)
        ],
        "offset": format_milli(qubo.offset),
    }


def from_json_dict(data: dict) -> Qubo:
    try:
        variables = [int(v) for v in data["variables"]]
        linear = {int(v): parse_milli(c) for v, c in data["linear"].items()}
        quadratic = {
            (int(u), int(v)): parse_milli(c) for u, v, c in data["quadratic"]
        }
        offset = parse_milli(data["offset"])
    except (KeyError, TypeError) as exc:
        raise QuboError(f"malformed qubo json: {exc}") from exc
    return Qubo.build(linear, quadratic, offset, variables=variables)


def to_coo(qubo: Qubo) -> str:
    """COO text: "i j value" lines, i == j carrying the linear terms.

    The writer is canonical (sorted, fixed precision); the offset rides in a
    leading comment so files stay loss-free.
    """
    lines = [f"# offset {format_milli(qubo.offset)}"]
    lines += [f"# variables {' '.join(str(v) for v in qubo.variables)}"]
    for v, c in sorted(qubo.linear.items()):
        lines.append(f"{v} {v} {format_milli(c)}")
    for (u, v), c in sorted(qubo.quadratic.items()):
        lines.append(f"{u} {v} {format_milli(c)}")
    return "\n".join(lines) + "\n"


def from_coo(text: str) -> Qubo:
    linear: dict[int, int] = {}
    quadratic: dict[tuple[int, int], int] = {}
    offset = 0
    variables: set[int] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("offset"):
                offset = parse_milli(body.split(None, 1)[1])
            elif body.startswith("variables"):
                variables.update(int(t) for t in body.split()[1:])
            continue
        parts = line.split()
        if len(parts) != 3:
            raise QuboError(f"line {lineno}: expected 'i j value', got {raw!r}")
        try:
            u, v, c = int(parts[0]), int(parts[1]), parse_milli(parts[2])
        except ValueError as exc:
            raise QuboError(f"line {lineno}: {exc}") from exc
        if u == v:
            linear[u] = linear.get(u, 0) + c
        else:
            key = (u, v) if u < v else (v, u)
            quadratic[key] = quadratic.get(key, 0) + c
    variables |= set(linear) | {v for k in quadratic for v in k}
    return Qubo.build(linear, quadratic, offset, variables=variables)


def assignment_to_bitstring(a: Assignment, variables: tuple[int, ...]) -> str:
    return "".join("1" if a[v] else "0" for v in variables)


def bitstring_to_assignment(bits: str, variables: tuple[int, ...]) -> Assignment:
    if len(bits) != len(variables):
        raise QuboError(
            f"bitstring length {len(bits)} != variable count {len(variables)}"
        )
    if set(bits) - {"0", "1"}:
        raise QuboError("bitstring must contain only 0 and 1")
    return {v: int(b) for v, b in zip(variables, bits)}
