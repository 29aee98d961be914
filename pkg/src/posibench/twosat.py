"""2-SAT formulas, a linear-time solver, and posiform penalty compilation.

Formulas hold unit and binary clauses over integer variable ids.  The
solver runs strongly-connected-component analysis on the implication graph;
uniqueness probing re-uses the same graph with per-variable assumption
reachability instead of full re-solves.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple

from .qubo import MILLI, Assignment, Qubo


class TwoSatError(ValueError):
    pass


class Literal(NamedTuple):
    var: int
    positive: bool

    def negated(self) -> "Literal":
        return Literal(self.var, not self.positive)


Clause = tuple[Literal, ...]


class TwoSatFormula:
    """Conjunction of 1- and 2-literal clauses over a fixed variable set.

    Clauses are kept in insertion order with canonical within-clause literal
    order; exact duplicates are skipped silently.
    """

    def __init__(self, variables: Iterable[int]):
        self.variables: tuple[int, ...] = tuple(sorted({int(v) for v in variables}))
        self._var_set = set(self.variables)
        self.clauses: list[Clause] = []
        self._seen: set[Clause] = set()

    def add_clause(self, *literals: Literal) -> bool:
        """Insert a clause; returns False when it is an exact duplicate."""
        if len(literals) not in (1, 2):
            raise TwoSatError(f"clause must have 1 or 2 literals, got {len(literals)}")
        for lit in literals:
            if lit.var not in self._var_set:
                raise TwoSatError(f"literal references undeclared variable {lit.var}")
        if len(literals) == 2:
            if literals[0].var == literals[1].var:
                raise TwoSatError("binary clause literals must use distinct variables")
            literals = tuple(sorted(literals, key=lambda l: (l.var, not l.positive)))
        clause: Clause = tuple(literals)
        if clause in self._seen:
            return False
        self._seen.add(clause)
        self.clauses.append(clause)
        return True

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def satisfied_by(self, a: Assignment) -> bool:
        return all(
            any(bool(a[lit.var]) == lit.positive for lit in clause)
            for clause in self.clauses
        )


def _implication_adjacency(formula: TwoSatFormula):
    """Adjacency over 2n literal nodes: node 2i is variable i positive,
    node 2i+1 its negation."""
    vidx = {v: i for i, v in enumerate(formula.variables)}

    def node(lit: Literal) -> int:
        return 2 * vidx[lit.var] + (0 if lit.positive else 1)

    adj: list[list[int]] = [[] for _ in range(2 * len(formula.variables))]
    for clause in formula.clauses:
        if len(clause) == 1:
            (lit,) = clause
            adj[node(lit.negated())].append(node(lit))
        else:
            l1, l2 = clause
            adj[node(l1.negated())].append(node(l2))
            adj[node(l2.negated())].append(node(l1))
    return adj, vidx


def _tarjan_components(adj: list[list[int]]) -> list[int]:
    """Iterative Tarjan; component ids are assigned in completion order,
    which is reverse topological order of the condensation."""
    n = len(adj)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    comp = [-1] * n
    stack: list[int] = []
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, child_i = work[-1]
            if child_i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            descended = False
            for i in range(child_i, len(adj[v])):
                w = adj[v][i]
                if index[w] == -1:
                    work[-1] = (v, i + 1)
                    work.append((w, 0))
                    descended = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if descended:
                continue
            work.pop()
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return comp


def solve(formula: TwoSatFormula):
    """Returns (satisfiable, witness); the witness is None when unsatisfiable.

    Deterministic: the witness sets a variable true iff its positive
    literal's component completes before its negation's.
    """
    if not formula.variables:
        return True, {}
    adj, vidx = _implication_adjacency(formula)
    comp = _tarjan_components(adj)
    for v, i in vidx.items():
        if comp[2 * i] == comp[2 * i + 1]:
            return False, None
    witness = {v: int(comp[2 * i] < comp[2 * i + 1]) for v, i in vidx.items()}
    return True, witness


def _reaches(adj: list[list[int]], src: int, dst: int) -> bool:
    if src == dst:
        return True
    seen = [False] * len(adj)
    seen[src] = True
    frontier = [src]
    while frontier:
        v = frontier.pop()
        for w in adj[v]:
            if w == dst:
                return True
            if not seen[w]:
                seen[w] = True
                frontier.append(w)
    return False


def unpinned_variables(formula: TwoSatFormula, target: Assignment, candidates=None) -> list[int]:
    """Variables whose flipped-value assumption leaves the formula satisfiable.

    For each candidate v, tests whether the formula plus a unit clause
    forcing v to 1 - target[v] stays satisfiable, via assumption
    reachability on the implication graph (valid because ``target`` itself
    witnesses satisfiability of the base formula).  The result is empty
    exactly when ``target`` is the unique solution.
    """
    adj, vidx = _implication_adjacency(formula)
    pool = formula.variables if candidates is None else candidates
    out = []
    for v in pool:
        i = vidx[v]
        forced = 2 * i + (0 if target[v] == 0 else 1)
        if not _reaches(adj, forced, forced ^ 1):
            out.append(v)
    return out


def is_unique_solution(formula: TwoSatFormula, target: Assignment) -> bool:
    """True iff ``target`` satisfies the formula and every single-variable
    deviation is unsatisfiable."""
    for v in formula.variables:
        if v not in target:
            raise TwoSatError(f"target is missing variable {v}")
    if not formula.satisfied_by(target):
        return False
    return not unpinned_variables(formula, target)


def clause_to_penalty(clause: Clause) -> Qubo:
    """Expand the product of the clause literals' complements.

    Worth 1 unit (1000 milliunits) exactly on the clause's violating
    assignment and 0 on every other assignment of its variables.
    """
    # each literal's complement is affine in its variable: pos -> 1 - x, neg -> x
    factors = [(1, -1) if lit.positive else (0, 1) for lit in clause]
    if len(clause) == 1:
        (c, a) = factors[0]
        v = clause[0].var
        return Qubo.build({v: a * MILLI}, {}, c * MILLI, variables=[v])
    (c1, a1), (c2, a2) = factors
    v1, v2 = clause[0].var, clause[1].var
    return Qubo.build(
        {v1: a1 * c2 * MILLI, v2: a2 * c1 * MILLI},
        {(v1, v2): a1 * a2 * MILLI},
        c1 * c2 * MILLI,
        variables=[v1, v2],
    )


def formula_to_posiform_qubo(formula: TwoSatFormula) -> Qubo:
    """Sum of clause penalties: energy counts violated clauses, so the
    minimum is 0 exactly on the satisfying set."""
    linear: dict[int, int] = {}
    quadratic: dict[tuple[int, int], int] = {}
    offset = 0
    for clause in formula.clauses:
        frag = clause_to_penalty(clause)
        for v, c in frag.linear.items():
            linear[v] = linear.get(v, 0) + c
        for k, c in frag.quadratic.items():
            quadratic[k] = quadratic.get(k, 0) + c
        offset += frag.offset
    return Qubo.build(linear, quadratic, offset, variables=formula.variables)


def to_dimacs(formula: TwoSatFormula) -> str:
    """DIMACS CNF dump (writer only) with variables renumbered 1..n in
    ascending id order."""
    ren = {v: i + 1 for i, v in enumerate(formula.variables)}
    lines = [f"p cnf {len(formula.variables)} {len(formula.clauses)}"]
    for clause in formula.clauses:
        body = " ".join(
            str(ren[lit.var] if lit.positive else -ren[lit.var]) for lit in clause
        )
        lines.append(f"{body} 0")
    return "\n".join(lines) + "\n"
