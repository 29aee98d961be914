"""Graph representation, topology ingestion, and recursive balanced bisection.

Graphs are immutable: a canonical ascending node tuple plus a set of
(min, max) edge pairs.  The node order is load-bearing — it defines the
bit order of every assignment bitstring downstream.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .rng import Stream, derive_seed


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    nodes: tuple[int, ...]
    edges: frozenset[tuple[int, int]]

    @staticmethod
    def from_edges(edges, nodes=()) -> "Graph":
        """Canonicalize: dedupe edges, order pairs, collect endpoint nodes."""
        node_set = {int(v) for v in nodes}
        edge_set: set[tuple[int, int]] = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            if u < 0 or v < 0:
                raise GraphError(f"negative node id in edge ({u}, {v})")
            edge_set.add((u, v) if u < v else (v, u))
            node_set.add(u)
            node_set.add(v)
        if any(v < 0 for v in node_set):
            raise GraphError("node ids must be non-negative")
        return Graph(tuple(sorted(node_set)), frozenset(edge_set))

    @cached_property
    def adjacency(self) -> dict[int, tuple[int, ...]]:
        adj: dict[int, list[int]] = {v: [] for v in self.nodes}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return {v: tuple(sorted(nbrs)) for v, nbrs in adj.items()}

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def sorted_edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.edges))

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])


@dataclass(frozen=True)
class Partition:
    """Disjoint parts covering a graph, produced by recursive bisection."""

    parts: tuple[frozenset[int], ...]
    seed: int

    def __post_init__(self):
        count = len(self.parts)
        if count & (count - 1):
            raise GraphError(f"part count {count} is not a power of 2")
        total = sum(len(p) for p in self.parts)
        if total != len(frozenset().union(*self.parts)):
            raise GraphError("parts are not pairwise disjoint")
        sizes = [len(p) for p in self.parts]
        if max(sizes) - min(sizes) > 1:
            raise GraphError(f"part sizes {sorted(set(sizes))} spread exceeds 1")

    def sizes(self) -> list[int]:
        return [len(p) for p in self.parts]


def load_edge_list(text: str) -> Graph:
    """Parse edge-list text: "u v" lines, "#" comments, blank lines ignored.

    A bare "u" line declares an isolated node, so that writing and re-reading
    a graph is loss-free.  Duplicate lines collapse.
    """
    edges: list[tuple[int, int]] = []
    nodes: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            ids = [int(p) for p in parts]
        except ValueError:
            raise GraphError(f"line {lineno}: malformed edge line {raw!r}") from None
        if any(i < 0 for i in ids):
            raise GraphError(f"line {lineno}: negative node id in {raw!r}")
        if len(ids) == 1:
            nodes.append(ids[0])
        elif len(ids) == 2:
            if ids[0] == ids[1]:
                raise GraphError(f"line {lineno}: self-loop at node {ids[0]}")
            edges.append((ids[0], ids[1]))
        else:
            raise GraphError(f"line {lineno}: expected 'u v', got {raw!r}")
    return Graph.from_edges(edges, nodes)


def save_edge_list(graph: Graph) -> str:
    """Canonical writer: ascending (min, max) pairs sorted lexicographically,
    then any isolated nodes as bare lines."""
    lines = [f"{u} {v}" for u, v in graph.sorted_edges]
    lines += [str(v) for v in graph.nodes if not graph.adjacency[v]]
    return "\n".join(lines) + ("\n" if lines else "")


def chimera_graph(m: int, n: int, t: int) -> Graph:
    """Chimera lattice: an m x n grid of complete-bipartite K_{t,t} cells.

    Side-0 shores couple vertically between row-adjacent cells, side-1
    shores horizontally between column-adjacent cells.
    """
    if m < 1 or n < 1 or t < 1:
        raise GraphError("chimera parameters must be >= 1")

    def node(i, j, s, k):
        return ((i * n + j) * 2 + s) * t + k

    edges = []
    for i in range(m):
        for j in range(n):
            for a in range(t):
                for b in range(t):
                    edges.append((node(i, j, 0, a), node(i, j, 1, b)))
            if i + 1 < m:
                for k in range(t):
                    edges.append((node(i, j, 0, k), node(i + 1, j, 0, k)))
            if j + 1 < n:
                for k in range(t):
                    edges.append((node(i, j, 1, k), node(i, j + 1, 1, k)))
    return Graph.from_edges(edges, range(2 * t * m * n))


def induced_subgraph(graph: Graph, nodes) -> Graph:
    keep = {int(v) for v in nodes}
    unknown = keep - set(graph.nodes)
    if unknown:
        raise GraphError(f"unknown node ids: {sorted(unknown)}")
    edges = [(u, v) for u, v in graph.edges if u in keep and v in keep]
    return Graph.from_edges(edges, keep)


def _local_csr(graph: Graph, nodes: list[int]):
    """CSR adjacency of the induced subgraph, over local indices."""
    index = {v: i for i, v in enumerate(nodes)}
    keep = set(nodes)
    counts = np.zeros(len(nodes) + 1, dtype=np.int64)
    pairs = []
    for u, v in graph.edges:
        if u in keep and v in keep:
            iu, iv = index[u], index[v]
            pairs.append((iu, iv))
            counts[iu + 1] += 1
            counts[iv + 1] += 1
    ptr = np.cumsum(counts)
    idx = np.zeros(int(ptr[-1]), dtype=np.int32)
    cursor = ptr[:-1].copy()
    for iu, iv in pairs:
        idx[cursor[iu]] = iv
        cursor[iu] += 1
        idx[cursor[iv]] = iu
        cursor[iv] += 1
    return ptr, idx


def kl_bisect(graph: Graph, node_subset, seed: int, max_passes: int = 10):
    """Balanced two-way split of ``node_subset`` minimizing internal cut.

    Classic pass structure: starting from a seeded random balanced split,
    each pass tentatively swaps locked max-gain pairs across the cut, then
    commits the best prefix of the swap sequence; passes repeat until no
    pass improves the cut (or ``max_passes`` is hit).  Ties break toward
    lower node ids, so the result is a pure function of the inputs.

    Only edges internal to the subset count toward the cut; disconnected
    subsets are split like any other.

    Returns two frozensets of sizes (ceil(k/2), floor(k/2)).
    """
    nodes = sorted(int(v) for v in node_subset)
    k = len(nodes)
    if k < 2:
        raise GraphError("bisection needs at least 2 nodes")
    unknown = set(nodes) - set(graph.nodes)
    if unknown:
        raise GraphError(f"unknown node ids: {sorted(unknown)}")

    ptr, idx = _local_csr(graph, nodes)
    rng = Stream(seed)
    order = list(range(k))
    rng.shuffle(order)
    side = np.ones(k, dtype=np.uint8)
    side[order[: (k + 1) // 2]] = 0

    for _ in range(max_passes):
        moves_a, moves_b, gains = kernels.kl_pass(ptr, idx, side)
        prefix = np.cumsum(gains)
        best_idx = int(np.argmax(prefix))
        if prefix[best_idx] <= 0:
            side[moves_a] = 0
            side[moves_b] = 1
            break
        undo = slice(best_idx + 1, len(gains))
        side[moves_a[undo]] = 0
        side[moves_b[undo]] = 1

    part_a = frozenset(nodes[i] for i in range(k) if side[i] == 0)
    part_b = frozenset(nodes[i] for i in range(k) if side[i] == 1)
    return part_a, part_b


def recursive_bisection(graph: Graph, max_part_size: int, seed: int) -> Partition:
    """Bisect level-by-level until every part fits ``max_part_size``.

    All parts of a level split together, which keeps the part count a power
    of 2 and the size spread at most 1.  Child seeds derive from
    (seed, depth, part index), so sibling splits are order-independent.
    """
    if not graph.nodes:
        raise GraphError("cannot partition an empty graph")
    if max_part_size < 1:
        raise GraphError("max_part_size must be >= 1")

    parts: list[tuple[int, ...]] = [graph.nodes]
    depth = 0
    while max(len(p) for p in parts) > max_part_size:
        nxt: list[tuple[int, ...]] = []
        for i, part in enumerate(parts):
            if len(part) >= 2:
                a, b = kl_bisect(graph, part, derive_seed(seed, depth, i))
                nxt.append(tuple(sorted(a)))
                nxt.append(tuple(sorted(b)))
            else:
                # degenerate thresholds: pair tiny parts with an empty
                # sibling so the count stays a power of 2
                nxt.append(part)
                nxt.append(())
        parts = nxt
        depth += 1
    return Partition(tuple(frozenset(p) for p in parts), seed)
