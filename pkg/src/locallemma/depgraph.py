"""Dependency digraphs and graphs over event indices.

Vertices are 1-based integers.  The undirected graph carries the
independent-set machinery needed by the cluster-expansion criterion:
enumeration is exact and guarded by a hard size cap, since the criterion
only ever evaluates independent sets over closed neighborhoods plus one
whole-graph sum for the lower bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .errors import DomainError, ParseError, SizeGuardError
from .numeric import RealInterval, _as_fraction

INDEPENDENT_SET_CAP = 25


def _check_vertex(v: int, n: int, what: str = "vertex") -> None:
    if not isinstance(v, int) or not 1 <= v <= n:
        raise DomainError(f"{what} {v!r} out of range [1, {n}]")


@dataclass(frozen=True)
class DependencyDigraph:
    """Directed dependency structure: arc (i, j) means event i may depend on j."""

    n: int
    arcs: frozenset[tuple[int, int]]

    def __post_init__(self):
        if self.n < 0:
            raise DomainError("vertex count must be nonnegative")
        for i, j in self.arcs:
            _check_vertex(i, self.n)
            _check_vertex(j, self.n)
            if i == j:
                raise DomainError(f"self-loop at vertex {i}")

    @staticmethod
    def from_arcs(n: int, arcs: Iterable[tuple[int, int]]) -> "DependencyDigraph":
        return DependencyDigraph(n, frozenset((int(i), int(j)) for i, j in arcs))

    def out_neighbors(self, i: int) -> tuple[int, ...]:
        _check_vertex(i, self.n)
        return tuple(sorted(j for (a, j) in self.arcs if a == i))

    def out_degree(self, i: int) -> int:
        return len(self.out_neighbors(i))


@dataclass(frozen=True)
class DependencyGraph:
    """Undirected dependency structure; edges stored as (min, max) pairs."""

    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        for a, b in self.edges:
            _check_vertex(a, self.n)
            _check_vertex(b, self.n)
            if a == b:
                raise DomainError(f"self-loop at vertex {a}")
            if a > b:
                raise DomainError(f"edge {(a, b)} not normalized; use from_edges")

    @staticmethod
    def from_edges(n: int, edges: Iterable[Iterable[int]]) -> "DependencyGraph":
        normalized = set()
        for e in edges:
            a, b = sorted(int(v) for v in e)
            normalized.add((a, b))
        return DependencyGraph(n, frozenset(normalized))

    def neighbors(self, i: int) -> frozenset[int]:
        _check_vertex(i, self.n)
        out = set()
        for a, b in self.edges:
            if a == i:
                out.add(b)
            elif b == i:
                out.add(a)
        return frozenset(out)

    def adjacency(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {v: set() for v in range(1, self.n + 1)}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def degree(self, i: int) -> int:
        return len(self.neighbors(i))

    def has_edge(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges


def symmetrize(d: DependencyDigraph) -> DependencyGraph:
    """Undirected shadow: {i, j} is an edge iff (i, j) or (j, i) is an arc."""
    return DependencyGraph.from_edges(d.n, d.arcs)


def closed_neighborhood(g: DependencyGraph, i: int) -> frozenset[int]:
    """{i} together with all vertices adjacent to i."""
    return g.neighbors(i) | {i}


def _independent_subsets(
    adj: dict[int, set[int]], candidates: tuple[int, ...]
) -> Iterator[tuple[int, ...]]:
    """All independent subsets of `candidates`, in lexicographic order of
    their sorted member tuples (the empty set first)."""

    def rec(prefix: tuple[int, ...], rest: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
        yield prefix
        for idx, v in enumerate(rest):
            filtered = tuple(u for u in rest[idx + 1:] if u not in adj[v])
            yield from rec(prefix + (v,), filtered)

    yield from rec((), candidates)


def _guard(restrict: Sequence[int], g: DependencyGraph, cap: int) -> tuple[int, ...]:
    verts = tuple(sorted(set(int(v) for v in restrict)))
    for v in verts:
        _check_vertex(v, g.n)
    if len(verts) > cap:
        raise SizeGuardError(
            f"independent-set enumeration over {len(verts)} vertices exceeds cap {cap}"
        )
    return verts


def enumerate_independent_sets(
    g: DependencyGraph, restrict: Iterable[int], cap: int = INDEPENDENT_SET_CAP
) -> list[tuple[int, ...]]:
    """All independent sets inside the induced subgraph on `restrict`.

    Includes the empty set; deterministic lexicographic order.
    """
    verts = _guard(tuple(restrict), g, cap)
    adj = g.adjacency()
    return list(_independent_subsets(adj, verts))


def independence_polynomial(
    g: DependencyGraph,
    restrict: Iterable[int],
    y: Sequence,
    cap: int = INDEPENDENT_SET_CAP,
) -> Fraction:
    """Exact sum over independent sets I within `restrict` of prod_{j in I} y_j.

    Weights are indexed by vertex (y[j-1]) and must be positive.  The empty
    set contributes 1, so the result is always >= 1.
    """
    verts = _guard(tuple(restrict), g, cap)
    weights = {}
    for v in verts:
        if v > len(y):
            raise DomainError(f"missing weight for vertex {v}")
        w = _as_fraction(y[v - 1])
        if w <= 0:
            raise DomainError(f"weight for vertex {v} must be positive, got {w}")
        weights[v] = w
    adj = g.adjacency()

    def rec(rest: tuple[int, ...], acc: Fraction) -> Fraction:
        total = acc
        for idx, v in enumerate(rest):
            filtered = tuple(u for u in rest[idx + 1:] if u not in adj[v])
            total += rec(filtered, acc * weights[v])
        return total

    return rec(verts, Fraction(1))


def independence_weight_sum(
    g: DependencyGraph,
    restrict: Iterable[int],
    y: Sequence,
    cap: int = INDEPENDENT_SET_CAP,
) -> RealInterval:
    """Interval form of `independence_polynomial` (a point interval: the sum
    is computed with exact rational arithmetic)."""
    return RealInterval.point(independence_polynomial(g, restrict, y, cap))


# ---------------------------------------------------------------------------
# graph file format (shared with the CLI)
# ---------------------------------------------------------------------------
# First non-comment line: `digraph n` or `graph n`; then one `i j` pair per
# line.  Lines starting with `#` are comments.

def parse_graph_text(text: str) -> tuple[str, int, list[tuple[int, int]]]:
    kind = None
    n = 0
    pairs: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if kind is None:
            if len(tokens) != 2 or tokens[0] not in ("digraph", "graph"):
                raise ParseError(
                    "expected header 'digraph n' or 'graph n'", line=lineno, column=1
                )
            kind = tokens[0]
            try:
                n = int(tokens[1])
            except ValueError:
                raise ParseError("vertex count is not an integer", line=lineno,
                                 column=raw.index(tokens[1]) + 1) from None
            continue
        if len(tokens) != 2:
            raise ParseError("expected exactly two vertex labels", line=lineno, column=1)
        try:
            i, j = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise ParseError("vertex label is not an integer", line=lineno, column=1) from None
        if not (1 <= i <= n and 1 <= j <= n) or i == j:
            raise ParseError(f"invalid pair ({i}, {j}) for n={n}", line=lineno, column=1)
        pairs.append((i, j))
    if kind is None:
        raise ParseError("empty graph file", line=1, column=1)
    return kind, n, pairs


def load_graph_file(path) -> DependencyDigraph | DependencyGraph:
    with open(path, "r", encoding="utf-8") as fh:
        kind, n, pairs = parse_graph_text(fh.read())
    if kind == "digraph":
        return DependencyDigraph.from_arcs(n, pairs)
    return DependencyGraph.from_edges(n, pairs)
