"""Directed cycles of prescribed modular length.

A digraph with minimum out-degree delta and maximum in-degree Delta
contains a cycle of length divisible by k whenever
e*(delta*Delta + 1)*(1 - 1/k)^delta <= 1 (relaxed: drop the +1).  The
constructive pipeline mirrors the existence proof: reduce out-degrees to
exactly delta, solve for a coloring in which every vertex has an
out-neighbor colored one higher mod k, then walk successor colors until a
vertex repeats; the closed walk between the repetitions is the certificate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from .criteria import CriterionVerdict, Verdict
from .depgraph import parse_graph_text
from .errors import DomainError, ParseError
from .moser_tardos import (
    EventSpec,
    ExecutionLog,
    ExecutionStats,
    Variable,
    VariableSpace,
    run,
)
from .numeric import RealInterval, decide_sign, e_interval, floor_interval

EXTENSIONAL_CAP = 10**6


@dataclass(frozen=True)
class Digraph:
    """Simple directed graph: no self-loops, no duplicate arcs; 1-based vertices."""

    num_vertices: int
    arcs: frozenset[tuple[int, int]]

    def __post_init__(self):
        for u, v in self.arcs:
            if not (1 <= u <= self.num_vertices and 1 <= v <= self.num_vertices):
                raise DomainError(f"arc ({u}, {v}) out of range")
            if u == v:
                raise DomainError(f"self-loop at {u}")

    @staticmethod
    def from_arcs(n: int, arcs) -> "Digraph":
        return Digraph(n, frozenset((int(u), int(v)) for u, v in arcs))

    def out_neighbors(self, v: int) -> tuple[int, ...]:
        return tuple(sorted(w for (u, w) in self.arcs if u == v))

    def out_adjacency(self) -> dict[int, tuple[int, ...]]:
        adj: dict[int, list[int]] = {v: [] for v in range(1, self.num_vertices + 1)}
        for u, w in self.arcs:
            adj[u].append(w)
        return {v: tuple(sorted(ws)) for v, ws in adj.items()}


def degree_profile(d: Digraph) -> tuple[int, int]:
    """(minimum out-degree, maximum in-degree)."""
    out = {v: 0 for v in range(1, d.num_vertices + 1)}
    indeg = {v: 0 for v in range(1, d.num_vertices + 1)}
    for u, w in d.arcs:
        out[u] += 1
        indeg[w] += 1
    return min(out.values()), max(indeg.values()) if indeg else 0


def alon_linial_condition(
    delta: int, Delta: int, k: int, relaxed: bool = False
) -> CriterionVerdict:
    """Rigorous decision of e*(delta*Delta + 1)*(1-1/k)^delta <= 1, or the
    relaxed form e*delta*Delta*(1-1/k)^delta <= 1.

    Positivity-only: a pass certifies a cycle of length divisible by k
    exists, with no quantitative avoidance bound attached.
    """
    if delta < 1 or Delta < 1:
        raise DomainError("requires delta >= 1 and Delta >= 1")
    if k < 2:
        raise DomainError("requires k >= 2")
    factor = delta * Delta if relaxed else delta * Delta + 1
    scale = factor * Fraction(k - 1, k) ** delta

    def build(bits: int) -> RealInterval:
        return e_interval(bits) * scale - 1

    sign, slack = decide_sign(build)
    if sign is None:
        return CriterionVerdict(Verdict.INDETERMINATE, None, slack)
    if sign > 0:
        return CriterionVerdict(Verdict.FAIL, None, slack)
    return CriterionVerdict(Verdict.PASS, None, slack, positivity_only=True)


def even_cycle_condition(delta: int, Delta: int) -> CriterionVerdict:
    """Delta <= 2^delta/(e*delta) forces an even-length directed cycle.

    Equivalent to the relaxed condition at k = 2.
    """
    if delta < 1 or Delta < 1:
        raise DomainError("requires delta >= 1 and Delta >= 1")
    scale = Fraction(delta * Delta, 2**delta)

    def build(bits: int) -> RealInterval:
        return e_interval(bits) * scale - 1

    sign, slack = decide_sign(build)
    if sign is None:
        return CriterionVerdict(Verdict.INDETERMINATE, None, slack)
    if sign > 0:
        return CriterionVerdict(Verdict.FAIL, None, slack)
    return CriterionVerdict(Verdict.PASS, None, slack, positivity_only=True)


def even_cycle_regular_root(tolerance: Fraction = Fraction(1, 10**6)) -> RealInterval:
    """Enclosure of the root of 2^x = e*x^2 in [7, 7.2], to width <= tolerance.

    d-regular digraphs satisfy the even-cycle condition exactly for d at or
    above the next integer past this root.
    """
    lo, hi = Fraction(7), Fraction(72, 10)

    def sign_at(x: Fraction) -> int:
        # h(x) = x ln 2 - 1 - 2 ln x
        def build(bits: int) -> RealInterval:
            xi = RealInterval.point(x, bits)
            ln2 = RealInterval.point(2, bits).log()
            return xi * ln2 - 1 - xi.log() * 2

        sign, _ = decide_sign(build)
        if sign is None:
            raise DomainError(f"sign of 2^x - e x^2 indeterminate at x={x}")
        return sign

    if not (sign_at(lo) < 0 < sign_at(hi)):
        raise DomainError("root not bracketed in [7, 7.2]")
    while hi - lo > tolerance:
        mid = (lo + hi) / 2
        if sign_at(mid) < 0:
            lo = mid
        else:
            hi = mid
    return RealInterval(lo, hi)


def max_guaranteed_modulus(d: int) -> int:
    """floor(d / (1 + 2 ln d)): every k in [2, value] admits a mod-k cycle
    in any d-regular digraph."""
    if d < 1:
        raise DomainError("d must be positive")

    def build(bits: int) -> RealInterval:
        return RealInterval.point(d, bits) / (
            RealInterval.point(d, bits).log() * 2 + 1
        )

    return floor_interval(build)


# ---------------------------------------------------------------------------
# constructive pipeline
# ---------------------------------------------------------------------------

def reduce_out_degree(d: Digraph, delta: int) -> Digraph:
    """Spanning subgraph with every out-degree exactly delta, keeping arcs
    to the lowest-indexed heads.  In-degrees cannot increase."""
    if delta < 1:
        raise DomainError("delta must be positive")
    kept = []
    for v in range(1, d.num_vertices + 1):
        outs = d.out_neighbors(v)
        if len(outs) < delta:
            raise DomainError(f"vertex {v} has out-degree {len(outs)} < {delta}")
        kept.extend((v, w) for w in outs[:delta])
    return Digraph.from_arcs(d.num_vertices, kept)


@dataclass(frozen=True)
class ModKColoring:
    """Vertex coloring (0-based colors mod k) in which every vertex has an
    out-neighbor colored exactly one higher modulo k."""

    k: int
    colors: tuple[int, ...]

    def __post_init__(self):
        if self.k < 2:
            raise DomainError("k must be at least 2")
        if any(not 0 <= c < self.k for c in self.colors):
            raise DomainError("colors must lie in [0, k)")


def is_valid_mod_k_coloring(d: Digraph, c: ModKColoring) -> bool:
    if len(c.colors) != d.num_vertices:
        return False
    adj = d.out_adjacency()
    for v in range(1, d.num_vertices + 1):
        want = (c.colors[v - 1] + 1) % c.k
        if not any(c.colors[u - 1] == want for u in adj[v]):
            return False
    return True


@dataclass(frozen=True)
class ModKSolveResult:
    coloring: Optional[ModKColoring]
    terminated: bool
    stats: ExecutionStats
    log: ExecutionLog


def _successor_color_event(idx: int, v: int, outs: tuple[int, ...], k: int) -> EventSpec:
    """Bad event for vertex v: no out-neighbor has color(v)+1 mod k.

    Scope is {v} union out-neighbors, sorted; positions are resolved here.
    """
    scope_vertices = tuple(sorted({v, *outs}))
    scope = tuple(u - 1 for u in scope_vertices)
    pos = {u: i for i, u in enumerate(scope_vertices)}
    v_pos = pos[v]
    out_pos = tuple(pos[u] for u in outs)

    def bad(vals: tuple[int, ...]) -> bool:
        want = (vals[v_pos] + 1) % k
        return all(vals[p] != want for p in out_pos)

    if k ** len(scope) <= EXTENSIONAL_CAP:
        from itertools import product

        bad_set = frozenset(
            vals for vals in product(range(k), repeat=len(scope)) if bad(vals)
        )
        return EventSpec(idx, scope, bad_assignments=bad_set)
    return EventSpec(idx, scope, predicate=bad, predicate_name=f"no_successor_color_k{k}")


def mod_k_instance(d: Digraph, k: int) -> tuple[VariableSpace, list[EventSpec]]:
    adj = d.out_adjacency()
    if any(len(adj[v]) == 0 for v in adj):
        raise DomainError("every vertex needs out-degree >= 1")
    space = VariableSpace(tuple(Variable(k) for _ in range(d.num_vertices)))
    events = [
        _successor_color_event(idx, v, adj[v], k)
        for idx, v in enumerate(range(1, d.num_vertices + 1), start=1)
    ]
    return space, events


def find_mod_k_coloring(
    d: Digraph,
    k: int,
    seed: int = 0,
    max_steps: int = 10**6,
    selection: str = "lowest_index",
) -> ModKSolveResult:
    """Solve for a successor coloring with the resampling algorithm;
    the coloring is validated before being returned."""
    space, events = mod_k_instance(d, k)
    space = VariableSpace(space.variables, seed)
    log, stats = run(space, events, selection=selection, max_steps=max_steps)
    if not log.terminated:
        return ModKSolveResult(None, False, stats, log)
    coloring = ModKColoring(k, log.final_assignment)
    if not is_valid_mod_k_coloring(d, coloring):
        raise DomainError("solver produced an invalid coloring")
    return ModKSolveResult(coloring, True, stats, log)


@dataclass(frozen=True)
class CycleCertificate:
    """Directed cycle v_0 -> ... -> v_m = v_0 with m > 0 and m divisible by k."""

    k: int
    vertices: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.vertices) - 1


def verify_cycle_certificate(d: Digraph, cert: CycleCertificate) -> bool:
    vs = cert.vertices
    if len(vs) < 2 or vs[0] != vs[-1]:
        return False
    if cert.length % cert.k != 0:
        return False
    interior = vs[:-1]
    if len(set(interior)) != len(interior):
        return False
    return all((vs[i], vs[i + 1]) in d.arcs for i in range(len(vs) - 1))


def extract_mod_k_cycle(d: Digraph, c: ModKColoring) -> CycleCertificate:
    """Greedy successor walk from the lowest vertex until the first repeat.

    Each step moves to the lowest-indexed out-neighbor whose color is one
    higher mod k, so consecutive colors increase by one and the closed
    subwalk between the two visits of the repeated vertex has length
    divisible by k.
    """
    if not is_valid_mod_k_coloring(d, c):
        raise DomainError("coloring is not valid for this digraph")
    adj = d.out_adjacency()
    walk = [1]
    seen = {1: 0}
    while True:
        v = walk[-1]
        want = (c.colors[v - 1] + 1) % c.k
        nxt = next(u for u in adj[v] if c.colors[u - 1] == want)
        if nxt in seen:
            start = seen[nxt]
            cycle = tuple(walk[start:]) + (nxt,)
            cert = CycleCertificate(c.k, cycle)
            if not verify_cycle_certificate(d, cert):
                raise DomainError("walk produced an invalid certificate")
            return cert
        seen[nxt] = len(walk)
        walk.append(nxt)


def certificate_to_json(d: Digraph, cert: CycleCertificate) -> str:
    return json.dumps(
        {
            "k": cert.k,
            "vertices": list(cert.vertices),
            "length": cert.length,
            "valid": verify_cycle_certificate(d, cert),
            "length_divisible": cert.length % cert.k == 0,
        },
        sort_keys=True,
    )


# ---------------------------------------------------------------------------
# exhaustive cycle enumeration (cross-checks)
# ---------------------------------------------------------------------------

def enumerate_simple_cycles(
    d: Digraph, max_count: Optional[int] = None
) -> Iterator[tuple[int, ...]]:
    """All simple directed cycles, each yielded once, anchored at its
    minimum vertex (closing vertex repeated at the end)."""
    adj = d.out_adjacency()
    yielded = 0
    for s in range(1, d.num_vertices + 1):
        stack = [(s, [s])]
        while stack:
            v, path = stack.pop()
            for w in adj[v]:
                if w == s:
                    yield tuple(path) + (s,)
                    yielded += 1
                    if max_count is not None and yielded >= max_count:
                        return
                elif w > s and w not in path:
                    stack.append((w, path + [w]))


def find_divisible_cycle(
    d: Digraph, k: int, max_count: int = 10**6
) -> Optional[tuple[int, ...]]:
    """First simple cycle of length divisible by k found by exhaustive
    enumeration (independent of the coloring pipeline)."""
    for cycle in enumerate_simple_cycles(d, max_count=max_count):
        if (len(cycle) - 1) % k == 0:
            return cycle
    return None


# ---------------------------------------------------------------------------
# file loading (shared line format with the dependency-graph reader)
# ---------------------------------------------------------------------------

def load_digraph_file(path) -> Digraph:
    with open(path, "r", encoding="utf-8") as fh:
        kind, n, pairs = parse_graph_text(fh.read())
    if kind != "digraph":
        raise ParseError("expected a 'digraph n' header for a directed graph")
    if len(set(pairs)) != len(pairs):
        raise ParseError("duplicate arcs are not allowed in a simple digraph")
    return Digraph.from_arcs(n, pairs)
