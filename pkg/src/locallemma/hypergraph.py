"""Hypergraph coloring criteria and constructive solving.

Covers proper k-colorability (no monochromatic hyperedge) under the
``e*d <= k^(r-1)`` intersection condition, rainbow colorability (every
hyperedge contains all k colors) with both the union-bound and the exact
Stirling-number probability, and constructive coloring through the
resampling solver.  The rainbow intersection caps A (union bound) and B
(exact probability) differ by at most one; the pairs where they actually
differ are the interesting examples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .criteria import CriterionVerdict, Verdict
from .errors import DomainError, ParseError
from .moser_tardos import (
    EventSpec,
    ExecutionLog,
    ExecutionStats,
    Variable,
    VariableSpace,
    _missing_color_predicate,
    run,
)
from .numeric import (
    RealInterval,
    _as_fraction,
    decide_sign,
    e_interval,
    floor_interval,
    stirling2,
)

EXTENSIONAL_CAP = 10**6

# (r, k) pairs where the exact-probability cap exceeds the union-bound cap by one
RAINBOW_GAP_EXAMPLES = ((21, 5), (22, 5), (19, 6), (28, 7), (35, 8), (41, 8), (48, 8))


@dataclass(frozen=True)
class Hypergraph:
    num_vertices: int
    edges: tuple[frozenset[int], ...]

    def __post_init__(self):
        if self.num_vertices < 1:
            raise DomainError("hypergraph needs at least one vertex")
        edges = tuple(frozenset(int(v) for v in e) for e in self.edges)
        object.__setattr__(self, "edges", edges)
        for e in edges:
            if not e:
                raise DomainError("hyperedges must be nonempty")
            for v in e:
                if not 1 <= v <= self.num_vertices:
                    raise DomainError(f"vertex {v} out of range [1, {self.num_vertices}]")

    @property
    def has_duplicate_edges(self) -> bool:
        return len(set(self.edges)) != len(self.edges)

    def uniform_size(self) -> Optional[int]:
        sizes = {len(e) for e in self.edges}
        return sizes.pop() if len(sizes) == 1 else None


def max_edge_intersections(h: Hypergraph) -> int:
    """Max over edges e of the number of other edges (by index) meeting e."""
    best = 0
    for i, e in enumerate(h.edges):
        count = sum(1 for j, f in enumerate(h.edges) if j != i and e & f)
        best = max(best, count)
    return best


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def k_colorability_criterion(r_min: int, d: int, k: int) -> CriterionVerdict:
    """Pass iff e*d <= k^(r-1): certifies proper k-colorability of any
    hypergraph with minimum edge size r_min and intersections at most d.

    Positivity-only (the underlying argument certifies existence, not a
    quantitative avoidance probability).
    """
    if r_min < 1:
        raise DomainError("r_min must be at least 1")
    if k < 2:
        raise DomainError("k must be at least 2")
    if d < 0:
        raise DomainError("d must be nonnegative")
    scale = Fraction(d, k ** (r_min - 1))

    def build(bits: int) -> RealInterval:
        return e_interval(bits) * scale - 1

    sign, slack = decide_sign(build)
    if sign is None:
        return CriterionVerdict(Verdict.INDETERMINATE, None, slack)
    if sign > 0:
        return CriterionVerdict(Verdict.FAIL, None, slack)
    return CriterionVerdict(Verdict.PASS, None, slack, positivity_only=True)


def min_uniform_size_for_colors(k: int) -> Optional[int]:
    """Minimal r >= 2 with e*(r^2 - 1) <= k^(r-1): any r-uniform r-regular
    hypergraph of that uniformity is k-colorable.  None when k = 1."""
    if k < 1:
        raise DomainError("k must be positive")
    if k == 1:
        return None
    for r in range(2, 1001):
        scale = Fraction(r * r - 1, k ** (r - 1))
        sign, _ = decide_sign(lambda bits: e_interval(bits) * scale - 1)
        if sign is not None and sign <= 0:
            return r
    raise DomainError(f"no uniformity up to 1000 satisfies the condition for k={k}")


@dataclass(frozen=True)
class RainbowThresholds:
    """Intersection caps for rainbow k-colorability of r-uniform hypergraphs.

    D is the expected number of missing colors on one edge (union bound
    numerator), N the exact probability that some color is missing; the
    caps are A = floor(1/(eD)) and B = floor(1/(eN)), with B - A in {0, 1}.
    """

    r: int
    k: int
    D: RealInterval
    N: Fraction
    A: int
    B: int


def rainbow_thresholds(r: int, k: int) -> RainbowThresholds:
    if not r >= k >= 2:
        raise DomainError("requires r >= k >= 2")
    d_exact = Fraction((k - 1) ** r, k ** (r - 1))  # k * (1 - 1/k)^r
    n_exact = 1 - Fraction(math.factorial(k) * stirling2(r, k), k**r)
    a = floor_interval(lambda bits: (e_interval(bits) * d_exact).reciprocal())
    b = floor_interval(lambda bits: (e_interval(bits) * n_exact).reciprocal())
    if not (n_exact <= d_exact and b - a in (0, 1)):
        raise DomainError(f"threshold arithmetic inconsistent at (r,k)=({r},{k})")
    return RainbowThresholds(r, k, RealInterval.point(d_exact), n_exact, a, b)


def rainbow_criterion(h: Hypergraph, k: int, sharpened: bool = False) -> CriterionVerdict:
    """Pass iff every hyperedge meets at most A (plain) or B (sharpened)
    other hyperedges, certifying a k-coloring where each edge sees all colors."""
    r = h.uniform_size()
    if r is None:
        raise DomainError("rainbow criterion requires an r-uniform hypergraph")
    thresholds = rainbow_thresholds(r, k)
    cap = thresholds.B if sharpened else thresholds.A
    observed = max_edge_intersections(h)
    slack = RealInterval.point(observed - cap)
    if observed > cap:
        return CriterionVerdict(Verdict.FAIL, None, slack)
    return CriterionVerdict(Verdict.PASS, None, slack, positivity_only=True)


@dataclass(frozen=True)
class ColorabilityCertificate:
    """Contrapositive certificates: observed dependency statistics small
    enough to force k-colorability."""

    r: int
    k: int
    intersections_certifies: Optional[bool]
    degree_certifies: Optional[bool]
    intersection_threshold: RealInterval  # k^(r-1)/e
    degree_threshold: RealInterval        # k^(r-1)/(e r)

    def summary(self) -> str:
        parts = []
        if self.intersections_certifies is not None:
            parts.append(
                "intersections certify k-colorability"
                if self.intersections_certifies
                else "intersections give no certificate"
            )
        if self.degree_certifies is not None:
            parts.append(
                "degree certifies k-colorability"
                if self.degree_certifies
                else "degree gives no certificate"
            )
        return "; ".join(parts)


def colorability_certificate(
    r: int,
    k: int,
    observed_max_intersections: Optional[int] = None,
    observed_max_degree=None,
) -> ColorabilityCertificate:
    """Check observed statistics against the (k+1)-chromatic forcing bounds.

    If each hyperedge meets at most k^(r-1)/e others, the hypergraph is
    k-colorable; similarly a maximum degree of at most k^(r-1)/(e r)
    certifies k-colorability (both via the contrapositive of the statement
    that (k+1)-chromatic r-uniform hypergraphs must exceed these).
    """
    if r < 2 or k < 2:
        raise DomainError("requires r, k >= 2")
    bits = 128
    inter_threshold = Fraction(k ** (r - 1))
    inter_iv = RealInterval.point(inter_threshold, bits) / e_interval(bits)
    deg_iv = RealInterval.point(inter_threshold, bits) / (e_interval(bits) * r)

    def leq_threshold(observed, divisor: int) -> bool:
        obs = _as_fraction(observed)
        scale = obs * divisor / inter_threshold

        def build(b: int) -> RealInterval:
            return e_interval(b) * scale - 1

        sign, _ = decide_sign(build)
        if sign is None:
            raise DomainError("threshold comparison indeterminate")
        return sign <= 0

    inter_ok = None
    if observed_max_intersections is not None:
        inter_ok = leq_threshold(observed_max_intersections, 1)
    deg_ok = None
    if observed_max_degree is not None:
        deg_ok = leq_threshold(observed_max_degree, r)
    return ColorabilityCertificate(r, k, inter_ok, deg_ok, inter_iv, deg_iv)


# ---------------------------------------------------------------------------
# constructive coloring via the resampling solver
# ---------------------------------------------------------------------------

COLORING_MODES = ("proper", "rainbow")


@dataclass(frozen=True)
class ColoringResult:
    colors: Optional[tuple[int, ...]]  # per vertex, 0-based colors; None if not found
    terminated: bool
    stats: ExecutionStats
    log: ExecutionLog


def _monochromatic_event(idx: int, scope: tuple[int, ...], k: int) -> EventSpec:
    size = len(scope)
    if k**size <= EXTENSIONAL_CAP:
        bad = frozenset((c,) * size for c in range(k))
        return EventSpec(idx, scope, bad_assignments=bad)
    return EventSpec(idx, scope, predicate=lambda vals: len(set(vals)) == 1,
                     predicate_name="monochromatic")


def _missing_color_event(idx: int, scope: tuple[int, ...], k: int) -> EventSpec:
    size = len(scope)
    if k**size <= EXTENSIONAL_CAP:
        from itertools import product

        bad = frozenset(
            vals for vals in product(range(k), repeat=size) if len(set(vals)) < k
        )
        return EventSpec(idx, scope, bad_assignments=bad)
    return EventSpec(idx, scope, predicate=_missing_color_predicate(k),
                     predicate_name="missing_color")


def coloring_instance(
    h: Hypergraph, k: int, mode: str
) -> tuple[VariableSpace, list[EventSpec]]:
    """Variables = vertices with uniform color domain; one event per edge."""
    if mode not in COLORING_MODES:
        raise DomainError(f"mode must be one of {COLORING_MODES}")
    if k < 2:
        raise DomainError("k must be at least 2")
    if mode == "rainbow":
        r = h.uniform_size()
        if r is None or r < k:
            raise DomainError("rainbow mode requires an r-uniform hypergraph with r >= k")
    space = VariableSpace(tuple(Variable(k) for _ in range(h.num_vertices)))
    events = []
    for idx, edge in enumerate(h.edges, start=1):
        scope = tuple(v - 1 for v in sorted(edge))
        if mode == "proper":
            events.append(_monochromatic_event(idx, scope, k))
        else:
            events.append(_missing_color_event(idx, scope, k))
    return space, events


def is_proper_coloring(h: Hypergraph, colors: Sequence[int]) -> bool:
    """No hyperedge monochromatic (size-1 edges can never be properly colored)."""
    return all(len({colors[v - 1] for v in e}) > 1 for e in h.edges)


def is_rainbow_coloring(h: Hypergraph, colors: Sequence[int], k: int) -> bool:
    return all({colors[v - 1] for v in e} == set(range(k)) for e in h.edges)


def solve_coloring(
    h: Hypergraph,
    k: int,
    mode: str = "proper",
    seed: int = 0,
    max_steps: int = 10**6,
    selection: str = "lowest_index",
) -> ColoringResult:
    """Run the resampling solver on the coloring instance.

    A returned coloring is validated before being handed back; exhausting
    ``max_steps`` yields ``colors=None`` with the full stats attached.
    """
    space, events = coloring_instance(h, k, mode)
    space = VariableSpace(space.variables, seed)
    log, stats = run(space, events, selection=selection, max_steps=max_steps)
    if not log.terminated:
        return ColoringResult(None, False, stats, log)
    colors = log.final_assignment
    valid = (
        is_proper_coloring(h, colors)
        if mode == "proper"
        else is_rainbow_coloring(h, colors, k)
    )
    if not valid:
        raise DomainError("solver returned an assignment that fails validation")
    return ColoringResult(colors, True, stats, log)


def table2_rows(
    pairs: Sequence[tuple[int, int]] = RAINBOW_GAP_EXAMPLES
) -> list[tuple[int, int, int, int]]:
    """(r, k, A, B) rows for the requested pairs."""
    out = []
    for r, k in pairs:
        t = rainbow_thresholds(r, k)
        out.append((r, k, t.A, t.B))
    return out


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------
# `hypergraph n m` header, then m lines each listing one hyperedge's vertices.

def parse_hypergraph_text(text: str) -> Hypergraph:
    n = m = None
    edges: list[frozenset[int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if n is None:
            if len(tokens) != 3 or tokens[0] != "hypergraph":
                raise ParseError("expected header 'hypergraph n m'", line=lineno, column=1)
            try:
                n, m = int(tokens[1]), int(tokens[2])
            except ValueError:
                raise ParseError("header counts must be integers", line=lineno, column=1) from None
            continue
        try:
            verts = [int(t) for t in tokens]
        except ValueError:
            raise ParseError("vertex label is not an integer", line=lineno, column=1) from None
        edges.append(frozenset(verts))
    if n is None:
        raise ParseError("empty hypergraph file", line=1, column=1)
    if m is not None and len(edges) != m:
        raise ParseError(f"header declared {m} edges, found {len(edges)}", line=1, column=1)
    try:
        return Hypergraph(n, tuple(edges))
    except DomainError as exc:
        raise ParseError(str(exc), line=1, column=1) from exc


def load_hypergraph_file(path) -> Hypergraph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_hypergraph_text(fh.read())


def fano_plane() -> Hypergraph:
    """The 7-point projective plane: 3-uniform, 7 lines, not 2-colorable."""
    lines = (
        (1, 2, 3), (1, 4, 5), (1, 6, 7),
        (2, 4, 6), (2, 5, 7), (3, 4, 7), (3, 5, 6),
    )
    return Hypergraph(7, tuple(frozenset(l) for l in lines))
