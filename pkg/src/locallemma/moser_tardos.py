"""Variable-setting resampling solver with witness-tree machinery.

Events are predicates over the scopes of mutually independent finite-domain
variables.  The solver repeatedly resamples the scope of a currently
occurring event until none occurs.  Randomness comes from a resampling
table: per-variable sample streams whose entry (i, j) is a pure function of
(seed, i, j), making every execution replayable and every table entry
re-readable, and per-variable cursors that advance by exactly one per
resample.

The analysis-side objects are also provided: backward construction of the
witness tree of a resampling step, properness validation, the branching
process that samples witness trees with known tree probabilities, and
Monte-Carlo estimation of appearance probabilities.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Optional, Sequence

from .depgraph import DependencyGraph
from .errors import DepthExceededError, DomainError, ParseError
from .numeric import RealInterval, _as_fraction

_MASK64 = (1 << 64) - 1
_TAG_TABLE = 0
_TAG_SELECTION = 1
_TAG_BRANCHING = 2

EXHAUSTIVE_SCOPE_CAP = 10**6


def _uniform01(seed: int, tag: int, i: int, j: int) -> float:
    """Deterministic uniform draw keyed by (seed, stream tag, index, counter)."""
    data = struct.pack("<QQQQ", seed & _MASK64, tag & _MASK64, i & _MASK64, j & _MASK64)
    digest = hashlib.blake2b(data, digest_size=8).digest()
    return int.from_bytes(digest, "big") / 2**64


# ---------------------------------------------------------------------------
# variables and events
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Variable:
    """A finite-domain random variable; values are 0..domain_size-1.

    ``pmf`` of None means uniform.
    """

    domain_size: int
    pmf: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        if self.domain_size < 1:
            raise DomainError("domain_size must be positive")
        if self.pmf is not None:
            pmf = tuple(float(p) for p in self.pmf)
            object.__setattr__(self, "pmf", pmf)
            if len(pmf) != self.domain_size:
                raise DomainError("pmf length must equal domain_size")
            if any(p < 0 for p in pmf):
                raise DomainError("pmf entries must be nonnegative")
            if abs(sum(pmf) - 1.0) > 1e-12:
                raise DomainError("pmf must sum to 1 within 1e-12")

    def probabilities(self) -> tuple[Fraction, ...]:
        if self.pmf is None:
            return tuple([Fraction(1, self.domain_size)] * self.domain_size)
        return tuple(_as_fraction(p) for p in self.pmf)

    def sample_from_uniform(self, u: float) -> int:
        if self.pmf is None:
            return min(int(u * self.domain_size), self.domain_size - 1)
        acc = 0.0
        for value, p in enumerate(self.pmf):
            acc += p
            if u < acc:
                return value
        return self.domain_size - 1


@dataclass(frozen=True)
class VariableSpace:
    variables: tuple[Variable, ...]
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))

    @property
    def n(self) -> int:
        return len(self.variables)


@dataclass(frozen=True)
class EventSpec:
    """A bad event: a deterministic predicate on the assignment of its scope.

    The bad set may be given extensionally (explicit set of bad
    scope-assignments, enabling exact probability computation) or as a
    callable predicate for large domains.
    """

    id: int
    scope: tuple[int, ...]
    bad_assignments: Optional[frozenset[tuple[int, ...]]] = None
    predicate: Optional[Callable[[tuple[int, ...]], bool]] = None
    predicate_name: str = ""

    def __post_init__(self):
        scope = tuple(int(v) for v in self.scope)
        object.__setattr__(self, "scope", scope)
        if not scope:
            raise DomainError(f"event {self.id}: scope must be nonempty")
        if len(set(scope)) != len(scope):
            raise DomainError(f"event {self.id}: scope indices must be distinct")
        if (self.bad_assignments is None) == (self.predicate is None):
            raise DomainError(
                f"event {self.id}: provide exactly one of bad_assignments or predicate"
            )
        if self.bad_assignments is not None:
            object.__setattr__(
                self, "bad_assignments",
                frozenset(tuple(a) for a in self.bad_assignments),
            )

    def occurs(self, values: Sequence[int]) -> bool:
        local = tuple(values[i] for i in self.scope)
        if self.bad_assignments is not None:
            return local in self.bad_assignments
        return bool(self.predicate(local))


def _check_instance(space: VariableSpace, events: Sequence[EventSpec]) -> None:
    ids = [ev.id for ev in events]
    if sorted(ids) != list(range(1, len(events) + 1)):
        raise DomainError(f"event ids must be exactly 1..{len(events)}, got {sorted(ids)}")
    for ev in events:
        for i in ev.scope:
            if not 0 <= i < space.n:
                raise DomainError(f"event {ev.id}: variable index {i} out of range")


def build_dependency_graph(events: Sequence[EventSpec]) -> DependencyGraph:
    """Edge {A, B} iff the scopes of distinct events A and B intersect."""
    ids = sorted(ev.id for ev in events)
    if ids != list(range(1, len(events) + 1)):
        raise DomainError(f"event ids must be exactly 1..{len(events)}, got {ids}")
    by_id = {ev.id: set(ev.scope) for ev in events}
    edges = []
    for a in range(1, len(events) + 1):
        for b in range(a + 1, len(events) + 1):
            if by_id[a] & by_id[b]:
                edges.append((a, b))
    return DependencyGraph.from_edges(len(events), edges)


def exact_event_probability(space: VariableSpace, event: EventSpec) -> Fraction:
    """Exact P(event) under independent sampling of its scope variables.

    Requires the extensional form, or a scope domain product of at most
    10^6 for exhaustive evaluation of a callable predicate.
    """
    pmfs = [space.variables[i].probabilities() for i in event.scope]
    if event.bad_assignments is not None:
        total = Fraction(0)
        for assignment in event.bad_assignments:
            prob = Fraction(1)
            for pmf, value in zip(pmfs, assignment):
                prob *= pmf[value]
            total += prob
        return total
    size = math.prod(space.variables[i].domain_size for i in event.scope)
    if size > EXHAUSTIVE_SCOPE_CAP:
        raise DomainError(
            f"event {event.id}: exact probability needs extensional form or "
            f"scope product <= {EXHAUSTIVE_SCOPE_CAP}, got {size}"
        )
    total = Fraction(0)
    for assignment in product(*(range(space.variables[i].domain_size) for i in event.scope)):
        if event.predicate(assignment):
            prob = Fraction(1)
            for pmf, value in zip(pmfs, assignment):
                prob *= pmf[value]
            total += prob
    return total


# ---------------------------------------------------------------------------
# resampling table and execution
# ---------------------------------------------------------------------------

class ResamplingTable:
    """Lazily generated per-variable sample streams with advancing cursors."""

    def __init__(self, space: VariableSpace):
        self._space = space
        self._cursors = [0] * space.n

    def entry(self, i: int, j: int) -> int:
        u = _uniform01(self._space.seed, _TAG_TABLE, i, j)
        return self._space.variables[i].sample_from_uniform(u)

    def cursor(self, i: int) -> int:
        return self._cursors[i]

    def draw(self, i: int) -> int:
        value = self.entry(i, self._cursors[i])
        self._cursors[i] += 1
        return value


@dataclass(frozen=True)
class StepRecord:
    t: int
    event_id: int
    cursors_before: dict[int, int]


@dataclass(frozen=True)
class ExecutionLog:
    steps: tuple[StepRecord, ...]
    final_assignment: tuple[int, ...]
    terminated: bool
    seed: int
    selection: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "seed": self.seed,
                "selection": self.selection,
                "terminated": self.terminated,
                "steps": [
                    {
                        "t": s.t,
                        "event": s.event_id,
                        "cursors_before": {str(k): v for k, v in sorted(s.cursors_before.items())},
                    }
                    for s in self.steps
                ],
                "final_assignment": list(self.final_assignment),
            },
            sort_keys=True,
        )


@dataclass(frozen=True)
class ExecutionStats:
    per_event: dict[int, int]
    total: int
    wall_steps: int


SELECTION_RULES = ("lowest_index", "random_uniform")


def run(
    space: VariableSpace,
    events: Sequence[EventSpec],
    selection: str = "lowest_index",
    max_steps: int = 10**6,
) -> tuple[ExecutionLog, ExecutionStats]:
    """Execute the resampling loop.

    Terminates when no event occurs, in which case the final assignment
    avoids every event.  Exhausting ``max_steps`` is a signaled outcome:
    the log is returned with ``terminated=False``.
    """
    if selection not in SELECTION_RULES:
        raise DomainError(f"unknown selection rule {selection!r}")
    if max_steps < 1:
        raise DomainError("max_steps must be positive")
    _check_instance(space, events)
    ordered = sorted(events, key=lambda ev: ev.id)
    table = ResamplingTable(space)
    values = [table.draw(i) for i in range(space.n)]
    steps: list[StepRecord] = []
    counts = {ev.id: 0 for ev in ordered}
    terminated = False
    selection_draws = 0
    for t in range(1, max_steps + 1):
        bad = [ev for ev in ordered if ev.occurs(values)]
        if not bad:
            terminated = True
            break
        if selection == "lowest_index":
            chosen = bad[0]
        else:
            u = _uniform01(space.seed, _TAG_SELECTION, 0, selection_draws)
            selection_draws += 1
            chosen = bad[min(int(u * len(bad)), len(bad) - 1)]
        steps.append(
            StepRecord(t, chosen.id, {i: table.cursor(i) for i in chosen.scope})
        )
        counts[chosen.id] += 1
        for i in chosen.scope:
            values[i] = table.draw(i)
    else:
        # loop ran max_steps times without a clean break: check once more
        terminated = not any(ev.occurs(values) for ev in ordered)
    log = ExecutionLog(tuple(steps), tuple(values), terminated, space.seed, selection)
    stats = ExecutionStats(counts, sum(counts.values()), len(steps))
    return log, stats


def replay_assignment(
    space: VariableSpace, events: Sequence[EventSpec], log: ExecutionLog, t: int
) -> tuple[int, ...]:
    """Assignment in force just before step t, rebuilt from the table alone."""
    by_id = {ev.id: ev for ev in events}
    resamples = {i: 0 for i in range(space.n)}
    for s in log.steps[: t - 1]:
        for i in by_id[s.event_id].scope:
            resamples[i] += 1
    table = ResamplingTable(space)
    return tuple(table.entry(i, resamples[i]) for i in range(space.n))


# ---------------------------------------------------------------------------
# witness trees
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WitnessTree:
    """Rooted tree labeled by event ids; ``step`` records the originating
    resampling step when built from a log (None for sampled trees)."""

    label: int
    children: tuple["WitnessTree", ...] = ()
    step: Optional[int] = None

    def vertices(self) -> Iterable["WitnessTree"]:
        yield self
        for child in self.children:
            yield from child.vertices()

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children), default=0)

    def canonical(self):
        """Label-shape canonical form; step indices are ignored so trees of
        different steps compare equal when they coincide as labeled trees."""
        return (self.label, tuple(sorted(c.canonical() for c in self.children)))

    def to_json_obj(self):
        return {
            "label": self.label,
            "step": self.step,
            "children": [c.to_json_obj() for c in self.children],
        }


def witness_tree(
    log: ExecutionLog, events: Sequence[EventSpec], t: int
) -> WitnessTree:
    """Backward construction of the witness tree of step t.

    Root labeled by the step-t event; steps t-1 .. 1 are processed in
    decreasing order, each inserted iff its scope meets the scope of some
    vertex already present, attached under the deepest such vertex.  Among
    equally deep candidates the one with the smallest originating step index
    is chosen (any fixed tie-break preserves distinctness of the W_t).
    """
    if not 1 <= t <= len(log.steps):
        raise DomainError(f"step index {t} outside [1, {len(log.steps)}]")
    scopes = {ev.id: set(ev.scope) for ev in events}
    for s in log.steps[:t]:
        if s.event_id not in scopes:
            raise DomainError(f"log references unknown event {s.event_id}")
    # nodes: (label, step, depth, parent index)
    root_step = log.steps[t - 1]
    nodes: list[tuple[int, int, int, Optional[int]]] = [
        (root_step.event_id, root_step.t, 0, None)
    ]
    for s in reversed(log.steps[: t - 1]):
        scope_s = scopes[s.event_id]
        best: Optional[int] = None
        for idx, (label, step, depth, _parent) in enumerate(nodes):
            if scope_s & scopes[label]:
                if best is None:
                    best = idx
                else:
                    b_depth, b_step = nodes[best][2], nodes[best][1]
                    if depth > b_depth or (depth == b_depth and step < b_step):
                        best = idx
        if best is not None:
            nodes.append((s.event_id, s.t, nodes[best][2] + 1, best))
    children: dict[int, list[int]] = {i: [] for i in range(len(nodes))}
    for idx, (_label, _step, _depth, parent) in enumerate(nodes):
        if parent is not None:
            children[parent].append(idx)

    def build(idx: int) -> WitnessTree:
        label, step, _depth, _parent = nodes[idx]
        return WitnessTree(label, tuple(build(c) for c in children[idx]), step)

    return build(0)


def is_proper_witness_tree(tree: WitnessTree, events: Sequence[EventSpec]) -> bool:
    """Both defining properties: parent-child scopes intersect, and the
    children of every vertex carry pairwise distinct labels."""
    scopes = {ev.id: set(ev.scope) for ev in events}
    for node in tree.vertices():
        if node.label not in scopes:
            raise DomainError(f"unknown event label {node.label}")
    for node in tree.vertices():
        labels = [c.label for c in node.children]
        if len(set(labels)) != len(labels):
            return False
        for child in node.children:
            if not scopes[node.label] & scopes[child.label]:
                return False
    return True


# ---------------------------------------------------------------------------
# branching process over the dependency graph
# ---------------------------------------------------------------------------

def _weights_by_vertex(x: Sequence, n: int) -> list[Fraction]:
    ws = [_as_fraction(v) for v in x]
    if len(ws) != n:
        raise DomainError(f"expected {n} weights, got {len(ws)}")
    return ws


def galton_watson_sample(
    root: int,
    x: Sequence,
    g: DependencyGraph,
    seed: int = 0,
    depth_cap: int = 64,
) -> WitnessTree:
    """Sample a proper witness tree rooted at `root`.

    Every node labeled B independently includes, for each C in the closed
    neighborhood of B, a child labeled C with probability x(C).  Raises
    DepthExceededError if generation `depth_cap` is reached before
    extinction (a signaled outcome, not a crash).
    """
    ws = _weights_by_vertex(x, g.n)
    for i, w in enumerate(ws):
        if not 0 < w < 1:
            raise DomainError(f"branching weight x[{i}]={w} outside (0, 1)")
    if not 1 <= root <= g.n:
        raise DomainError(f"root {root} out of range")
    if not 1 <= depth_cap <= 400:
        raise DomainError("depth_cap must lie in [1, 400] (recursion budget)")
    adj = g.adjacency()
    counter = 0

    def spawn(label: int, depth: int) -> WitnessTree:
        nonlocal counter
        if depth >= depth_cap:
            raise DepthExceededError(
                f"branching process exceeded depth cap {depth_cap}"
            )
        kids = []
        for cand in sorted(adj[label] | {label}):
            u = _uniform01(seed, _TAG_BRANCHING, root, counter)
            counter += 1
            if _as_fraction(u) < ws[cand - 1]:
                kids.append(cand)
        return WitnessTree(label, tuple(spawn(c, depth + 1) for c in kids))

    return spawn(root, 0)


def tree_probability(
    tree: WitnessTree, x: Sequence, g: DependencyGraph
) -> RealInterval:
    """Exact probability that the branching process produces this tree:

        ((1 - x(root)) / x(root)) * prod_v [ x([v]) * prod_{C ~ [v]} (1 - x(C)) ]
    """
    ws = _weights_by_vertex(x, g.n)
    for node in tree.vertices():
        if not 1 <= node.label <= g.n:
            raise DomainError(f"tree label {node.label} out of graph range")
        labels = [c.label for c in node.children]
        if len(set(labels)) != len(labels):
            raise DomainError("improper tree: duplicate child labels")
        allowed = g.neighbors(node.label) | {node.label}
        for c in node.children:
            if c.label not in allowed:
                raise DomainError("improper tree: child outside closed neighborhood")
    root_w = ws[tree.label - 1]
    p = (1 - root_w) / root_w
    for node in tree.vertices():
        p *= ws[node.label - 1]
        for c in sorted(g.neighbors(node.label)):
            p *= 1 - ws[c - 1]
    return RealInterval.point(p)


def enumerate_proper_trees(
    root: int, g: DependencyGraph, max_vertices: int
) -> list[WitnessTree]:
    """All proper witness trees rooted at `root` with at most `max_vertices`
    vertices, children drawn from closed neighborhoods (the trees the
    branching process can produce)."""
    adj = g.adjacency()

    def trees_of_size(label: int, size: int) -> list[WitnessTree]:
        if size == 1:
            return [WitnessTree(label)]
        out = []
        candidates = sorted(adj[label] | {label})
        for child_set in _nonempty_subsets(candidates):
            if len(child_set) > size - 1:
                continue
            for sizes in _compositions(size - 1, len(child_set)):
                parts = [trees_of_size(c, s) for c, s in zip(child_set, sizes)]
                out.extend(
                    WitnessTree(label, combo)
                    for combo in _cartesian(parts)
                )
        return out

    result = []
    for size in range(1, max_vertices + 1):
        result.extend(trees_of_size(root, size))
    return result


def _nonempty_subsets(items: Sequence[int]):
    n = len(items)
    for mask in range(1, 1 << n):
        yield tuple(items[i] for i in range(n) if mask >> i & 1)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _cartesian(parts: list[list[WitnessTree]]):
    if not parts:
        yield ()
        return
    for head in parts[0]:
        for tail in _cartesian(parts[1:]):
            yield (head,) + tail


# ---------------------------------------------------------------------------
# appearance probabilities and resampling bounds
# ---------------------------------------------------------------------------

def estimate_appearance_probability(
    tree: WitnessTree,
    space: VariableSpace,
    events: Sequence[EventSpec],
    trials: int,
    max_steps: int = 200,
    selection: str = "lowest_index",
) -> tuple[float, float]:
    """Monte-Carlo estimate of P(some step t has W_t equal to `tree`).

    Executions use seeds space.seed, space.seed+1, ...  Returns the raw
    estimate and the halfwidth of the Wilson 95% interval.
    """
    if trials < 100:
        raise DomainError("need at least 100 trials")
    target = tree.canonical()
    root_label = tree.label
    hits = 0
    for trial in range(trials):
        trial_space = VariableSpace(space.variables, space.seed + trial)
        log, _stats = run(trial_space, events, selection=selection, max_steps=max_steps)
        for t, s in enumerate(log.steps, start=1):
            if s.event_id != root_label:
                continue
            if witness_tree(log, events, t).canonical() == target:
                hits += 1
                break
    estimate = hits / trials
    z = 1.959963984540054
    denom = 1 + z * z / trials
    half = (
        z
        * math.sqrt(estimate * (1 - estimate) / trials + z * z / (4 * trials * trials))
        / denom
    )
    return estimate, half


def expected_resampling_bound(x: Sequence) -> RealInterval:
    """Exact value of sum_i x_i / (1 - x_i), the total-resampling bound."""
    total = Fraction(0)
    for i, v in enumerate(x):
        w = _as_fraction(v)
        if not 0 <= w < 1:
            raise DomainError(f"x[{i}]={w} outside [0, 1)")
        total += w / (1 - w)
    return RealInterval.point(total)


# ---------------------------------------------------------------------------
# instance files (shared with the CLI)
# ---------------------------------------------------------------------------

PREDICATE_REGISTRY: dict[str, Callable[[tuple[int, ...]], bool]] = {
    "monochromatic": lambda vals: len(set(vals)) == 1,
}


def _missing_color_predicate(k: int) -> Callable[[tuple[int, ...]], bool]:
    # "missing_color" needs the color count, so it is built here, not in the registry
    return lambda vals: len(set(vals)) < k


def load_instance_json(text: str) -> tuple[VariableSpace, list[EventSpec]]:
    """Parse the instance file format: variables (domain sizes with optional
    pmf), events (scope plus bad_assignments or predicate name), seed."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno, column=exc.colno)
    try:
        variables = []
        for spec in data["variables"]:
            if isinstance(spec, int):
                variables.append(Variable(spec))
            else:
                pmf = spec.get("pmf")
                variables.append(
                    Variable(spec["domain"], tuple(pmf) if pmf is not None else None)
                )
        space = VariableSpace(tuple(variables), int(data.get("seed", 0)))
        events = []
        for idx, espec in enumerate(data["events"], start=1):
            scope = tuple(int(i) for i in espec["scope"])
            if "bad_assignments" in espec:
                events.append(
                    EventSpec(
                        int(espec.get("id", idx)),
                        scope,
                        bad_assignments=frozenset(
                            tuple(a) for a in espec["bad_assignments"]
                        ),
                    )
                )
            else:
                name = espec["predicate"]
                if name == "missing_color":
                    k = int(espec["k"])
                    pred = _missing_color_predicate(k)
                elif name in PREDICATE_REGISTRY:
                    pred = PREDICATE_REGISTRY[name]
                else:
                    raise ParseError(f"unknown predicate {name!r}")
                events.append(
                    EventSpec(
                        int(espec.get("id", idx)), scope,
                        predicate=pred, predicate_name=name,
                    )
                )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed instance: {exc}") from exc
    _check_instance(space, events)
    return space, events
