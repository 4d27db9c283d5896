"""Sufficient conditions for avoiding all bad events simultaneously.

Each check returns a ``CriterionVerdict``: a pass/fail/indeterminate
decision, the certified lower bound on P(no bad event) when one is
available, and the worst-case slack (condition LHS minus RHS).  Purely
rational conditions are decided with exact arithmetic; conditions involving
Euler's number use outward-rounded intervals with automatic precision
doubling, and report ``indeterminate`` rather than guessing when the
enclosure still straddles the threshold at the precision cap.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .depgraph import (
    DependencyDigraph,
    DependencyGraph,
    closed_neighborhood,
    independence_polynomial,
)
from .errors import DomainError
from .numeric import (
    DEFAULT_PRECISION,
    MAX_PRECISION,
    RealInterval,
    _as_fraction,
    decide_sign,
    e_interval,
)


class Verdict(enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class CriterionVerdict:
    """Outcome of a sufficient-condition check.

    ``lower_bound`` is present exactly when the criterion passes and
    certifies a quantitative bound; positivity-only criteria pass with
    ``lower_bound=None`` and ``positivity_only=True``.
    """

    holds: Verdict
    lower_bound: Optional[RealInterval]
    slack: RealInterval
    positivity_only: bool = False
    note: str = ""

    def __post_init__(self):
        if self.holds is not Verdict.PASS and self.lower_bound is not None:
            raise DomainError("lower_bound only accompanies a passing verdict")
        if (
            self.holds is Verdict.PASS
            and not self.positivity_only
            and (self.lower_bound is None or self.lower_bound.lo <= 0)
        ):
            raise DomainError("passing verdict requires a positive lower bound")

    def passed(self) -> bool:
        return self.holds is Verdict.PASS


def _point(x) -> RealInterval:
    return RealInterval.point(x)


def _verdict_from_slack(
    slack_builder,
    bound_on_pass,
    strict: bool = False,
    positivity_only: bool = False,
    note: str = "",
    start_bits: Optional[int] = None,
    max_bits: int = MAX_PRECISION,
) -> CriterionVerdict:
    """Decide `slack <= 0` (or `< 0` when strict) with precision escalation."""
    sign, slack = decide_sign(slack_builder, start_bits, max_bits)
    if sign is None:
        return CriterionVerdict(Verdict.INDETERMINATE, None, slack, note=note)
    ok = sign < 0 if strict else sign <= 0
    if not ok:
        return CriterionVerdict(Verdict.FAIL, None, slack, note=note)
    if positivity_only:
        return CriterionVerdict(
            Verdict.PASS, None, slack, positivity_only=True, note=note
        )
    return CriterionVerdict(Verdict.PASS, bound_on_pass(), slack, note=note)


# ---------------------------------------------------------------------------
# abstract criterion over an explicit dependency digraph
# ---------------------------------------------------------------------------

def abstract_lll(
    probs: Sequence, d: DependencyDigraph, x: Sequence
) -> CriterionVerdict:
    """Weighted criterion: P(A_i) <= x_i * prod_{j:(i,j) arc} (1 - x_j) for all i.

    All inputs are rational, so the decision is exact.  On pass the certified
    bound is prod_i (1 - x_i).
    """
    if len(probs) != d.n or len(x) != d.n:
        raise DomainError(
            f"length mismatch: {len(probs)} probabilities, {len(x)} weights, n={d.n}"
        )
    ps = [_as_fraction(p) for p in probs]
    xs = [_as_fraction(v) for v in x]
    for i, p in enumerate(ps):
        if not 0 <= p <= 1:
            raise DomainError(f"probability {p} at index {i} outside [0, 1]")
    for i, v in enumerate(xs):
        if not 0 <= v < 1:
            raise DomainError(f"weight {v} at index {i} outside [0, 1)")
    worst = None
    for i in range(d.n):
        rhs = xs[i]
        for j in d.out_neighbors(i + 1):
            rhs *= 1 - xs[j - 1]
        slack_i = ps[i] - rhs
        if worst is None or slack_i > worst:
            worst = slack_i
    worst = worst if worst is not None else Fraction(-1)
    if worst > 0:
        return CriterionVerdict(Verdict.FAIL, None, _point(worst))
    bound = Fraction(1)
    for v in xs:
        bound *= 1 - v
    return CriterionVerdict(Verdict.PASS, _point(bound), _point(worst))


# ---------------------------------------------------------------------------
# symmetric criteria
# ---------------------------------------------------------------------------

SYMMETRIC_VARIANTS = ("original_quarter", "e_d_plus_1", "spencer", "half", "knuth")


@dataclass(frozen=True)
class SymmetricParams:
    """Uniform probability bound p, dependency degree bound d, event count n."""

    p: Fraction
    d: int
    n: int

    def __post_init__(self):
        object.__setattr__(self, "p", _as_fraction(self.p))
        if not 0 <= self.p <= 1:
            raise DomainError(f"p={self.p} outside [0, 1]")
        if self.d < 0:
            raise DomainError("d must be nonnegative")
        if not 1 <= self.n <= 10**9:
            raise DomainError("n must lie in [1, 10^9]")


_EXACT_POWER_CAP = 10**5


def _rational_power_bound(base: Fraction, n: int) -> RealInterval:
    """base^n as a point interval when affordable, else a tight enclosure via
    exp(n log base) so huge n cannot blow up exact numerators."""
    if n <= _EXACT_POWER_CAP:
        return _point(base**n)
    return (RealInterval.point(base).log() * n).exp()


def _symmetric_bound(d: int, n: int) -> RealInterval:
    return _rational_power_bound(Fraction(d, d + 1), n)


def symmetric_check(params: SymmetricParams, variant: str) -> CriterionVerdict:
    """Symmetric-case criteria.

    Variants and their conditions:
      original_quarter  p <= 1/(4d)            (exact rational)
      e_d_plus_1        p*e*(d+1) <= 1
      spencer           p <= d^d/(d+1)^(d+1)   (exact rational)
      half              p*e*(d+1/2) <= 1
      knuth             p*e*d <= 1             (positivity only, no bound)

    All passing variants except `knuth` certify the bound (d/(d+1))^n.
    d = 0 is routed to the independent-events fast path with bound (1-p)^n,
    which requires only p < 1.
    """
    if variant not in SYMMETRIC_VARIANTS:
        raise DomainError(f"unknown variant {variant!r}; expected one of {SYMMETRIC_VARIANTS}")
    p, d, n = params.p, params.d, params.n
    if d == 0:
        slack = _point(p - 1)
        if p < 1:
            return CriterionVerdict(
                Verdict.PASS, _rational_power_bound(1 - p, n), slack,
                note="d=0: mutually independent events",
            )
        return CriterionVerdict(Verdict.FAIL, None, slack,
                                note="d=0 requires p < 1")

    if variant == "original_quarter":
        slack = p - Fraction(1, 4 * d)
        if slack > 0:
            return CriterionVerdict(Verdict.FAIL, None, _point(slack))
        return CriterionVerdict(Verdict.PASS, _symmetric_bound(d, n), _point(slack))

    if variant == "spencer":
        slack = p - Fraction(d**d, (d + 1) ** (d + 1))
        if slack > 0:
            return CriterionVerdict(Verdict.FAIL, None, _point(slack))
        return CriterionVerdict(Verdict.PASS, _symmetric_bound(d, n), _point(slack))

    if variant == "e_d_plus_1":
        factor = Fraction(d + 1)
    elif variant == "half":
        factor = d + Fraction(1, 2)
    else:  # knuth
        factor = Fraction(d)

    def slack_builder(bits: int) -> RealInterval:
        return e_interval(bits) * (p * factor) - 1

    return _verdict_from_slack(
        slack_builder,
        lambda: _symmetric_bound(d, n),
        positivity_only=(variant == "knuth"),
        note="positivity only" if variant == "knuth" else "",
    )


def shearer_threshold(d: int) -> RealInterval:
    """Optimal symmetric threshold f(d): 1/2 for d=1, (d-1)^(d-1)/d^d for d>=2.

    Exact rational, returned as a point interval.
    """
    if d < 1:
        raise DomainError("shearer_threshold requires d >= 1")
    if d == 1:
        return _point(Fraction(1, 2))
    return _point(Fraction((d - 1) ** (d - 1), d**d))


# ---------------------------------------------------------------------------
# cluster-expansion criterion over an undirected dependency graph
# ---------------------------------------------------------------------------

def cluster_expansion(
    probs: Sequence,
    g: DependencyGraph,
    y: Sequence,
    neighborhood_cap: int = 25,
) -> CriterionVerdict:
    """Independent-set weighted criterion.

    Passes iff P(A_i) <= y_i / Z_i for every i, where Z_i sums prod y_j over
    independent sets inside the closed neighborhood of i.  The certified
    bound is 1/Z with Z the same sum over the whole graph; when the whole
    graph exceeds the enumeration cap the verdict is positivity-only.
    """
    if len(probs) != g.n or len(y) != g.n:
        raise DomainError(
            f"length mismatch: {len(probs)} probabilities, {len(y)} weights, n={g.n}"
        )
    ps = [_as_fraction(p) for p in probs]
    ys = [_as_fraction(w) for w in y]
    for i, p in enumerate(ps):
        if not 0 <= p <= 1:
            raise DomainError(f"probability {p} at index {i} outside [0, 1]")
    for i, w in enumerate(ys):
        if w <= 0:
            raise DomainError(f"cluster weight {w} at index {i} must be positive")
    worst = None
    for i in range(1, g.n + 1):
        z_i = independence_polynomial(g, closed_neighborhood(g, i), ys, cap=neighborhood_cap)
        slack_i = ps[i - 1] - ys[i - 1] / z_i
        if worst is None or slack_i > worst:
            worst = slack_i
    worst = worst if worst is not None else Fraction(-1)
    if worst > 0:
        return CriterionVerdict(Verdict.FAIL, None, _point(worst))
    if g.n > neighborhood_cap:
        return CriterionVerdict(
            Verdict.PASS, None, _point(worst), positivity_only=True,
            note=f"graph larger than cap {neighborhood_cap}: positivity only",
        )
    z_all = independence_polynomial(g, range(1, g.n + 1), ys, cap=neighborhood_cap)
    return CriterionVerdict(Verdict.PASS, _point(1 / z_all), _point(worst))


@dataclass(frozen=True)
class ClusterProductReport:
    """Comparison of the independent-set bound with the plain product bound."""

    cluster_bound: RealInterval
    product_bound: RealInterval
    cluster_geq_product: bool
    x_substitution: tuple[Fraction, ...] = field(default_factory=tuple)


def cluster_vs_product(
    g: DependencyGraph, y: Sequence, cap: int = 25
) -> ClusterProductReport:
    """Cluster bound 1/Z versus product bound prod 1/(1+y_i), exactly.

    Also emits the change of variables x_i = y_i/(1+y_i) under which the
    product form becomes the standard weighted criterion.
    """
    ys = [_as_fraction(w) for w in y]
    if len(ys) != g.n:
        raise DomainError(f"expected {g.n} weights, got {len(ys)}")
    for i, w in enumerate(ys):
        if w <= 0:
            raise DomainError(f"cluster weight {w} at index {i} must be positive")
    z_all = independence_polynomial(g, range(1, g.n + 1), ys, cap=cap)
    cluster = Fraction(1) / z_all
    product = Fraction(1)
    for w in ys:
        product /= 1 + w
    xs = tuple(w / (1 + w) for w in ys)
    return ClusterProductReport(
        cluster_bound=_point(cluster),
        product_bound=_point(product),
        cluster_geq_product=cluster >= product,
        x_substitution=xs,
    )


# ---------------------------------------------------------------------------
# half-constant threshold domination
# ---------------------------------------------------------------------------

def _log_gap_builder(d: int, alpha: Fraction):
    """Interval builder for d*ln d - (d+1)*ln(d+1) + 1 + ln(d+alpha).

    Nonnegative exactly when d^d/(d+1)^(d+1) >= 1/(e*(d+alpha)).
    """

    def build(bits: int) -> RealInterval:
        ln_d = RealInterval.point(d, bits).log()
        ln_d1 = RealInterval.point(d + 1, bits).log()
        ln_da = RealInterval.point(d + alpha, bits).log()
        return ln_d * d - ln_d1 * (d + 1) + 1 + ln_da

    return build


def half_vs_spencer_holds(d: int) -> bool:
    """True iff d^d/(d+1)^(d+1) >= 1/(e*(d+1/2)), decided rigorously."""
    sign, _ = decide_sign(_log_gap_builder(d, Fraction(1, 2)), start_bits=96)
    if sign is None:
        raise DomainError(f"comparison indeterminate at precision cap for d={d}")
    return sign >= 0


def verify_half_threshold(d_max: int) -> bool:
    """Check the half-constant domination for every d in [1, d_max], plus
    finite witnesses that the constant 1/2 cannot be lowered to 0.49.

    Returns True iff d^d/(d+1)^(d+1) >= 1/(e*(d+1/2)) holds throughout and
    the substituted constant 0.49 provably fails at d in {100, 1000, 10000}
    (10**4 capped to d_max when smaller).
    """
    if d_max < 1:
        raise DomainError("d_max must be at least 1")
    for d in range(1, d_max + 1):
        if not half_vs_spencer_holds(d):
            return False
    alpha = Fraction(49, 100)
    for d in (100, 1000, 10000):
        if d > d_max:
            continue
        sign, _ = decide_sign(_log_gap_builder(d, alpha), start_bits=96)
        if sign is None or sign >= 0:
            return False  # 0.49 unexpectedly viable at this witness
    return True


# ---------------------------------------------------------------------------
# threshold values as intervals for ordering tests / reporting
# ---------------------------------------------------------------------------

def symmetric_threshold(variant: str, d: int, bits: int = DEFAULT_PRECISION) -> RealInterval:
    """The largest p the given variant tolerates at degree bound d."""
    if d < 1:
        raise DomainError("thresholds are defined for d >= 1")
    if variant == "original_quarter":
        return RealInterval.point(Fraction(1, 4 * d), bits)
    if variant == "spencer":
        return RealInterval.point(Fraction(d**d, (d + 1) ** (d + 1)), bits)
    if variant == "e_d_plus_1":
        return (e_interval(bits) * (d + 1)).reciprocal()
    if variant == "half":
        return (e_interval(bits) * (d + Fraction(1, 2))).reciprocal()
    if variant == "knuth":
        return (e_interval(bits) * d).reciprocal()
    raise DomainError(f"unknown variant {variant!r}")
