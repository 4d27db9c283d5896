"""Diagonal Ramsey lower-bound thresholds and their asymptotic regime.

Two sufficient conditions certify R(k,k) > n from a random 2-coloring of
the complete graph: one bounds the number of dependent clique events by a
union bound (variant tag ``ver3``), the other counts them exactly
(``ver4``).  Both reduce to comparing an exact integer times an exact
dyadic scale against 1/e, decided with outward-rounded intervals.

The asymptotic side provides the smallest k beyond which the
(1-eps)*(sqrt(2)/e)*k*2^(k/2) lower bound is certified: a closed form via
the secondary Lambert W branch, an independent scan of the defining
inequality, and the double-log approximation used for plotting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .criteria import Verdict
from .errors import DomainError, IndeterminateError, WDomainError
from .numeric import (
    DEFAULT_PRECISION,
    RealInterval,
    _as_fraction,
    binomial,
    ceil_interval,
    decide_sign,
    e_interval,
    get_default_precision,
    lambert_w_minus1_interval,
    pi_interval,
)

RAMSEY_VARIANTS = ("ver3", "ver4")
MAX_K_EXACT = 64

TABLE1_KS = (10, 15, 20, 25, 30, 35, 40)


@dataclass(frozen=True)
class RamseyQuery:
    k: int
    variant: str = "ver3"

    def __post_init__(self):
        if self.k < 3:
            raise DomainError("k must be at least 3")
        if self.variant not in RAMSEY_VARIANTS:
            raise DomainError(f"variant must be one of {RAMSEY_VARIANTS}")


def _dependent_count_union_bound(k: int, n: int) -> int:
    return binomial(k, 2) * binomial(n - 2, k - 2)


def _dependent_count_exact(k: int, n: int) -> int:
    return binomial(n, k) - binomial(n - k, k) - k * binomial(n - k, k - 1)


def _condition_sign(count: int, k: int) -> Optional[int]:
    """Sign of e * count * 2^(1 - C(k,2)) - 1, decided rigorously."""
    scale = Fraction(count) * Fraction(2) ** (1 - binomial(k, 2))

    def build(bits: int) -> RealInterval:
        return e_interval(bits) * scale - 1

    sign, _ = decide_sign(build)
    return sign


def _decide(count: int, k: int) -> Verdict:
    sign = _condition_sign(count, k)
    if sign is None:
        return Verdict.INDETERMINATE
    return Verdict.PASS if sign <= 0 else Verdict.FAIL


def condition_union_bound(k: int, n: int) -> Verdict:
    """Does e * C(k,2) * C(n-2,k-2) * 2^(1-C(k,2)) <= 1 hold?  (tag: ver3)"""
    if k < 3 or n < k:
        raise DomainError("requires k >= 3 and n >= k")
    return _decide(_dependent_count_union_bound(k, n), k)


def condition_exact_count(k: int, n: int) -> Verdict:
    """Does e * [C(n,k) - C(n-k,k) - k*C(n-k,k-1)] * 2^(1-C(k,2)) <= 1 hold?
    (tag: ver4; conventions C(m,j)=0 for m<j)"""
    if k < 3 or n < k:
        raise DomainError("requires k >= 3 and n >= k")
    return _decide(_dependent_count_exact(k, n), k)


_CONDITIONS: dict[str, Callable[[int, int], Verdict]] = {
    "ver3": condition_union_bound,
    "ver4": condition_exact_count,
}


def max_n(query: RamseyQuery, allow_large_k: bool = False) -> int:
    """Largest n for which the variant condition holds, i.e. the reported
    lower bound in the sense R(k,k) > n.

    Exploits strict monotonicity of the dependent-event count in n:
    exponential doubling from n = k, then binary search.  ``allow_large_k``
    lifts the practicality cap of k <= 64.
    """
    k = query.k
    if k > MAX_K_EXACT and not allow_large_k:
        raise DomainError(f"k={k} above exact-arithmetic cap {MAX_K_EXACT}")
    cond = _CONDITIONS[query.variant]
    if cond(k, k) is not Verdict.PASS:
        raise DomainError(f"criterion {query.variant} holds for no n >= k at k={k}")
    lo = k  # known to hold
    hi = 2 * k
    while cond(k, hi) is Verdict.PASS:
        lo = hi
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        verdict = cond(k, mid)
        if verdict is Verdict.INDETERMINATE:
            raise IndeterminateError(f"indeterminate at n={mid} after precision escalation")
        if verdict is Verdict.PASS:
            lo = mid
        else:
            hi = mid
    return lo


# The published table prints lower bounds in the "R(k,k) >= value" sense:
# value = (largest n certified by the condition) + 1.  Determined by direct
# comparison against all fourteen table entries; see reported_lower_bound.
TABLE_CONVENTION = "R(k,k) >= value (largest certified n, plus one)"


def reported_lower_bound(query: RamseyQuery, allow_large_k: bool = False) -> int:
    """Table-entry value: smallest n with R(k,k) >= n certified."""
    return max_n(query, allow_large_k=allow_large_k) + 1


def table_rows(ks: Sequence[int] = TABLE1_KS) -> list[tuple[int, int, int]]:
    """(k, union-bound value, exact-count value) rows under TABLE_CONVENTION."""
    return [
        (
            k,
            reported_lower_bound(RamseyQuery(k, "ver3")),
            reported_lower_bound(RamseyQuery(k, "ver4")),
        )
        for k in ks
    ]


def asymptotic_lower_bound(k: int, epsilon: float) -> float:
    """(1 - eps) * (sqrt(2)/e) * k * 2^(k/2)."""
    if not 0 <= epsilon < 1:
        raise DomainError("epsilon must lie in [0, 1)")
    if k < 1:
        raise DomainError("k must be positive")
    return (1 - epsilon) * (math.sqrt(2) / math.e) * k * 2.0 ** (k / 2)


# ---------------------------------------------------------------------------
# smallest valid k for the asymptotic bound
# ---------------------------------------------------------------------------

def scan_constant_interval(bits: int = DEFAULT_PRECISION) -> RealInterval:
    """sqrt(3/(8*pi)) * e^3, the prefactor of the defining inequality."""
    three_over_8pi = RealInterval.point(3, bits) / (pi_interval(bits) * 8)
    e3 = e_interval(bits) ** 3
    return three_over_8pi.sqrt() * e3


def beta_interval(bits: int = DEFAULT_PRECISION) -> RealInterval:
    """(4/(3 e^2)) * (pi/3)^(1/3), the Lambert-argument prefactor."""
    e2 = e_interval(bits) ** 2
    cbrt = (pi_interval(bits) / 3).root(3)
    return (RealInterval.point(4, bits) / (e2 * 3)) * cbrt


def _log_condition_sign(k: int, ln_scan_c: RealInterval, ln_one_minus_eps: RealInterval,
                        bits: int) -> Optional[int]:
    """Sign of ln C + (3/2) ln k + (k-2) ln(1-eps); <= 0 means k satisfies."""
    lnk = RealInterval.point(k, bits).log()
    val = ln_scan_c + lnk * Fraction(3, 2) + ln_one_minus_eps * (k - 2)
    if val.hi < 0:
        return -1
    if val.lo > 0:
        return 1
    return None


def min_valid_k_scan(epsilon, precision_bits: Optional[int] = None) -> int:
    """Smallest integer k >= 3 with sqrt(3/(8 pi)) e^3 k^(3/2) (1-eps)^(k-2) <= 1,
    by direct rigorous scan.  This is the independent oracle for the closed form."""
    eps = _as_fraction(epsilon)
    if not 0 < eps < 1:
        raise DomainError("epsilon must lie in (0, 1)")
    bits = precision_bits if precision_bits is not None else get_default_precision()
    ln_c = scan_constant_interval(bits).log()
    ln_ome = RealInterval.point(1 - eps, bits).log()
    k = 3
    while True:
        sign = _log_condition_sign(k, ln_c, ln_ome, bits)
        if sign is None:
            # escalate precision for this point only
            hi_bits = bits
            while sign is None and hi_bits < 1024:
                hi_bits *= 2
                sign = _log_condition_sign(
                    k,
                    scan_constant_interval(hi_bits).log(),
                    RealInterval.point(1 - eps, hi_bits).log(),
                    hi_bits,
                )
            if sign is None:
                raise IndeterminateError(f"scan indeterminate at k={k}")
        if sign <= 0:
            return k
        k += 1
        if k > 10**7:
            raise DomainError("scan runaway; epsilon too small")


def min_valid_k_closed_form(epsilon, precision_bits: Optional[int] = None) -> int:
    """Smallest valid k via the closed form

        max{3, ceil( 3 W_-1(beta ln(1-eps) (1-eps)^(4/3)) / (2 ln(1-eps)) )}

    evaluated with rigorous interval arithmetic throughout.  Raises
    WDomainError if the Lambert argument leaves [-1/e, 0) (not expected for
    eps in (0,1); callers may fall back to the scan).
    """
    eps = _as_fraction(epsilon)
    if not 0 < eps < 1:
        raise DomainError("epsilon must lie in (0, 1)")

    def value(bits: int) -> RealInterval:
        ln_ome = RealInterval.point(1 - eps, bits).log()
        pow43 = (ln_ome * Fraction(4, 3)).exp()
        arg = beta_interval(bits) * ln_ome * pow43
        w = lambert_w_minus1_interval(arg, bits)
        return (w * 3) / (ln_ome * 2)

    start = precision_bits if precision_bits is not None else get_default_precision()
    return max(3, ceil_interval(value, start_bits=max(start, 96)))


def min_valid_k_approx(epsilon: float) -> float:
    """Double-log approximation (3/(2 eps)) [ln(1/(beta eps)) + ln ln(1/(beta eps))]."""
    eps = float(epsilon)
    if not 0 < eps < 1:
        raise DomainError("epsilon must lie in (0, 1)")
    beta = float(beta_interval(96).mid)
    inv = 1.0 / (beta * eps)
    if inv <= math.e:
        raise DomainError("approximation undefined: 1/(beta*eps) must exceed e")
    return 1.5 / eps * (math.log(inv) + math.log(math.log(inv)))


@dataclass(frozen=True)
class CurveRow:
    epsilon: float
    k_exact: int
    k_approx: float
    used_scan_fallback: bool = False


def asymptotic_threshold_curve(eps_grid: Sequence[float]) -> list[CurveRow]:
    """Rows (eps, exact smallest valid k, approximation) for plotting/CSV.

    The exact column is cross-checked against the independent scan on every
    grid point; a mismatch raises.  A signaled Lambert-domain error falls
    back to the scan and flags the row.
    """
    rows = []
    for eps in eps_grid:
        if not 0 < eps < 1:
            raise DomainError(f"grid point {eps} outside (0, 1)")
        scan = min_valid_k_scan(eps)
        fallback = False
        try:
            exact = min_valid_k_closed_form(eps)
        except WDomainError:
            exact = scan
            fallback = True
        if exact != scan:
            raise DomainError(
                f"closed form {exact} disagrees with scan {scan} at eps={eps}"
            )
        rows.append(CurveRow(float(eps), exact, min_valid_k_approx(eps), fallback))
    return rows
