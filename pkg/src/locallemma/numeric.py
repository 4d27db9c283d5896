"""Exact and outward-rounded arithmetic primitives.

Everything threshold-shaped in this package reduces to one of:

* exact big-integer combinatorics (binomials, Stirling numbers),
* exact rational arithmetic (``fractions.Fraction``), or
* a ``RealInterval`` whose endpoints are exact rationals and whose
  transcendental steps (exp, log, roots, pi, e) are evaluated with MPFR
  directed rounding so that the true value always lies inside the interval.

Rational field operations on intervals are carried out exactly, so a
rational quantity stays a point interval; only transcendental operations
widen it, by one ulp at the working precision.  Comparisons against a
threshold are therefore decidable whenever the enclosure is narrower than
the distance to the threshold, and callers escalate precision (see
``decide_sign``) instead of guessing.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Union

import gmpy2

from .errors import DomainError, IndeterminateError, WDomainError

Rational = Union[int, float, Fraction]

DEFAULT_PRECISION = 128
MAX_PRECISION = 1024

_start_precision = DEFAULT_PRECISION


def set_default_precision(bits: int) -> None:
    """Set the starting precision for escalating decisions (CLI --precision).

    Results are unaffected unless a comparison was previously indeterminate;
    escalation always continues up to MAX_PRECISION regardless.
    """
    global _start_precision
    if not 32 <= bits <= MAX_PRECISION:
        raise DomainError(f"default precision must lie in [32, {MAX_PRECISION}]")
    _start_precision = bits


def get_default_precision() -> int:
    return _start_precision


# ---------------------------------------------------------------------------
# exact combinatorics
# ---------------------------------------------------------------------------

def binomial(n: int, k: int) -> int:
    """C(n, k) as an exact integer; 0 when k > n or k < 0."""
    if n < 0:
        raise DomainError(f"binomial: n must be nonnegative, got {n}")
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def stirling2(n: int, k: int) -> int:
    """Number of partitions of an n-set into k nonempty blocks; 0 if k not in [n].

    Computed by the triangular recurrence S(n,k) = k*S(n-1,k) + S(n-1,k-1)
    with exact integers (the alternating-sum closed form is kept separately
    as a cross-check only, to avoid cancellation in the main path).
    """
    if n < 0 or k < 0:
        raise DomainError(f"stirling2: arguments must be nonnegative, got ({n}, {k})")
    if k < 1 or k > n:
        return 0
    row = [0] * (k + 1)
    row[1] = 1  # S(1,1)
    for m in range(2, n + 1):
        top = min(m, k)
        for j in range(top, 0, -1):
            row[j] = j * row[j] + row[j - 1]
    return row[k]


def stirling2_alternating(n: int, k: int) -> int:
    """k! * S(n,k) via the alternating inclusion-exclusion sum (cross-check path)."""
    if k < 0:
        return 0
    total = 0
    for j in range(k + 1):
        term = math.comb(k, j) * j**n
        total += term if (k - j) % 2 == 0 else -term
    return total


# ---------------------------------------------------------------------------
# directed-rounding plumbing
# ---------------------------------------------------------------------------

_CTX_CACHE = threading.local()


def _ctx(bits: int, mode):
    # context objects carry per-operation flag state, so cache per thread
    cache = getattr(_CTX_CACHE, "contexts", None)
    if cache is None:
        cache = _CTX_CACHE.contexts = {}
    key = (bits, mode)
    ctx = cache.get(key)
    if ctx is None:
        ctx = cache[key] = gmpy2.context(precision=bits, round=mode)
    return ctx


def _as_fraction(x: Rational) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise DomainError(f"non-finite value {x!r}")
        return Fraction(x)  # floats are exact dyadic rationals
    if isinstance(x, str):
        return Fraction(x)  # decimal strings stay exact ("0.2" -> 1/5)
    raise TypeError(f"expected a rational value, got {type(x).__name__}")


def _mpfr_to_fraction(m) -> Fraction:
    if not gmpy2.is_finite(m):
        raise DomainError(f"non-finite MPFR result {m!r}")
    q = gmpy2.mpq(m)
    return Fraction(int(q.numerator), int(q.denominator))


def _frac_to_mpq(q: Fraction):
    return gmpy2.mpq(q.numerator, q.denominator)


def safe_float(q: Fraction) -> float:
    """float(q), saturating to +-inf instead of raising on huge magnitudes."""
    try:
        return float(q)
    except OverflowError:
        return math.inf if q > 0 else -math.inf


def _round_frac(q: Fraction, bits: int, mode) -> Fraction:
    with _ctx(bits, mode):
        return _mpfr_to_fraction(gmpy2.mpfr(_frac_to_mpq(q)))


def _apply_directed(fn, q: Fraction, bits: int, mode) -> Fraction:
    """fn(q) with every step (conversion included) rounded in direction `mode`."""
    with _ctx(bits, mode):
        return _mpfr_to_fraction(fn(gmpy2.mpfr(_frac_to_mpq(q))))


# ---------------------------------------------------------------------------
# RealInterval
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RealInterval:
    """Closed interval [lo, hi] with exact rational endpoints.

    Invariants: lo <= hi, and the represented true value lies in [lo, hi].
    ``precision_bits`` is the working precision used for transcendental
    operations derived from this interval.
    """

    lo: Fraction
    hi: Fraction
    precision_bits: int = DEFAULT_PRECISION

    def __post_init__(self):
        if self.lo > self.hi:
            raise DomainError(f"interval endpoints out of order: {self.lo} > {self.hi}")
        if self.precision_bits < 2:
            raise DomainError("precision_bits must be at least 2")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def point(x: Rational, bits: int = DEFAULT_PRECISION) -> "RealInterval":
        q = _as_fraction(x)
        return RealInterval(q, q, bits)

    @staticmethod
    def bounds(lo: Rational, hi: Rational, bits: int = DEFAULT_PRECISION) -> "RealInterval":
        return RealInterval(_as_fraction(lo), _as_fraction(hi), bits)

    # -- inspection ---------------------------------------------------------

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __float__(self) -> float:
        return safe_float(self.mid)

    def contains(self, x: Rational) -> bool:
        q = _as_fraction(x)
        return self.lo <= q <= self.hi

    def is_point(self) -> bool:
        return self.lo == self.hi

    def __repr__(self) -> str:
        return f"RealInterval({safe_float(self.lo):.17g}, {safe_float(self.hi):.17g})"

    # -- exact field operations ---------------------------------------------

    def _coerce(self, other) -> "RealInterval":
        if isinstance(other, RealInterval):
            return other
        return RealInterval.point(other, self.precision_bits)

    def _bits(self, other: "RealInterval") -> int:
        return max(self.precision_bits, other.precision_bits)

    def __add__(self, other) -> "RealInterval":
        o = self._coerce(other)
        return RealInterval(self.lo + o.lo, self.hi + o.hi, self._bits(o))

    __radd__ = __add__

    def __neg__(self) -> "RealInterval":
        return RealInterval(-self.hi, -self.lo, self.precision_bits)

    def __sub__(self, other) -> "RealInterval":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "RealInterval":
        return (-self) + self._coerce(other)

    def __mul__(self, other) -> "RealInterval":
        o = self._coerce(other)
        products = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return RealInterval(min(products), max(products), self._bits(o))

    __rmul__ = __mul__

    def reciprocal(self) -> "RealInterval":
        if self.lo <= 0 <= self.hi:
            raise DomainError("reciprocal of an interval containing zero")
        return RealInterval(1 / self.hi, 1 / self.lo, self.precision_bits)

    def __truediv__(self, other) -> "RealInterval":
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other) -> "RealInterval":
        return self._coerce(other) * self.reciprocal()

    def __pow__(self, n: int) -> "RealInterval":
        if not isinstance(n, int):
            raise TypeError("interval powers are integer-only; use exp/log otherwise")
        if n < 0:
            return (self ** (-n)).reciprocal()
        if n == 0:
            return RealInterval.point(1, self.precision_bits)
        a, b = self.lo**n, self.hi**n
        if n % 2 == 1 or self.lo >= 0:
            return RealInterval(a, b, self.precision_bits)
        if self.hi <= 0:
            return RealInterval(b, a, self.precision_bits)
        return RealInterval(Fraction(0), max(a, b), self.precision_bits)

    def abs(self) -> "RealInterval":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return RealInterval(Fraction(0), max(-self.lo, self.hi), self.precision_bits)

    # -- transcendental operations (outward rounded) --------------------------

    def exp(self) -> "RealInterval":
        bits = self.precision_bits
        lo = _apply_directed(gmpy2.exp, self.lo, bits, gmpy2.RoundDown)
        hi = _apply_directed(gmpy2.exp, self.hi, bits, gmpy2.RoundUp)
        return RealInterval(lo, hi, bits)

    def log(self) -> "RealInterval":
        if self.lo <= 0:
            raise DomainError("log of an interval reaching zero or below")
        bits = self.precision_bits
        lo = _apply_directed(gmpy2.log, self.lo, bits, gmpy2.RoundDown)
        hi = _apply_directed(gmpy2.log, self.hi, bits, gmpy2.RoundUp)
        return RealInterval(lo, hi, bits)

    def sqrt(self) -> "RealInterval":
        if self.lo < 0:
            raise DomainError("sqrt of a negative interval")
        bits = self.precision_bits
        lo = _apply_directed(gmpy2.sqrt, self.lo, bits, gmpy2.RoundDown)
        hi = _apply_directed(gmpy2.sqrt, self.hi, bits, gmpy2.RoundUp)
        return RealInterval(lo, hi, bits)

    def root(self, k: int) -> "RealInterval":
        if k < 1:
            raise DomainError("root index must be positive")
        if self.lo < 0:
            raise DomainError("root of a negative interval")
        bits = self.precision_bits
        lo = _apply_directed(lambda m: gmpy2.root(m, k), self.lo, bits, gmpy2.RoundDown)
        hi = _apply_directed(lambda m: gmpy2.root(m, k), self.hi, bits, gmpy2.RoundUp)
        return RealInterval(lo, hi, bits)

    def with_precision(self, bits: int) -> "RealInterval":
        return RealInterval(self.lo, self.hi, bits)

    # -- certain comparisons --------------------------------------------------
    # Each returns True/False when the relation is certain, None when the
    # intervals overlap in a way that leaves it undecided.

    def certainly_leq(self, other) -> Optional[bool]:
        o = self._coerce(other)
        if self.hi <= o.lo:
            return True
        if self.lo > o.hi:
            return False
        return None

    def certainly_lt(self, other) -> Optional[bool]:
        o = self._coerce(other)
        if self.hi < o.lo:
            return True
        if self.lo >= o.hi:
            return False
        return None

    def certainly_geq(self, other) -> Optional[bool]:
        o = self._coerce(other)
        return o.certainly_leq(self)

    def certainly_gt(self, other) -> Optional[bool]:
        o = self._coerce(other)
        return o.certainly_lt(self)


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------

def e_interval(precision_bits: int = DEFAULT_PRECISION) -> RealInterval:
    """Rigorous enclosure of Euler's number; width <= 2^(4 - precision_bits)."""
    if precision_bits < 32:
        raise DomainError("e_interval requires precision_bits >= 32")
    return RealInterval.point(1, precision_bits).exp()


def pi_interval(precision_bits: int = DEFAULT_PRECISION) -> RealInterval:
    with _ctx(precision_bits, gmpy2.RoundDown):
        lo = _mpfr_to_fraction(gmpy2.const_pi())
    with _ctx(precision_bits, gmpy2.RoundUp):
        hi = _mpfr_to_fraction(gmpy2.const_pi())
    return RealInterval(lo, hi, precision_bits)


# ---------------------------------------------------------------------------
# decision helpers with precision escalation
# ---------------------------------------------------------------------------

def decide_sign(
    build: Callable[[int], RealInterval],
    start_bits: Optional[int] = None,
    max_bits: int = MAX_PRECISION,
) -> tuple[Optional[int], RealInterval]:
    """Decide the sign of the quantity enclosed by ``build(bits)``.

    Returns (-1, iv) when certainly negative, (+1, iv) when certainly
    positive, (0, iv) when some build produced an exact zero point, and
    (None, iv) when still straddling zero at ``max_bits``.
    """
    bits = start_bits if start_bits is not None else get_default_precision()
    while True:
        iv = build(bits)
        if iv.hi < 0:
            return -1, iv
        if iv.lo > 0:
            return 1, iv
        if iv.lo == iv.hi == 0:
            return 0, iv
        if bits >= max_bits:
            return None, iv
        bits = min(bits * 2, max_bits)


def floor_interval(
    build: Callable[[int], RealInterval],
    start_bits: Optional[int] = None,
    max_bits: int = MAX_PRECISION,
) -> int:
    """Floor of the enclosed value, escalating precision until unambiguous."""
    bits = start_bits if start_bits is not None else get_default_precision()
    while True:
        iv = build(bits)
        flo = iv.lo.numerator // iv.lo.denominator
        fhi = iv.hi.numerator // iv.hi.denominator
        if flo == fhi:
            return flo
        if bits >= max_bits:
            raise IndeterminateError(
                f"floor still ambiguous at {max_bits} bits: enclosure {iv!r}"
            )
        bits = min(bits * 2, max_bits)


def ceil_interval(
    build: Callable[[int], RealInterval],
    start_bits: Optional[int] = None,
    max_bits: int = MAX_PRECISION,
) -> int:
    return -floor_interval(lambda b: -build(b), start_bits, max_bits)


# ---------------------------------------------------------------------------
# Lambert W, secondary real branch
# ---------------------------------------------------------------------------

def _w_minus1_mpfr(x: Fraction, bits: int):
    """Approximate W_-1(x) at `bits` working precision (round-to-nearest).

    Halley iteration seeded by the asymptotic ln(-x) - ln(-ln(-x)) away from
    the branch point and by the branch-point series near it; falls back to
    bisection on the monotone branch if the iteration misbehaves.
    """
    with _ctx(bits + 32, gmpy2.RoundToNearest):
        xm = gmpy2.mpfr(_frac_to_mpq(x))
        one = gmpy2.mpfr(1)
        # branch-point series in p = -sqrt(2(e*x + 1)); exact at p = 0
        s = 2 * (gmpy2.exp(one) * xm + 1)
        if s < 0:
            s = gmpy2.mpfr(0)
        p = -gmpy2.sqrt(s)
        if abs(p) < gmpy2.mpfr("1e-5"):
            w = -1 + p - p * p / 3 + 11 * p**3 / 72 - 43 * p**4 / 540
            return gmpy2.mpfr(w)
        if xm > gmpy2.mpfr("-0.27"):
            l1 = gmpy2.log(-xm)
            w = l1 - gmpy2.log(-l1)
        else:
            w = -1 + p - p * p / 3 + 11 * p**3 / 72
        tol = gmpy2.mpfr(2) ** (-(bits + 8))
        converged = False
        for _ in range(200):
            ew = gmpy2.exp(w)
            f = w * ew - xm
            wp1 = w + 1
            if wp1 >= 0:
                break  # left the branch; fall back to bisection
            denom = ew * wp1 - (w + 2) * f / (2 * wp1)
            if denom == 0:
                break
            dw = f / denom
            w = w - dw
            if abs(dw) <= abs(w) * tol:
                converged = True
                break
        if converged and w <= -1:
            return gmpy2.mpfr(w)
        # bisection fallback: w*e^w is decreasing on (-inf, -1]
        hi = gmpy2.mpfr(-1)
        lo = gmpy2.mpfr(-2)
        while lo * gmpy2.exp(lo) < xm:  # value below x: lo not far enough left
            lo = lo * 2
        for _ in range(bits + 40):
            mid = (lo + hi) / 2
            if mid * gmpy2.exp(mid) >= xm:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2


_BRANCH_POINT_TOL = Fraction(1, 2**45)


def _check_w_domain(x: Fraction, bits: int) -> Optional[Fraction]:
    """Validate x in [-1/e, 0).  Returns -1 (as Fraction) if x is the branch
    point up to a few ulps of double precision (callers hand us floats for
    -1/e), else None.  Raises when x is clearly below -1/e or nonnegative."""
    if x >= 0:
        raise WDomainError(f"lambert_w_minus1: argument must be negative, got {x}")
    neg_inv_e = -e_interval(bits).reciprocal()
    if x < neg_inv_e.lo - _BRANCH_POINT_TOL:
        raise WDomainError(
            f"lambert_w_minus1: argument {float(x):.17g} lies below -1/e"
        )
    if x <= neg_inv_e.hi:
        return Fraction(-1)  # at the branch point within tolerance
    return None


def lambert_w_minus1(x: Rational, precision_bits: int = DEFAULT_PRECISION) -> float:
    """Secondary real branch: w <= -1 with w*e^w = x, for x in [-1/e, 0).

    Relative residual |w e^w - x| <= 1e-12 |x|.
    """
    q = _as_fraction(x)
    at_branch = _check_w_domain(q, precision_bits)
    if at_branch is not None:
        return -1.0
    return float(_w_minus1_mpfr(q, max(precision_bits, 96)))


def lambert_w_minus1_interval(
    x: RealInterval, precision_bits: int = DEFAULT_PRECISION
) -> RealInterval:
    """Rigorous enclosure of W_-1 over the interval x (subset of [-1/e, 0)).

    The candidate bracket around the point approximations is certified by
    sign checks of w*e^w - x with exact interval arithmetic, so the result
    is sound regardless of how the approximation was produced.
    """
    bits = max(precision_bits, 96)
    for q in (x.lo, x.hi):
        if _check_w_domain(q, bits) is not None:
            raise WDomainError(
                "lambert_w_minus1_interval: endpoint at the branch point; "
                "enclosure would be unbounded above -1 only"
            )
    # W_-1 is decreasing in x: true range is [W(x.hi), W(x.lo)]
    w_lo_approx = _mpfr_to_fraction(_w_minus1_mpfr(x.hi, bits))
    w_hi_approx = _mpfr_to_fraction(_w_minus1_mpfr(x.lo, bits))
    pad = max(abs(w_lo_approx), Fraction(1)) * Fraction(1, 2 ** (bits // 2))
    for _ in range(64):
        w_lo = min(w_lo_approx - pad, Fraction(-1))
        w_hi = min(w_hi_approx + pad, Fraction(-1))
        # f(w) = w e^w is decreasing on (-inf,-1]; certify f(w_lo) >= x.hi
        # (so w_lo is left of every solution) and f(w_hi) <= x.lo.
        f_lo = RealInterval.point(w_lo, bits) * RealInterval.point(w_lo, bits).exp()
        f_hi = RealInterval.point(w_hi, bits) * RealInterval.point(w_hi, bits).exp()
        if f_lo.lo >= x.hi and f_hi.hi <= x.lo:
            return RealInterval(w_lo, w_hi, bits)
        pad *= 4
    raise IndeterminateError("lambert_w_minus1_interval: failed to certify a bracket")
