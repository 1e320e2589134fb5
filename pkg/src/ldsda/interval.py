"""Closed real intervals with plain floating-point endpoint arithmetic.

No outward rounding is performed; callers that use these enclosures to
prune must add their own slack.
"""
import math

INF = math.inf


class Interval:
    """Closed interval ``[lo, hi]`` that may be unbounded or empty."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo=-INF, hi=INF):
        lo = float(lo)
        hi = float(hi)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval endpoints must not be NaN")
        self.lo = lo
        self.hi = hi

    @classmethod
    def point(cls, v):
        return cls(v, v)

    @property
    def is_empty(self):
        return self.lo > self.hi

    def __repr__(self):
        if self.is_empty:
            return "Interval.EMPTY"
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __eq__(self, other):
        if not isinstance(other, Interval):
            return NotImplemented
        if self.is_empty and other.is_empty:
            return True
        return self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        if self.is_empty:
            return hash("empty")
        return hash((self.lo, self.hi))

    def __contains__(self, v):
        return self.lo <= v <= self.hi

    def contains_zero(self):
        return self.lo <= 0.0 <= self.hi

    def width(self):
        if self.is_empty:
            return 0.0
        return self.hi - self.lo

    def intersect(self, other):
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo > hi:
            return EMPTY
        return Interval(lo, hi)

    def hull(self, other):
        if self.is_empty:
            return other
        if other.is_empty:
            return self
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def subset_of(self, other):
        if self.is_empty:
            return True
        return other.lo <= self.lo and self.hi <= other.hi

    # arithmetic ---------------------------------------------------------

    def __neg__(self):
        if self.is_empty:
            return EMPTY
        return Interval(-self.hi, -self.lo)

    def __add__(self, other):
        other = _as_interval(other)
        if self.is_empty or other.is_empty:
            return EMPTY
        return Interval(_add(self.lo, other.lo, -INF), _add(self.hi, other.hi, INF))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_as_interval(other))

    def __rsub__(self, other):
        return _as_interval(other) + (-self)

    def __mul__(self, other):
        other = _as_interval(other)
        if self.is_empty or other.is_empty:
            return EMPTY
        products = [
            _mul(self.lo, other.lo),
            _mul(self.lo, other.hi),
            _mul(self.hi, other.lo),
            _mul(self.hi, other.hi),
        ]
        if any(math.isnan(p) for p in products):
            # 0 * inf: give up on a tight enclosure
            return Interval(-INF, INF)
        return Interval(min(products), max(products))

    __rmul__ = __mul__

    def reciprocal(self):
        if self.is_empty:
            return EMPTY
        if self.contains_zero():
            # also covers [0, b] and [a, 0]; a one-sided result would be valid
            # but the conservative choice is simpler
            return Interval(-INF, INF)
        return Interval(1.0 / self.hi, 1.0 / self.lo)

    def __truediv__(self, other):
        other = _as_interval(other)
        if self.is_empty or other.is_empty:
            return EMPTY
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return _as_interval(other) / self

    def exp(self):
        if self.is_empty:
            return EMPTY
        return Interval(_exp(self.lo), _exp(self.hi))

    def log(self):
        if self.is_empty or self.hi <= 0.0:
            return EMPTY
        lo = -INF if self.lo <= 0.0 else math.log(self.lo)
        return Interval(lo, math.log(self.hi))

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("only integer exponents are supported")
        if self.is_empty:
            return EMPTY
        if n == 0:
            return Interval(1.0, 1.0)
        if n < 0:
            return (self ** (-n)).reciprocal()
        lo, hi = _pow(self.lo, n), _pow(self.hi, n)
        if n % 2 == 1:
            return Interval(lo, hi)
        if self.contains_zero():
            return Interval(0.0, max(lo, hi))
        return Interval(min(lo, hi), max(lo, hi))


def _as_interval(v):
    if isinstance(v, Interval):
        return v
    return Interval(v, v)


def _add(a, b, nan_fallback):
    s = a + b
    return nan_fallback if math.isnan(s) else s


def _mul(a, b):
    if (a == 0.0 and math.isinf(b)) or (b == 0.0 and math.isinf(a)):
        return math.nan
    return a * b


def _exp(v):
    try:
        return math.exp(v)
    except OverflowError:
        return INF


def _pow(v, n):
    try:
        return v ** n
    except OverflowError:
        return math.copysign(INF, v) if n % 2 else INF


EMPTY = Interval.__new__(Interval)
EMPTY.lo = INF
EMPTY.hi = -INF
