"""Vectorized double-double arithmetic on numpy arrays.

A value is stored as an unevaluated sum hi + lo of two float64 components
with |lo| at most half an ulp of hi, giving about 31 significant digits
while keeping every operation a handful of vectorized numpy calls.  The
algorithms are the classical error-free transformations (Knuth two-sum,
Dekker split/two-product); no fused multiply-add is assumed.

Only what the band refinery needs is implemented: +, -, *, scaling,
comparisons and conversions.  Division is deliberately absent.
"""

from __future__ import annotations

import math
from decimal import Decimal, getcontext

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _quick_two_sum(a, b):
    # requires |a| >= |b| componentwise
    s = a + b
    err = b - (s - a)
    return s, err


def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    lo = a - hi
    return hi, lo


def _two_prod(a, b):
    p = a * b
    ahi, alo = _split(a)
    bhi, blo = _split(b)
    err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, err


class DD:
    """A numpy-array-shaped double-double number."""

    __slots__ = ("hi", "lo")

    def __init__(self, hi, lo=None):
        self.hi = np.asarray(hi, dtype=np.float64)
        self.lo = (np.zeros_like(self.hi) if lo is None
                   else np.asarray(lo, dtype=np.float64))

    # -- construction -----------------------------------------------------

    @classmethod
    def from_float(cls, x, shape=None):
        hi = np.full(shape, float(x)) if shape is not None else np.float64(x)
        return cls(hi, np.zeros_like(hi))

    @classmethod
    def from_sum(cls, a, b):
        """Exact dd value of float a + float b (renormalized)."""
        s, e = _two_sum(np.asarray(a, np.float64), np.asarray(b, np.float64))
        return cls(s, e)

    def copy(self):
        return DD(self.hi.copy(), self.lo.copy())

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, DD):
            other = DD.from_float(other)
        s1, s2 = _two_sum(self.hi, other.hi)
        t1, t2 = _two_sum(self.lo, other.lo)
        s2 = s2 + t1
        s1, s2 = _quick_two_sum(s1, s2)
        s2 = s2 + t2
        s1, s2 = _quick_two_sum(s1, s2)
        return DD(s1, s2)

    __radd__ = __add__

    def __neg__(self):
        return DD(-self.hi, -self.lo)

    def __sub__(self, other):
        if not isinstance(other, DD):
            other = DD.from_float(other)
        return self.__add__(other.__neg__())

    def __rsub__(self, other):
        return DD.from_float(other).__sub__(self)

    def __mul__(self, other):
        if not isinstance(other, DD):
            other = DD.from_float(other)
        p1, p2 = _two_prod(self.hi, other.hi)
        p2 = p2 + (self.hi * other.lo + self.lo * other.hi)
        p1, p2 = _quick_two_sum(p1, p2)
        return DD(p1, p2)

    __rmul__ = __mul__

    def scale_pow2(self, f: float):
        """Multiply by an exact power of two (componentwise exact)."""
        return DD(self.hi * f, self.lo * f)

    def __abs__(self):
        neg = self.hi < 0
        return DD(np.where(neg, -self.hi, self.hi),
                  np.where(neg, -self.lo, self.lo))

    # -- comparisons (elementwise, return bool arrays) ----------------------

    def _cmp(self, other, op_hi_strict, op_lo):
        if not isinstance(other, DD):
            other = DD.from_float(other)
        return op_hi_strict(self.hi, other.hi) | (
            (self.hi == other.hi) & op_lo(self.lo, other.lo))

    def __lt__(self, other):
        return self._cmp(other, np.less, np.less)

    def __le__(self, other):
        return self._cmp(other, np.less, np.less_equal)

    def __gt__(self, other):
        return self._cmp(other, np.greater, np.greater)

    def __ge__(self, other):
        return self._cmp(other, np.greater, np.greater_equal)

    def eq(self, other):
        if not isinstance(other, DD):
            other = DD.from_float(other)
        return (self.hi == other.hi) & (self.lo == other.lo)

    # -- shape plumbing ------------------------------------------------------

    @property
    def shape(self):
        return self.hi.shape

    def __len__(self):
        return len(self.hi)

    def __getitem__(self, idx):
        return DD(self.hi[idx], self.lo[idx])

    def put(self, mask, value: "DD"):
        """In-place masked assignment."""
        self.hi[mask] = value.hi if np.ndim(value.hi) == 0 else value.hi[...]
        self.lo[mask] = value.lo if np.ndim(value.lo) == 0 else value.lo[...]

    def where(self, mask, other: "DD") -> "DD":
        return DD(np.where(mask, self.hi, other.hi),
                  np.where(mask, self.lo, other.lo))

    # -- conversions ---------------------------------------------------------

    def to_float(self):
        return self.hi + self.lo

    def log(self):
        """Elementwise natural log as float64 (accurate to ~1 ulp of the
        dd value, enough for log-scale bookkeeping)."""
        hi = np.asarray(self.hi, np.float64)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(hi) + np.log1p(self.lo / hi)


def dd_scalar(x) -> DD:
    """A 0-d DD from a float (broadcasts against any batch)."""
    return DD.from_float(float(x))


def dd_pair(hi: float, lo: float) -> DD:
    return DD(np.float64(hi), np.float64(lo))


def dd_to_decimal(hi: float, lo: float, digits: int = 40) -> str:
    """Decimal string of hi + lo, exact addition then rounded to ``digits``."""
    getcontext().prec = digits + 10
    d = Decimal(float(hi)) + Decimal(float(lo))
    return str(+Decimal(d).normalize()) if d == 0 else _round_sig(d, digits)


def _round_sig(d: Decimal, digits: int) -> str:
    if d == 0:
        return "0"
    adj = d.adjusted()
    q = Decimal(1).scaleb(adj - digits + 1)
    return str(d.quantize(q))


def log_of_difference(hi_a: float, lo_a: float, hi_b: float, lo_b: float) -> float:
    """log(a - b) for dd scalars a > b, via exact dd subtraction."""
    a = dd_pair(hi_a, lo_a)
    b = dd_pair(hi_b, lo_b)
    d = a - b
    m_hi = float(d.hi)
    m_lo = float(d.lo)
    if m_hi <= 0:
        return float("-inf")
    return math.log(m_hi) + math.log1p(m_lo / m_hi)
