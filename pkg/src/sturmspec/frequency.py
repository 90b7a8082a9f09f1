"""Continued-fraction arithmetic for eventually periodic frequencies.

A frequency is described by a finite prefix block b1..bm followed by an
infinitely repeated period block a1..ak, i.e. the partial quotients read
prefix first and then cycle through the period forever.  Convergents are
computed with exact integers; they grow exponentially and must never
saturate, so no fixed-width arithmetic is used anywhere here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator


@dataclass(frozen=True)
class FrequencySpec:
    """An eventually periodic frequency alpha = [b1..bm, repeat(a1..ak)].

    All partial quotients are >= 1 and the period block is nonempty.
    """

    prefix: tuple[int, ...]
    period: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(int(b) for b in self.prefix))
        object.__setattr__(self, "period", tuple(int(a) for a in self.period))
        if not self.period:
            raise ValueError("period block must be nonempty")
        if any(b < 1 for b in self.prefix) or any(a < 1 for a in self.period):
            raise ValueError("partial quotients must be positive integers")

    def quotient(self, j: int) -> int:
        """The j-th partial quotient (1-indexed), prefix first then cyclic."""
        if j < 1:
            raise ValueError("quotient index starts at 1")
        m = len(self.prefix)
        if j <= m:
            return self.prefix[j - 1]
        return self.period[(j - m - 1) % len(self.period)]

    def quotients(self, n: int) -> tuple[int, ...]:
        """The first n partial quotients."""
        return tuple(self.quotient(j) for j in range(1, n + 1))


@dataclass
class Convergents:
    """Exact convergent pairs (p_n, q_n) for n = -1..N.

    p[-1] = 1, p[0] = 0 and q[-1] = 0, q[0] = 1, then
    p_{n+1} = a_{n+1} p_n + p_{n-1} and q_{n+1} = a_{n+1} q_n + q_{n-1}.
    Index access is offset so that ``p(n)``/``q(n)`` take n >= -1.
    """

    spec: FrequencySpec
    N: int
    _p: list[int] = field(repr=False, default_factory=list)
    _q: list[int] = field(repr=False, default_factory=list)

    def __post_init__(self):
        if self.N < 0:
            raise ValueError("N must be >= 0")
        p, q = [1, 0], [0, 1]
        for n in range(self.N):
            a = self.spec.quotient(n + 1)
            p.append(a * p[-1] + p[-2])
            q.append(a * q[-1] + q[-2])
        self._p, self._q = p, q

    def p(self, n: int) -> int:
        return self._p[n + 1]

    def q(self, n: int) -> int:
        return self._q[n + 1]

    def pairs(self) -> Iterator[tuple[int, int]]:
        """Yield (p_n, q_n) for n = -1..N."""
        return iter(zip(self._p, self._q))

    def ratio(self, n: int) -> Fraction:
        """The n-th convergent p_n/q_n as an exact rational (n >= 1)."""
        return Fraction(self.p(n), self.q(n))


def convergents(spec: FrequencySpec, N: int) -> Convergents:
    """Exact convergents of ``spec`` up to index N."""
    return Convergents(spec, N)


def canonical_spec(period) -> FrequencySpec:
    """The canonical representative [1, repeat(a1..ak)] of a periodic tail.

    Every frequency with the same period block shares its spectral
    characteristics with this one, so it is the frequency all band and
    pressure computations are anchored to.
    """
    return FrequencySpec(prefix=(1,), period=tuple(period))


def value(spec: FrequencySpec, precision: float) -> Fraction:
    """The frequency itself, as an exact rational within the requested error.

    Returns p_n/q_n for the first n with 1/q_n^2 below ``precision * alpha``;
    the classical bound |alpha - p_n/q_n| <= 1/q_n^2 then gives the stated
    relative accuracy.  The result is a Fraction so callers may request any
    precision without floating-point limits.
    """
    if precision <= 0:
        raise ValueError("precision must be positive")
    # alpha >= 1/(a1 + 1), cheap lower bound for the relative-error target.
    alpha_floor = Fraction(1, spec.quotient(1) + 1)
    target = Fraction(precision).limit_denominator(10**30) * alpha_floor
    p, pm = 0, 1
    q, qm = 1, 0
    n = 0
    while True:
        n += 1
        a = spec.quotient(n)
        p, pm = a * p + pm, p
        q, qm = a * q + qm, q
        if Fraction(1, q * q) <= target:
            return Fraction(p, q)
        if n > 4000:  # unreachable for valid quotients; q_n >= Fibonacci(n)
            raise RuntimeError("convergents failed to reach requested precision")
