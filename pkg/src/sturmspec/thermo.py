"""Thermodynamics on the block subshift: potential, pressure, mean cycles.

The geometric potential of a block word is the log length of its embedded
band, which depends only on the word itself (zero variation over the
cylinder), so finite-level pressure sums are exact log-sum-exps over one
tree level.  Each finite-level pressure is convex and strictly decreasing
in s by construction; the infinite-level value is approached at rate C/n,
estimated empirically from the last two levels and reported as a bracket,
never asserted.

Large-coupling asymptotics are governed by the min/max mean cycle of an
integer vertex weight on the block graph, computed exactly in rational
arithmetic (Karp) with a witness cycle extracted from the tight subgraph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import logsumexp

from .bands import BandTree, TransferContext
from .errors import ConvergenceError, InvariantError
from .frequency import canonical_spec
from .symbolic import (BlockLetter, BlockWord, block_admissible,
                       block_alphabet, embed_word, incidence_matrix,
                       validate_word, word_str)

DEFAULT_WORD_BUDGET = 2_000_000
_FD_STEP = 1e-4
_MIN_LEVEL = 2


# ---------------------------------------------------------------------------
# potential and the weak-Gibbs metric
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PotentialSample:
    """Log band length of an embedded block word (always negative)."""

    word: BlockWord
    value: float


class PressureAnalysis:
    """Shared band tree plus cached potential arrays for one (period, lam).

    Block level n reads off tree level n*k + 1; the bands at that tree
    level are exactly the embedded admissible block words of length n, so
    the cached array of log lengths is the full potential sample for the
    level, in canonical word order.
    """

    def __init__(self, period, lam: float, node_budget: int = 2_000_000):
        self.a = tuple(int(x) for x in period)
        self.k = len(self.a)
        self.lam = float(lam)
        self.spec = canonical_spec(self.a)
        self.ctx = TransferContext(self.spec, self.lam, node_budget=node_budget)
        self.tree = BandTree(self.ctx)
        self._psi: dict[int, np.ndarray] = {}

    # -- potentials ----------------------------------------------------------

    def psi_values(self, n: int) -> np.ndarray:
        """Log lengths of all embedded level-n words, canonical order."""
        if n < 1:
            raise ValueError("block level must be >= 1")
        if n not in self._psi:
            bands = self.tree.level(n * self.k + 1)
            self._psi[n] = np.array([b.log_len for b in bands])
        return self._psi[n]

    def psi_of_word(self, w: BlockWord) -> float:
        validate_word(self.a, w)
        band = self.tree.band_for_word(embed_word(w))
        return band.log_len

    # -- finite-level pressure -------------------------------------------------

    def pressure_at(self, s: float, n: int) -> float:
        """P_n(s), exactly convex and strictly decreasing in s."""
        psis = self.psi_values(n)
        return float(logsumexp(s * psis)) / n

    def pressure_extrapolated(self, s: float, N: int) -> float:
        """Two-level Richardson value N P_N - (N-1) P_{N-1}.

        Cancels the leading C/n correction; used for root finding and
        derivatives, while reported curves keep the convex P_N.
        """
        if N <= _MIN_LEVEL:
            return self.pressure_at(s, max(N, _MIN_LEVEL))
        return N * self.pressure_at(s, N) - (N - 1) * self.pressure_at(s, N - 1)

    def pressure_bracket(self, s: float, N: int) -> float:
        """Empirical half-width of the C/n convergence bracket at level N."""
        if N <= _MIN_LEVEL:
            return abs(self.pressure_at(s, N) - self.pressure_at(s, N - 1)) if N > 1 else math.inf
        return (N - 1) * abs(self.pressure_at(s, N) - self.pressure_at(s, N - 1))

    def derivative(self, s: float, N: int, step: float = _FD_STEP) -> float:
        """dP/ds of the extrapolated pressure, central differences with one
        Richardson refinement in the step."""
        P = lambda x: self.pressure_extrapolated(x, N)
        d1 = (P(s + step) - P(s - step)) / (2 * step)
        d2 = (P(s + step / 2) - P(s - step / 2)) / step
        return (4 * d2 - d1) / 3

    # -- derivative limits -------------------------------------------------------

    def limits(self, N: int, window: int = 3) -> "PressureLimits":
        """Estimates of the two asymptotic slopes of the pressure.

        Primary estimator: per-period increments of the min/max log band
        length over the last few periods (these converge to the slopes at
        minus/plus infinity).  A far-field secant of the extrapolated
        pressure at s = -8 and s = +8 serves as the independent
        cross-estimate; gross disagreement raises, mild disagreement is
        visible in the reported brackets.
        """
        top = N * self.k + 1
        self.tree.ensure_level(top)
        mins = [min(b.log_len for b in self.tree.levels[l])
                for l in range(top + 1)]
        maxs = [max(b.log_len for b in self.tree.levels[l])
                for l in range(top + 1)]
        lo_slopes = [mins[j * self.k + 1] - mins[(j - 1) * self.k + 1]
                     for j in range(1, N + 1)]
        hi_slopes = [maxs[j * self.k + 1] - maxs[(j - 1) * self.k + 1]
                     for j in range(1, N + 1)]
        w = min(window, len(lo_slopes))
        lower = lo_slopes[-1]
        upper = hi_slopes[-1]
        lower_bracket = (min(lo_slopes[-w:]), max(lo_slopes[-w:]))
        upper_bracket = (min(hi_slopes[-w:]), max(hi_slopes[-w:]))
        ff_lower = (self.pressure_extrapolated(-7.5, N)
                    - self.pressure_extrapolated(-8.0, N)) / 0.5
        ff_upper = (self.pressure_extrapolated(8.0, N)
                    - self.pressure_extrapolated(7.5, N)) / 0.5
        slack = 0.25 * max(abs(lower), abs(upper)) + 0.25
        if abs(ff_lower - lower) > slack or abs(ff_upper - upper) > slack:
            raise InvariantError(
                "far-field pressure slopes disagree with band extremes: "
                f"{ff_lower:.4f} vs {lower:.4f}, {ff_upper:.4f} vs {upper:.4f}; "
                "levels are under-resolved")
        d0 = self.derivative(0.0, N)
        if not (lower < d0 < upper < 0.0):
            raise InvariantError(
                f"slope ordering violated: {lower:.6f} < {d0:.6f} < {upper:.6f} < 0")
        return PressureLimits(lower=lower, upper=upper,
                              lower_bracket=lower_bracket,
                              upper_bracket=upper_bracket,
                              lower_farfield=ff_lower, upper_farfield=ff_upper)

    # -- Bowen root ---------------------------------------------------------------

    def bowen_root(self, N: int, tol: float = 1e-10) -> float:
        """The unique zero of the extrapolated pressure on (0, 1)."""
        from scipy.optimize import brentq

        f = lambda s: self.pressure_extrapolated(s, N)
        f0, f1 = f(0.0), f(1.0)
        if not (f0 > 0 > f1):
            raise ConvergenceError(
                f"pressure has no sign change on [0, 1] at level {N}: "
                f"P(0)={f0:.4f}, P(1)={f1:.4f}; deepen the levels")
        return float(brentq(f, 0.0, 1.0, xtol=tol, rtol=1e-15))

    def invert_pressure(self, value: float, N: int, tol: float = 1e-10) -> float:
        """Solve P(s) = value for the strictly decreasing extrapolated P."""
        from scipy.optimize import brentq

        f = lambda s: self.pressure_extrapolated(s, N) - value
        lo, hi = -1.0, 1.0
        for _ in range(80):
            if f(lo) > 0:
                break
            lo *= 2
        for _ in range(80):
            if f(hi) < 0:
                break
            hi *= 2
        if not (f(lo) > 0 > f(hi)):
            raise ConvergenceError(f"could not bracket pressure level {value}")
        return float(brentq(f, lo, hi, xtol=tol, rtol=1e-15))

    def max_level(self, word_budget: int = DEFAULT_WORD_BUDGET) -> int:
        from .symbolic import count_words

        n = 1
        while count_words(self.a, n + 1) <= word_budget:
            n += 1
            if n > 64:
                break
        return n


_ANALYSES: dict[tuple, PressureAnalysis] = {}


def analysis(a, lam: float, node_budget: int = 2_000_000) -> PressureAnalysis:
    """Shared per-(period, coupling) analysis; trees are expensive to grow."""
    key = (tuple(int(x) for x in a), float(lam))
    if key not in _ANALYSES:
        _ANALYSES[key] = PressureAnalysis(key[0], key[1], node_budget=node_budget)
    return _ANALYSES[key]


def clear_analysis_cache() -> None:
    _ANALYSES.clear()


# ---------------------------------------------------------------------------
# module-level operations
# ---------------------------------------------------------------------------

def potential(a, lam: float, w: BlockWord) -> PotentialSample:
    """Log band length of the embedded word; negative, word-determined."""
    return PotentialSample(word=tuple(w), value=analysis(a, lam).psi_of_word(w))


def potential_corridor(a, lam: float, w: BlockWord) -> tuple[float, float]:
    """The proven two-sided bound on the potential of ``w``.

    S_n f log(t2) - 3 n sum log a_i - log(t2) <= psi <= S_n f log(t1) + log 4,
    with t1 = (lam-8)/3, t2 = 2(lam+5) and S_n f the Birkhoff sum of the
    block weight along the word.
    """
    a = tuple(int(x) for x in a)
    n = len(w)
    snf = sum(birkhoff_weight(a, b) for b in w)
    lt1 = math.log((lam - 8.0) / 3.0)
    lt2 = math.log(2.0 * (lam + 5.0))
    lo = snf * lt2 - 3.0 * n * sum(math.log(ai) for ai in a) - lt2
    hi = snf * lt1 + math.log(4.0)
    return lo, hi


def weak_gibbs_distance(a, lam: float, v: BlockWord, w: BlockWord) -> float:
    """Band length of the longest common prefix (1 when it is empty)."""
    v, w = tuple(v), tuple(w)
    if v == w:
        return 0.0
    n = 0
    for x, y in zip(v, w):
        if x != y:
            break
        n += 1
    if n == 0:
        return 1.0
    return math.exp(analysis(a, lam).psi_of_word(v[:n]))


@dataclass
class PressureLimits:
    lower: float
    upper: float
    lower_bracket: tuple[float, float]
    upper_bracket: tuple[float, float]
    lower_farfield: float
    upper_farfield: float


@dataclass
class PressureCurve:
    """Sampled finite-level pressure data with extrapolation brackets."""

    a: tuple[int, ...]
    lam: float
    N: int
    s_grid: list[float]
    P_n: list[list[float]]          # per s: [P_n(s) for n = 2..N]
    P: list[float]                  # per s: P_N(s), exactly convex in s
    P_err: list[float]              # per s: empirical C/N half-width
    dP: list[float]                 # per s: slope of the extrapolated pressure
    limits: PressureLimits
    bowen_root: float


def pressure(a, lam: float, s: float, N: int) -> dict:
    """One pressure-curve entry at a single s."""
    an = analysis(a, lam)
    return {
        "s": s,
        "P_n": [an.pressure_at(s, n) for n in range(_MIN_LEVEL, N + 1)],
        "P": an.pressure_at(s, N),
        "P_err": an.pressure_bracket(s, N),
        "dP": an.derivative(s, N),
    }


def pressure_curve(a, lam: float, s_values, N: int) -> PressureCurve:
    an = analysis(a, lam)
    s_values = [float(s) for s in s_values]
    entries = [pressure(a, lam, s, N) for s in s_values]
    return PressureCurve(
        a=tuple(int(x) for x in a), lam=float(lam), N=N,
        s_grid=s_values,
        P_n=[e["P_n"] for e in entries],
        P=[e["P"] for e in entries],
        P_err=[e["P_err"] for e in entries],
        dP=[e["dP"] for e in entries],
        limits=an.limits(N),
        bowen_root=an.bowen_root(N),
    )


def pressure_derivative(a, lam: float, s: float, N: int) -> float:
    return analysis(a, lam).derivative(s, N)


def pressure_limits(a, lam: float, N: int) -> PressureLimits:
    return analysis(a, lam).limits(N)


def bowen_root(a, lam: float, N: int) -> float:
    return analysis(a, lam).bowen_root(N)


# ---------------------------------------------------------------------------
# Birkhoff weight and exact mean cycles
# ---------------------------------------------------------------------------

def birkhoff_weight(a, b: BlockLetter) -> int:
    """-k plus sum over type-2 slots of (2 - a_j); integer-valued."""
    a = tuple(int(x) for x in a)
    if len(b) != len(a):
        raise ValueError("block length must match the period length")
    return -len(a) + sum((2 - aj) for aj, e in zip(a, b) if e.t == 2)


@dataclass
class MeanCycleResult:
    """Exact min/max mean of the block weight over directed cycles."""

    lower: Fraction
    upper: Fraction
    witness_lower: tuple[BlockLetter, ...]
    witness_upper: tuple[BlockLetter, ...]


def _karp_min_mean(nv: int, succ: list[list[int]], wt: list[int]):
    """Karp's minimum mean cycle; exact, weights on the head vertex.

    Returns (mean: Fraction, cycle: list of vertex indices).
    """
    D: list[list] = [[None] * nv for _ in range(nv + 1)]
    D[0] = [0] * nv      # run from every vertex at once; cycle means unchanged
    for k in range(1, nv + 1):
        for u in range(nv):
            du = D[k - 1][u]
            if du is None:
                continue
            for v in succ[u]:
                cand = du + wt[v]
                if D[k][v] is None or cand < D[k][v]:
                    D[k][v] = cand
    best = None
    for v in range(nv):
        if D[nv][v] is None:
            continue
        worst = None
        for k in range(nv):
            if D[k][v] is None:
                continue
            val = Fraction(D[nv][v] - D[k][v], nv - k)
            if worst is None or val > worst:
                worst = val
        if worst is not None and (best is None or worst < best):
            best = worst
    assert best is not None, "graph has no cycle"

    # witness: any cycle of tight edges under the reduced weight w - best
    d = [Fraction(0)] * nv
    for _ in range(nv):
        changed = False
        for u in range(nv):
            for v in succ[u]:
                cand = d[u] + wt[v] - best
                if cand < d[v]:
                    d[v] = cand
                    changed = True
        if not changed:
            break
    tight = [[v for v in succ[u] if d[u] + wt[v] - best == d[v]]
             for u in range(nv)]
    state = [0] * nv     # 0 unvisited, 1 on stack, 2 done
    stack: list[int] = []

    def dfs(u):
        state[u] = 1
        stack.append(u)
        for v in tight[u]:
            if state[v] == 1:
                return stack[stack.index(v):]
            if state[v] == 0:
                cyc = dfs(v)
                if cyc is not None:
                    return cyc
        state[u] = 2
        stack.pop()
        return None

    cycle = None
    for u in range(nv):
        if state[u] == 0:
            cycle = dfs(u)
            if cycle is not None:
                break
    assert cycle is not None, "tight subgraph lost the optimal cycle"
    mean = Fraction(sum(wt[v] for v in cycle), len(cycle))
    assert mean == best, "witness mean does not match Karp value"
    return best, cycle


def mean_cycles(a) -> MeanCycleResult:
    """Exact min and max mean cycle of the block weight, with witnesses."""
    a = tuple(int(x) for x in a)
    blocks = block_alphabet(a)
    nv = len(blocks)
    A = incidence_matrix(a)
    succ = [list(np.nonzero(A[u])[0]) for u in range(nv)]
    wt = [birkhoff_weight(a, b) for b in blocks]
    lo, cyc_lo = _karp_min_mean(nv, succ, wt)
    hi_neg, cyc_hi = _karp_min_mean(nv, succ, [-w for w in wt])
    return MeanCycleResult(
        lower=lo, upper=-hi_neg,
        witness_lower=tuple(blocks[v] for v in cyc_lo),
        witness_upper=tuple(blocks[v] for v in cyc_hi))


def mean_cycles_bruteforce(a) -> tuple[Fraction, Fraction]:
    """Exhaustive simple-cycle oracle (small alphabets only)."""
    import networkx as nx

    a = tuple(int(x) for x in a)
    blocks = block_alphabet(a)
    A = incidence_matrix(a)
    wt = [birkhoff_weight(a, b) for b in blocks]
    G = nx.DiGraph()
    G.add_nodes_from(range(len(blocks)))
    for u in range(len(blocks)):
        for v in np.nonzero(A[u])[0]:
            G.add_edge(u, int(v))
    means = [Fraction(sum(wt[v] for v in cyc), len(cyc))
             for cyc in nx.simple_cycles(G)]
    return min(means), max(means)
