"""Headline spectral quantities and their large-coupling constants.

Four numbers are extracted from the pressure analysis: the optimal Holder
exponent of the density of states, its dimension, the spectrum dimension
(as the Bowen root), and the transport exponent.  All four are ratios of
the exact entropy log E to a pressure slope, with the entropy taken in
closed form rather than from the finite-level estimate.

The large-coupling constants divide the entropy by exact mean-cycle or
Parry averages and are therefore emitted both as symbolic expressions and
as decimals; the spectrum-dimension constant has no closed form here and
is reported as a coupling sweep instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InvariantError
from .symbolic import (BlockWord, alphabet, block_alphabet, block_admissible,
                       exact_parry_class_weights, header, incidence_matrix,
                       parry_measure, perron, perron_value, tail_type,
                       validate_word)
from .thermo import analysis, birkhoff_weight, mean_cycles

DEFAULT_LEVEL_CAP = 12
SWEEP_LAMBDAS = (100.0, 1000.0, 10000.0)


def canonical_rotation(a) -> tuple[int, ...]:
    """Lexicographically least rotation of the period block.

    Rotations describe the same periodic tail, and every quantity in this
    module depends on the tail only, so inputs are normalized up front and
    rotated inputs return identical results.
    """
    a = tuple(int(x) for x in a)
    return min(tuple(a[i:] + a[:i]) for i in range(len(a)))


def _pick_level(an, level, word_budget=200_000):
    if level is not None:
        return level
    return min(an.max_level(word_budget), DEFAULT_LEVEL_CAP)


# ---------------------------------------------------------------------------
# the four spectral characteristics
# ---------------------------------------------------------------------------

@dataclass
class Characteristics:
    """gamma < d < D < T in (0, 1), with coarse error estimates."""

    a: tuple[int, ...]
    lam: float
    level: int
    gamma: float
    d: float
    D: float
    T: float
    errors: dict = field(default_factory=dict)


def spectral_characteristics(a, lam: float, level: int | None = None) -> Characteristics:
    """Compute the four characteristics at one coupling.

    gamma and T divide the exact entropy by the estimated extreme slopes
    of the pressure, d by its slope at zero, and D is the root of the
    extrapolated pressure.  The strict ordering gamma < d < D < T is a
    theorem in this coupling regime; violation means the level depth did
    not resolve the slopes and is raised as a hard error.
    """
    a = canonical_rotation(a)
    an = analysis(a, lam)
    N = _pick_level(an, level)
    P0 = math.log(perron_value(a))
    lim = an.limits(N)
    dP0 = an.derivative(0.0, N)
    gamma = -P0 / lim.lower
    d = -P0 / dP0
    D = an.bowen_root(N)
    T = -P0 / lim.upper
    if not (0.0 < gamma < d < D < T < 1.0):
        raise InvariantError(
            f"characteristic chain violated at a={a}, lam={lam}, level={N}: "
            f"gamma={gamma:.6f}, d={d:.6f}, D={D:.6f}, T={T:.6f}")
    lw = lim.lower_bracket[1] - lim.lower_bracket[0]
    uw = lim.upper_bracket[1] - lim.upper_bracket[0]
    dN1 = an.derivative(0.0, max(N - 1, 2))
    errors = {
        "gamma": P0 * lw / lim.lower ** 2,
        "d": abs(P0 / dP0 - P0 / dN1),
        "D": an.pressure_bracket(D, N) / abs(an.derivative(D, N)),
        "T": P0 * uw / lim.upper ** 2,
    }
    return Characteristics(a=a, lam=float(lam), level=N, gamma=gamma,
                           d=d, D=D, T=T, errors=errors)


# ---------------------------------------------------------------------------
# exact large-coupling constants
# ---------------------------------------------------------------------------

@dataclass
class AsymptoticConstants:
    a: tuple[int, ...]
    rho_gamma: str
    rho_gamma_value: float
    rho_d: str
    rho_d_value: float
    rho_T: str
    rho_T_value: float
    rho_D_estimate: float
    rho_D_sweep: list[tuple[float, float]]   # (lam, bowen_root * log lam)
    mean_cycle_lower: Fraction
    mean_cycle_upper: Fraction
    parry_integral: str
    parry_integral_value: float


def exact_parry_integral(a):
    """The exact Parry average of the block weight, as a sympy expression.

    The weight depends only on the first block, so the average is a finite
    sum of exact cylinder masses; those follow from the class structure of
    the Perron eigenvectors over the quadratic field of the eigenvalue.
    """
    import sympy as sp

    a = tuple(int(x) for x in a)
    E, rho, L, Z, blocks, heads = exact_parry_class_weights(a)
    hpos = {h: j for j, h in enumerate(heads)}
    num = sum(birkhoff_weight(a, b) * L[hpos[header(b)]] * rho[tail_type(b) - 1]
              for b in blocks)
    return sp.simplify(sp.nsimplify(num / Z))


def asymptotic_constants(a, sweep_level: int | None = None) -> AsymptoticConstants:
    """Exact constants for gamma, d, T and a coupling sweep for D.

    rho_gamma = -log E / F_lower and rho_T = -log E / F_upper with the
    exact rational mean cycles; rho_d uses the exact Parry integral.  The
    D constant involves an equilibrium average with no finite closed form
    here, so it is estimated by bowen_root(lam) * log lam along a sweep.
    """
    import sympy as sp

    a = canonical_rotation(a)
    mc = mean_cycles(a)
    E = sp.nsimplify(_exact_perron_sympy(a))
    logE = sp.log(E)
    f_lo = sp.Rational(mc.lower.numerator, mc.lower.denominator)
    f_hi = sp.Rational(mc.upper.numerator, mc.upper.denominator)
    rho_gamma = sp.simplify(-logE / f_lo)
    rho_T = sp.simplify(-logE / f_hi)
    intf = exact_parry_integral(a)
    rho_d = sp.simplify(-logE / intf)

    sweep = []
    for lam in SWEEP_LAMBDAS:
        an = analysis(a, lam)
        N = _pick_level(an, sweep_level, word_budget=50_000)
        sweep.append((lam, an.bowen_root(N) * math.log(lam)))
    rho_D = sweep[-1][1]

    vals = [float(rho_gamma.evalf(30)), float(rho_d.evalf(30)),
            rho_D, float(rho_T.evalf(30))]
    if not (0.0 < vals[0] <= vals[1] + 1e-12):
        raise InvariantError(f"constant ordering violated: {vals}")
    if not (vals[1] <= vals[2] + 0.05 and vals[2] <= vals[3] + 0.05):
        # the D member is a numeric estimate; only gross violations raise
        raise InvariantError(f"constant ordering violated: {vals}")
    return AsymptoticConstants(
        a=a,
        rho_gamma=str(rho_gamma), rho_gamma_value=vals[0],
        rho_d=str(rho_d), rho_d_value=vals[1],
        rho_T=str(rho_T), rho_T_value=vals[3],
        rho_D_estimate=rho_D, rho_D_sweep=sweep,
        mean_cycle_lower=mc.lower, mean_cycle_upper=mc.upper,
        parry_integral=str(intf),
        parry_integral_value=float(intf.evalf(30)),
    )


def _exact_perron_sympy(a):
    from .symbolic import exact_perron_value

    return exact_perron_value(a)


# ---------------------------------------------------------------------------
# multifractal spectrum of the density of states
# ---------------------------------------------------------------------------

@dataclass
class MultifractalPoint:
    beta: float
    dim: float
    q_at_min: float


def multifractal_spectrum(a, lam: float, betas, level: int | None = None,
                          q_max: float = 32.0, q_steps: int = 129) -> list[MultifractalPoint]:
    """Dimensions of the level sets of the local dimension.

    For each beta the dimension is inf_q (tau(q) + q beta), where tau(q)
    inverts the strictly decreasing pressure at the level q * P(0); the
    infimum is taken over a q grid and refined by golden-section search.
    Betas outside the admissible interval raise a domain error.
    """
    a = tuple(int(x) for x in a)
    an = analysis(a, lam)
    N = _pick_level(an, level)
    P0 = math.log(perron_value(a))
    lim = an.limits(N)
    beta_lo = -P0 / lim.lower
    beta_hi = -P0 / lim.upper
    tau_cache: dict[float, float] = {}

    def tau(q: float) -> float:
        if q not in tau_cache:
            tau_cache[q] = an.invert_pressure(q * P0, N)
        return tau_cache[q]

    qs = list(np.linspace(-q_max, q_max, q_steps))
    out = []
    for beta in betas:
        beta = float(beta)
        if not (beta_lo - 1e-9 <= beta <= beta_hi + 1e-9):
            raise ValueError(
                f"beta={beta:.6f} outside the admissible interval "
                f"[{beta_lo:.6f}, {beta_hi:.6f}]")
        vals = [tau(q) + q * beta for q in qs]
        j = int(np.argmin(vals))
        if 0 < j < len(qs) - 1:
            q_best, v_best = _golden_min(lambda q: tau(q) + q * beta,
                                         qs[j - 1], qs[j + 1])
        else:
            q_best, v_best = qs[j], vals[j]
        out.append(MultifractalPoint(beta=beta, dim=v_best, q_at_min=q_best))
    return out


def _golden_min(f, lo, hi, iters: int = 40):
    g = (math.sqrt(5.0) - 1) / 2
    x1 = hi - g * (hi - lo)
    x2 = lo + g * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - g * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + g * (hi - lo)
            f2 = f(x2)
    return (lo + hi) / 2, min(f1, f2)


# ---------------------------------------------------------------------------
# density-of-states surrogate and local dimensions
# ---------------------------------------------------------------------------

def dos_mass(a, lam: float, w: BlockWord) -> float:
    """Maximal-entropy cylinder mass of the coded band.

    This is the canonical surrogate for the density of states: the two
    measures agree up to a bounded multiplicative constant on every band,
    so dimensions and local exponents are unchanged.  ``lam`` fixes which
    band the cylinder codes but does not enter the mass.
    """
    del lam
    return parry_measure(tuple(int(x) for x in a), w)


@dataclass(frozen=True)
class PeriodicPath:
    """An eventually periodic block-word pattern head + cycle^infinity."""

    cycle: BlockWord
    head: BlockWord = ()

    def __post_init__(self):
        if not self.cycle:
            raise ValueError("cycle must be nonempty")
        seq = tuple(self.head) + tuple(self.cycle) + (self.cycle[0],)
        for b, c in zip(seq, seq[1:]):
            if not block_admissible(b, c):
                raise ValueError("path pattern is not admissible")

    def expand(self, n: int) -> BlockWord:
        out = list(self.head)
        while len(out) < n:
            out.extend(self.cycle)
        return tuple(out[:n])


def local_dimension_estimate(a, lam: float, path: PeriodicPath,
                             depth: int) -> tuple[float, float]:
    """Running min/max of -P(0) n / psi_n over the tail window [depth/2, depth]."""
    a = tuple(int(x) for x in a)
    w = path.expand(depth)
    psis = _psi_prefixes(a, lam, w)
    P0 = math.log(perron_value(a))
    window = range(max(1, depth // 2), depth + 1)
    vals = [-P0 * n / psis[n - 1] for n in window]
    return min(vals), max(vals)


def local_dimension_slope(a, lam: float, w: BlockWord) -> float:
    """Bias-reduced point estimate -P(0) (n - n0) / (psi_n - psi_n0).

    The potential carries an O(1) offset that the plain ratio only damps
    like 1/n; differencing across the half window removes it.
    """
    a = tuple(int(x) for x in a)
    n = len(w)
    n0 = max(1, n // 2)
    psis = _psi_prefixes(a, lam, w)
    P0 = math.log(perron_value(a))
    return -P0 * (n - n0) / (psis[n - 1] - psis[n0 - 1])


def _psi_prefixes(a, lam, w) -> list[float]:
    """psi_n for every prefix of ``w`` from one tree walk."""
    an = analysis(a, lam)
    validate_word(a, w)
    from .symbolic import embed_word

    band = an.tree.band_for_word(embed_word(w))
    by_level = {}
    x = band
    while x is not None:
        by_level[x.level] = x
        x = x.parent
    return [by_level[j * an.k + 1].log_len for j in range(1, len(w) + 1)]


def sample_parry_paths(a, n_paths: int, depth: int, seed: int) -> list[BlockWord]:
    """Draw block words from the exact Parry chain with a fixed seed."""
    a = tuple(int(x) for x in a)
    data = perron(a)
    blocks = block_alphabet(a)
    A = incidence_matrix(a).astype(float)
    E, r = data.value, data.right
    start = data.left * data.right
    start = start / start.sum()
    trans = A * r[None, :] / (E * r[:, None])
    trans = trans / trans.sum(axis=1, keepdims=True)
    rng = np.random.default_rng(seed)
    paths = []
    for _ in range(n_paths):
        i = int(rng.choice(len(blocks), p=start))
        word = [blocks[i]]
        for _ in range(depth - 1):
            i = int(rng.choice(len(blocks), p=trans[i]))
            word.append(blocks[i])
        paths.append(tuple(word))
    return paths
