"""Transfer matrices and trace polynomial evaluation.

The matrix over the first q_n sites obeys M_{n+1} = M_{n-1} M_n^{a_{n+1}},
seeded with M_{-1} = [[1, -lam], [0, 1]] and M_0 = [[E, -1], [1, 0]].  The
code is written against a generic numeric element so the same recursion
runs on float64 numpy batches, vectorized double-double batches, gmpy2
floats of any precision and exact Fractions (the latter two double as the
oracles for the former).

Traces indexed by (n, p) are tr(M_{n-1} M_n^p); the generating polynomial
of every spectral band is one of these.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .frequency import FrequencySpec, convergents

Mat = tuple  # 2x2 as ((a, b), (c, d)) with generic elements


def mat_mul(A: Mat, B: Mat) -> Mat:
    (a, b), (c, d) = A
    (e, f), (g, h) = B
    return ((a * e + b * g, a * f + b * h),
            (c * e + d * g, c * f + d * h))


def mat_pow(A: Mat, p: int, one) -> Mat:
    """A^p by repeated squaring; p = -1 uses the adjugate (det A = 1)."""
    if p == -1:
        (a, b), (c, d) = A
        return ((d, -b), (-c, a))
    if p < -1:
        raise ValueError("matrix powers below -1 are not used")
    R = ((one, one * 0), (one * 0, one))
    while p:
        if p & 1:
            R = mat_mul(R, A)
        p >>= 1
        if p:
            A = mat_mul(A, A)
    return R


def trace_of(A: Mat):
    return A[0][0] + A[1][1]


def transfer_pair(spec: FrequencySpec, lam, E, n: int, one):
    """(M_{n-1}, M_n) at energy E, generic over the element type.

    ``lam`` must already be lifted to the element type (exactly); ``one``
    is the multiplicative identity of that type.
    """
    zero = one * 0
    Mm: Mat = ((one, -lam), (zero, one))
    M: Mat = ((E, -one), (one, zero))
    for j in range(1, n + 1):
        Mm, M = M, mat_mul(Mm, mat_pow(M, spec.quotient(j), one))
    return Mm, M


def trace_poly(spec: FrequencySpec, lam, E, n: int, p: int, one):
    """tr(M_{n-1} M_n^p) at energy E, n >= 0 and p >= -1."""
    if n < 0:
        raise ValueError("trace level must be >= 0")
    Mm, M = transfer_pair(spec, lam, E, n, one)
    if p == 0:
        return trace_of(Mm)
    return trace_of(mat_mul(Mm, mat_pow(M, p, one)))


def child_traces(spec: FrequencySpec, lam, E, n: int, one):
    """The two polynomials that isolate the level-(n+1) children.

    Returns (tr(M_n M_{n+1}), tr(M_{n+1})): the first generates type-1
    children, the second type-2/3 children, of any level-n parent.
    """
    Mn, Mn1 = transfer_pair(spec, lam, E, n + 1, one)
    return trace_of(mat_mul(Mn, Mn1)), trace_of(Mn1)


# ---------------------------------------------------------------------------
# exact Sturmian potential bits and the site-product oracle
# ---------------------------------------------------------------------------

def sturmian_bits(spec: FrequencySpec, n_sites: int) -> list[int]:
    """The first ``n_sites`` values of floor((k+1) alpha) - floor(k alpha).

    This is the indicator of k*alpha mod 1 falling in [1-alpha, 1).  It is
    computed exactly from a convergent p_N/q_N with q_N so large that the
    rational and the true frequency share every floor value in range: the
    approximation error k/q_N^2 is far below the distance from k*alpha to
    the nearest integer for all k <= n_sites.
    """
    N = 8
    while True:
        conv = convergents(spec, N)
        if conv.q(N) > 10**12 * (n_sites + 1):
            break
        N += 4
    alpha = Fraction(conv.p(N), conv.q(N))
    bits = []
    f_prev = (1 * alpha).__floor__()
    for k in range(1, n_sites + 1):
        f_next = ((k + 1) * alpha).__floor__()
        bits.append(f_next - f_prev)
        f_prev = f_next
    return bits


def site_product_trace(spec: FrequencySpec, lam, E, n: int, precision_bits: int = 256):
    """Brute-force tr(M_n) as the ordered product of q_n site matrices.

    Independent oracle for the recursion; runs in gmpy2 arithmetic at the
    requested precision because the intermediate entries can overflow
    float64 well before q_n reaches 200.
    """
    import gmpy2

    conv = convergents(spec, n)
    q = conv.q(n)
    bits = sturmian_bits(spec, q)
    with gmpy2.context(precision=precision_bits):
        lamM = gmpy2.mpfr(lam)
        Ee = gmpy2.mpfr(E)
        one = gmpy2.mpfr(1)
        zero = gmpy2.mpfr(0)
        M = ((one, zero), (zero, one))
        for k in range(1, q + 1):
            v = lamM if bits[k - 1] else zero
            site = ((Ee - v, -one), (one, zero))
            M = mat_mul(site, M)
        return trace_of(M)


def lift_for(E):
    """The multiplicative identity matching the element type of E."""
    from .ddarray import DD

    if isinstance(E, DD):
        return DD.from_float(1.0)
    if isinstance(E, np.ndarray):
        return np.float64(1.0)
    if isinstance(E, Fraction):
        return Fraction(1)
    try:
        import gmpy2
        if isinstance(E, type(gmpy2.mpfr(0))):
            return gmpy2.mpfr(1)
    except ImportError:
        pass
    return 1.0
