"""Coding combinatorics for the band covering of a Sturm Hamiltonian.

The letters of order m form an alphabet of size 2m+2; words assemble into
block letters (one block per period entry) and block words.  The block
alphabet carries a primitive 0/1 incidence matrix whose Perron data yields
the maximal-entropy (Parry) measure, and a 3x3 auxiliary matrix shares its
leading eigenvalue.  Everything combinatorial here is exact: integer
matrices use Python ints, characteristic polynomials are computed without
rounding, and the Parry eigenvector structure is solved in closed form over
a quadratic field when exact output is requested.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import ConvergenceError

Period = tuple[int, ...]


# ---------------------------------------------------------------------------
# letters and admissibility
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Letter:
    """One symbol (t, i) of the order-m alphabet.

    ``t`` is the type in {1, 2, 3}, ``i`` the index within the type, ``m``
    the partial quotient the letter belongs to.  Ordering is type-major and
    index-minor, which fixes the canonical matrix indexing.
    """

    t: int
    i: int
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("letter order m must be >= 1")
        if self.t == 1:
            ok = 1 <= self.i <= self.m + 1
        elif self.t == 2:
            ok = self.i == 1
        elif self.t == 3:
            ok = 1 <= self.i <= self.m
        else:
            ok = False
        if not ok:
            raise ValueError(f"invalid letter ({self.t},{self.i}) at order {self.m}")

    def __str__(self):
        return f"{self.t}:{self.i}@{self.m}"


BlockLetter = tuple[Letter, ...]
BlockWord = tuple[BlockLetter, ...]


@lru_cache(maxsize=None)
def alphabet(m: int) -> tuple[Letter, ...]:
    """The 2m+2 letters of order m in canonical order."""
    if m < 1:
        raise ValueError("alphabet order must be >= 1")
    letters = [Letter(1, i, m) for i in range(1, m + 2)]
    letters.append(Letter(2, 1, m))
    letters += [Letter(3, i, m) for i in range(1, m + 1)]
    return tuple(letters)


def admissible(t, e: Letter) -> bool:
    """Whether type (or letter) ``t`` may be followed by letter ``e``.

    The allowed successors are: type 1 -> (2,1); type 2 -> (1,i) for
    i <= m+1 and (3,i) for i <= m; type 3 -> (1,i) for i <= m and (3,i)
    for i <= m-1.
    """
    if isinstance(t, Letter):
        t = t.t
    m = e.m
    if t == 1:
        return e.t == 2 and e.i == 1
    if t == 2:
        return (e.t == 1 and e.i <= m + 1) or (e.t == 3 and e.i <= m)
    if t == 3:
        return (e.t == 1 and e.i <= m) or (e.t == 3 and e.i <= m - 1)
    raise ValueError(f"unknown type {t!r}")


def header(b: BlockLetter) -> Letter:
    return b[0]


def tail_type(b: BlockLetter) -> int:
    return b[-1].t


def block_admissible(b: BlockLetter, c: BlockLetter) -> bool:
    """Whether block ``b`` may precede block ``c`` (tail type vs header)."""
    return admissible(tail_type(b), header(c))


# ---------------------------------------------------------------------------
# block alphabet and matrices
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def block_alphabet(a: Period) -> tuple[BlockLetter, ...]:
    """All internally admissible k-letter blocks over the period, in
    canonical lexicographic order."""
    a = tuple(int(x) for x in a)
    if not a:
        raise ValueError("period must be nonempty")
    blocks: list[tuple[Letter, ...]] = [(e,) for e in alphabet(a[0])]
    for m in a[1:]:
        blocks = [b + (e,) for b in blocks for e in alphabet(m)
                  if admissible(b[-1], e)]
    return tuple(blocks)


@lru_cache(maxsize=None)
def block_index(a: Period) -> dict:
    return {b: j for j, b in enumerate(block_alphabet(a))}


@lru_cache(maxsize=None)
def incidence_matrix(a: Period) -> np.ndarray:
    """0/1 incidence matrix over the block alphabet in canonical order.

    Entry (v, w) is 1 exactly when the tail type of block v may precede the
    header letter of block w.
    """
    blocks = block_alphabet(tuple(a))
    n = len(blocks)
    A = np.zeros((n, n), dtype=np.int64)
    for r, v in enumerate(blocks):
        t = tail_type(v)
        for c, w in enumerate(blocks):
            if admissible(t, header(w)):
                A[r, c] = 1
    return A


def _aux_single(m: int) -> list[list[int]]:
    return [[0, 1, 0], [m + 1, 0, m], [m, 0, m - 1]]


def _int_matmul(A, B):
    n, k, m = len(A), len(B), len(B[0])
    return [[sum(A[i][t] * B[t][j] for t in range(k)) for j in range(m)]
            for i in range(n)]


def _int_matpow(A, e: int):
    n = len(A)
    R = [[int(i == j) for j in range(n)] for i in range(n)]
    P = [row[:] for row in A]
    while e:
        if e & 1:
            R = _int_matmul(R, P)
        e >>= 1
        if e:
            P = _int_matmul(P, P)
    return R


def auxiliary_matrix(a: Period) -> list[list[int]]:
    """The 3x3 integer matrix obtained by multiplying the per-quotient
    auxiliary matrices in reverse period order (last entry leftmost)."""
    a = tuple(int(x) for x in a)
    M = _aux_single(a[0])
    for m in a[1:]:
        M = _int_matmul(_aux_single(m), M)
    return M


def quotient_matrix(a: Period) -> list[list[int]]:
    """The 2x2 integer product Q_{a_k} ... Q_{a_1} with Q_m = [[m,1],[1,0]].

    Its spectral radius is the growth rate of the convergent denominators
    over one period; the determinant is (-1)^k.
    """
    a = tuple(int(x) for x in a)
    M = [[a[0], 1], [1, 0]]
    for m in a[1:]:
        M = _int_matmul([[m, 1], [1, 0]], M)
    return M


def perron_value(a: Period) -> float:
    """Leading eigenvalue from the 2x2 quotient matrix (exact quadratic)."""
    B = quotient_matrix(tuple(a))
    t = B[0][0] + B[1][1]
    det = B[0][0] * B[1][1] - B[0][1] * B[1][0]  # (-1)^k
    import math
    return (t + math.sqrt(t * t - 4 * det)) / 2.0


# ---------------------------------------------------------------------------
# Perron data and the Parry measure
# ---------------------------------------------------------------------------

@dataclass
class PerronData:
    """Leading eigenvalue with positive left/right eigenvectors.

    Vectors are indexed by the canonical block alphabet; ``left @ right``
    is normalized to 1 so Parry cylinder masses need no denominator.
    """

    value: float
    left: np.ndarray
    right: np.ndarray


def _power_iterate(A: np.ndarray, tol: float = 1e-13, max_iter: int = 20000):
    v = np.ones(A.shape[0])
    for _ in range(max_iter):
        w = A @ v
        v = w / w.sum()
        lam = float(v @ (A @ v)) / float(v @ v)
        # Rayleigh stopping on the residual; delta-based tests can fire
        # early when a subdominant eigenvalue alternates in sign
        if np.max(np.abs(A @ v - lam * v)) <= tol * abs(lam) * np.max(np.abs(v)):
            return lam, v
    raise ConvergenceError(
        f"power iteration did not reach {tol:g} in {max_iter} iterations")


@lru_cache(maxsize=None)
def perron(a: Period) -> PerronData:
    """Perron eigenvalue and eigenvectors of the block incidence matrix.

    The eigenvalue comes from the 2x2 quotient matrix, which is exact up to
    one square root; the eigenvectors come from power iteration on the block
    incidence matrix, and the two eigenvalue estimates are required to agree
    to 1e-10 relative.
    """
    a = tuple(int(x) for x in a)
    E = perron_value(a)
    A = incidence_matrix(a).astype(float)
    lam_r, right = _power_iterate(A)
    lam_l, left = _power_iterate(A.T)
    if abs(lam_r - E) > 1e-10 * E or abs(lam_l - E) > 1e-10 * E:
        raise ConvergenceError(
            f"eigenvalue mismatch: quotient matrix {E!r}, incidence {lam_r!r}/{lam_l!r}")
    left = left / float(left @ right)
    return PerronData(value=E, left=left, right=right)


def parry_measure(a: Period, w: BlockWord) -> float:
    """Maximal-entropy cylinder mass of the block word ``w``.

    Equals left[w1] * right[wn] / E^(n-1) for the normalized Perron
    vectors; masses of all admissible words of a fixed length sum to 1.
    """
    a = tuple(int(x) for x in a)
    if not w:
        raise ValueError("word must be nonempty")
    validate_word(a, w)
    data = perron(a)
    idx = block_index(a)
    first, last = idx[w[0]], idx[w[-1]]
    return float(data.left[first] * data.right[last]
                 * data.value ** (-(len(w) - 1)))


def validate_word(a: Period, w: BlockWord) -> None:
    """Raise ValueError unless ``w`` is an admissible block word over ``a``."""
    idx = block_index(tuple(a))
    for b in w:
        if b not in idx:
            raise ValueError(f"block {word_str((b,))} not in the alphabet of {a}")
    for b, c in zip(w, w[1:]):
        if not block_admissible(b, c):
            raise ValueError(
                f"inadmissible junction {word_str((b,))} -> {word_str((c,))}")


def enumerate_words(a: Period, n: int) -> Iterator[BlockWord]:
    """All admissible block words of length n, in canonical order."""
    a = tuple(int(x) for x in a)
    if n < 1:
        raise ValueError("word length must be >= 1")
    blocks = block_alphabet(a)
    succ = {b: tuple(c for c in blocks if block_admissible(b, c)) for b in blocks}

    def extend(prefix, depth):
        if depth == n:
            yield prefix
            return
        for c in succ[prefix[-1]]:
            yield from extend(prefix + (c,), depth + 1)

    for b in blocks:
        yield from extend((b,), 1)


def count_words(a: Period, n: int) -> int:
    """Exact number of admissible words of length n via integer matrix powers."""
    if n < 1:
        raise ValueError("word length must be >= 1")
    A = [[int(x) for x in row] for row in incidence_matrix(tuple(a))]
    P = _int_matpow(A, n - 1)
    return sum(sum(row) for row in P)


# ---------------------------------------------------------------------------
# embedding into the canonical-frequency coding
# ---------------------------------------------------------------------------

def embed_word(w: BlockWord) -> tuple:
    """Prefix a block word with its forced two-symbol header.

    The result is a tree word over the canonical frequency: a root type in
    {1, 3}, one order-1 letter, then the nk flattened letters of ``w``.
    Header type 1 or 3 forces the prefix (1, (2,1)); header type 2 forces
    (3, (1,1)).
    """
    if not w:
        raise ValueError("word must be nonempty")
    h = header(w[0])
    if h.t in (1, 3):
        prefix = (1, Letter(2, 1, 1))
    else:
        prefix = (3, Letter(1, 1, 1))
    return prefix + tuple(itertools.chain.from_iterable(w))


# ---------------------------------------------------------------------------
# exact characteristic polynomials
# ---------------------------------------------------------------------------

def charpoly_int(M: Sequence[Sequence[int]]) -> list[int]:
    """Monic characteristic polynomial of an integer matrix, exactly.

    Faddeev-LeVerrier recurrence in Python ints; returns the coefficient
    list [1, c1, ..., cN] of x^N + c1 x^(N-1) + ... + cN.  All divisions in
    the recurrence are exact and asserted to be so.
    """
    n = len(M)
    M = [[int(x) for x in row] for row in M]
    coeffs = [1]
    Mk = [[0] * n for _ in range(n)]
    for i in range(n):
        Mk[i][i] = 1
    for k in range(1, n + 1):
        AMk = _int_matmul(M, Mk)
        tr = sum(AMk[i][i] for i in range(n))
        assert tr % k == 0, "Faddeev-LeVerrier trace not divisible"
        c = -tr // k
        coeffs.append(c)
        if k < n:
            Mk = [row[:] for row in AMk]
            for i in range(n):
                Mk[i][i] += c
    return coeffs


def _poly_shift_degree(coeffs: list[int], extra: int) -> list[int]:
    return coeffs + [0] * extra


def charpoly_identity(a: Period) -> bool:
    """Exact check that the block incidence matrix and the 3x3 auxiliary
    matrix share their characteristic polynomial up to a power of x.

    Also verifies that (x - (-1)^k) divides the cubic and that the quotient
    is the characteristic polynomial of the 2x2 quotient matrix.
    """
    a = tuple(int(x) for x in a)
    A = [[int(x) for x in row] for row in incidence_matrix(a)]
    N = len(A)
    if N < 3:
        return False
    big = charpoly_int(A)
    small = charpoly_int(auxiliary_matrix(a))
    if big != _poly_shift_degree(small, N - 3):
        return False
    # synthetic division of the cubic by (x - r) with r = (-1)^k
    r = (-1) ** len(a)
    quo, rem = [], 0
    acc = 0
    for c in small:
        acc = c + r * acc
        quo.append(acc)
    rem = quo.pop()
    if rem != 0:
        return False
    return quo == charpoly_int(quotient_matrix(a))


def primitivity_power(a: Period, p_max: int | None = None) -> int:
    """Smallest p with all entries of the incidence matrix's p-th power
    positive.  Raises if no p up to the bound works."""
    a = tuple(int(x) for x in a)
    if p_max is None:
        p_max = 4 * len(a) + 8
    A = incidence_matrix(a) > 0
    P = A.copy()
    for p in range(1, p_max + 1):
        if P.all():
            return p
        P = (P.astype(np.int64) @ A.astype(np.int64)) > 0
    raise ConvergenceError(f"incidence matrix not primitive within power {p_max}")


# ---------------------------------------------------------------------------
# exact Perron data over the quadratic field (for asymptotic constants)
# ---------------------------------------------------------------------------

def exact_perron_value(a: Period):
    """The leading eigenvalue as a sympy expression (t + sqrt(t^2-4s))/2."""
    import sympy as sp

    B = quotient_matrix(tuple(a))
    t = sp.Integer(B[0][0] + B[1][1])
    det = sp.Integer(B[0][0] * B[1][1] - B[0][1] * B[1][0])
    return (t + sp.sqrt(t * t - 4 * det)) / 2


def _class_transition_counts(a: Period):
    """Collapsed transition counts used by the exact Parry solve.

    The right Perron vector of the block incidence matrix is constant on
    tail-type classes, the left one on header-letter classes, because each
    matrix entry depends only on (tail type of row, header of column).  The
    collapsed systems are 3x3 and (2 a1 + 2) square respectively.
    """
    a = tuple(int(x) for x in a)
    blocks = block_alphabet(a)
    heads = alphabet(a[0])
    hpos = {h: j for j, h in enumerate(heads)}
    # C[t-1][t'-1] = number of blocks w with t -> header(w) and tail type t'
    C = [[0] * 3 for _ in range(3)]
    # T[h][h'] = number of blocks v with header h' whose tail type admits h
    T = [[0] * len(heads) for _ in range(len(heads))]
    for w in blocks:
        h, tt = header(w), tail_type(w)
        for t in (1, 2, 3):
            if admissible(t, h):
                C[t - 1][tt - 1] += 1
        for hh in heads:
            if admissible(tt, hh):
                T[hpos[hh]][hpos[h]] += 1
    return blocks, heads, C, T


@lru_cache(maxsize=None)
def exact_parry_class_weights(a: Period):
    """Exact Parry data: (E, rho by tail type, L by header letter, Z).

    rho and L are sympy expressions solving the collapsed eigen systems;
    Z is the normalizing sum of L(header) * rho(tail type) over all blocks.
    The cylinder mass of a single block b is L(h_b) rho(t_b) / Z.
    """
    import sympy as sp

    a = tuple(int(x) for x in a)
    E = exact_perron_value(a)
    blocks, heads, C, T = _class_transition_counts(a)

    M = sp.Matrix(C) - E * sp.eye(3)
    null = M.nullspace()
    assert len(null) == 1, "Perron eigenvalue of collapsed 3x3 system not simple"
    rho = [sp.radsimp(sp.nsimplify(x)) for x in null[0]]
    # fix sign so the vector is positive
    if rho[0].evalf() < 0:
        rho = [-x for x in rho]

    Mh = sp.Matrix(T) - E * sp.eye(len(heads))
    nullh = Mh.nullspace()
    assert len(nullh) == 1, "Perron eigenvalue of header system not simple"
    L = [sp.radsimp(sp.nsimplify(x)) for x in nullh[0]]
    if L[0].evalf() < 0:
        L = [-x for x in L]

    hpos = {h: j for j, h in enumerate(heads)}
    Z = sp.simplify(sum(L[hpos[header(w)]] * rho[tail_type(w) - 1] for w in blocks))
    return E, tuple(rho), tuple(L), Z, blocks, heads


def exact_parry_block_mass(a: Period, b: BlockLetter):
    """Exact maximal-entropy mass of the length-1 cylinder of block ``b``."""
    import sympy as sp

    E, rho, L, Z, blocks, heads = exact_parry_class_weights(tuple(a))
    hpos = {h: j for j, h in enumerate(heads)}
    return sp.simplify(L[hpos[header(b)]] * rho[tail_type(b) - 1] / Z)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def word_str(w: BlockWord) -> str:
    """Blocks joined by '|', letters inside a block by '.', letter "t:i@m"."""
    return "|".join(".".join(str(e) for e in b) for b in w)


def parse_letter(s: str) -> Letter:
    ti, m = s.split("@")
    t, i = ti.split(":")
    return Letter(int(t), int(i), int(m))


def parse_word(s: str) -> BlockWord:
    return tuple(tuple(parse_letter(x) for x in part.split("."))
                 for part in s.split("|"))


def tree_word_str(word: tuple) -> str:
    """Serialize a tree word: bare root type, then letters joined by '.'."""
    out = [str(word[0])]
    out += [str(e) for e in word[1:]]
    return ".".join(out)


def parse_tree_word(s: str) -> tuple:
    parts = s.split(".")
    root = int(parts[0])
    if root not in (1, 3):
        raise ValueError(f"tree word must start with root type 1 or 3, got {s!r}")
    return (root,) + tuple(parse_letter(p) for p in parts[1:])
