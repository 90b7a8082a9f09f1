"""Spectral generating bands: nested root isolation of transfer traces.

Level 0 holds the two root bands [lam-2, lam+2] and [-2, 2].  Refining a
level-n band isolates, inside it, the intervals where one of two trace
polynomials has absolute value at most 2: tr(M_n M_{n+1}) generates the
type-1 children and tr(M_{n+1}) the type-2/3 children.  The covering rules
fix the child count and type multiset of every parent in advance, and that
known count is the termination certificate of the isolation loop: a
mismatch first doubles the sampling grid, then escalates the working
precision.

Precision ladder: all batch work runs in vectorized double-double
arithmetic (about 31 digits); parents whose children approach the
double-double quantization are redone scalar in gmpy2 floats, doubling the
precision until the children are resolvable.  Band lengths shrink roughly
geometrically in the level, so deep trees genuinely need this.

Endpoints are bisected to a width of 1e-13 of the parent and then, once
the children are known, tightened further until the smallest child length
and gap are resolved to five digits, so reported lengths are reliable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import gmpy2
import numpy as np

from . import transfer
from .ddarray import DD, dd_to_decimal, log_of_difference
from .errors import BudgetError, PrecisionError, StructuralError
from .frequency import FrequencySpec
from .symbolic import Letter

DD_EPS = 4.93e-32           # quantization of a double-double near 1
GRID_BASE = 8               # initial grid points per (2a+2) unit
GRID_ROUNDS = 4
REL_TOL = 1e-13             # first-pass bisection width over parent length
FEATURE_TOL = 1e-5          # second-pass width over the smallest feature
RESOLVE_SLACK = 1e3         # required feature size in quantization units
MPFR_LADDER = (256, 512, 1024, 2048, 4096)
_BISECT_CAP = 400


@dataclass
class TransferContext:
    """Frequency, coupling and nominal working precision for one tree."""

    spec: FrequencySpec
    lam: float
    precision_bits: int = 53
    node_budget: int = 2_000_000

    def __post_init__(self):
        if self.lam <= 20:
            raise ValueError("coupling must exceed 20 for the covering rules")
        if self.precision_bits < 53:
            raise ValueError("working precision below 53 bits is not supported")


@dataclass(eq=False)
class Band:
    """One spectral generating band.

    ``letter`` is the bare root type (int) at level 0 and a Letter above;
    ``handle`` is the (m, p) index of the generating trace polynomial;
    endpoints are stored either as a double-double pair (prec None) or as
    gmpy2 floats at ``prec`` bits.
    """

    letter: object
    level: int
    btype: int
    lo: object
    hi: object
    prec: int | None
    log_len: float
    handle: tuple[int, int]
    index: int
    parent: "Band | None" = field(repr=False, default=None)
    children: "list[Band] | None" = field(repr=False, default=None)

    @property
    def word(self) -> tuple:
        out = []
        b = self
        while b is not None:
            out.append(b.letter)
            b = b.parent
        return tuple(reversed(out))

    @property
    def length(self) -> float:
        return math.exp(self.log_len)

    def lo_float(self) -> float:
        return _endpoint_float(self.lo)

    def hi_float(self) -> float:
        return _endpoint_float(self.hi)

    def lo_str(self) -> str:
        return _endpoint_str(self.lo)

    def hi_str(self) -> str:
        return _endpoint_str(self.hi)

    def length_str(self) -> str:
        if self.prec is None:
            (ah, al), (bh, bl) = self.hi, self.lo
            d = DD.from_sum(ah, al) - DD.from_sum(bh, bl)
            return dd_to_decimal(float(d.hi), float(d.lo))
        with gmpy2.context(precision=self.prec):
            return format(self.hi - self.lo, ".40g")


def _endpoint_float(x) -> float:
    if isinstance(x, tuple):
        return x[0] + x[1]
    return float(x)


def _endpoint_str(x) -> str:
    if isinstance(x, tuple):
        return dd_to_decimal(x[0], x[1])
    return format(x, ".40g")


def _endpoint_to_dd0(x) -> DD:
    """Endpoint as a 0-d DD (dd endpoints only)."""
    return DD.from_sum(x[0], x[1])


def _endpoint_to_mpfr(x):
    """Endpoint lifted exactly into the active gmpy2 context."""
    if isinstance(x, tuple):
        return gmpy2.mpfr(x[0]) + gmpy2.mpfr(x[1])
    return gmpy2.mpfr(x)


def _family_plan(ptype: int, a_next: int):
    """(use_h1, expected count, child type) per family, zero counts dropped."""
    if ptype == 1:
        plan = ((False, 1, 2),)
    elif ptype == 2:
        plan = ((True, a_next + 1, 1), (False, a_next, 3))
    elif ptype == 3:
        plan = ((True, a_next, 1), (False, a_next - 1, 3))
    else:
        raise ValueError(f"unknown band type {ptype}")
    return tuple(f for f in plan if f[1] > 0)


def _child_handle(ctype: int, child_level: int) -> tuple[int, int]:
    # type 1 bands of level m are generated by trace index (m, 1),
    # type 2/3 bands by (m+1, 0)
    return (child_level, 1) if ctype == 1 else (child_level + 1, 0)


def _pair_roots(region_lo, region_hi, roots, expected):
    """Match sorted crossing roots into bands via a sign-state walk.

    ``roots`` is a sorted list of (key, target, gsign_left); the walk
    tracks whether the polynomial currently sits above +2, inside, or
    below -2.  Returns index pairs (open, close) or None when the root
    pattern is inconsistent or the band count is off.
    """
    if region_lo == 0 or region_hi == 0:
        return None
    state = region_lo
    open_idx = None
    bands = []
    for i, (_, target, gsign) in enumerate(roots):
        if state == 1:
            if target != 2 or gsign != 1:
                return None
            state, open_idx = 0, i
        elif state == -1:
            if target != -2 or gsign != -1:
                return None
            state, open_idx = 0, i
        else:
            if target == 2:
                if gsign != -1:
                    return None
                state = 1
            else:
                if gsign != 1:
                    return None
                state = -1
            bands.append((open_idx, i))
            open_idx = None
    if state == 0 or len(bands) != expected:
        return None
    return bands


# ---------------------------------------------------------------------------
# vectorized double-double refinement
# ---------------------------------------------------------------------------

class _DDRefiner:
    """Refines all level-n parents of one tree in double-double batches."""

    def __init__(self, spec: FrequencySpec, lam: float, level: int):
        self.spec = spec
        self.level = level
        self.a_next = spec.quotient(level + 1)
        self._lam = DD.from_float(lam)
        self._one = DD.from_float(1.0)

    def _eval(self, E: DD):
        return transfer.child_traces(self.spec, self._lam, E, self.level, self._one)

    def _region(self, h: DD) -> np.ndarray:
        above = h > 2.0
        below = h < -2.0
        return np.where(above, 1, np.where(below, -1, 0)).astype(np.int8)

    def refine(self, parents: list[Band]):
        """Returns ({parent: [(ctype, lo, hi, log_len), ...]}, failed)."""
        done: dict[Band, list] = {}
        pending = list(parents)
        for round_ in range(GRID_ROUNDS):
            if not pending:
                break
            pending = self._attempt(pending, round_, done)
        return done, pending

    def _attempt(self, parents, round_, done):
        G = GRID_BASE * (2 * self.a_next + 2) * (2 ** round_)
        grids_hi, grids_lo, offsets = [], [], [0]
        plo, phi, pquant = [], [], []
        for b in parents:
            lo = _endpoint_to_dd0(b.lo)
            hi = _endpoint_to_dd0(b.hi)
            t = np.linspace(0.0, 1.0, G)
            E = lo + (hi - lo) * DD(t)
            # pin the boundary samples to the exact parent endpoints
            E.hi[0], E.lo[0] = lo.hi, lo.lo
            E.hi[-1], E.lo[-1] = hi.hi, hi.lo
            grids_hi.append(E.hi)
            grids_lo.append(E.lo)
            offsets.append(offsets[-1] + G)
            plo.append(lo)
            phi.append(hi)
            pquant.append(DD_EPS * max(1.0, abs(float(hi.hi))))
        E_all = DD(np.concatenate(grids_hi), np.concatenate(grids_lo))
        h1_all, h3_all = self._eval(E_all)
        reg1 = self._region(h1_all)
        reg3 = self._region(h3_all)

        failed = []
        bracket_rows = []   # (parent_pos, fam_is_h1, target, gsign, lo_idx_global)
        parent_expected = []
        for pi, b in enumerate(parents):
            sl = slice(offsets[pi], offsets[pi + 1])
            plan = _family_plan(b.btype, self.a_next)
            rows, ok = [], True
            for use_h1, expected, ctype in plan:
                reg = (reg1 if use_h1 else reg3)[sl]
                if reg[0] == 0 or reg[-1] == 0:
                    ok = False
                    break
                # crossings of h=2: sign of h-2 is + only in region 1
                for target in (2.0, -2.0):
                    sgn = np.where(reg == (1 if target > 0 else -1),
                                   1 if target > 0 else -1,
                                   -1 if target > 0 else 1).astype(np.int8)
                    flips = np.nonzero(sgn[:-1] != sgn[1:])[0]
                    for f in flips:
                        rows.append((pi, use_h1, target, int(sgn[f]),
                                     offsets[pi] + f))
                n_roots = sum(1 for r in rows if r[1] == use_h1)
                if n_roots != 2 * expected:
                    ok = False
                    break
            if ok:
                bracket_rows.extend(rows)
                parent_expected.append((pi, plan))
            else:
                failed.append(b)
        if not bracket_rows:
            return failed

        # batched bisection, pass 1
        m = len(bracket_rows)
        pidx = np.array([r[0] for r in bracket_rows])
        fam = np.array([r[1] for r in bracket_rows], dtype=bool)
        targ = np.array([r[2] for r in bracket_rows])
        gsgn = np.array([r[3] for r in bracket_rows], dtype=np.int8)
        gi = np.array([r[4] for r in bracket_rows])
        blo = E_all[gi]
        bhi = E_all[gi + 1]
        parent_len = np.array(
            [float((phi[i] - plo[i]).hi) for i in range(len(parents))])
        tol1 = REL_TOL * parent_len[pidx]
        blo, bhi, stalled = self._bisect(blo, bhi, fam, targ, gsgn, tol1)

        # group roots per parent, pair, optionally tighten, assemble
        by_parent: dict[int, list] = {}
        for j in range(m):
            by_parent.setdefault(int(pidx[j]), []).append(j)

        survivors = dict(parent_expected)
        for pi, plan in list(survivors.items()):
            b = parents[pi]
            if any(stalled[j] for j in by_parent[pi]):
                failed.append(b)
                continue
            sl = slice(offsets[pi], offsets[pi + 1])
            pairing = self._pair_parent(
                pi, plan, by_parent[pi], blo, bhi, fam, targ, gsgn, reg1, reg3, sl)
            if pairing is None:
                failed.append(b)
                continue
            bands_all, min_feature = pairing
            quant = pquant[pi]
            if min_feature < RESOLVE_SLACK * quant:
                failed.append(b)
                continue
            tol2 = FEATURE_TOL * min_feature
            if tol2 < tol1[by_parent[pi][0]]:
                js = np.array(by_parent[pi])
                nlo, nhi, nst = self._bisect(
                    blo[js], bhi[js], fam[js], targ[js], gsgn[js],
                    np.full(len(js), tol2))
                if nst.any():
                    failed.append(b)
                    continue
                blo.hi[js], blo.lo[js] = nlo.hi, nlo.lo
                bhi.hi[js], bhi.lo[js] = nhi.hi, nhi.lo
                pairing = self._pair_parent(
                    pi, plan, by_parent[pi], blo, bhi, fam, targ, gsgn,
                    reg1, reg3, sl)
                if pairing is None:
                    failed.append(b)
                    continue
                bands_all, min_feature = pairing
            children = self._assemble(parents[pi], bands_all)
            if children is None:
                failed.append(b)
                continue
            done[parents[pi]] = children
        return failed

    def _pair_parent(self, pi, plan, js, blo, bhi, fam, targ, gsgn,
                     reg1, reg3, sl):
        """Pair one parent's bisected roots; returns (bands, min_feature)."""
        mids = (blo + bhi).scale_pow2(0.5)
        per_family_bands = []
        all_bands = []
        for use_h1, expected, ctype in plan:
            roots = []
            for j in js:
                if bool(fam[j]) != use_h1:
                    continue
                key = (float(mids.hi[j]), float(mids.lo[j]))
                roots.append((key, float(targ[j]), int(gsgn[j]), j))
            roots.sort(key=lambda r: r[0])
            reg = (reg1 if use_h1 else reg3)[sl]
            paired = _pair_roots(int(reg[0]), int(reg[-1]),
                                 [(r[0], r[1], r[2]) for r in roots], expected)
            if paired is None:
                return None
            for o, c in paired:
                jo, jc = roots[o][3], roots[c][3]
                lo = DD.from_sum(float(mids.hi[jo]), float(mids.lo[jo]))
                hi = DD.from_sum(float(mids.hi[jc]), float(mids.lo[jc]))
                all_bands.append((ctype, lo, hi))
            per_family_bands.append(ctype)
        all_bands.sort(key=lambda t: (float(t[1].hi), float(t[1].lo)))
        # interlacing and disjointness
        types = [t for t, _, _ in all_bands]
        if len(plan) == 2:
            want = [1 if i % 2 == 0 else 3 for i in range(len(types))]
            if types != want:
                return None
        feats = []
        for i, (_, lo, hi) in enumerate(all_bands):
            feats.append(float((hi - lo).hi))
            if i:
                gap = float((lo - all_bands[i - 1][2]).hi)
                if gap <= 0:
                    return None
                feats.append(gap)
        return all_bands, min(feats)

    def _assemble(self, parent: Band, bands):
        out = []
        plo = _endpoint_to_dd0(parent.lo)
        phi = _endpoint_to_dd0(parent.hi)
        slack = 2.0 * REL_TOL * float((phi - plo).hi) + 4 * DD_EPS
        for ctype, lo, hi in bands:
            if float((lo - plo).hi) < -slack or float((phi - hi).hi) < -slack:
                return None
            log_len = log_of_difference(float(hi.hi), float(hi.lo),
                                        float(lo.hi), float(lo.lo))
            if not math.isfinite(log_len):
                return None
            out.append((ctype, (float(lo.hi), float(lo.lo)),
                        (float(hi.hi), float(hi.lo)), None, log_len))
        return out

    def _bisect(self, lo: DD, hi: DD, fam, targ, gsgn, tol):
        stalled = np.zeros(len(tol), dtype=bool)
        want_neg = gsgn < 0   # sign of g at lo
        targ_dd = DD(targ)
        for _ in range(_BISECT_CAP):
            width = (hi - lo).hi
            active = width > tol
            if not active.any():
                break
            mid = (lo + hi).scale_pow2(0.5)
            stuck = (mid.eq(lo) | mid.eq(hi)) & active
            if stuck.any():
                stalled |= stuck
                active &= ~stuck
                if not active.any():
                    break
            h1, h3 = self._eval(mid)
            h = h1.where(fam, h3)
            g_neg = h < targ_dd
            exact = h.eq(targ_dd)
            move_lo = active & ~exact & (g_neg == want_neg)
            move_hi = active & ~exact & (g_neg != want_neg)
            hit = active & exact
            lo.hi[move_lo] = mid.hi[move_lo]
            lo.lo[move_lo] = mid.lo[move_lo]
            hi.hi[move_hi] = mid.hi[move_hi]
            hi.lo[move_hi] = mid.lo[move_hi]
            lo.hi[hit] = mid.hi[hit]
            lo.lo[hit] = mid.lo[hit]
            hi.hi[hit] = mid.hi[hit]
            hi.lo[hit] = mid.lo[hit]
        else:
            stalled |= (hi - lo).hi > tol
        return lo, hi, stalled


# ---------------------------------------------------------------------------
# scalar gmpy2 refinement (precision ladder)
# ---------------------------------------------------------------------------

class _MPFRRefiner:
    """Scalar high-precision fallback for parents too small for dd."""

    def __init__(self, spec: FrequencySpec, lam: float, level: int):
        self.spec = spec
        self.lam = lam
        self.level = level
        self.a_next = spec.quotient(level + 1)

    def _eval_many(self, Es):
        one = gmpy2.mpfr(1)
        lam = gmpy2.mpfr(self.lam)
        return [transfer.child_traces(self.spec, lam, E, self.level, one)
                for E in Es]

    @staticmethod
    def _region(h):
        if h > 2:
            return 1
        if h < -2:
            return -1
        return 0

    def refine(self, parent: Band, start_bits: int):
        for bits in [b for b in MPFR_LADDER if b >= start_bits] or [MPFR_LADDER[-1]]:
            with gmpy2.context(precision=bits):
                result = self._attempt(parent, bits)
            if result is not None:
                return result
        raise PrecisionError(
            f"precision ladder exhausted for band {parent.word!r} "
            f"(level {parent.level}, log length {parent.log_len:.3f})")

    def _attempt(self, parent: Band, bits: int):
        lo = _endpoint_to_mpfr(parent.lo)
        hi = _endpoint_to_mpfr(parent.hi)
        quant = 2.0 ** (1 - bits) * max(1.0, abs(float(hi)))
        plan = _family_plan(parent.btype, self.a_next)
        for round_ in range(GRID_ROUNDS):
            G = GRID_BASE * (2 * self.a_next + 2) * (2 ** round_)
            step = (hi - lo) / (G - 1)
            Es = [lo + i * step for i in range(G)]
            Es[0], Es[-1] = lo, hi
            vals = self._eval_many(Es)
            bands_all = []
            ok = True
            for use_h1, expected, ctype in plan:
                hs = [v[0] if use_h1 else v[1] for v in vals]
                regs = [self._region(h) for h in hs]
                if regs[0] == 0 or regs[-1] == 0:
                    ok = False
                    break
                roots = []
                for target in (2.0, -2.0):
                    sgn = [(1 if r == 1 else -1) if target > 0
                           else (-1 if r == -1 else 1) for r in regs]
                    for i in range(G - 1):
                        if sgn[i] != sgn[i + 1]:
                            roots.append((Es[i], Es[i + 1], target, sgn[i]))
                if len(roots) != 2 * expected:
                    ok = False
                    break
                tol = REL_TOL * float(hi - lo)
                solved = [self._bisect_one(use_h1, a, b, t, s, tol)
                          for a, b, t, s in roots]
                if any(s is None for s in solved):
                    ok = False
                    break
                solved.sort(key=lambda r: r[0])
                paired = _pair_roots(
                    regs[0], regs[-1],
                    [(float(r[0]), r[1], r[2]) for r in solved], expected)
                if paired is None:
                    ok = False
                    break
                for o, c in paired:
                    bands_all.append((ctype, solved[o][0], solved[c][0],
                                      solved[o][3], solved[c][3]))
            if not ok:
                continue
            bands_all.sort(key=lambda t: t[1])
            types = [t for t, *_ in bands_all]
            if len(plan) == 2:
                want = [1 if i % 2 == 0 else 3 for i in range(len(types))]
                if types != want:
                    continue
            feats = []
            for i, (_, blo, bhi, *_rest) in enumerate(bands_all):
                feats.append(float(bhi - blo))
                if i:
                    feats.append(float(blo - bands_all[i - 1][2]))
            if min(feats) <= 0 or min(feats) < RESOLVE_SLACK * quant:
                return None    # escalate precision
            # tighten to resolve the smallest feature
            tol2 = FEATURE_TOL * min(feats)
            out = []
            for ctype, blo, bhi, rlo, rhi in bands_all:
                nlo = self._resume(rlo, tol2)
                nhi = self._resume(rhi, tol2)
                d = nhi - nlo
                if d <= 0:
                    return None
                out.append((ctype, nlo, nhi, gmpy2.get_context().precision,
                            float(gmpy2.log(d))))
            return out
        return None

    def _bisect_one(self, use_h1, a, b, target, gsign, tol):
        one = gmpy2.mpfr(1)
        lam = gmpy2.mpfr(self.lam)
        want_neg = gsign < 0
        t = gmpy2.mpfr(target)
        for _ in range(_BISECT_CAP):
            if float(b - a) <= tol:
                break
            mid = (a + b) / 2
            if mid == a or mid == b:
                break
            h1, h3 = transfer.child_traces(self.spec, lam, mid, self.level, one)
            h = h1 if use_h1 else h3
            if h == t:
                a = b = mid
                break
            if (h < t) == want_neg:
                a = mid
            else:
                b = mid
        return ((a + b) / 2, target, gsign, (a, b, use_h1, target, gsign))

    def _resume(self, root_state, tol):
        a, b, use_h1, target, gsign = root_state
        one = gmpy2.mpfr(1)
        lam = gmpy2.mpfr(self.lam)
        want_neg = gsign < 0
        t = gmpy2.mpfr(target)
        for _ in range(_BISECT_CAP):
            if float(b - a) <= tol:
                break
            mid = (a + b) / 2
            if mid == a or mid == b:
                break
            h1, h3 = transfer.child_traces(self.spec, lam, mid, self.level, one)
            h = h1 if use_h1 else h3
            if h == t:
                a = b = mid
                break
            if (h < t) == want_neg:
                a = mid
            else:
                b = mid
        return (a + b) / 2


# ---------------------------------------------------------------------------
# the band tree
# ---------------------------------------------------------------------------

class BandTree:
    """Lazily refined tree of the spectral generating bands of one context."""

    def __init__(self, ctx: TransferContext):
        self.ctx = ctx
        lam = ctx.lam
        lo1 = DD.from_sum(lam, -2.0)
        hi1 = DD.from_sum(lam, 2.0)
        b1 = Band(letter=1, level=0, btype=1,
                  lo=(float(lo1.hi), float(lo1.lo)),
                  hi=(float(hi1.hi), float(hi1.lo)),
                  prec=None, log_len=math.log(4.0), handle=(0, 1), index=1)
        b3 = Band(letter=3, level=0, btype=3,
                  lo=(-2.0, 0.0), hi=(2.0, 0.0),
                  prec=None, log_len=math.log(4.0), handle=(1, 0), index=1)
        self.levels: list[list[Band]] = [[b1, b3]]
        self._nodes = 2

    # -- refinement --------------------------------------------------------

    def ensure_level(self, n: int) -> None:
        while len(self.levels) <= n:
            lvl = len(self.levels) - 1
            parents = [b for b in self.levels[lvl]]
            self._refine_parents([b for b in parents if b.children is None])
            nxt = []
            for b in parents:
                nxt.extend(b.children)
            self.levels.append(nxt)

    def level(self, n: int) -> list[Band]:
        self.ensure_level(n)
        return self.levels[n]

    def refine_band(self, band: Band) -> list[Band]:
        if band.children is None:
            self._refine_parents([band])
        return band.children

    def _refine_parents(self, parents: list[Band]) -> None:
        if not parents:
            return
        level = parents[0].level
        if any(b.level != level for b in parents):
            raise ValueError("refinement batch must share one level")
        a_next = self.ctx.spec.quotient(level + 1)
        est = sum(sum(f[1] for f in _family_plan(b.btype, a_next))
                  for b in parents)
        if self._nodes + est > self.ctx.node_budget:
            raise BudgetError(
                f"node budget {self.ctx.node_budget} exceeded at level {level + 1}",
                count=self._nodes)

        copy_parents, dd_parents, mpfr_parents = [], [], []
        for b in parents:
            if b.btype == 1 and a_next == 1:
                copy_parents.append(b)
            elif b.prec is not None or self._needs_mpfr(b):
                mpfr_parents.append(b)
            else:
                dd_parents.append(b)

        for b in copy_parents:
            child = Band(letter=Letter(2, 1, 1), level=level + 1, btype=2,
                         lo=b.lo, hi=b.hi, prec=b.prec, log_len=b.log_len,
                         handle=_child_handle(2, level + 1), index=1, parent=b)
            b.children = [child]
            self._nodes += 1

        if dd_parents:
            refiner = _DDRefiner(self.ctx.spec, self.ctx.lam, level)
            done, failed = refiner.refine(dd_parents)
            for b, kids in done.items():
                self._attach(b, kids)
            mpfr_parents.extend(failed)

        if mpfr_parents:
            refiner = _MPFRRefiner(self.ctx.spec, self.ctx.lam, level)
            for b in mpfr_parents:
                bits = self._start_bits(b)
                kids = refiner.refine(b, bits)
                self._attach(b, kids)

        for b in parents:
            if b.children is None:
                raise StructuralError(
                    f"band isolation failed for {b.word!r} at level {level}")

    @staticmethod
    def _needs_mpfr(b: Band) -> bool:
        scale = max(1.0, abs(b.hi_float()))
        return b.length < 1e8 * DD_EPS * scale

    @staticmethod
    def _start_bits(b: Band) -> int:
        if b.prec is not None:
            return b.prec
        return max(256, int(-b.log_len / math.log(2)) + 160)

    def _attach(self, parent: Band, kids) -> None:
        children = []
        counts = {1: 0, 2: 0, 3: 0}
        for ctype, lo, hi, prec, log_len in kids:
            counts[ctype] += 1
            child = Band(letter=Letter(ctype, counts[ctype],
                                       self.ctx.spec.quotient(parent.level + 1)),
                         level=parent.level + 1, btype=ctype,
                         lo=lo, hi=hi, prec=prec, log_len=log_len,
                         handle=_child_handle(ctype, parent.level + 1),
                         index=counts[ctype], parent=parent)
            children.append(child)
        parent.children = children
        self._nodes += len(children)

    # -- queries -------------------------------------------------------------

    def band_for_word(self, word: tuple) -> Band:
        """Walk the tree along a coding word, refining lazily."""
        root = {1: self.levels[0][0], 3: self.levels[0][1]}.get(word[0])
        if root is None:
            raise ValueError(f"tree word must start with type 1 or 3, got {word!r}")
        b = root
        for letter in word[1:]:
            kids = self.refine_band(b)
            match = [c for c in kids
                     if c.btype == letter.t and c.index == letter.i]
            if not match:
                raise ValueError(
                    f"no child {letter} under {b.word!r}; word not admissible")
            b = match[0]
        return b

    def level_count(self, n: int) -> int:
        self.ensure_level(n)
        return len(self.levels[n])


# ---------------------------------------------------------------------------
# module-level operations
# ---------------------------------------------------------------------------

def root_bands(ctx: TransferContext) -> tuple[Band, Band]:
    """The two order-0 bands [lam-2, lam+2] (type 1) and [-2, 2] (type 3)."""
    tree = BandTree(ctx)
    return tree.levels[0][0], tree.levels[0][1]


def trace(ctx: TransferContext, n: int, p: int, E: float) -> float:
    """The trace polynomial tr(M_{n-1} M_n^p) at energy E.

    Evaluated at the context's working precision (gmpy2 above 53 bits).
    """
    if n < 0 or p < -1:
        raise ValueError("need n >= 0 and p >= -1")
    if ctx.precision_bits <= 53:
        return float(transfer.trace_poly(ctx.spec, float(ctx.lam),
                                         float(E), n, p, 1.0))
    with gmpy2.context(precision=ctx.precision_bits):
        v = transfer.trace_poly(ctx.spec, gmpy2.mpfr(ctx.lam),
                                gmpy2.mpfr(E), n, p, gmpy2.mpfr(1))
        return float(v)


def band_for_word(tree: BandTree, word: tuple) -> Band:
    return tree.band_for_word(word)


def level_extremes(tree: BandTree, n: int) -> tuple[float, float]:
    """Exact min and max band length over all level-n bands."""
    bands = tree.level(n)
    logs = [b.log_len for b in bands]
    return math.exp(min(logs)), math.exp(max(logs))


def level_log_extremes(tree: BandTree, n: int) -> tuple[float, float]:
    bands = tree.level(n)
    logs = [b.log_len for b in bands]
    return min(logs), max(logs)


def length_bounds_audit(ctx: TransferContext, band: Band,
                        slack: float = 1e-6) -> bool:
    """Check the per-word corridor for the band length.

    With t1 = (lam-8)/3 and t2 = 2(lam+5) the length of a level-n band
    with letters w_1..w_n lies between
    t2^-n prod a_i^-3 prod_{type 2} t2^(2-a_i) and
    4 t1^-n prod_{type 2} t1^(2-a_i); the comparison runs in log space
    with a small slack for endpoint rounding.
    """
    lam = ctx.lam
    lt1 = math.log((lam - 8.0) / 3.0)
    lt2 = math.log(2.0 * (lam + 5.0))
    lo = 0.0
    hi = math.log(4.0)
    word = band.word
    for j, letter in enumerate(word[1:], start=1):
        a = ctx.spec.quotient(j)
        lo -= lt2 + 3.0 * math.log(a)
        hi -= lt1
        if letter.t == 2:
            lo += (2 - a) * lt2
            hi += (2 - a) * lt1
    return lo - slack <= band.log_len <= hi + slack
