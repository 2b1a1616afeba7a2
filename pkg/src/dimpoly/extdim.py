"""Two-sided dimension polynomials of extensions given by linear equations.

compute_phi counts the terms of a window Gamma(r; s) that the leader
construction keeps (U' and U'') on a grid of windows and interpolates.
trdeg_oracle computes the true transcendence degree of a window from the
linear relation space, so the two can be compared.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from ._kernels import HAVE_NUMBA, PRIME_A, PRIME_B, njit
from .binompoly import NumPoly, interpolate
from .diffring import (DiffPolynomial, MarginError, ParseError, Term, coordinate_spread,
                       eord, format_poly, leader, linear_char_set, parse_poly, sort_by_rank)
from .lattice import (DomainError, LatticeSet, INT, Partition, _check_cap,
                      _window_blocks, free_shell_factor, phi_set, shell_count)


class StabilizationError(RuntimeError):
    def __init__(self, msg, log=None):
        super().__init__(msg)
        self.log = log or []


class IntegrityError(AssertionError):
    pass


class ValidationError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# extension specs


@dataclass(frozen=True)
class ExtensionSpec:
    part: Partition
    n: int
    defining: Tuple[DiffPolynomial, ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("need at least one generator")
        for f in self.defining:
            if f.m != self.part.m:
                raise DomainError("defining polynomial lives in the wrong ring")
            if not f.is_linear_homogeneous():
                raise DomainError(f"defining polynomial is not homogeneous linear: {format_poly(f)}")
            if any(j > self.n for j in f.generators()):
                raise DomainError(f"generator index above {self.n} in {format_poly(f)}")

    @property
    def is_free(self) -> bool:
        return not self.defining

    @classmethod
    def parse(cls, text: str) -> "ExtensionSpec":
        part = None
        n = None
        polys = []
        for ln, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("blocks="):
                if part is not None:
                    raise ParseError("duplicate blocks= line", ln, 1)
                try:
                    part = Partition.parse(line)
                except DomainError as e:
                    raise ParseError(str(e), ln, 1)
                continue
            if line.startswith("gens="):
                try:
                    n = int(line[5:])
                except ValueError:
                    raise ParseError("gens= needs an integer", ln, 6)
                continue
            if part is None or n is None:
                raise ParseError("blocks= and gens= must precede the polynomials", ln, 1)
            f = parse_poly(line, part.m, n, ln)
            if not f.is_linear_homogeneous():
                raise ParseError("defining polynomial must be homogeneous linear", ln, 1)
            polys.append(f)
        if part is None or n is None:
            raise ParseError("missing blocks= or gens= line", 1, 1)
        return cls(part, n, tuple(polys))

    def to_text(self) -> str:
        lines = [str(self.part), f"gens={self.n}"]
        lines += [format_poly(f, self.part) for f in self.defining]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class WindowSpec:
    r: Tuple[int, ...]
    s: Tuple[int, ...]

    def __post_init__(self):
        if len(self.r) != len(self.s):
            raise DomainError("r and s have different lengths")
        for a, b in zip(self.r, self.s):
            if b < 0 or b > a:
                raise DomainError(f"need 0 <= s_i <= r_i, got r={self.r} s={self.s}")

    @classmethod
    def of(cls, r, s):
        return cls(tuple(int(x) for x in r), tuple(int(x) for x in s))

    def point(self):
        return self.r + self.s


# ---------------------------------------------------------------------------
# windows


def window_gammas(part: Partition, w: WindowSpec, cap: Optional[int] = None) -> np.ndarray:
    rows, offs, total = _window_blocks(part, w.r, w.s, INT)
    _check_cap(total, cap)
    nb = offs.shape[0] - 1
    sizes = [int(offs[b + 1] - offs[b]) for b in range(nb)]
    if total == 0:
        return np.zeros((0, part.m), dtype=np.int64)
    multi = np.unravel_index(np.arange(total, dtype=np.int64), sizes)
    pts = np.zeros((total, part.m), dtype=np.int64)
    for b in range(nb):
        pts += rows[offs[b] + multi[b]]
    return pts


def window_terms(spec: ExtensionSpec, w: WindowSpec, cap: Optional[int] = None) -> List[Term]:
    G = window_gammas(spec.part, w, cap)
    return [Term(tuple(int(x) for x in g), j) for j in range(1, spec.n + 1) for g in G]


# ---------------------------------------------------------------------------
# classification kernels


def _pack_charset(charset: Sequence[DiffPolynomial], part: Partition):
    lead = []
    lgen = []
    offs = [0]
    tg, tj = [], []
    for f in charset:
        u = leader(f, 1, part)
        lead.append(u.gamma)
        lgen.append(u.gen)
        for t in f.terms():
            tg.append(t.gamma)
            tj.append(t.gen)
        offs.append(len(tg))
    m = part.m
    return (np.array(lead, dtype=np.int64).reshape(-1, m), np.array(lgen, dtype=np.int64),
            np.array(offs, dtype=np.int64), np.array(tg, dtype=np.int64).reshape(-1, m),
            np.array(tj, dtype=np.int64))


def _part_arrays(part: Partition):
    p, m = part.p, part.m
    blk_of = np.zeros(m, dtype=np.int64)
    inb = -np.ones((p, m), dtype=np.int64)
    rest = -np.ones((p, m), dtype=np.int64)
    for k, blk in enumerate(part.blocks):
        for i in blk:
            blk_of[i] = k
        for c, i in enumerate(sorted(blk)):
            inb[k, c] = i
        for c, i in enumerate([i for i in range(m) if i not in blk]):
            rest[k, c] = i
    return blk_of, inb, rest


@njit(cache=True)
def _cmp_terms(S, a, b, ja, jb, k, blk_of, inb, rest, p):
    # compare rows a and b of S (gammas) under <_k ; returns -1, 0, 1
    m = S.shape[1]
    oa = np.zeros(p, dtype=np.int64)
    ob = np.zeros(p, dtype=np.int64)
    for i in range(m):
        oa[blk_of[i]] += abs(S[a, i])
        ob[blk_of[i]] += abs(S[b, i])
    if oa[k] != ob[k]:
        return -1 if oa[k] < ob[k] else 1
    for q in range(p):
        if q != k and oa[q] != ob[q]:
            return -1 if oa[q] < ob[q] else 1
    for c in range(m):
        i = inb[k, c]
        if i < 0:
            break
        if abs(S[a, i]) != abs(S[b, i]):
            return -1 if abs(S[a, i]) < abs(S[b, i]) else 1
    for c in range(m):
        i = inb[k, c]
        if i < 0:
            break
        if S[a, i] != S[b, i]:
            return -1 if S[a, i] < S[b, i] else 1
    for c in range(m):
        i = rest[k, c]
        if i < 0:
            break
        if abs(S[a, i]) != abs(S[b, i]):
            return -1 if abs(S[a, i]) < abs(S[b, i]) else 1
    for c in range(m):
        i = rest[k, c]
        if i < 0:
            break
        if S[a, i] != S[b, i]:
            return -1 if S[a, i] < S[b, i] else 1
    if ja != jb:
        return -1 if ja < jb else 1
    return 0


@njit(cache=True)
def _classify_nb(G, gen, lead, lgen, offs, TG, TJ, blk_of, inb, rest, r, s):
    N, m = G.shape
    p = r.shape[0]
    ne = lead.shape[0]
    out = np.zeros(N, dtype=np.int64)
    maxt = 0
    for e in range(ne):
        if offs[e + 1] - offs[e] > maxt:
            maxt = offs[e + 1] - offs[e]
    S = np.zeros((maxt, m), dtype=np.int64)
    for row in range(N):
        has_rep = False
        all_viol = True
        for e in range(ne):
            if lgen[e] != gen:
                continue
            ok = True
            for i in range(m):
                if G[row, i] * lead[e, i] < 0 or abs(lead[e, i]) > abs(G[row, i]):
                    ok = False
                    break
            if not ok:
                continue
            has_rep = True
            nt = offs[e + 1] - offs[e]
            for t in range(nt):
                for i in range(m):
                    S[t, i] = TG[offs[e] + t, i] + G[row, i] - lead[e, i]
            viol = False
            for k in range(p):
                hi = 0
                lo = 0
                for t in range(1, nt):
                    if _cmp_terms(S, t, hi, TJ[offs[e] + t], TJ[offs[e] + hi], k, blk_of, inb, rest, p) > 0:
                        hi = t
                    if _cmp_terms(S, t, lo, TJ[offs[e] + t], TJ[offs[e] + lo], k, blk_of, inb, rest, p) < 0:
                        lo = t
                ou = 0
                ov = 0
                for i in range(m):
                    if blk_of[i] == k:
                        ou += abs(S[hi, i])
                        ov += abs(S[lo, i])
                if ov < s[k]:
                    viol = True
                if k >= 1 and ou > r[k]:
                    viol = True
            if not viol:
                all_viol = False
        if not has_rep:
            out[row] = 0
        elif all_viol:
            out[row] = 1
        else:
            out[row] = 2
    return out


def _key_columns(S, J, k, part):
    """Key components of <_k for a stack of candidates S[..., t, m] (list of arrays)."""
    blocks = part.blocks
    o = [np.abs(S[..., list(b)]).sum(axis=-1) for b in blocks]
    comps = [o[k]] + [o[q] for q in range(part.p) if q != k]
    blk = sorted(blocks[k])
    rest = [i for i in range(part.m) if i not in blocks[k]]
    comps += [np.abs(S[..., i]) for i in blk] + [S[..., i] for i in blk]
    comps += [np.abs(S[..., i]) for i in rest] + [S[..., i] for i in rest]
    comps.append(np.broadcast_to(J, S.shape[:-1]))
    return comps, o


def _lex_pick(comps, largest):
    mask = np.ones(comps[0].shape, dtype=bool)
    for c in comps:
        if largest:
            v = np.where(mask, c, np.iinfo(np.int64).min)
            best = v.max(axis=-1, keepdims=True)
        else:
            v = np.where(mask, c, np.iinfo(np.int64).max)
            best = v.min(axis=-1, keepdims=True)
        mask &= c == best
    return mask.argmax(axis=-1)


def _classify_np(G, gen, lead, lgen, offs, TG, TJ, part, r, s):
    N = G.shape[0]
    has_rep = np.zeros(N, dtype=bool)
    all_viol = np.ones(N, dtype=bool)
    for e in range(lead.shape[0]):
        if lgen[e] != gen:
            continue
        u = lead[e]
        div = np.all((G * u >= 0) & (np.abs(G) >= np.abs(u)), axis=1)
        if not div.any():
            continue
        has_rep |= div
        gam = G[div] - u
        T = TG[offs[e]:offs[e + 1]]
        J = TJ[offs[e]:offs[e + 1]]
        S = gam[:, None, :] + T[None, :, :]
        viol = np.zeros(gam.shape[0], dtype=bool)
        rows = np.arange(gam.shape[0])
        for k in range(part.p):
            comps, o = _key_columns(S, J, k, part)
            hi = _lex_pick(comps, True)
            lo = _lex_pick(comps, False)
            ou = o[k][rows, hi]
            ov = o[k][rows, lo]
            viol |= ov < s[k]
            if k >= 1:
                viol |= ou > r[k]
        sub = all_viol[div]
        all_viol[div] = sub & viol
    out = np.full(N, 2, dtype=np.int64)
    out[~has_rep] = 0
    out[has_rep & all_viol] = 1
    return out


def _classify_codes(charset, spec: ExtensionSpec, w: WindowSpec, gen: int, G=None, use_numba=None):
    if G is None:
        G = window_gammas(spec.part, w)
    if not charset:
        return np.zeros(G.shape[0], dtype=np.int64)
    lead, lgen, offs, TG, TJ = _pack_charset(charset, spec.part)
    r = np.array(w.r, dtype=np.int64)
    s = np.array(w.s, dtype=np.int64)
    if use_numba is None:
        use_numba = _kernels.USING_NUMBA
    if use_numba and HAVE_NUMBA:
        blk_of, inb, rest = _part_arrays(spec.part)
        return _classify_nb(np.ascontiguousarray(G), gen, lead, lgen, offs, TG, TJ, blk_of, inb, rest, r, s)
    return _classify_np(G, gen, lead, lgen, offs, TG, TJ, spec.part, r, s)


def classify_window(charset: Sequence[DiffPolynomial], spec: ExtensionSpec, w: WindowSpec,
                    cap: Optional[int] = None, use_numba=None):
    """Split the window into (U', U'', rest) as lists of terms."""
    G = window_gammas(spec.part, w, cap)
    U1, U2, R = [], [], []
    for j in range(1, spec.n + 1):
        codes = _classify_codes(list(charset), spec, w, j, G, use_numba)
        for g, c in zip(G, codes):
            t = Term(tuple(int(x) for x in g), j)
            (U1 if c == 0 else U2 if c == 1 else R).append(t)
    return U1, U2, R


def count_window(charset, spec: ExtensionSpec, w: WindowSpec, cap: Optional[int] = None,
                 use_numba=None) -> Tuple[int, int]:
    """(|U'|, |U''|) for one window."""
    if not charset:
        return spec.n * shell_count(spec.part, w.r, w.s), 0
    G = window_gammas(spec.part, w, cap)
    a = b = 0
    for j in range(1, spec.n + 1):
        codes = _classify_codes(list(charset), spec, w, j, G, use_numba)
        a += int((codes == 0).sum())
        b += int((codes == 1).sum())
    return a, b


# ---------------------------------------------------------------------------
# characteristic set of the defining ideal


def spec_charset(spec: ExtensionSpec, search_margin: int = 2) -> List[DiffPolynomial]:
    out = []
    for f in spec.defining:
        out.extend(linear_char_set(f, spec.part, search_margin))
    # drop exact duplicates, keep rank order
    seen, uniq = set(), []
    for f in sort_by_rank(out, spec.part):
        if f not in seen:
            seen.add(f)
            uniq.append(f)
    return uniq


def coupled_relations(spec: ExtensionSpec) -> bool:
    """True if two defining polynomials share a generator, or one mixes generators."""
    used = [set(f.generators()) for f in spec.defining]
    if any(len(u) > 1 for u in used):
        return True
    return any(a & b for a, b in itertools.combinations(used, 2))


# ---------------------------------------------------------------------------
# compute_phi


@dataclass
class DimPolyResult:
    phi: NumPoly
    part: Partition
    n: int
    thresholds: Dict[str, List[int]]
    charset: List[DiffPolynomial]
    samples: List[Tuple[Tuple[int, ...], int, int]]      # (point, |U'|, |U''|)
    heldout: List[Tuple[Tuple[int, ...], int]] = field(default_factory=list)
    psi: Optional[NumPoly] = None
    lam: Optional[NumPoly] = None
    lam_box: Optional[NumPoly] = None
    rounds: int = 1
    notes: List[str] = field(default_factory=list)

    def in_region(self, w: WindowSpec) -> bool:
        th = self.thresholds
        for i in range(self.part.p):
            if w.r[i] < th["r0"][i] or w.s[i] < th["s1"][i] or w.s[i] > w.r[i] - th["s0"][i]:
                return False
        return True

    def to_json_obj(self, with_invariants: bool = True) -> dict:
        obj = {
            "phi": self.phi.to_json_obj(),
            "thresholds": self.thresholds,
            "invariants": invariants(self).to_json_obj() if with_invariants else None,
            "samples": [{"point": list(pt), "uprime": a, "udoubleprime": b, "value": a + b}
                        for pt, a, b in self.samples],
        }
        return obj


def _grid_values(S0, S1, R0, sizes, off):
    svals, rvals = [], []
    for i, mi in enumerate(sizes):
        sv = [S1[i] + off + j for j in range(mi + 1)]
        base = max(R0[i] + off, sv[-1] + S0[i] + off)
        rvals.append([base + j for j in range(mi + 1)])
        svals.append(sv)
    return rvals, svals


def _heldout_points(rvals, svals, s0, p):
    top_r = [v[-1] for v in rvals]
    top_s = [v[-1] for v in svals]
    base_r = [v[0] for v in rvals]
    base_s = [v[0] for v in svals]
    pts = []
    for i in range(p):
        r = list(base_r); r[i] = top_r[i] + 1
        pts.append((r, list(base_s)))
        r = list(top_r); r[i] = top_r[i] + 2
        s = list(top_s); s[i] = top_s[i] + 1
        pts.append((r, s))
    pts.append(([x + 1 for x in top_r], [x + 1 for x in top_s]))
    pts.append(([x + 3 for x in top_r], list(base_s)))
    # the far edge of the admissible s range
    r = [x + 2 for x in top_r]
    pts.append((r, [ri - s0[i] for i, ri in enumerate(r)]))
    out = []
    for r, s in pts:
        r = [max(ri, si + s0[i]) for i, (ri, si) in enumerate(zip(r, s))]
        w = WindowSpec.of(r, s)
        if w not in out:
            out.append(w)
    return out


def psi_poly(charset: Sequence[DiffPolynomial], spec: ExtensionSpec) -> NumPoly:
    """Sum over generators of phi_set(1-leaders on that generator)."""
    part = spec.part
    acc = NumPoly(part.p)
    for j in range(1, spec.n + 1):
        pts = [leader(f, 1, part).gamma for f in charset if leader(f, 1, part).gen == j]
        acc = acc + phi_set(LatticeSet(pts, INT, part.m), part)
    return acc


def psi_difference(psi: NumPoly, p: int) -> NumPoly:
    """psi(t_1..t_p) - psi(t_{p+1}-1, .., t_{2p}-1)."""
    upper = psi.substitute_vars(list(range(p)), 2 * p)
    lower = psi.shift([-1] * p).substitute_vars(list(range(p, 2 * p)), 2 * p)
    return upper - lower


def psi_box_difference(psi: NumPoly, p: int) -> NumPoly:
    """Inclusion-exclusion over the 2^p corners of the box [s, r].

    Agrees with psi_difference when p = 1.  For p > 1 the plain difference
    leaves mixed corners such as psi(r_1, s_2 - 1) behind.
    """
    acc = NumPoly(2 * p)
    for lows in itertools.product((0, 1), repeat=p):
        idx = [p + i if lo else i for i, lo in enumerate(lows)]
        corner = psi.shift([-lo for lo in lows]).substitute_vars(idx, 2 * p)
        acc = acc - corner if sum(lows) % 2 else acc + corner
    return acc


def compute_phi(spec: ExtensionSpec, max_rounds: int = 5, search_margin: int = 2,
                charset: Optional[Sequence[DiffPolynomial]] = None, use_numba=None,
                check_lambda: bool = True) -> DimPolyResult:
    part = spec.part
    p = part.p
    notes = []
    if charset is None:
        if coupled_relations(spec):
            notes.append("defining polynomials share generators; the per-polynomial union "
                         "is not a characteristic set of the ideal they generate")
            warnings.warn(notes[-1])
        charset = spec_charset(spec, search_margin)
    charset = list(charset)
    if charset:
        spread = max(max(coordinate_spread(f)) for f in charset)
        S0 = [max(eord(f, k, part) for f in charset) for k in range(1, p + 1)]
    else:
        spread = 0
        S0 = [0] * p
    R0 = [2 * spread] * p
    S1 = [1] * p
    bounds = list(part.sizes) * 2
    log = []
    cache: Dict[WindowSpec, Tuple[int, int]] = {}

    def count(w):
        if w not in cache:
            cache[w] = count_window(charset, spec, w, use_numba=use_numba)
        return cache[w]

    for rnd in range(max_rounds):
        off = 2 * rnd
        s0 = [x + off for x in S0]
        rvals, svals = _grid_values(S0, S1, R0, part.sizes, off)
        samples = []
        for rr in itertools.product(*rvals):
            for ss in itertools.product(*svals):
                w = WindowSpec.of(rr, ss)
                a, b = count(w)
                samples.append((w.point(), a, b))
        phi = interpolate([(pt, a + b) for pt, a, b in samples], bounds)
        held = []
        bad = None
        for w in _heldout_points(rvals, svals, s0, p):
            a, b = count(w)
            held.append((w.point(), a + b))
            if phi.evaluate(w.point()) != a + b and bad is None:
                bad = (w.point(), a + b, phi.evaluate(w.point()))
        log.append({"round": rnd, "offset": off, "mismatch": bad})
        if bad is None:
            thresholds = {"r0": [v[0] for v in rvals], "s0": s0, "s1": [v[0] for v in svals]}
            res = DimPolyResult(phi.assert_numerical(), part, spec.n, thresholds, charset, samples,
                                held, rounds=rnd + 1, notes=notes)
            psi = psi_poly(charset, spec)
            res.psi = psi
            res.lam = phi - psi_difference(psi, p)
            res.lam_box = phi - psi_box_difference(psi, p)
            if check_lambda and res.lam_box.total_degree() >= part.m:
                raise IntegrityError(f"residual has degree {res.lam_box.total_degree()} >= m={part.m}")
            return res
    raise StabilizationError(f"no stable interpolation after {max_rounds} rounds", log)


# ---------------------------------------------------------------------------
# transcendence degree oracle


def _box_layout(spec: ExtensionSpec, radius: Sequence[int]):
    m, n = spec.part.m, spec.n
    if spec.defining:
        spreads = np.max([coordinate_spread(f) for f in spec.defining], axis=0)
    else:
        spreads = np.zeros(m, dtype=np.int64)
    # coordinate with the largest spread varies fastest
    order = sorted(range(m), key=lambda i: (-spreads[i], i))
    dims = [2 * radius[i] + 1 for i in range(m)]
    stride = [0] * m
    acc = n
    for i in order:
        stride[i] = acc
        acc *= dims[i]
    return np.array(stride, dtype=np.int64), acc


def _in_window(gam: np.ndarray, part: Partition, w: WindowSpec) -> np.ndarray:
    ok = np.ones(gam.shape[:-1], dtype=bool)
    for k, blk in enumerate(part.blocks):
        o = np.abs(gam[..., list(blk)]).sum(axis=-1)
        ok &= (o >= w.s[k]) & (o <= w.r[k])
    return ok


def _relation_dim(spec: ExtensionSpec, w: WindowSpec, margin: int, prime: int,
                  exact: bool = False, use_numba=None, cap: Optional[int] = None) -> Tuple[int, dict]:
    part = spec.part
    m = part.m
    radius = [w.r[part.block_of(i)] + margin for i in range(m)]
    stride, ncols = _box_layout(spec, radius)
    rad = np.array(radius, dtype=np.int64)
    full_rows, full_vals, out_rows = [], [], []
    nrows = 0
    for f in spec.defining:
        ts = f.terms()
        T = np.array([t.gamma for t in ts], dtype=np.int64)
        J = np.array([t.gen for t in ts], dtype=np.int64)
        coef = [f.coeff_of(((t, 1),)) for t in ts]
        den = math.lcm(*(c.denominator for c in coef))
        C = np.array([int(c * den) for c in coef], dtype=object)
        lo = -rad - T.min(axis=0)
        hi = rad - T.max(axis=0)
        if np.any(lo > hi):
            continue
        ranges = [np.arange(lo[i], hi[i] + 1, dtype=np.int64) for i in range(m)]
        count = int(np.prod([len(x) for x in ranges]))
        _check_cap(count * len(ts), cap)
        grid = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, m)
        S = grid[:, None, :] + T[None, :, :]                       # rows x terms x m
        cols = ((S + rad) * stride).sum(axis=-1) + (J - 1)[None, :]
        inw = _in_window(S, part, w)
        full_rows.append(cols)
        full_vals.append(np.broadcast_to(C, cols.shape))
        out_rows.append((cols, inw))
        nrows += grid.shape[0]
    info = {"rows": nrows, "cols": int(ncols), "margin": margin}
    if nrows == 0:
        return 0, info
    # outside-window column renumbering keeps the order, so spans only shrink
    width = max(c.shape[1] for c, _ in out_rows)

    def pad(a, fill):
        return np.pad(a, ((0, 0), (0, width - a.shape[1])), constant_values=fill)

    cols_all = np.concatenate([pad(c, -1) for c, _ in out_rows], axis=0)
    inw_all = np.concatenate([pad(x, False) for _, x in out_rows], axis=0)
    vals_all = np.concatenate([pad(np.asarray(v, dtype=object), 0) for v in full_vals], axis=0)
    in_flag = np.zeros(ncols, dtype=bool)
    in_flag[cols_all[inw_all]] = True
    newidx = np.cumsum(~in_flag) - 1
    oc = np.where(inw_all | (cols_all < 0), -1, newidx[np.maximum(cols_all, 0)])
    if exact:
        rc = [list(r[r >= 0]) for r in oc]
        rv = [list(v[r >= 0]) for r, v in zip(oc, vals_all)]
        rank_out = _kernels.exact_rank(rc, rv)
        if len(spec.defining) == 1:
            rank_full = nrows
        else:
            rank_full = _kernels.exact_rank([list(r[r >= 0]) for r in cols_all],
                                            [list(v[r >= 0]) for r, v in zip(cols_all, vals_all)])
    else:
        vals_mod = np.array([[int(x) % prime for x in row] for row in vals_all], dtype=np.int64)
        rank_out = _kernels.banded_rank_padded(oc, vals_mod, int((~in_flag).sum()), prime, use_numba)
        if len(spec.defining) == 1:
            # a nonzero Laurent polynomial times f is never zero, so all rows are independent
            rank_full = nrows
        else:
            rank_full = _kernels.banded_rank_padded(cols_all, vals_mod, int(ncols), prime, use_numba)
    info.update(rank_full=int(rank_full), rank_out=int(rank_out))
    return int(rank_full - rank_out), info


def trdeg_oracle(spec: ExtensionSpec, w: WindowSpec, margin: int = 0, exact: bool = False,
                 use_numba=None, return_info: bool = False, cap: Optional[int] = None):
    """Transcendence degree of the window field, from the linear relation space.

    The relation dimension inside the window is rank(M) - rank(M restricted to
    columns outside the window), where M holds all gamma*f fitting in a box of
    radius r + margin.  The computation is repeated at margin + 2 (with a
    second prime) and the two must agree.
    """
    if len(w.r) != spec.part.p:
        raise DomainError("window does not match partition")
    size = spec.n * shell_count(spec.part, w.r, w.s)
    if spec.is_free:
        return (size, {}) if return_info else size
    d1, i1 = _relation_dim(spec, w, margin, PRIME_A, exact, use_numba, cap)
    d2, i2 = _relation_dim(spec, w, margin + 2, PRIME_B, exact, use_numba, cap)
    if d1 != d2:
        raise MarginError(f"relation dimension {d1} at margin {margin} but {d2} at margin {margin + 2}")
    val = size - d1
    return (val, {"window_size": size, "relation_dim": d1, "runs": [i1, i2]}) if return_info else val


# ---------------------------------------------------------------------------
# univariate polynomial


def free_univariate(m: int, n: int = 1) -> NumPoly:
    return free_shell_factor(m).scale(n)


def univariate_phi(spec: ExtensionSpec, search_margin: int = 2, validate: bool = True,
                   radii: Optional[Sequence[int]] = None) -> NumPoly:
    """Single-block dimension polynomial; checked against the oracle when validate is set."""
    m = spec.part.m
    one = Partition.from_sizes([m])
    if spec.is_free:
        return free_univariate(m, spec.n)
    uspec = ExtensionSpec(one, spec.n, spec.defining)
    cs = spec_charset(uspec, search_margin)
    phi = psi_poly(cs, uspec)
    if validate:
        spread = max(max(coordinate_spread(f)) for f in cs)
        for r in (radii if radii is not None else [2 * spread, 2 * spread + 1]):
            w = WindowSpec.of([r], [0])
            got = trdeg_oracle(uspec, w)
            if phi.evaluate([r]) != got:
                raise ValidationError(f"univariate polynomial gives {phi.evaluate([r])} at r={r}, oracle {got}")
    return phi


# ---------------------------------------------------------------------------
# invariants


@dataclass(frozen=True)
class InvariantSummary:
    part_sizes: Tuple[int, ...]
    total_degree_d: int
    top_coeffs: Tuple[Tuple[Tuple[int, ...], Fraction], ...]
    lex_max: Tuple[Tuple[Tuple[int, ...], Tuple[int, ...], Tuple[int, ...], Fraction], ...]
    sigma_trdeg: Fraction
    support: Tuple[Tuple[int, ...], ...]

    def to_json_obj(self) -> dict:
        return {
            "blocks": list(self.part_sizes),
            "total_degree_d": self.total_degree_d,
            "top_coeffs": [{"exponent": list(e), "coeff": str(c)} for e, c in self.top_coeffs],
            "lex_max": [{"mu": list(mu), "nu": list(nu), "index": list(i), "coeff": str(c)}
                        for mu, nu, i, c in self.lex_max],
            "sigma_trdeg": str(self.sigma_trdeg),
            "support": [list(i) for i in self.support],
        }


def invariants(result: DimPolyResult) -> InvariantSummary:
    phi = result.phi
    part = result.part
    p = part.p
    sizes = part.sizes
    pw = phi.to_power_basis()
    d = max((sum(e[:p]) for e in pw), default=-1)
    top = tuple(sorted(((e, c) for e, c in pw.items() if sum(e[:p]) == d), reverse=True))
    support = tuple(phi.support())
    lex = []
    for mu in itertools.permutations(range(p)):
        for nu in itertools.permutations(range(p, 2 * p)):
            order = list(mu) + list(nu)
            if support:
                best = max(support, key=lambda i: tuple(i[k] for k in order))
                lex.append((tuple(x + 1 for x in mu), tuple(x + 1 for x in nu), best, phi.coeff(best)))
    hi = phi.coeff(tuple(sizes) + (0,) * p)
    lo = phi.coeff((0,) * p + tuple(sizes))
    scale = 2 ** part.m
    if lo != (-1) ** p * hi:
        raise IntegrityError(f"top coefficients disagree: a_(m,0)={hi}, a_(0,m)={lo}")
    return InvariantSummary(tuple(sizes), d, top, tuple(lex), hi / scale, support)


@dataclass(frozen=True)
class Verdict:
    distinguished: bool
    field: Optional[str] = None
    detail: Optional[str] = None

    def __str__(self):
        if not self.distinguished:
            return "INCONCLUSIVE"
        return f"DISTINGUISHED ({self.field}: {self.detail})"


def _fmt_exp(e):
    parts = []
    for i, k in enumerate(e):
        if k == 1:
            parts.append(f"t{i + 1}")
        elif k:
            parts.append(f"t{i + 1}^{k}")
    return "*".join(parts) or "1"


def equivalence_distinguish(a: InvariantSummary, b: InvariantSummary) -> Verdict:
    if a.part_sizes != b.part_sizes:
        raise DomainError("summaries use different partitions")
    if a.total_degree_d != b.total_degree_d:
        return Verdict(True, "total_degree_d", f"{a.total_degree_d} vs {b.total_degree_d}")
    ta, tb = dict(a.top_coeffs), dict(b.top_coeffs)
    for e in sorted(set(ta) | set(tb), reverse=True):
        ca, cb = ta.get(e, Fraction(0)), tb.get(e, Fraction(0))
        if ca != cb:
            return Verdict(True, "top_coeffs", f"coefficient of {_fmt_exp(e)} is {ca} vs {cb}")
    for x, y in zip(a.lex_max, b.lex_max):
        if x[2] != y[2] or x[3] != y[3]:
            return Verdict(True, "lex_max", f"order {x[0]}{x[1]}: {x[2]}:{x[3]} vs {y[2]}:{y[3]}")
    if len(a.lex_max) != len(b.lex_max):
        return Verdict(True, "lex_max", "different number of entries")
    if a.sigma_trdeg != b.sigma_trdeg:
        return Verdict(True, "sigma_trdeg", f"{a.sigma_trdeg} vs {b.sigma_trdeg}")
    return Verdict(False)


def univariate_summary(poly: NumPoly) -> Tuple[int, Fraction]:
    """(degree, leading power-basis coefficient) of a one-variable polynomial."""
    pw = poly.to_power_basis()
    if not pw:
        return -1, Fraction(0)
    d = max(e[0] for e in pw)
    return d, pw[(d,)]
