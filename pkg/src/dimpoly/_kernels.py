"""Hot loops: lattice enumeration counts and banded modular rank.

Each kernel exists twice: an @njit version and a plain numpy version.  The
numba path is used when numba imports and DIMPOLY_DISABLE_NUMBA is unset (or
"0").  Both return identical integers; tests compare them directly.
"""

from __future__ import annotations

import os

import numpy as np

_flag = os.environ.get("DIMPOLY_DISABLE_NUMBA", "").strip().lower()
_disabled = _flag not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]
        return lambda f: f

USING_NUMBA = HAVE_NUMBA

# Two 31-bit primes.  Products of residues fit in int64.
PRIME_A = 2147483629
PRIME_B = 2147483587


# ---------------------------------------------------------------------------
# dominance counting over a product of per-block point lists


@njit(cache=True)
def _count_undominated_nb(rows, offsets, A, mode):
    # rows: all block vectors already embedded in R^m; offsets delimit blocks
    nb = offsets.shape[0] - 1
    m = rows.shape[1]
    na = A.shape[0]
    sizes = np.empty(nb, dtype=np.int64)
    for b in range(nb):
        sizes[b] = offsets[b + 1] - offsets[b]
        if sizes[b] == 0:
            return 0
    idx = np.zeros(nb, dtype=np.int64)
    pt = np.zeros(m, dtype=np.int64)
    count = 0
    while True:
        for c in range(m):
            pt[c] = 0
        for b in range(nb):
            r = offsets[b] + idx[b]
            for c in range(m):
                pt[c] += rows[r, c]
        dominated = False
        for a in range(na):
            ok = True
            for c in range(m):
                av = A[a, c]
                wv = pt[c]
                if mode == 0:
                    if wv < av:
                        ok = False
                        break
                else:
                    if av * wv < 0:
                        ok = False
                        break
                    if abs(av) > abs(wv):
                        ok = False
                        break
            if ok:
                dominated = True
                break
        if not dominated:
            count += 1
        # odometer
        b = nb - 1
        while b >= 0:
            idx[b] += 1
            if idx[b] < sizes[b]:
                break
            idx[b] = 0
            b -= 1
        if b < 0:
            break
    return count


def _dominated_mask(pts, A, mode):
    dom = np.zeros(pts.shape[0], dtype=bool)
    for a in A:
        if mode == 0:
            dom |= np.all(pts >= a, axis=1)
        else:
            dom |= np.all((pts * a >= 0) & (np.abs(pts) >= np.abs(a)), axis=1)
    return dom


def _count_undominated_np(rows, offsets, A, mode, chunk=1 << 18):
    nb = offsets.shape[0] - 1
    sizes = [int(offsets[b + 1] - offsets[b]) for b in range(nb)]
    total = int(np.prod(sizes, dtype=object)) if sizes else 1
    if total == 0:
        return 0
    count = 0
    for start in range(0, total, chunk):
        flat = np.arange(start, min(total, start + chunk), dtype=np.int64)
        multi = np.unravel_index(flat, sizes)
        pts = np.zeros((flat.shape[0], rows.shape[1]), dtype=np.int64)
        for b in range(nb):
            pts += rows[offsets[b] + multi[b]]
        count += int((~_dominated_mask(pts, A, mode)).sum())
    return count


def count_undominated(rows, offsets, A, mode, use_numba=None):
    """Count points of the block product not dominated by any row of A.

    mode 0: product order on N^m.  mode 1: the orthant-aware order on Z^m.
    """
    rows = np.ascontiguousarray(rows, dtype=np.int64)
    offsets = np.ascontiguousarray(offsets, dtype=np.int64)
    A = np.ascontiguousarray(A, dtype=np.int64).reshape(-1, rows.shape[1])
    if use_numba is None:
        use_numba = USING_NUMBA
    if use_numba and HAVE_NUMBA:
        return int(_count_undominated_nb(rows, offsets, A, int(mode)))
    return _count_undominated_np(rows, offsets, A, int(mode))


# ---------------------------------------------------------------------------
# rank modulo a prime of a sparse matrix whose rows have short column spans


@njit(cache=True)
def _banded_rank_nb(starts, indptr, cols, vals, width, ncols, p):
    # rows must be sorted by starts (first column)
    nrows = starts.shape[0]
    piv_slot = -np.ones(ncols, dtype=np.int64)
    piv_base = np.zeros(nrows, dtype=np.int64)
    piv_data = np.zeros((nrows, width), dtype=np.int64)
    buf = np.zeros(width, dtype=np.int64)
    npiv = 0
    for r in range(nrows):
        base = starts[r]
        for j in range(width):
            buf[j] = 0
        for e in range(indptr[r], indptr[r + 1]):
            buf[cols[e] - base] = (buf[cols[e] - base] + vals[e]) % p
        pos = 0
        while True:
            while pos < width and buf[pos] == 0:
                pos += 1
            if pos == width:
                break
            col = base + pos
            slot = piv_slot[col]
            if slot < 0:
                inv = 1
                a = buf[pos]
                e2 = p - 2
                while e2 > 0:
                    if e2 & 1:
                        inv = inv * a % p
                    a = a * a % p
                    e2 >>= 1
                for j in range(pos, width):
                    piv_data[npiv, j] = buf[j] * inv % p
                piv_base[npiv] = base
                piv_slot[col] = npiv
                npiv += 1
                break
            f = buf[pos]
            shift = piv_base[slot] - base
            # pivot row entries live at piv_data[slot, k] for column piv_base+k
            for k in range(col - piv_base[slot], width):
                jj = k + shift
                if jj >= width:
                    break
                v = piv_data[slot, k]
                if v != 0:
                    buf[jj] = (buf[jj] - f * v) % p
    return npiv


def _banded_rank_np(starts, indptr, cols, vals, width, ncols, p):
    nrows = starts.shape[0]
    piv = {}
    for r in range(nrows):
        base = int(starts[r])
        buf = np.zeros(width, dtype=np.int64)
        np.add.at(buf, cols[indptr[r]:indptr[r + 1]] - base, vals[indptr[r]:indptr[r + 1]])
        buf %= p
        while True:
            nz = np.flatnonzero(buf)
            if nz.size == 0:
                break
            pos = int(nz[0])
            col = base + pos
            if col not in piv:
                inv = pow(int(buf[pos]), p - 2, p)
                piv[col] = (base, buf * inv % p)
                break
            pbase, prow = piv[col]
            f = int(buf[pos])
            seg = prow[col - pbase:]
            lo = col - base
            hi = min(width, lo + seg.shape[0])
            seg = seg[:hi - lo]
            buf[lo:hi] = (buf[lo:hi] - f * seg) % p
    return len(piv)


def banded_rank(row_cols, row_vals, ncols, p=PRIME_A, use_numba=None):
    """Rank over GF(p) of a matrix given as per-row sorted column lists.

    Rows are processed in order of their first column; every reduced row then
    stays inside [start, start + width) where width is the largest original
    row span, so dense buffers of that width suffice.
    """
    keep = [i for i, c in enumerate(row_cols) if len(c)]
    if not keep:
        return 0
    starts = np.array([row_cols[i][0] for i in keep], dtype=np.int64)
    order = np.argsort(starts, kind="stable")
    keep = [keep[i] for i in order]
    starts = starts[order]
    width = max(int(row_cols[i][-1] - row_cols[i][0]) + 1 for i in keep)
    lens = np.array([len(row_cols[i]) for i in keep], dtype=np.int64)
    indptr = np.zeros(len(keep) + 1, dtype=np.int64)
    np.cumsum(lens, out=indptr[1:])
    cols = np.concatenate([np.asarray(row_cols[i], dtype=np.int64) for i in keep])
    vals = np.concatenate([np.asarray(row_vals[i], dtype=np.int64) % p for i in keep])
    if use_numba is None:
        use_numba = USING_NUMBA
    if use_numba and HAVE_NUMBA:
        return int(_banded_rank_nb(starts, indptr, cols, vals, width, int(ncols), int(p)))
    return _banded_rank_np(starts, indptr, cols, vals, width, int(ncols), int(p))


def banded_rank_padded(cols2d, vals2d, ncols, p=PRIME_A, use_numba=None):
    """Like banded_rank, for rows given as a padded 2-D array (col -1 = unused)."""
    cols2d = np.asarray(cols2d, dtype=np.int64)
    vals2d = np.asarray(vals2d, dtype=np.int64)
    if cols2d.size == 0:
        return 0
    valid = cols2d >= 0
    vals2d = np.where(valid, vals2d % p, 0)
    valid &= vals2d != 0
    key = np.where(valid, cols2d, np.iinfo(np.int64).max)
    order = np.argsort(key, axis=1, kind="stable")
    cs = np.take_along_axis(key, order, axis=1)
    vs = np.take_along_axis(vals2d, order, axis=1)
    ok = np.take_along_axis(valid, order, axis=1)
    lens = ok.sum(axis=1)
    nz = lens > 0
    cs, vs, ok, lens = cs[nz], vs[nz], ok[nz], lens[nz]
    if cs.shape[0] == 0:
        return 0
    starts = cs[:, 0]
    ends = cs[np.arange(cs.shape[0]), lens - 1]
    rorder = np.argsort(starts, kind="stable")
    cs, vs, ok, lens, starts, ends = cs[rorder], vs[rorder], ok[rorder], lens[rorder], starts[rorder], ends[rorder]
    width = int((ends - starts).max()) + 1
    indptr = np.zeros(cs.shape[0] + 1, dtype=np.int64)
    np.cumsum(lens, out=indptr[1:])
    flat_c = cs[ok]
    flat_v = vs[ok]
    if use_numba is None:
        use_numba = USING_NUMBA
    if use_numba and HAVE_NUMBA:
        return int(_banded_rank_nb(starts, indptr, flat_c, flat_v, width, int(ncols), int(p)))
    return _banded_rank_np(starts, indptr, flat_c, flat_v, width, int(ncols), int(p))


def exact_rank(row_cols, row_vals):
    """Exact rank over Q (fraction-free integer elimination).  Small inputs only."""
    from math import gcd
    rows = []
    for c, v in zip(row_cols, row_vals):
        d = {}
        for ci, vi in zip(c, v):
            d[int(ci)] = d.get(int(ci), 0) + int(vi)
        d = {k: x for k, x in d.items() if x}
        if d:
            rows.append(d)
    pivots = {}
    for row in rows:
        while row:
            lead = min(row)
            if lead not in pivots:
                pivots[lead] = row
                break
            prow = pivots[lead]
            a, b = prow[lead], row[lead]
            new = {}
            for k in set(row) | set(prow):
                x = a * row.get(k, 0) - b * prow.get(k, 0)
                if x:
                    new[k] = x
            g = 0
            for x in new.values():
                g = gcd(g, x)
            if g > 1:
                new = {k: x // g for k, x in new.items()}
            row = new
    return len(pivots)
