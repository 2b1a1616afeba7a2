"""Partitions, orthants and lattice dimension polynomials.

omega(E) counts points of N^m that dominate no element of E, phi_set(A) does
the same on Z^m with the orthant-aware order.  Both come with brute-force
counters used as oracles.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence, Tuple

import numpy as np

from . import _kernels
from .binompoly import NumPoly, binom

NAT = "NAT"
INT = "INT"

DEFAULT_MAX_ENUM = 10 ** 7


class ResourceError(RuntimeError):
    """Raised when an enumeration would exceed the configured cap."""


class DomainError(ValueError):
    pass


def max_enum() -> int:
    v = os.environ.get("DIMPOLY_MAX_ENUM")
    if v:
        try:
            return int(v)
        except ValueError:
            raise DomainError(f"DIMPOLY_MAX_ENUM must be an integer, got {v!r}")
    return DEFAULT_MAX_ENUM


@dataclass(frozen=True)
class Partition:
    """Blocks of coordinate indices (0-based).  Usually contiguous."""

    blocks: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if not self.blocks:
            raise DomainError("a partition needs at least one block")
        seen = sorted(i for b in self.blocks for i in b)
        if any(len(b) == 0 for b in self.blocks):
            raise DomainError("empty block")
        if seen != list(range(len(seen))):
            raise DomainError("blocks must cover 0..m-1 exactly once")

    @classmethod
    def from_sizes(cls, sizes: Sequence[int]) -> "Partition":
        sizes = [int(s) for s in sizes]
        if not sizes or any(s < 1 for s in sizes):
            raise DomainError(f"block sizes must be positive, got {sizes}")
        out, start = [], 0
        for s in sizes:
            out.append(tuple(range(start, start + s)))
            start += s
        return cls(tuple(out))

    @classmethod
    def parse(cls, text: str) -> "Partition":
        t = text.strip()
        if t.startswith("blocks="):
            t = t[len("blocks="):]
        try:
            sizes = [int(x) for x in t.split(",") if x.strip()]
        except ValueError:
            raise DomainError(f"bad partition {text!r}")
        return cls.from_sizes(sizes)

    @property
    def m(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def p(self) -> int:
        return len(self.blocks)

    @property
    def sizes(self) -> Tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    @property
    def is_contiguous(self) -> bool:
        return self == Partition.from_sizes(self.sizes)

    def block_of(self, i: int) -> int:
        for k, b in enumerate(self.blocks):
            if i in b:
                return k
        raise DomainError(f"coordinate {i} outside partition")

    def __str__(self):
        return "blocks=" + ",".join(str(s) for s in self.sizes)


def ord_block(a: Sequence[int], part: Partition, k: int) -> int:
    """Sum of |a_i| over block k (1-based)."""
    if not 1 <= k <= part.p:
        raise DomainError(f"block index {k} not in 1..{part.p}")
    if len(a) != part.m:
        raise DomainError("point dimension does not match partition")
    return sum(abs(a[i]) for i in part.blocks[k - 1])


def ords(a: Sequence[int], part: Partition) -> Tuple[int, ...]:
    return tuple(sum(abs(a[i]) for i in b) for b in part.blocks)


def orthant_of(a: Sequence[int]) -> frozenset:
    """Sign patterns (tuples of +1/-1) of all orthants containing a."""
    choices = [(1, -1) if x == 0 else ((1,) if x > 0 else (-1,)) for x in a]
    return frozenset(itertools.product(*choices))


def orthant_index(signs: Sequence[int]) -> int:
    """1-based index; 1 is the all-nonnegative orthant, bit i set means negative."""
    return 1 + sum(1 << i for i, s in enumerate(signs) if s < 0)


def orthant_signs(index: int, m: int) -> Tuple[int, ...]:
    j = index - 1
    if not 0 <= j < (1 << m):
        raise DomainError(f"orthant index {index} out of range for m={m}")
    return tuple(-1 if (j >> i) & 1 else 1 for i in range(m))


def similar(a: Sequence[int], b: Sequence[int]) -> bool:
    """Some orthant contains both (zero coordinates go either way)."""
    return all(x * y >= 0 for x, y in zip(a, b))


def tri_le(a: Sequence[int], w: Sequence[int]) -> bool:
    """a is below w in the orthant order: same orthant and |a_i| <= |w_i|."""
    return all(x * y >= 0 and abs(x) <= abs(y) for x, y in zip(a, w))


class LatticeSet:
    __slots__ = ("ambient", "m", "points")

    def __init__(self, points: Iterable[Sequence[int]], ambient: str = NAT, m: int | None = None):
        if ambient not in (NAT, INT):
            raise DomainError(f"ambient must be NAT or INT, got {ambient}")
        pts = sorted({tuple(int(x) for x in p) for p in points})
        if m is None:
            if not pts:
                raise DomainError("dimension needed for an empty set")
            m = len(pts[0])
        for p in pts:
            if len(p) != m:
                raise DomainError(f"point {p} does not have {m} coordinates")
            if ambient == NAT and any(x < 0 for x in p):
                raise DomainError(f"point {p} is not in N^{m}")
        self.ambient = ambient
        self.m = m
        self.points = tuple(pts)

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        return (isinstance(other, LatticeSet) and self.ambient == other.ambient
                and self.m == other.m and self.points == other.points)

    def __hash__(self):
        return hash((self.ambient, self.m, self.points))

    def __repr__(self):
        return f"LatticeSet({list(self.points)}, {self.ambient})"

    @classmethod
    def parse(cls, text: str, ambient: str = NAT, m: int | None = None) -> "LatticeSet":
        pts = []
        for ln, line in enumerate(text.splitlines(), 1):
            s = line.split("#", 1)[0].strip()
            if not s or s.startswith("blocks="):
                continue
            try:
                pts.append(tuple(int(x) for x in s.split(",")))
            except ValueError:
                raise DomainError(f"line {ln}: expected comma-separated integers, got {s!r}")
        return cls(pts, ambient, m)


def minimal_elements(E: LatticeSet) -> LatticeSet:
    if E.ambient != NAT:
        raise DomainError("minimal_elements expects a subset of N^m")
    pts = E.points
    keep = [p for p in pts
            if not any(q != p and all(x <= y for x, y in zip(q, p)) for q in pts)]
    return LatticeSet(keep, NAT, E.m)


@lru_cache(maxsize=None)
def _shifted_binom(m: int, b: int) -> NumPoly:
    # C(t + m - b, m) as a polynomial in t
    return NumPoly(1, {}) + _interp1(lambda t: binom(t + m - b, m), m)


def _interp1(fn, d: int) -> NumPoly:
    from .binompoly import _from_grid
    return _from_grid((d,), lambda x: fn(x[0]))


def omega(E: LatticeSet, part: Partition) -> NumPoly:
    """Dimension polynomial of E in N^m by inclusion-exclusion over minimal points."""
    if E.ambient != NAT:
        raise DomainError("omega expects a subset of N^m")
    if E.m != part.m:
        raise DomainError("set dimension does not match partition")
    pts = minimal_elements(E).points
    p = part.p
    acc: dict = {}
    for l in range(len(pts) + 1):
        sign = -1 if l % 2 else 1
        for theta in itertools.combinations(pts, l):
            if theta:
                lcm = tuple(max(c) for c in zip(*theta))
            else:
                lcm = (0,) * part.m
            bs = tuple(sum(lcm[h] for h in blk) for blk in part.blocks)
            acc[bs] = acc.get(bs, 0) + sign
    result = NumPoly(p)
    for bs, mult in sorted(acc.items()):
        if not mult:
            continue
        term = _shifted_binom(part.sizes[0], bs[0])
        for k in range(1, p):
            term = term.tensor(_shifted_binom(part.sizes[k], bs[k]))
        result = result + term.scale(mult)
    return result


def _block_vectors(size: int, lo: int, hi: int, ambient: str) -> np.ndarray:
    """All vectors in N^size (or Z^size) whose coordinate-|.| sum lies in [lo, hi]."""
    out = []
    if hi < 0 or lo > hi:
        return np.zeros((0, size), dtype=np.int64)

    def rec(prefix, remaining):
        if len(prefix) == size:
            tot = hi - remaining
            if tot >= lo:
                out.append(tuple(prefix))
            return
        for v in range(remaining + 1):
            if ambient == INT and v:
                rec(prefix + [v], remaining - v)
                rec(prefix + [-v], remaining - v)
            else:
                rec(prefix + [v], remaining - v)
    rec([], hi)
    return np.array(out, dtype=np.int64).reshape(-1, size)


def _window_blocks(part: Partition, r: Sequence[int], s: Sequence[int], ambient: str):
    """Per-block vectors embedded in R^m, concatenated, plus offsets."""
    m = part.m
    chunks, offsets = [], [0]
    total = 1
    for k, blk in enumerate(part.blocks):
        vecs = _block_vectors(len(blk), int(s[k]), int(r[k]), ambient)
        emb = np.zeros((vecs.shape[0], m), dtype=np.int64)
        emb[:, list(blk)] = vecs
        chunks.append(emb)
        offsets.append(offsets[-1] + vecs.shape[0])
        total *= vecs.shape[0]
    return np.concatenate(chunks, axis=0), np.array(offsets, dtype=np.int64), total


def _check_cap(total: int, cap: int | None):
    cap = max_enum() if cap is None else cap
    if total > cap:
        raise ResourceError(f"enumeration of {total} points exceeds cap {cap} (set DIMPOLY_MAX_ENUM)")


def _check_radius(part: Partition, r: Sequence[int]):
    if len(r) != part.p:
        raise DomainError(f"need {part.p} radii, got {len(r)}")
    if any(x < 0 for x in r):
        raise DomainError("radii must be nonnegative")


def count_V(E: LatticeSet, part: Partition, r: Sequence[int], cap: int | None = None,
            use_numba: bool | None = None) -> int:
    """Brute-force |V_E(r)|: points v of N^m with ord_i v <= r_i dominating nothing in E."""
    if E.ambient != NAT:
        raise DomainError("count_V expects a subset of N^m")
    _check_radius(part, r)
    rows, offs, total = _window_blocks(part, r, [0] * part.p, NAT)
    _check_cap(total, cap)
    A = np.array(E.points, dtype=np.int64).reshape(-1, part.m)
    return _kernels.count_undominated(rows, offs, A, 0, use_numba)


def count_W(A: LatticeSet, part: Partition, r: Sequence[int], cap: int | None = None,
            use_numba: bool | None = None, s: Sequence[int] | None = None) -> int:
    """Brute-force |W_A(r)|: points w of Z^m with ord_i w <= r_i above no element of A."""
    if A.ambient != INT:
        raise DomainError("count_W expects a subset of Z^m")
    _check_radius(part, r)
    s = [0] * part.p if s is None else list(s)
    rows, offs, total = _window_blocks(part, r, s, INT)
    _check_cap(total, cap)
    arr = np.array(A.points, dtype=np.int64).reshape(-1, part.m)
    return _kernels.count_undominated(rows, offs, arr, 1, use_numba)


def rho(a: Sequence[int]) -> Tuple[int, ...]:
    return tuple(max(x, 0) for x in a) + tuple(max(-x, 0) for x in a)


def rho_embed(A: LatticeSet, part: Partition) -> Tuple[LatticeSet, Partition]:
    if A.ambient != INT:
        raise DomainError("rho_embed expects a subset of Z^m")
    m = part.m
    pts = [rho(a) for a in A.points]
    for i in range(m):
        e = [0] * (2 * m)
        e[i] = e[m + i] = 1
        pts.append(tuple(e))
    blocks = tuple(tuple(blk) + tuple(m + k for k in blk) for blk in part.blocks)
    return LatticeSet(pts, NAT, 2 * m), Partition(blocks)


def phi_set(A: LatticeSet, part: Partition) -> NumPoly:
    """Dimension polynomial of A in Z^m, computed as omega of its embedding."""
    if A.m != part.m:
        raise DomainError("set dimension does not match partition")
    B, part2 = rho_embed(A, part)
    return omega(B, part2)


def free_shell_factor(m: int) -> NumPoly:
    """Number of points of Z^m with |.|_1 <= t, as a polynomial in t."""
    out = NumPoly(1)
    for j in range(m + 1):
        out = out + NumPoly(1, {(j,): (-1) ** (m - j) * 2 ** j * binom(m, j)})
    return out


def _ball(m: int, r: int) -> int:
    if r < 0:
        return 0
    return sum((-1) ** (m - j) * 2 ** j * binom(m, j) * binom(r + j, j) for j in range(m + 1))


def shell_count(part: Partition, r: Sequence[int], s: Sequence[int]) -> int:
    """Number of b in Z^m with s_i <= ord_i b <= r_i, via the alternating-sum product.

    The inner sum gives the size of the |.|_1-ball of radius r; at radius -1 the
    polynomial evaluates to (-1)^m rather than 0, so the lower ball is taken as
    empty when s_i = 0.
    """
    _check_radius(part, r)
    if len(s) != part.p:
        raise DomainError(f"need {part.p} lower bounds")
    for ri, si in zip(r, s):
        if si < 0 or si > ri:
            raise DomainError(f"need 0 <= s_i <= r_i, got s={list(s)} r={list(r)}")
    out = 1
    for mi, ri, si in zip(part.sizes, r, s):
        out *= _ball(mi, ri) - _ball(mi, si - 1)
    return out


def shell_count_enum(part: Partition, r: Sequence[int], s: Sequence[int],
                     cap: int | None = None, use_numba: bool | None = None) -> int:
    return count_W(LatticeSet([], INT, part.m), part, r, cap, use_numba, s)


def empirical_threshold(poly: NumPoly, counter, start: Sequence[int], steps: int = 4,
                        max_extra: int = 12):
    """First diagonal point from which `steps` consecutive diagonal values agree.

    Returns None if no such point is found within max_extra steps of start.
    """
    start = list(start)
    values = []
    for k in range(max_extra + steps):
        pt = [x + k for x in start]
        values.append(poly.evaluate(pt) == counter(pt))
    for k in range(max_extra + 1):
        if all(values[k:k + steps]):
            return tuple(x + k for x in start)
    return None
