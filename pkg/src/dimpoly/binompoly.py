"""Numerical polynomials in several variables, kept in the binomial basis.

A polynomial in q variables is stored as a sparse map from multi-indices
(i_1, ..., i_q) to rationals a_i, meaning

    sum_i a_i * C(t_1 + i_1, i_1) * ... * C(t_q + i_q, i_q).

Everything is exact; there is no floating point anywhere in here.
"""

from __future__ import annotations

import itertools
import json
from fractions import Fraction
from functools import lru_cache
from math import comb, gcd, factorial
from typing import Dict, Iterable, Mapping, Sequence, Tuple

Index = Tuple[int, ...]


class DimensionError(ValueError):
    pass


class InsufficientSamplesError(ValueError):
    pass


class InconsistentSamplesError(ValueError):
    def __init__(self, msg, sample=None):
        super().__init__(msg)
        self.sample = sample


class NotNumericalError(ValueError):
    pass


def binom(t: int, k: int) -> int:
    """C(t, k) for integer t (possibly negative) and integer k."""
    if k < 0:
        return 0
    if k == 0:
        return 1
    if t >= 0:
        return comb(t, k) if t >= k else 0
    # C(-n, k) = (-1)^k C(n+k-1, k)
    n = -t
    v = comb(n + k - 1, k)
    return -v if k % 2 else v


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


class NumPoly:
    """Immutable sparse polynomial in the binomial basis."""

    __slots__ = ("_q", "_c", "_hash")

    def __init__(self, num_vars: int, coeffs: Mapping[Sequence[int], object] = ()):
        if num_vars < 0:
            raise DimensionError("negative number of variables")
        c: Dict[Index, Fraction] = {}
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        for idx, a in items:
            idx = tuple(int(i) for i in idx)
            if len(idx) != num_vars:
                raise DimensionError(f"index {idx} does not have {num_vars} entries")
            if any(i < 0 for i in idx):
                raise DimensionError(f"negative index {idx}")
            v = c.get(idx, Fraction(0)) + _frac(a)
            if v:
                c[idx] = v
            else:
                c.pop(idx, None)
        object.__setattr__(self, "_q", num_vars)
        object.__setattr__(self, "_c", c)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, *_):
        raise AttributeError("NumPoly is immutable")

    # basic accessors
    @property
    def num_vars(self) -> int:
        return self._q

    @property
    def coeffs(self) -> Dict[Index, Fraction]:
        return dict(self._c)

    def coeff(self, idx: Sequence[int]) -> Fraction:
        return self._c.get(tuple(idx), Fraction(0))

    def support(self):
        return sorted(self._c, reverse=True)

    def is_zero(self) -> bool:
        return not self._c

    @classmethod
    def constant(cls, num_vars: int, value) -> "NumPoly":
        return cls(num_vars, {(0,) * num_vars: value})

    @classmethod
    def zero(cls, num_vars: int) -> "NumPoly":
        return cls(num_vars)

    @classmethod
    def basis(cls, idx: Sequence[int], coeff=1) -> "NumPoly":
        return cls(len(idx), {tuple(idx): coeff})

    def total_degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(i) for i in self._c), default=-1)

    def degree_in(self, var: int) -> int:
        return max((i[var] for i in self._c), default=-1)

    def degree_bounds(self) -> Tuple[int, ...]:
        return tuple(max(self.degree_in(v), 0) for v in range(self._q))

    def is_numerical_form(self) -> bool:
        """True when every binomial-basis coefficient is an integer."""
        return all(a.denominator == 1 for a in self._c.values())

    def assert_numerical(self) -> "NumPoly":
        bad = [i for i, a in self._c.items() if a.denominator != 1]
        if bad:
            raise NotNumericalError(f"non-integer coefficient at index {sorted(bad)[0]}")
        return self

    # evaluation
    def __call__(self, *point) -> Fraction:
        return self.evaluate(point[0] if len(point) == 1 and isinstance(point[0], (tuple, list)) else point)

    def evaluate(self, point: Sequence[int]) -> Fraction:
        if len(point) != self._q:
            raise DimensionError(f"point has {len(point)} coordinates, expected {self._q}")
        total = Fraction(0)
        for idx, a in self._c.items():
            prod = 1
            for t, i in zip(point, idx):
                if i:
                    prod *= binom(int(t) + i, i)
                    if not prod:
                        break
            if prod:
                total += a * prod
        return total

    # arithmetic
    def _check(self, other: "NumPoly"):
        if not isinstance(other, NumPoly):
            raise TypeError("expected NumPoly")
        if other._q != self._q:
            raise DimensionError(f"{self._q} vs {other._q} variables")

    def __add__(self, other):
        if not isinstance(other, NumPoly):
            other = NumPoly.constant(self._q, other)
        self._check(other)
        c = dict(self._c)
        for i, a in other._c.items():
            c[i] = c.get(i, Fraction(0)) + a
        return NumPoly(self._q, c)

    __radd__ = __add__

    def __neg__(self):
        return NumPoly(self._q, {i: -a for i, a in self._c.items()})

    def __sub__(self, other):
        if not isinstance(other, NumPoly):
            other = NumPoly.constant(self._q, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, k) -> "NumPoly":
        k = _frac(k)
        return NumPoly(self._q, {i: a * k for i, a in self._c.items()})

    def __mul__(self, other):
        if not isinstance(other, NumPoly):
            return self.scale(other)
        self._check(other)
        if self.is_zero() or other.is_zero():
            return NumPoly(self._q)
        bounds = tuple(a + b for a, b in zip(self.degree_bounds(), other.degree_bounds()))
        return _from_grid(bounds, lambda x: self.evaluate(x) * other.evaluate(x))

    __rmul__ = __mul__

    def shift(self, deltas: Sequence[int]) -> "NumPoly":
        """Return r with r(x) = self(x + deltas)."""
        if len(deltas) != self._q:
            raise DimensionError("shift vector has wrong length")
        if not any(deltas) or self.is_zero():
            return self
        d = tuple(int(x) for x in deltas)
        return _from_grid(self.degree_bounds(),
                          lambda x: self.evaluate(tuple(a + b for a, b in zip(x, d))))

    def substitute_vars(self, positions: Sequence[int], num_vars: int) -> "NumPoly":
        """Embed into a polynomial ring with more variables.

        Variable v of self becomes variable positions[v] of the result.
        """
        c = {}
        for idx, a in self._c.items():
            new = [0] * num_vars
            for v, i in enumerate(idx):
                new[positions[v]] = i
            c[tuple(new)] = a
        return NumPoly(num_vars, c)

    def tensor(self, other: "NumPoly") -> "NumPoly":
        """Product of polynomials in disjoint variable sets (self's come first)."""
        c = {}
        for i, a in self._c.items():
            for j, b in other._c.items():
                c[i + j] = a * b
        return NumPoly(self._q + other._q, c)

    # power basis
    def to_power_basis(self) -> Dict[Index, Fraction]:
        """Coefficients with respect to the monomials t_1^e_1 ... t_q^e_q."""
        out: Dict[Index, Fraction] = {}
        for idx, a in self._c.items():
            factors = [_binom_power_coeffs(i) for i in idx]
            for combo in itertools.product(*[list(enumerate(f)) for f in factors]):
                e = tuple(x[0] for x in combo)
                v = a
                for _, cf in combo:
                    v *= cf
                if v:
                    out[e] = out.get(e, Fraction(0)) + v
        return {e: v for e, v in out.items() if v}

    @classmethod
    def from_power_basis(cls, num_vars: int, coeffs: Mapping[Sequence[int], object]) -> "NumPoly":
        coeffs = {tuple(e): _frac(v) for e, v in coeffs.items()}
        if not coeffs:
            return cls(num_vars)
        bounds = tuple(max(e[v] for e in coeffs) for v in range(num_vars))

        def f(x):
            s = Fraction(0)
            for e, v in coeffs.items():
                p = v
                for t, k in zip(x, e):
                    p *= t ** k
                s += p
            return s
        return _from_grid(bounds, f)

    def homogeneous_part(self, degree: int, variables: Sequence[int] | None = None) -> Dict[Index, Fraction]:
        """Power-basis monomials whose degree in `variables` equals `degree`."""
        vs = range(self._q) if variables is None else list(variables)
        pw = self.to_power_basis()
        return {e: v for e, v in pw.items() if sum(e[i] for i in vs) == degree}

    # comparisons and serialization
    def __eq__(self, other):
        if isinstance(other, NumPoly):
            return self._q == other._q and self._c == other._c
        if isinstance(other, (int, Fraction)):
            return self == NumPoly.constant(self._q, other)
        return NotImplemented

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self._q, frozenset(self._c.items())))
            object.__setattr__(self, "_hash", h)
        return h

    def to_text(self) -> str:
        if not self._c:
            return "0"
        parts = []
        for idx in self.support():
            a = self._c[idx]
            fac = [f"C(t{v + 1}+{i},{i})" for v, i in enumerate(idx) if i]
            mag = abs(a)
            if fac:
                body = "*".join(fac) if mag == 1 else f"{mag}*" + "*".join(fac)
            else:
                body = str(mag)
            sign = "-" if a < 0 else "+"
            if not parts:
                parts.append(body if sign == "+" else "-" + body)
            else:
                parts.append(f"{sign} {body}")
        return " ".join(parts)

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"NumPoly({self._q}, {self.to_text()!r})"

    def to_json_obj(self) -> dict:
        return {"vars": self._q,
                "terms": [{"index": list(i), "coeff": str(self._c[i])} for i in self.support()]}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), separators=(",", ":"))

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "NumPoly":
        return cls(int(obj["vars"]), {tuple(t["index"]): Fraction(t["coeff"]) for t in obj["terms"]})

    @classmethod
    def from_json(cls, text: str) -> "NumPoly":
        return cls.from_json_obj(json.loads(text))


@lru_cache(maxsize=None)
def _binom_power_coeffs(i: int) -> Tuple[Fraction, ...]:
    # C(t+i, i) = prod_{k=1..i} (t+k) / i!
    poly = [Fraction(1)]
    for k in range(1, i + 1):
        nxt = [Fraction(0)] * (len(poly) + 1)
        for e, c in enumerate(poly):
            nxt[e] += c * k
            nxt[e + 1] += c
        poly = nxt
    f = factorial(i)
    return tuple(c / f for c in poly)


@lru_cache(maxsize=None)
def _inverse_axis(d: int) -> Tuple[Tuple[Fraction, ...], ...]:
    # V[x][i] = C(x+i, i) for x, i in 0..d ; return V^{-1}
    n = d + 1
    V = [[Fraction(binom(x + i, i)) for i in range(n)] for x in range(n)]
    inv = [[Fraction(int(r == c)) for c in range(n)] for r in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if V[r][col])
        V[col], V[piv] = V[piv], V[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        p = V[col][col]
        V[col] = [v / p for v in V[col]]
        inv[col] = [v / p for v in inv[col]]
        for r in range(n):
            if r != col and V[r][col]:
                f = V[r][col]
                V[r] = [a - f * b for a, b in zip(V[r], V[col])]
                inv[r] = [a - f * b for a, b in zip(inv[r], inv[col])]
    return tuple(tuple(row) for row in inv)


def _from_grid(bounds: Sequence[int], fn) -> NumPoly:
    """Interpolate fn on the tensor grid prod_v {0..bounds[v]} one axis at a time."""
    q = len(bounds)
    if q == 0:
        return NumPoly(0, {(): fn(())})
    shape = [b + 1 for b in bounds]
    vals = {x: _frac(fn(x)) for x in itertools.product(*[range(s) for s in shape])}
    for axis in range(q):
        inv = _inverse_axis(bounds[axis])
        new = {}
        for x in vals:
            if x[axis] != 0:
                continue
            line = [vals[x[:axis] + (k,) + x[axis + 1:]] for k in range(shape[axis])]
            for i in range(shape[axis]):
                new[x[:axis] + (i,) + x[axis + 1:]] = sum((inv[i][k] * line[k] for k in range(shape[axis])), Fraction(0))
        vals = new
    return NumPoly(q, vals)


def interpolate(samples: Iterable[Tuple[Sequence[int], object]], degree_bounds: Sequence[int]) -> NumPoly:
    """Exact interpolation with per-variable degree bounds.

    Every sample is used: the first `prod(d_i+1)` independent ones determine
    the answer and the rest must agree with it.  Elimination is carried out on
    integer rows (the right-hand sides are cleared of denominators first), with
    row contents divided out after each step.
    """
    bounds = tuple(int(d) for d in degree_bounds)
    q = len(bounds)
    samples = [(tuple(int(v) for v in pt), _frac(val)) for pt, val in samples]
    for pt, _ in samples:
        if len(pt) != q:
            raise DimensionError(f"sample point {pt} has wrong dimension")
    cols = list(itertools.product(*[range(d + 1) for d in bounds]))
    ncol = len(cols)
    den = 1
    for _, v in samples:
        den = den * v.denominator // gcd(den, v.denominator)

    pivots: list = []   # (col, row) in insertion order
    for pt, val in samples:
        row = []
        for idx in cols:
            prod = 1
            for t, i in zip(pt, idx):
                if i:
                    prod *= binom(t + i, i)
            row.append(prod)
        row.append(int(val * den))
        for c, prow in pivots:
            if row[c]:
                a, b = prow[c], row[c]
                row = [a * x - b * y for x, y in zip(row, prow)]
                g = 0
                for x in row:
                    if x:
                        g = gcd(g, x)
                        if g == 1:
                            break
                if g > 1:
                    row = [x // g for x in row]
        lead = next((c for c in range(ncol) if row[c]), None)
        if lead is None:
            if row[-1]:
                raise InconsistentSamplesError(
                    f"no polynomial with degree bounds {bounds} fits sample {pt} -> {val}", (pt, val))
            continue
        pivots.append((lead, row))
    if len(pivots) < ncol:
        raise InsufficientSamplesError(
            f"{len(pivots)} independent samples, need {ncol} for degree bounds {bounds}")
    sol = [Fraction(0)] * ncol
    for c, row in reversed(pivots):
        s = Fraction(row[-1])
        for k in range(ncol):
            if k != c and row[k]:
                s -= row[k] * sol[k]
        sol[c] = s / row[c]
    return NumPoly(q, {cols[k]: sol[k] / den for k in range(ncol) if sol[k]})


def evaluate_grid(p: NumPoly, points: Iterable[Sequence[int]]):
    return [(tuple(x), p.evaluate(x)) for x in points]
