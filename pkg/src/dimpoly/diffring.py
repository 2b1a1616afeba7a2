"""Inversive difference polynomials over Q with constant coefficients.

Terms are pairs (gamma, j) standing for gamma*y_j, gamma an exponent vector in
Z^m and j a 1-based generator index.  A polynomial is a map from monomials
(sorted tuples of (term, exponent)) to nonzero Fractions.  The block orders
<_k, leaders, coleaders, effective orders, E-reduction and characteristic sets
of linear principal ideals live here.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .lattice import DomainError, Partition, ords, tri_le


class Cmp(enum.IntEnum):
    LT = -1
    EQ = 0
    GT = 1


def _cmp(a, b) -> Cmp:
    return Cmp.LT if a < b else (Cmp.GT if a > b else Cmp.EQ)


class Term(NamedTuple):
    gamma: Tuple[int, ...]
    gen: int

    def __str__(self):
        return format_term(self)


Monomial = Tuple[Tuple[Term, int], ...]
ONE: Monomial = ()


class NoTermsError(ValueError):
    pass


class OrderingError(ValueError):
    pass


class InstabilityError(RuntimeError):
    pass


class MarginError(RuntimeError):
    pass


class ParseError(ValueError):
    def __init__(self, msg, line=1, col=1):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# orders on Gamma and on terms


def gamma_key(g: Sequence[int], k: int, part: Partition) -> Tuple[int, ...]:
    """The (2m+p)-tuple that defines <_k (k is 1-based)."""
    if not 1 <= k <= part.p:
        raise DomainError(f"block index {k} not in 1..{part.p}")
    o = ords(g, part)
    blk = part.blocks[k - 1]
    rest = [i for i in range(part.m) if i not in blk]
    return ((o[k - 1],) + tuple(o[i] for i in range(part.p) if i != k - 1)
            + tuple(abs(g[i]) for i in blk) + tuple(g[i] for i in blk)
            + tuple(abs(g[i]) for i in rest) + tuple(g[i] for i in rest))


def term_key(t: Term, k: int, part: Partition):
    return gamma_key(t.gamma, k, part) + (t.gen,)


def compare_gamma(g1: Sequence[int], g2: Sequence[int], k: int, part: Partition) -> Cmp:
    return _cmp(gamma_key(g1, k, part), gamma_key(g2, k, part))


def compare_terms(u: Term, v: Term, k: int, part: Partition) -> Cmp:
    return _cmp(term_key(u, k, part), term_key(v, k, part))


def ord_term(t: Term, part: Partition, k: int) -> int:
    return sum(abs(t.gamma[i]) for i in part.blocks[k - 1])


# ---------------------------------------------------------------------------
# polynomials


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for t, e in b:
        d[t] = d.get(t, 0) + e
    return tuple(sorted(d.items()))


class DiffPolynomial:
    """Immutable polynomial in the terms gamma*y_j with rational coefficients."""

    __slots__ = ("m", "_t")

    def __init__(self, m: int, terms=()):
        d: Dict[Monomial, Fraction] = {}
        items = terms.items() if isinstance(terms, dict) else terms
        for mono, c in items:
            mono = tuple(sorted((Term(tuple(t.gamma), int(t.gen)), int(e)) for t, e in mono if e))
            for t, e in mono:
                if len(t.gamma) != m:
                    raise DomainError(f"term {t} does not have {m} exponents")
                if e < 0:
                    raise DomainError("negative exponent in monomial")
            # merge repeated factors
            md: Dict[Term, int] = {}
            for t, e in mono:
                md[t] = md.get(t, 0) + e
            mono = tuple(sorted(md.items()))
            v = d.get(mono, Fraction(0)) + Fraction(c)
            if v:
                d[mono] = v
            else:
                d.pop(mono, None)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "_t", d)

    def __setattr__(self, *_):
        raise AttributeError("DiffPolynomial is immutable")

    # constructors
    @classmethod
    def term(cls, gamma: Sequence[int], gen: int = 1, coeff=1) -> "DiffPolynomial":
        return cls(len(gamma), {((Term(tuple(gamma), gen), 1),): coeff})

    @classmethod
    def const(cls, m: int, c) -> "DiffPolynomial":
        return cls(m, {ONE: c})

    @classmethod
    def linear(cls, m: int, pairs: Iterable[Tuple[Sequence[int], int, object]]) -> "DiffPolynomial":
        return cls(m, [(((Term(tuple(g), j), 1),), c) for g, j, c in pairs])

    # views
    @property
    def items(self):
        return self._t.items()

    def monomials(self):
        return list(self._t)

    def coeff_of(self, mono: Monomial) -> Fraction:
        return self._t.get(mono, Fraction(0))

    def is_zero(self) -> bool:
        return not self._t

    def is_constant(self) -> bool:
        return all(not mono for mono in self._t)

    def constant_value(self) -> Fraction:
        return self._t.get(ONE, Fraction(0))

    def terms(self) -> List[Term]:
        s = set()
        for mono in self._t:
            for t, _ in mono:
                s.add(t)
        return sorted(s)

    def degree_in(self, u: Term) -> int:
        return max((e for mono in self._t for t, e in mono if t == u), default=0)

    def total_degree(self) -> int:
        return max((sum(e for _, e in mono) for mono in self._t), default=-1)

    def is_linear_homogeneous(self) -> bool:
        return bool(self._t) and all(len(mono) == 1 and mono[0][1] == 1 for mono in self._t)

    def generators(self) -> List[int]:
        return sorted({t.gen for t in self.terms()})

    # arithmetic
    def _same(self, other):
        if other.m != self.m:
            raise DomainError("polynomials live in different rings")

    def __add__(self, other):
        if not isinstance(other, DiffPolynomial):
            other = DiffPolynomial.const(self.m, other)
        self._same(other)
        d = dict(self._t)
        for mono, c in other._t.items():
            d[mono] = d.get(mono, Fraction(0)) + c
        return DiffPolynomial(self.m, d)

    __radd__ = __add__

    def __neg__(self):
        return DiffPolynomial(self.m, {k: -v for k, v in self._t.items()})

    def __sub__(self, other):
        if not isinstance(other, DiffPolynomial):
            other = DiffPolynomial.const(self.m, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, DiffPolynomial):
            c = Fraction(other)
            return DiffPolynomial(self.m, {k: v * c for k, v in self._t.items()})
        self._same(other)
        d: Dict[Monomial, Fraction] = {}
        for m1, c1 in self._t.items():
            for m2, c2 in other._t.items():
                mono = _mono_mul(m1, m2)
                d[mono] = d.get(mono, Fraction(0)) + c1 * c2
        return DiffPolynomial(self.m, d)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        out = DiffPolynomial.const(self.m, 1)
        for _ in range(e):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, DiffPolynomial):
            return self.m == other.m and self._t == other._t
        if isinstance(other, (int, Fraction)):
            return self == DiffPolynomial.const(self.m, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.m, frozenset(self._t.items())))

    def split_by(self, u: Term, d: int) -> "DiffPolynomial":
        """Coefficient of u^d when self is viewed as a polynomial in u."""
        out = {}
        for mono, c in self._t.items():
            e = dict(mono).get(u, 0)
            if e == d:
                out[tuple((t, x) for t, x in mono if t != u)] = c
        return DiffPolynomial(self.m, out)

    def __repr__(self):
        return f"DiffPolynomial({format_poly(self)!r})"

    def __str__(self):
        return format_poly(self)


def apply_gamma(g: Sequence[int], f: DiffPolynomial) -> DiffPolynomial:
    g = tuple(int(x) for x in g)
    if len(g) != f.m:
        raise DomainError("gamma has wrong length")
    if not any(g):
        return f
    out = {}
    for mono, c in f.items:
        out[tuple((Term(tuple(a + b for a, b in zip(t.gamma, g)), t.gen), e) for t, e in mono)] = c
    return DiffPolynomial(f.m, out)


def term_times(g: Sequence[int], t: Term) -> Term:
    return Term(tuple(a + b for a, b in zip(t.gamma, g)), t.gen)


# ---------------------------------------------------------------------------
# leaders, coleaders, effective orders


def _need_terms(f: DiffPolynomial) -> List[Term]:
    ts = f.terms()
    if not ts:
        raise NoTermsError("a constant polynomial has no leader")
    return ts


def leader(f: DiffPolynomial, k: int, part: Partition) -> Term:
    return max(_need_terms(f), key=lambda t: term_key(t, k, part))


def coleader(f: DiffPolynomial, k: int, part: Partition) -> Term:
    return min(_need_terms(f), key=lambda t: term_key(t, k, part))


def eord(f: DiffPolynomial, k: int, part: Partition) -> int:
    return ord_term(leader(f, k, part), part, k) - ord_term(coleader(f, k, part), part, k)


@dataclass(frozen=True)
class LeaderProfile:
    """Orders of all block leaders and coleaders of a polynomial."""
    u1: Term
    u_ord: Tuple[int, ...]   # ord_k u^{(k)}, k = 1..p
    v_ord: Tuple[int, ...]   # ord_k v^{(k)}, k = 1..p


def profile(f: DiffPolynomial, part: Partition) -> LeaderProfile:
    ts = _need_terms(f)
    u_ord, v_ord = [], []
    u1 = None
    for k in range(1, part.p + 1):
        keyed = [(term_key(t, k, part), t) for t in ts]
        hi = max(keyed)[1]
        lo = min(keyed)[1]
        if k == 1:
            u1 = hi
        u_ord.append(ord_term(hi, part, k))
        v_ord.append(ord_term(lo, part, k))
    return LeaderProfile(u1, tuple(u_ord), tuple(v_ord))


# ---------------------------------------------------------------------------
# divisibility


def divides_term(u: Term, v: Term) -> bool:
    return u.gen == v.gen and tri_le(u.gamma, v.gamma)


def quotient(u: Term, v: Term) -> Tuple[int, ...]:
    if not divides_term(u, v):
        raise DomainError(f"{format_term(u)} does not divide {format_term(v)}")
    return tuple(b - a for a, b in zip(u.gamma, v.gamma))


# ---------------------------------------------------------------------------
# stable leaders


def stable_leaders(f: DiffPolynomial, orthant: Sequence[int], k: int,
                   part: Partition) -> Tuple[Term, Term]:
    """Terms of f that become the k-leader and k-coleader of gamma*f deep in an orthant.

    `orthant` is a sign vector of +1/-1 entries.
    """
    ts = _need_terms(f)
    signs = tuple(1 if s >= 0 else -1 for s in orthant)
    if len(signs) != f.m:
        raise DomainError("orthant has wrong dimension")
    spread = max(max(t.gamma[i] for t in ts) - min(t.gamma[i] for t in ts) for i in range(f.m))
    found = []
    for depth in (spread + 2, 2 * spread + 5):
        g = tuple(s * depth for s in signs)
        gf = apply_gamma(g, f)
        inv = tuple(-x for x in g)
        found.append((term_times(inv, leader(gf, k, part)), term_times(inv, coleader(gf, k, part))))
    if found[0] != found[1]:
        raise InstabilityError(f"leaders differ between probes: {found}")
    return found[0]


# ---------------------------------------------------------------------------
# E-reduction


@dataclass(frozen=True)
class Witness:
    gamma: Tuple[int, ...]
    exponent: int
    term: Term


def _blocking_ok(gg: LeaderProfile, fp: LeaderProfile) -> bool:
    """True when the order conditions of a reduction step all hold."""
    p = len(fp.u_ord)
    for k in range(1, p):
        if gg.u_ord[k] > fp.u_ord[k]:
            return False
    for j in range(p):
        if gg.v_ord[j] < fp.v_ord[j]:
            return False
    return True


def _candidates(f: DiffPolynomial, g: DiffPolynomial, part: Partition, fp=None, gp=None):
    """All (term, exponent, gamma) in f at which g could act, in <_1-descending order."""
    if gp is None:
        gp = profile(g, part)
    u = gp.u1
    d = g.degree_in(u)
    if fp is None:
        fp = profile(f, part)
    out = []
    for t in f.terms():
        e = f.degree_in(t)
        if e >= d and divides_term(u, t):
            gam = quotient(u, t)
            gg = profile(apply_gamma(gam, g), part)
            if _blocking_ok(gg, fp):
                out.append((t, e, gam))
    out.sort(key=lambda x: term_key(x[0], 1, part), reverse=True)
    return out


def is_e_reduced(f: DiffPolynomial, g: DiffPolynomial, part: Partition):
    """(True, None) if f is E-reduced with respect to g, else (False, Witness)."""
    if g.is_constant():
        raise NoTermsError("reduction by a constant is undefined")
    if f.is_constant():
        return True, None
    c = _candidates(f, g, part)
    if c:
        t, e, gam = c[0]
        return False, Witness(gam, e, t)
    return True, None


def is_autoreduced(A: Sequence[DiffPolynomial], part: Partition) -> bool:
    if not A:
        return True
    if any(a.is_constant() for a in A):
        return False
    for i, a in enumerate(A):
        for j, b in enumerate(A):
            if i != j and not is_e_reduced(a, b, part)[0]:
                return False
    return True


def rank_key(f: DiffPolynomial, part: Partition):
    if f.is_constant():
        raise NoTermsError("constants have no rank key")
    pr = profile(f, part)
    u1 = pr.u1
    e = tuple(pr.u_ord[k] - pr.v_ord[k] for k in range(part.p))
    return (term_key(u1, 1, part), f.degree_in(u1)) + pr.u_ord[1:] + e


def rank_compare(f: DiffPolynomial, g: DiffPolynomial, part: Partition) -> Cmp:
    fc, gc = f.is_constant(), g.is_constant()
    if fc and gc:
        return Cmp.EQ
    if fc:
        return Cmp.LT
    if gc:
        return Cmp.GT
    return _cmp(rank_key(f, part), rank_key(g, part))


def _rk(f, part):
    return (0,) if f.is_constant() else (1,) + rank_key(f, part)


def sort_by_rank(A: Sequence[DiffPolynomial], part: Partition) -> List[DiffPolynomial]:
    return sorted(A, key=lambda f: (_rk(f, part), format_poly(f)))


def set_rank_compare(A: Sequence[DiffPolynomial], B: Sequence[DiffPolynomial], part: Partition) -> Cmp:
    for S in (A, B):
        for x, y in zip(S, S[1:]):
            if rank_compare(x, y, part) == Cmp.GT:
                raise OrderingError("sets must be sorted by ascending rank")
    for a, b in zip(A, B):
        c = rank_compare(a, b, part)
        if c != Cmp.EQ:
            return c
    if len(A) == len(B):
        return Cmp.EQ
    return Cmp.LT if len(A) > len(B) else Cmp.GT


@dataclass
class Reduction:
    hbar: DiffPolynomial
    J: DiffPolynomial
    # witnesses[i] is a list of (coefficient, gamma): C_i(g_i) = sum coeff * (gamma g_i)
    witnesses: List[List[Tuple[DiffPolynomial, Tuple[int, ...]]]]
    steps: List[Tuple[Term, int, int]] = field(default_factory=list)   # (z, deg, l)

    def combination(self, A: Sequence[DiffPolynomial]) -> DiffPolynomial:
        m = self.hbar.m
        tot = DiffPolynomial(m)
        for recs, g in zip(self.witnesses, A):
            for c, gam in recs:
                tot = tot + c * apply_gamma(gam, g)
        return tot

    def verify(self, h: DiffPolynomial, A: Sequence[DiffPolynomial]) -> bool:
        return (self.J * h - self.combination(A) - self.hbar).is_zero()


class DescentError(AssertionError):
    pass


def e_reduce(h: DiffPolynomial, A: Sequence[DiffPolynomial], part: Partition,
             max_steps: int = 100000) -> Reduction:
    """Reduce h modulo A until it is E-reduced with respect to every element.

    Each step picks the <_1-greatest eligible term z, then among the elements
    that can act on z the one with the greatest 1-leader (smallest index on
    ties), and replaces hbar by gamma(I_l)*hbar - c_z z^(d-d_l) * gamma(g_l).
    Eligibility is the E-reducedness test itself, so the leaders and
    coleaders of gamma*g are recomputed rather than shifted.
    """
    for g in A:
        if g.is_constant():
            raise NoTermsError("every element of A must be nonconstant")
    m = h.m
    profs = [profile(g, part) for g in A]
    degs = [g.degree_in(pr.u1) for g, pr in zip(A, profs)]
    inits = [g.split_by(pr.u1, d) for g, pr, d in zip(A, profs, degs)]
    hbar = h
    J = DiffPolynomial.const(m, 1)
    W: List[List[Tuple[DiffPolynomial, Tuple[int, ...]]]] = [[] for _ in A]
    steps = []
    last = None
    for _ in range(max_steps):
        if hbar.is_constant():
            break
        fp = profile(hbar, part)
        best = None
        for l, g in enumerate(A):
            for t, e, gam in _candidates(hbar, g, part, fp, profs[l])[:1]:
                key = (term_key(t, 1, part), term_key(profs[l].u1, 1, part), -l)
                if best is None or key > best[0]:
                    best = (key, t, e, gam, l)
        if best is None:
            break
        _, z, d, gam, l = best
        cur = (term_key(z, 1, part), d)
        if last is not None and not cur < last:
            raise DescentError(f"reduction did not descend: {format_term(z)}^{d} after {last}")
        last = cur
        cz = hbar.split_by(z, d)
        zpow = DiffPolynomial(m, {((z, d - degs[l]),): 1}) if d > degs[l] else DiffPolynomial.const(m, 1)
        gI = apply_gamma(gam, inits[l])
        mult = cz * zpow
        hbar = gI * hbar - mult * apply_gamma(gam, A[l])
        J = gI * J
        if not gI == 1:
            W = [[(gI * c, gm) for c, gm in recs] for recs in W]
        W[l].append((mult, gam))
        steps.append((z, d, l))
    else:
        raise DescentError("step limit reached")
    return Reduction(hbar, J, W, steps)


# ---------------------------------------------------------------------------
# characteristic sets of linear principal ideals


def coordinate_spread(f: DiffPolynomial) -> Tuple[int, ...]:
    ts = _need_terms(f)
    return tuple(max(t.gamma[i] for t in ts) - min(t.gamma[i] for t in ts) for i in range(f.m))


def _minimal_leaders(f: DiffPolynomial, part: Partition, margin: int):
    spread = coordinate_spread(f)
    box = [range(-(s + margin), s + margin + 1) for s in spread]
    best: Dict[Term, Tuple] = {}
    for g in itertools.product(*box):
        gf = apply_gamma(g, f)
        u = leader(gf, 1, part)
        key = (_rk(gf, part), compare_key_gamma(g, part))
        if u not in best or key < best[u][0]:
            best[u] = (key, g)
    leaders = list(best)
    arr = np.array([u.gamma for u in leaders], dtype=np.int64).reshape(len(leaders), f.m)
    gens = np.array([u.gen for u in leaders], dtype=np.int64)
    absa = np.abs(arr)
    out = []
    for i, u in enumerate(leaders):
        same = gens == u.gen
        div = same & np.all(arr * arr[i] >= 0, axis=1) & np.all(absa <= absa[i], axis=1)
        div[i] = False
        if not div.any():
            out.append(best[u][1])
    return out


def compare_key_gamma(g, part):
    return gamma_key(g, 1, part)


def linear_char_set(f: DiffPolynomial, part: Partition, search_margin: int = 2) -> List[DiffPolynomial]:
    """The gamma*f whose 1-leaders are minimal among all transforms of f.

    The search box is |gamma_i| <= spread_i + margin; the answer is accepted
    only if margin + 2 gives the same set.
    """
    if not f.is_linear_homogeneous():
        raise DomainError("linear_char_set needs a homogeneous linear polynomial")
    first = sorted(_minimal_leaders(f, part, search_margin))
    second = sorted(_minimal_leaders(f, part, search_margin + 2))
    if first != second:
        raise MarginError(f"characteristic set not stable at margin {search_margin}; "
                          f"try a larger search_margin")
    return sort_by_rank([apply_gamma(g, f) for g in first], part)


# ---------------------------------------------------------------------------
# text form


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<a>a(?P<ai>\d+))|(?P<y>y(?P<yi>\d+))|(?P<op>[-+*/^()]))")


class _Lexer:
    def __init__(self, text: str, line: int = 1):
        self.toks = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            mt = _TOKEN.match(text, pos)
            if not mt or mt.end() == pos:
                raise ParseError(f"unexpected character {text[pos:pos + 1]!r}", line, pos + 1)
            col = mt.start() + len(mt.group(0)) - len(mt.group(0).lstrip()) + 1
            if mt.group("num"):
                self.toks.append(("num", int(mt.group("num")), col))
            elif mt.group("a"):
                self.toks.append(("a", int(mt.group("ai")), col))
            elif mt.group("y"):
                self.toks.append(("y", int(mt.group("yi")), col))
            else:
                self.toks.append((mt.group("op"), None, col))
            pos = mt.end()
            while pos < len(text) and text[pos].isspace():
                pos += 1
        self.i = 0
        self.line = line
        self.end_col = len(text) + 1

    def peek(self, k=0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else ("eof", None, self.end_col)

    def take(self, kind=None):
        t = self.peek()
        if kind is not None and t[0] != kind:
            raise ParseError(f"expected {kind!r}, found {t[0]!r}", self.line, t[2])
        self.i += 1
        return t

    def error(self, msg):
        raise ParseError(msg, self.line, self.peek()[2])


class _Parser:
    def __init__(self, text, m, n, line):
        self.lx = _Lexer(text, line)
        self.m = m
        self.n = n

    def parse(self):
        p = self.poly()
        if self.lx.peek()[0] != "eof":
            self.lx.error(f"unexpected {self.lx.peek()[0]!r}")
        return p

    def poly(self):
        sign = 1
        if self.lx.peek()[0] in "+-" and self.lx.peek()[0] != "eof":
            sign = -1 if self.lx.take()[0] == "-" else 1
        acc = self.term() * sign
        while self.lx.peek()[0] in ("+", "-"):
            s = -1 if self.lx.take()[0] == "-" else 1
            acc = acc + self.term() * s
        return acc

    def rational(self):
        n = self.lx.take("num")[1]
        if self.lx.peek()[0] == "/":
            self.lx.take()
            d = self.lx.take("num")[1]
            if d == 0:
                self.lx.error("zero denominator")
            return Fraction(n, d)
        return Fraction(n)

    def term(self):
        if self.lx.peek()[0] == "num":
            c = self.rational()
            if self.lx.peek()[0] == "*":
                self.lx.take()
            elif self.lx.peek()[0] not in ("a", "y", "("):
                return DiffPolynomial.const(self.m, c)
            acc = self.factor() * c
        else:
            acc = self.factor()
        while self.lx.peek()[0] == "*" or self.lx.peek()[0] in ("a", "y", "("):
            if self.lx.peek()[0] == "*":
                self.lx.take()
            acc = acc * self.factor()
        return acc

    def factor(self):
        base = self.atom()
        if self.lx.peek()[0] == "^":
            self.lx.take()
            e = self.lx.take("num")[1]
            base = base ** e
        return base

    def signed_int(self):
        s = 1
        if self.lx.peek()[0] == "-":
            self.lx.take()
            s = -1
        elif self.lx.peek()[0] == "+":
            self.lx.take()
        return s * self.lx.take("num")[1]

    def atom(self):
        tk = self.lx.peek()
        if tk[0] == "(":
            self.lx.take()
            p = self.poly()
            self.lx.take(")")
            return p
        g = [0] * self.m
        while self.lx.peek()[0] == "a":
            _, idx, col = self.lx.take()
            if not 1 <= idx <= self.m:
                raise ParseError(f"translation index a{idx} outside 1..{self.m}", self.lx.line, col)
            e = 1
            if self.lx.peek()[0] == "^":
                self.lx.take()
                e = self.signed_int()
            g[idx - 1] += e
        tk = self.lx.peek()
        if tk[0] != "y":
            self.lx.error("expected a term y<j>")
        _, j, col = self.lx.take()
        if j < 1 or (self.n is not None and j > self.n):
            raise ParseError(f"generator index y{j} outside 1..{self.n}", self.lx.line, col)
        return DiffPolynomial.term(tuple(g), j)


def parse_poly(text: str, m: int, n: Optional[int] = None, line: int = 1) -> DiffPolynomial:
    """Parse the text grammar, e.g. 'a1^3 a2^-2 y1 + 2/3*(a2^1 y1)^2'."""
    if not text.strip():
        raise ParseError("empty polynomial", line, 1)
    return _Parser(text, m, n, line).parse()


def format_term(t: Term) -> str:
    parts = [f"a{i + 1}^{e}" for i, e in enumerate(t.gamma) if e]
    parts.append(f"y{t.gen}")
    return " ".join(parts)


def _mono_sort_key(mono: Monomial, part: Optional[Partition]):
    if part is None:
        part = Partition.from_sizes([len(mono[0][0].gamma)]) if mono else None
    if not mono:
        return ()
    keys = sorted(((term_key(t, 1, part), e) for t, e in mono), reverse=True)
    return tuple(keys)


def format_poly(f: DiffPolynomial, part: Optional[Partition] = None) -> str:
    """Text form; monomials descending under <_1 (single-block order if no partition)."""
    if f.is_zero():
        return "0"
    if part is None:
        part = Partition.from_sizes([f.m])
    monos = sorted(f.monomials(), key=lambda mo: _mono_sort_key(mo, part), reverse=True)
    out = []
    for mono in monos:
        c = f.coeff_of(mono)
        facs = []
        for t, e in sorted(mono, key=lambda x: term_key(x[0], 1, part), reverse=True):
            s = format_term(t)
            if e > 1:
                s = (f"({s})^{e}" if any(t.gamma) else f"{s}^{e}")
            facs.append(s)
        mag = abs(c)
        if not facs:
            body = str(mag)
        elif mag == 1:
            body = "*".join(facs)
        else:
            body = f"{mag}*" + "*".join(facs)
        if not out:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append(("- " if c < 0 else "+ ") + body)
    return " ".join(out)
