"""Polynomials over [0,1] variables and perfect-recall detection.

Two representations are used:

* :class:`GeneralPoly` -- arbitrary-degree polynomials in plain variables.
* :class:`MultilinearPoly` -- multilinear polynomials over literals ``x`` and
  ``~x`` (read as ``1 - x``), with no term containing both a variable and its
  complement.

Perfect recall is decided by repeatedly splitting a polynomial as
``x*f0 + ~x*f1 + f2`` with pairwise disjoint variable sets.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import GameError, ParseError

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
IDENT_RE = re.compile(rf"^{_IDENT}$")


def _coef(c) -> Fraction:
    if isinstance(c, float):
        raise TypeError("polynomial coefficients must be exact")
    return Fraction(c)


def _format_coef_term(coef: Fraction, factors: list[str], first: bool) -> str:
    sign = "-" if coef < 0 else "+"
    mag = -coef if coef < 0 else coef
    if factors:
        body = "*".join(factors) if mag == 1 else "*".join([str(mag)] + factors)
    else:
        body = str(mag)
    if first:
        return body if sign == "+" else "-" + body
    return f" {sign} {body}"


# ---------------------------------------------------------------------------
# General polynomials

class GeneralPoly:
    """Sparse polynomial: ``{((var, exp), ...): coefficient}`` with sorted monomials."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping | None = None):
        out: dict = {}
        for mono, c in (terms or {}).items():
            key = self._norm_mono(mono)
            out[key] = out.get(key, Fraction(0)) + _coef(c)
        self.terms = {m: c for m, c in out.items() if c != 0}

    @staticmethod
    def _norm_mono(mono) -> tuple:
        acc: dict = {}
        for v, e in mono:
            if e < 0:
                raise ValueError("negative exponent")
            if e:
                acc[v] = acc.get(v, 0) + e
        return tuple(sorted(acc.items()))

    @classmethod
    def const(cls, c) -> "GeneralPoly":
        return cls({(): c})

    @classmethod
    def var(cls, name: str) -> "GeneralPoly":
        return cls({((name, 1),): 1})

    @property
    def variables(self) -> list:
        return sorted({v for m in self.terms for v, _ in m})

    def degree(self) -> int:
        return max((sum(e for _, e in m) for m in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def is_multilinear(self) -> bool:
        return all(e == 1 for m in self.terms for _, e in m)

    def _coerce(self, other) -> "GeneralPoly":
        if isinstance(other, GeneralPoly):
            return other
        if isinstance(other, MultilinearPoly):
            return other.to_general()
        return GeneralPoly.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, 0) + c
        return GeneralPoly(terms)

    __radd__ = __add__

    def __neg__(self):
        return GeneralPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        terms: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                key = self._norm_mono(m1 + m2)
                terms[key] = terms.get(key, 0) + c1 * c2
        return GeneralPoly(terms)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = GeneralPoly.const(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = GeneralPoly.const(other)
        if isinstance(other, MultilinearPoly):
            other = other.to_general()
        if not isinstance(other, GeneralPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def evaluate(self, point: Mapping):
        total = 0
        for m, c in self.terms.items():
            val = c
            for v, e in m:
                if v not in point:
                    raise GameError(f"missing assignment for variable {v!r}")
                val = val * point[v] ** e
            total += val
        return total

    def substitute(self, var: str, value) -> "GeneralPoly":
        terms: dict = {}
        for m, c in self.terms.items():
            rest, k = [], 0
            for v, e in m:
                if v == var:
                    k = e
                else:
                    rest.append((v, e))
            key = tuple(rest)
            terms[key] = terms.get(key, 0) + c * Fraction(value) ** k
        return GeneralPoly(terms)

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda mc: (-sum(e for _, e in mc[0]), [(v, -e) for v, e in mc[0]]))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for i, (m, c) in enumerate(self.sorted_terms()):
            factors = [v if e == 1 else f"{v}^{e}" for v, e in m]
            parts.append(_format_coef_term(c, factors, i == 0))
        return "".join(parts)

    def __repr__(self):
        return f"GeneralPoly({str(self)!r})"


# ---------------------------------------------------------------------------
# Multilinear polynomials over literals

Literal = tuple  # (variable, complemented: bool)


def _lit_str(lit) -> str:
    return ("~" if lit[1] else "") + lit[0]


class MultilinearPoly:
    """Element of M(X): ``{frozenset of literals: coefficient}``."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping | None = None):
        out: dict = {}
        for lits, c in (terms or {}).items():
            key = frozenset((v, bool(neg)) for v, neg in lits)
            names = [v for v, _ in key]
            if len(names) != len(set(names)):
                raise GameError(
                    "a term may contain each variable at most once and never with its complement")
            out[key] = out.get(key, Fraction(0)) + _coef(c)
        self.terms = {k: c for k, c in out.items() if c != 0}

    @classmethod
    def const(cls, c) -> "MultilinearPoly":
        return cls({frozenset(): c})

    @classmethod
    def literal(cls, var: str, complemented: bool = False) -> "MultilinearPoly":
        return cls({frozenset([(var, complemented)]): 1})

    @classmethod
    def from_general(cls, g: GeneralPoly) -> "MultilinearPoly":
        if not g.is_multilinear():
            raise GameError(f"polynomial is not multilinear: {g}")
        return cls({frozenset((v, False) for v, _ in m): c for m, c in g.terms.items()})

    @property
    def variables(self) -> list:
        return sorted({v for t in self.terms for v, _ in t})

    def is_zero(self) -> bool:
        return not self.terms

    def has_complements(self) -> bool:
        return any(neg for t in self.terms for _, neg in t)

    def full_expand(self) -> "MultilinearPoly":
        """Rewrite every ``~x*t`` as ``t - x*t`` and collect like terms."""
        out: dict = {}
        for lits, c in self.terms.items():
            pos = [v for v, neg in lits if not neg]
            negs = [v for v, neg in lits if neg]
            # prod over complements (1 - y) expands to sum over subsets S of (-1)^|S| prod_S y
            n = len(negs)
            for mask in range(1 << n):
                chosen = [negs[i] for i in range(n) if mask >> i & 1]
                key = frozenset((v, False) for v in pos + chosen)
                sign = -1 if len(chosen) % 2 else 1
                out[key] = out.get(key, 0) + sign * c
        return MultilinearPoly(out)

    def to_general(self) -> GeneralPoly:
        e = self.full_expand()
        return GeneralPoly({tuple((v, 1) for v, _ in t): c for t, c in e.terms.items()})

    def substitute(self, var: str, value) -> "MultilinearPoly":
        value = Fraction(value)
        out: dict = {}
        for lits, c in self.terms.items():
            factor = Fraction(1)
            rest = []
            for v, neg in lits:
                if v == var:
                    factor *= (1 - value) if neg else value
                else:
                    rest.append((v, neg))
            key = frozenset(rest)
            out[key] = out.get(key, 0) + c * factor
        return MultilinearPoly(out)

    def evaluate(self, point: Mapping):
        total = 0
        for lits, c in self.terms.items():
            val = c
            for v, neg in lits:
                if v not in point:
                    raise GameError(f"missing assignment for variable {v!r}")
                val = val * ((1 - point[v]) if neg else point[v])
            total += val
        return total

    def _coerce(self, other) -> "MultilinearPoly":
        if isinstance(other, MultilinearPoly):
            return other
        if isinstance(other, GeneralPoly):
            return MultilinearPoly.from_general(other)
        return MultilinearPoly.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, 0) + c
        return MultilinearPoly(terms)

    __radd__ = __add__

    def __neg__(self):
        return MultilinearPoly({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __mul__(self, other):
        """Product of polynomials over disjoint variable sets (or by a scalar)."""
        other = self._coerce(other)
        if set(self.variables) & set(other.variables):
            raise GameError("product of multilinear polynomials sharing variables is not multilinear")
        terms: dict = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = k1 | k2
                terms[k] = terms.get(k, 0) + c1 * c2
        return MultilinearPoly(terms)

    __rmul__ = __mul__

    def __eq__(self, other):
        """Syntactic equality of canonical forms; use :func:`equivalent` for ≡."""
        if isinstance(other, (int, Fraction)):
            other = MultilinearPoly.const(other)
        if not isinstance(other, MultilinearPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    @staticmethod
    def _term_key(lits) -> tuple:
        return (-len(lits), tuple(sorted(lits)))

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda kc: self._term_key(kc[0]))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for i, (lits, c) in enumerate(self.sorted_terms()):
            factors = [_lit_str(l) for l in sorted(lits)]
            parts.append(_format_coef_term(c, factors, i == 0))
        return "".join(parts)

    def __repr__(self):
        return f"MultilinearPoly({str(self)!r})"


def _as_multilinear(f) -> MultilinearPoly:
    if isinstance(f, MultilinearPoly):
        return f
    if isinstance(f, GeneralPoly):
        return MultilinearPoly.from_general(f)
    if isinstance(f, str):
        return parse_multilinear(f)
    return MultilinearPoly.const(f)


def full_expand(f) -> MultilinearPoly:
    return _as_multilinear(f).full_expand()


def equivalent(f, g) -> bool:
    """``f ≡ g``: identical complement-free expansions."""
    if isinstance(f, GeneralPoly) or isinstance(g, GeneralPoly):
        a = f if isinstance(f, GeneralPoly) else _as_multilinear(f).to_general()
        b = g if isinstance(g, GeneralPoly) else _as_multilinear(g).to_general()
        return a == b
    return full_expand(f) == full_expand(g)


def evaluate(f, point: Mapping):
    """Value of ``f`` at ``point``; ``~x`` evaluates to ``1 - x``."""
    return f.evaluate(point)


# ---------------------------------------------------------------------------
# Cancellation and decompositions

def cancels(f, x: str, y: str, b: int) -> bool:
    """Does substituting ``x = b`` remove every ``y`` / ``~y`` term from ``f``?"""
    if x == y:
        raise GameError("self-cancellation undefined")
    if b not in (0, 1):
        raise GameError("cancellation value must be 0 or 1")
    g = full_expand(f).substitute(x, b)
    return y not in g.variables


@dataclass(frozen=True)
class Decomposition:
    pivot: str
    f0: MultilinearPoly
    f1: MultilinearPoly
    f2: MultilinearPoly
    X0: frozenset
    X1: frozenset
    X2: frozenset
    disconnected: bool
    diagnostic: str | None = None

    def recombine(self) -> MultilinearPoly:
        x = self.pivot
        return (MultilinearPoly.literal(x) * self.f0
                + MultilinearPoly.literal(x, True) * self.f1 + self.f2)

    def __str__(self):
        x = self.pivot
        return f"{x}*({self.f0}) + ~{x}*({self.f1}) + ({self.f2})"


def _split_pivot(g: MultilinearPoly, x: str):
    """``g = x*A + B`` for complement-free ``g``; returns (A, B)."""
    a, b = {}, {}
    lit = (x, False)
    for t, c in g.terms.items():
        if lit in t:
            a[t - {lit}] = c
        else:
            b[t] = c
    return MultilinearPoly(a), MultilinearPoly(b)


def x_decomposition(f, x: str) -> Decomposition:
    """Candidate disconnected ``x``-decomposition built from cancellation sets."""
    g = full_expand(f)
    vs = g.variables
    if x not in vs:
        raise GameError(f"pivot {x!r} does not occur in the polynomial")
    A, B = _split_pivot(g, x)
    b_vars = set(B.variables)
    ab_vars = set((A + B).variables)
    others = [v for v in vs if v != x]
    X0 = frozenset(v for v in others if v not in b_vars)
    X1 = frozenset(v for v in others if v not in ab_vars)
    X2 = frozenset(others) - X0 - X1

    f1_terms, f2_terms = {}, {}
    diagnostic = None
    for t, c in B.terms.items():
        tv = {v for v, _ in t}
        if (tv and tv <= X1) or (not tv and not X2):
            # with nothing on the x-free side a constant splits as x*c + ~x*c
            f1_terms[t] = c
        elif tv <= X2:
            f2_terms[t] = c
        else:
            bad = sorted(tv - X2 if tv & X1 else tv - X1)
            diagnostic = diagnostic or f"not disconnected due to variable {bad[0]}"
            f2_terms[t] = c
    f1 = MultilinearPoly(f1_terms)
    f2 = MultilinearPoly(f2_terms)
    f0 = A + f1
    stray = sorted(set(f0.variables) - X0)
    if stray and diagnostic is None:
        diagnostic = f"not disconnected due to variable {stray[0]}"
    return Decomposition(x, f0, f1, f2, X0, X1, X2, diagnostic is None, diagnostic)


@dataclass(frozen=True)
class RecallWitness:
    """Tree of decompositions certifying perfect recall."""
    poly: MultilinearPoly
    decomposition: Decomposition | None = None
    parts: tuple = ()

    def pretty(self, indent: int = 0) -> str:
        pad = "  " * indent
        if self.decomposition is None:
            return f"{pad}base: {self.poly}\n"
        d = self.decomposition
        out = (f"{pad}pivot {d.pivot}: X0={{{','.join(sorted(d.X0))}}} "
               f"X1={{{','.join(sorted(d.X1))}}} X2={{{','.join(sorted(d.X2))}}}\n")
        return out + "".join(p.pretty(indent + 1) for p in self.parts)


@dataclass(frozen=True)
class RecallCheck:
    perfect_recall: bool
    witness: RecallWitness | None = None
    failing: MultilinearPoly | None = None
    steps: int = field(default=0, compare=False)

    def __bool__(self):
        return self.perfect_recall


def is_perfect_recall(f) -> RecallCheck:
    """Recursive disconnected-decomposition search.

    Any disconnected decomposition found suffices, so variables are tried in
    sorted order and the first success is taken.
    """
    steps = 0

    def rec(p: MultilinearPoly):
        nonlocal steps
        g = p.full_expand()
        if len(g.variables) <= 1:
            return RecallWitness(g), None
        for x in g.variables:
            steps += 1
            d = x_decomposition(g, x)
            if not d.disconnected:
                continue
            parts = []
            for part in (d.f0, d.f1, d.f2):
                w, bad = rec(part)
                if w is None:
                    return None, bad
                parts.append(w)
            return RecallWitness(g, d, tuple(parts)), None
        return None, g

    witness, failing = rec(_as_multilinear(f))
    return RecallCheck(witness is not None, witness, failing, steps)


# ---------------------------------------------------------------------------
# Text syntax:  3*x*y + 4*~x*y - 1/2*z^2 + 5

_TOKENS = re.compile(rf"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<id>{_IDENT})|(?P<op>[-+*^~]))")


def _tokenize(text: str):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKENS.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", 1, pos + 1)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind) + 1))
        pos = m.end()
    return out


def parse_terms(text: str) -> list:
    """Parse into ``[(coef, [(var, complemented, exp), ...]), ...]`` without simplification."""
    toks = _tokenize(text)
    if not toks:
        raise ParseError("empty polynomial", 1, 1)
    i = 0
    terms = []

    def peek():
        return toks[i] if i < len(toks) else (None, None, len(text) + 1)

    sign = 1
    kind, val, col = peek()
    if kind == "op" and val in "+-":
        sign = -1 if val == "-" else 1
        i += 1
    while True:
        coef = Fraction(sign)
        factors = []
        while True:
            kind, val, col = peek()
            if kind == "num":
                if val.endswith("/0"):
                    raise ParseError("zero denominator", 1, col)
                coef *= Fraction(val)
                i += 1
            elif kind == "id":
                i += 1
                exp = 1
                if peek()[1] == "^":
                    i += 1
                    k2, v2, c2 = peek()
                    if k2 != "num" or "/" in v2:
                        raise ParseError("exponent must be a non-negative integer", 1, c2)
                    exp = int(v2)
                    i += 1
                factors.append((val, False, exp))
            elif kind == "op" and val == "~":
                i += 1
                k2, v2, c2 = peek()
                if k2 != "id":
                    raise ParseError("expected a variable after ~", 1, c2)
                i += 1
                if peek()[1] == "^":
                    raise ParseError("complemented literals cannot carry exponents", 1, peek()[2])
                factors.append((v2, True, 1))
            else:
                raise ParseError(f"expected a number or variable, got {val!r}" if val
                                 else "unexpected end of input", 1, col)
            if peek()[1] == "*":
                i += 1
                continue
            break
        terms.append((coef, factors))
        kind, val, col = peek()
        if kind is None:
            return terms
        if kind == "op" and val in "+-":
            sign = -1 if val == "-" else 1
            i += 1
            continue
        raise ParseError(f"unexpected token {val!r}", 1, col)


def parse_general(text: str) -> GeneralPoly:
    """Parse a polynomial; ``~x`` is expanded to ``1 - x``."""
    total = GeneralPoly()
    for coef, factors in parse_terms(text):
        term = GeneralPoly.const(coef)
        for v, neg, e in factors:
            base = (1 - GeneralPoly.var(v)) if neg else GeneralPoly.var(v)
            term = term * base ** e
        total = total + term
    return total


def parse_multilinear(text: str) -> MultilinearPoly:
    """Parse a polynomial of M(X), keeping complements as literals."""
    out: dict = {}
    for coef, factors in parse_terms(text):
        seen = {}
        for v, neg, e in factors:
            if e != 1:
                raise ParseError(f"exponent on {v} is not allowed in a multilinear polynomial", 1)
            if v in seen:
                raise ParseError(f"variable {v} occurs twice in one term", 1)
            seen[v] = neg
        key = frozenset(seen.items())
        out[key] = out.get(key, 0) + coef
    return MultilinearPoly(out)
