"""Exact rational arithmetic, sparse multivariate polynomials and linear algebra.

Rationals are :class:`fractions.Fraction`.  Polynomials are immutable maps from
exponent tuples to nonzero coefficients, ordered by graded lexicographic order
over the variable order of their :class:`VarContext`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

Rational = Fraction
Monomial = Tuple[int, ...]
Scalar = Union[int, Fraction]


class NotDivisible(ArithmeticError):
    """Raised when an exact polynomial quotient does not exist."""


class UnknownVariable(KeyError):
    pass


def as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def format_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class VarContext:
    names: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate variable names in {self.names}")

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownVariable(name) from None

    def gens(self, *names: str) -> List["Poly"]:
        return [Poly.var(self, n) for n in (names or self.names)]

    def extend(self, names: Iterable[str]) -> "VarContext":
        extra = [n for n in names if n not in self.names]
        return self if not extra else VarContext(self.names + tuple(dict.fromkeys(extra)))

    def zero(self) -> "Poly":
        return Poly(self, {})

    def one(self) -> "Poly":
        return Poly.const(self, 1)


def grlex_key(mono: Monomial) -> Tuple[int, Monomial]:
    return (sum(mono), mono)


class Poly:
    """Sparse polynomial with exact rational coefficients."""

    __slots__ = ("ctx", "terms", "_hash")

    def __init__(self, ctx: VarContext, terms: Mapping[Monomial, Scalar]):
        n = len(ctx)
        clean: Dict[Monomial, Fraction] = {}
        for mono, c in terms.items():
            if len(mono) != n:
                raise ValueError(f"exponent {mono} does not match context of size {n}")
            c = as_rational(c)
            if c:
                clean[tuple(mono)] = c
        self.ctx = ctx
        self.terms = clean
        self._hash = None

    # construction -------------------------------------------------------
    @classmethod
    def const(cls, ctx: VarContext, c: Scalar) -> "Poly":
        return cls(ctx, {(0,) * len(ctx): c})

    @classmethod
    def var(cls, ctx: VarContext, name: str) -> "Poly":
        mono = [0] * len(ctx)
        mono[ctx.index(name)] = 1
        return cls(ctx, {tuple(mono): 1})

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.ctx == self.ctx:
                return other
            if set(other.ctx.names) <= set(self.ctx.names):
                return other.embed(self.ctx)
            raise ValueError("polynomials live in incompatible contexts")
        return Poly.const(self.ctx, other)

    def embed(self, ctx: VarContext) -> "Poly":
        """Re-express in a context containing all of this polynomial's variables."""
        if ctx == self.ctx:
            return self
        positions = [ctx.index(n) for n in self.ctx.names]
        out = {}
        for mono, c in self.terms.items():
            new = [0] * len(ctx)
            for pos, e in zip(positions, mono):
                new[pos] = e
            out[tuple(new)] = c
        return Poly(ctx, out)

    def rename(self, mapping: Mapping[str, str], ctx: VarContext) -> "Poly":
        """Move to ``ctx`` sending each variable to ``mapping.get(name, name)``."""
        positions = [ctx.index(mapping.get(n, n)) for n in self.ctx.names]
        out: Dict[Monomial, Fraction] = {}
        for mono, c in self.terms.items():
            new = [0] * len(ctx)
            for pos, e in zip(positions, mono):
                new[pos] += e
            out[tuple(new)] = out.get(tuple(new), 0) + c
        return Poly(ctx, out)

    # arithmetic ---------------------------------------------------------
    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        out = dict(self.terms)
        for mono, c in other.terms.items():
            out[mono] = out.get(mono, 0) + c
        return Poly(self.ctx, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(self.ctx, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            c = as_rational(other)
            return Poly(self.ctx, {m: v * c for m, v in self.terms.items()})
        other = self._coerce(other)
        out: Dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, 0) + c1 * c2
        return Poly(self.ctx, out)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Poly":
        if isinstance(other, Poly):
            return exact_divide(self, other)
        c = as_rational(other)
        return Poly(self.ctx, {m: v / c for m, v in self.terms.items()})

    def __pow__(self, k: int) -> "Poly":
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        result, base = Poly.const(self.ctx, 1), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # comparison ---------------------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            if other.ctx != self.ctx:
                try:
                    other = self._coerce(other)
                except ValueError:
                    return False
            return self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == Poly.const(self.ctx, other).terms
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.ctx, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.terms)

    # inspection ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(m) == 0 for m in self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * len(self.ctx), Fraction(0))

    def total_degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def degree_in(self, name: str) -> int:
        i = self.ctx.index(name)
        return max((m[i] for m in self.terms), default=-1)

    def variables(self) -> List[str]:
        used = set()
        for m in self.terms:
            used.update(i for i, e in enumerate(m) if e)
        return [self.ctx.names[i] for i in sorted(used)]

    def sorted_terms(self) -> List[Tuple[Monomial, Fraction]]:
        return sorted(self.terms.items(), key=lambda t: grlex_key(t[0]), reverse=True)

    def leading_term(self) -> Tuple[Monomial, Fraction]:
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        mono = max(self.terms, key=grlex_key)
        return mono, self.terms[mono]

    def monic(self) -> "Poly":
        if not self.terms:
            return self
        return self / self.leading_term()[1]

    def sort_key(self):
        return tuple((grlex_key(m), c) for m, c in self.sorted_terms())

    # calculus and evaluation --------------------------------------------
    def diff(self, name: str) -> "Poly":
        i = self.ctx.index(name)
        out = {}
        for m, c in self.terms.items():
            if m[i]:
                new = list(m)
                new[i] -= 1
                out[tuple(new)] = c * m[i]
        return Poly(self.ctx, out)

    def evaluate(self, point: Union[Sequence, Mapping[str, object]]) -> Fraction:
        if isinstance(point, Mapping):
            values = [as_rational(point[n]) for n in self.ctx.names]
        else:
            if len(point) != len(self.ctx):
                raise ValueError("point length does not match context size")
            values = [as_rational(v) for v in point]
        total = Fraction(0)
        for m, c in self.terms.items():
            t = c
            for v, e in zip(values, m):
                if e:
                    t *= v**e
            total += t
        return total

    def substitute(self, subs: Mapping[str, object]) -> "Poly":
        return poly_substitute(self, subs)

    # text ---------------------------------------------------------------
    def to_text(self) -> str:
        """Canonical text: grlex-descending terms with ``num/den`` coefficients."""
        if not self.terms:
            return "0"
        parts = []
        for mono, c in self.sorted_terms():
            factors = [format_rational(c)]
            for name, e in zip(self.ctx.names, mono):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            parts.append("*".join(factors))
        return " + ".join(parts)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        out = ""
        for k, (mono, c) in enumerate(self.sorted_terms()):
            names = "*".join(
                n if e == 1 else f"{n}^{e}" for n, e in zip(self.ctx.names, mono) if e
            )
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            body = names if (names and mag == 1) else (f"{mag}*{names}" if names else f"{mag}")
            out += (("-" if sign == "-" else "") if k == 0 else f" {sign} ") + body
        return out

    def __repr__(self) -> str:
        return f"Poly({self})"


_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


def parse_poly(text: str, ctx: VarContext) -> Poly:
    """Parse ``+ - * ^`` expressions with parentheses and rational literals."""
    tokens = []
    for num, name, op in _TOKEN.findall(text):
        if num:
            tokens.append(("num", Fraction(num)))
        elif name:
            tokens.append(("name", name))
        elif op.strip():
            tokens.append(("op", op))
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else (None, None)

    def take():
        nonlocal pos
        pos += 1
        return tokens[pos - 1]

    def expr() -> Poly:
        kind, val = peek()
        sign = 1
        if kind == "op" and val in "+-":
            take()
            sign = -1 if val == "-" else 1
        acc = term() * sign
        while peek()[0] == "op" and peek()[1] in "+-":
            _, op = take()
            acc = acc + term() if op == "+" else acc - term()
        return acc

    def term() -> Poly:
        acc = power()
        while peek() == ("op", "*") or peek()[0] in ("name", "num") or peek() == ("op", "("):
            if peek() == ("op", "*"):
                take()
            acc = acc * power()
        return acc

    def power() -> Poly:
        base = atom()
        if peek() == ("op", "^"):
            take()
            kind, val = take()
            if kind != "num" or val.denominator != 1:
                raise ValueError(f"bad exponent in {text!r}")
            base = base ** int(val)
        return base

    def atom() -> Poly:
        kind, val = take() if pos < len(tokens) else (None, None)
        if kind == "num":
            return Poly.const(ctx, val)
        if kind == "name":
            return Poly.var(ctx, val)
        if (kind, val) == ("op", "("):
            inner = expr()
            if take() != ("op", ")"):
                raise ValueError(f"unbalanced parentheses in {text!r}")
            return inner
        raise ValueError(f"unexpected token {val!r} in {text!r}")

    result = expr()
    if pos != len(tokens):
        raise ValueError(f"trailing input in {text!r}")
    return result


def poly_substitute(p: Poly, subs: Mapping[str, object]) -> Poly:
    """Replace variables by polynomials (or rationals); the result context may grow."""
    for name in subs:
        if name not in p.ctx.names:
            raise UnknownVariable(name)
    ctx = p.ctx
    for v in subs.values():
        if isinstance(v, Poly):
            ctx = ctx.extend(v.ctx.names)
    images = []
    for name in p.ctx.names:
        if name in subs:
            v = subs[name]
            images.append(v.embed(ctx) if isinstance(v, Poly) else Poly.const(ctx, v))
        else:
            images.append(Poly.var(ctx, name))
    powers: Dict[Tuple[int, int], Poly] = {}

    def pw(i: int, e: int) -> Poly:
        if (i, e) not in powers:
            powers[(i, e)] = images[i] ** e
        return powers[(i, e)]

    total = Poly(ctx, {})
    acc: Dict[Monomial, Fraction] = {}
    for mono, c in p.terms.items():
        t = Poly.const(ctx, c)
        for i, e in enumerate(mono):
            if e:
                t = t * pw(i, e)
        for m, v in t.terms.items():
            acc[m] = acc.get(m, 0) + v
    total = Poly(ctx, acc)
    return total


def divide_with_remainder(p: Poly, divisors: Sequence[Poly]) -> Tuple[List[Poly], Poly]:
    """Multivariate division of ``p`` by an ordered list of divisors under grlex."""
    divisors = [p._coerce(q) for q in divisors]
    if any(q.is_zero() for q in divisors):
        raise ZeroDivisionError("division by the zero polynomial")
    leads = [q.leading_term() for q in divisors]
    quotients: List[Dict[Monomial, Fraction]] = [{} for _ in divisors]
    remainder: Dict[Monomial, Fraction] = {}
    work = dict(p.terms)
    while work:
        mono = max(work, key=grlex_key)
        coeff = work[mono]
        for k, (lm, lc) in enumerate(leads):
            if all(a >= b for a, b in zip(mono, lm)):
                qm = tuple(a - b for a, b in zip(mono, lm))
                qc = coeff / lc
                quotients[k][qm] = quotients[k].get(qm, 0) + qc
                for m, c in divisors[k].terms.items():
                    tm = tuple(a + b for a, b in zip(m, qm))
                    nv = work.get(tm, 0) - c * qc
                    if nv:
                        work[tm] = nv
                    else:
                        work.pop(tm, None)
                break
        else:
            remainder[mono] = coeff
            del work[mono]
    return [Poly(p.ctx, q) for q in quotients], Poly(p.ctx, remainder)


def exact_divide(p: Poly, q: Poly) -> Poly:
    """Return ``p / q`` or raise :class:`NotDivisible`."""
    q = p._coerce(q)
    if q.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    (quot,), rem = divide_with_remainder(p, [q])
    if not rem.is_zero():
        raise NotDivisible(f"{q} does not divide {p}")
    return quot


def reduce_by(p: Poly, divisors: Sequence[Poly]) -> Poly:
    return divide_with_remainder(p, divisors)[1] if divisors else p


# ---------------------------------------------------------------------------
# polynomial systems


def _canonical_generators(ctx: VarContext, gens: Iterable[Poly]) -> Tuple[Poly, ...]:
    seen = {}
    for g in gens:
        g = g.embed(ctx) if g.ctx != ctx else g
        if not g.is_zero() and g not in seen:
            seen[g] = None
    return tuple(sorted(seen, key=Poly.sort_key))


class PolySystem:
    """An ordered, duplicate-free list of generators sharing one context."""

    __slots__ = ("ctx", "generators")

    def __init__(self, ctx: VarContext, generators: Iterable[Poly] = ()):
        self.ctx = ctx
        self.generators = _canonical_generators(ctx, generators)

    @classmethod
    def parse(cls, ctx: VarContext, texts: Iterable[str]) -> "PolySystem":
        return cls(ctx, [parse_poly(t, ctx) for t in texts])

    def __iter__(self):
        return iter(self.generators)

    def __len__(self) -> int:
        return len(self.generators)

    def __eq__(self, other) -> bool:
        return isinstance(other, PolySystem) and self.ctx == other.ctx and set(
            self.generators
        ) == set(other.generators)

    def __hash__(self):
        return hash((self.ctx, frozenset(self.generators)))

    def __repr__(self) -> str:
        return "PolySystem{" + ", ".join(str(g) for g in self.generators) + "}"

    def with_generators(self, extra: Iterable[Poly]) -> "PolySystem":
        return PolySystem(self.ctx, list(self.generators) + list(extra))

    def substitute(self, subs: Mapping[str, object]) -> "PolySystem":
        return PolySystem(self.ctx, [poly_substitute(g, subs).embed(self.ctx) for g in self])

    def vanishes_at(self, point) -> bool:
        return all(g.evaluate(point) == 0 for g in self)

    def to_text(self) -> List[str]:
        return [g.to_text() for g in self]


# ---------------------------------------------------------------------------
# exact linear algebra


class RatMatrix:
    """Dense immutable matrix of exact rationals."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Sequence[Sequence[Scalar]], cols: Optional[int] = None):
        data = tuple(tuple(as_rational(x) for x in row) for row in entries)
        if cols is None:
            cols = len(data[0]) if data else 0
        if any(len(r) != cols for r in data):
            raise ValueError("ragged matrix")
        self.rows = len(data)
        self.cols = cols
        self.entries = data

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RatMatrix":
        return cls([[0] * cols for _ in range(rows)], cols=cols)

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)], cols=n)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def row(self, i: int) -> Tuple[Fraction, ...]:
        return self.entries[i]

    def transpose(self) -> "RatMatrix":
        return RatMatrix([list(c) for c in zip(*self.entries)] if self.rows else [], cols=self.rows)

    def __matmul__(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        cols = list(zip(*other.entries)) if other.rows else [()] * other.cols
        return RatMatrix(
            [[sum((a * b for a, b in zip(r, c)), Fraction(0)) for c in cols] for r in self.entries],
            cols=other.cols,
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RatMatrix)
            and (self.rows, self.cols) == (other.rows, other.cols)
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash((self.rows, self.cols, self.entries))

    def to_text(self) -> List[List[str]]:
        return [[format_rational(x) for x in r] for r in self.entries]

    def __repr__(self) -> str:
        return f"RatMatrix({[[str(x) for x in r] for r in self.entries]})"


@dataclass(frozen=True)
class Reduction:
    rref: RatMatrix
    pivots: Tuple[int, ...]
    rank: int
    kernel_basis: Tuple[Tuple[Fraction, ...], ...]


def rref_rows(rows: Sequence[Sequence[Fraction]], ncols: int) -> Tuple[List[List[Fraction]], List[int]]:
    """Gauss-Jordan elimination; returns nonzero rref rows and pivot columns."""
    m = [list(map(as_rational, r)) for r in rows]
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def matrix_reduce(m: RatMatrix) -> Reduction:
    rows, pivots = rref_rows(m.entries, m.cols)
    full = rows + [[Fraction(0)] * m.cols for _ in range(m.rows - len(rows))]
    pivot_set = set(pivots)
    kernel = []
    for free in range(m.cols):
        if free in pivot_set:
            continue
        v = [Fraction(0)] * m.cols
        v[free] = Fraction(1)
        for row, pc in zip(rows, pivots):
            v[pc] = -row[free]
        kernel.append(tuple(v))
    return Reduction(RatMatrix(full, cols=m.cols), tuple(pivots), len(pivots), tuple(kernel))


def rank_of(rows: Sequence[Sequence[Fraction]], ncols: int) -> int:
    return len(rref_rows(rows, ncols)[1])


# ---------------------------------------------------------------------------
# Jacobians and linear elimination


def jacobian_at(sys: PolySystem, point: Sequence) -> RatMatrix:
    if len(point) != len(sys.ctx):
        raise ValueError("point length does not match context size")
    return RatMatrix(
        [[g.diff(n).evaluate(point) for n in sys.ctx.names] for g in sys],
        cols=len(sys.ctx),
    )


def jacobian_rank_at(sys: PolySystem, point: Sequence) -> Tuple[int, RatMatrix]:
    jac = jacobian_at(sys, point)
    return matrix_reduce(jac).rank, jac


def _linear_pivot(g: Poly) -> Optional[Tuple[str, Poly]]:
    """Find ``v`` with ``g = c*v + q``, ``c`` constant and ``v`` absent from ``q``.

    The latest eligible variable in context order is preferred.
    """
    n = len(g.ctx)
    for i in reversed(range(n)):
        unit = tuple(int(j == i) for j in range(n))
        c = g.terms.get(unit)
        if c is None:
            continue
        if any(m[i] and m != unit for m in g.terms):
            continue
        rest = Poly(g.ctx, {m: v for m, v in g.terms.items() if m != unit})
        return g.ctx.names[i], rest / (-c)
    return None


def _pure_power_variable(g: Poly) -> Optional[str]:
    if len(g.terms) != 1:
        return None
    (mono,) = g.terms
    used = [i for i, e in enumerate(mono) if e]
    if len(used) == 1 and mono[used[0]] > 1:
        return g.ctx.names[used[0]]
    return None


def prune_multiples(gens: Sequence[Poly]) -> List[Poly]:
    """Drop generators that are polynomial multiples of another generator."""
    kept = list(gens)
    changed = True
    while changed:
        changed = False
        order = sorted(kept, key=lambda g: (len(g.terms), g.total_degree(), g.sort_key()))
        for g in reversed(order):
            for h in order:
                if h is g or h.total_degree() > g.total_degree():
                    continue
                try:
                    exact_divide(g, h)
                except NotDivisible:
                    continue
                kept.remove(g)
                changed = True
                break
            if changed:
                break
    return kept


def eliminate_linear(
    sys: PolySystem, radical: bool = False, prune: bool = True
) -> Tuple[PolySystem, Dict[str, Poly]]:
    """Solve away generators of the form ``v - q`` until none remain.

    With ``radical=True`` a generator ``c*v^k`` is first replaced by ``v`` (same
    zero set).  With ``prune=True`` generators divisible by another generator
    are dropped (same ideal).
    """
    ctx = sys.ctx
    gens = list(sys.generators)
    subs: Dict[str, Poly] = {}
    while True:
        gens = list(_canonical_generators(ctx, gens))
        if radical:
            gens = [
                Poly.var(ctx, v) if (v := _pure_power_variable(g)) else g for g in gens
            ]
            gens = list(_canonical_generators(ctx, gens))
        if prune:
            gens = prune_multiples(gens)
        found = None
        for g in gens:
            piv = _linear_pivot(g)
            if piv is not None:
                found = (g, piv)
                break
        if found is None:
            break
        g, (v, q) = found
        gens.remove(g)
        step = {v: q}
        subs = {k: poly_substitute(val, step) for k, val in subs.items()}
        subs[v] = q
        gens = [poly_substitute(h, step) for h in gens]
    return PolySystem(ctx, gens), subs


def compose_substitution(outer: Mapping[str, Poly], inner: Mapping[str, Poly]) -> Dict[str, Poly]:
    """Substitution equal to applying ``inner`` first, then ``outer``."""
    out = {k: poly_substitute(v, outer) if outer else v for k, v in inner.items()}
    for k, v in outer.items():
        out.setdefault(k, v)
    return out
