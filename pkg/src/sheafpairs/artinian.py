"""The square-zero algebra R_d = k[x_0..x_d]/(x_0..x_d)^2 and submodules of R_d^2.

Vectors of R_d^2 are coordinate tuples of length 2(d+2) in the fixed order
(1,0),(x_0,0),...,(x_d,0),(0,1),(0,x_0),...,(0,x_d).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .ratpoly import (
    Poly,
    RatMatrix,
    VarContext,
    as_rational,
    format_rational,
    rref_rows,
)

Vector = Tuple[Fraction, ...]


class NotSurjective(ValueError):
    """Neither entry of a pair generates R_d."""


@dataclass(frozen=True)
class ArtinAlgebra:
    d: int

    def __post_init__(self):
        if self.d < 0:
            raise ValueError("d must be non-negative")

    @property
    def dim(self) -> int:
        return self.d + 2

    @property
    def ambient_dim(self) -> int:
        return 2 * (self.d + 2)

    def labels(self) -> List[str]:
        return ["1"] + [f"x{i}" for i in range(self.d + 1)]

    def ambient_labels(self) -> List[str]:
        return [f"({b},0)" for b in self.labels()] + [f"(0,{b})" for b in self.labels()]

    def element(self, a, *b) -> "ArtinElement":
        if len(b) == 1 and isinstance(b[0], (list, tuple)):
            b = tuple(b[0])
        return ArtinElement(self, (as_rational(a),) + tuple(as_rational(x) for x in b))

    def one(self) -> "ArtinElement":
        return self.element(1, [0] * (self.d + 1))

    def zero(self) -> "ArtinElement":
        return self.element(0, [0] * (self.d + 1))

    def x(self, i: int) -> "ArtinElement":
        return self.element(0, [int(j == i) for j in range(self.d + 1)])

    def left(self, i: int) -> int:
        """Ambient index of (basis_i, 0); basis 0 is the unit, basis 1+j is x_j."""
        return i

    def right(self, i: int) -> int:
        return self.d + 2 + i

    def pair(self, f: "ArtinElement", g: "ArtinElement") -> Vector:
        return tuple(f.coords) + tuple(g.coords)

    def split(self, v: Sequence) -> Tuple["ArtinElement", "ArtinElement"]:
        n = self.d + 2
        return ArtinElement(self, tuple(v[:n])), ArtinElement(self, tuple(v[n:]))

    def act(self, m: int, v: Sequence) -> list:
        """Multiply an ambient vector by x_m; entries may be rationals or polynomials."""
        zero = v[0] * 0
        out = [zero] * self.ambient_dim
        out[self.left(1 + m)] = v[self.left(0)]
        out[self.right(1 + m)] = v[self.right(0)]
        return out

    def action_matrices(self) -> List[RatMatrix]:
        """Matrices X_m with v -> v @ X_m the action of x_m on row vectors."""
        n = self.ambient_dim
        mats = []
        for m in range(self.d + 1):
            rows = [[0] * n for _ in range(n)]
            rows[self.left(0)][self.left(1 + m)] = 1
            rows[self.right(0)][self.right(1 + m)] = 1
            mats.append(RatMatrix(rows, cols=n))
        return mats


@dataclass(frozen=True)
class ArtinElement:
    """``(a; b_0..b_d)`` meaning ``a + sum b_i x_i``."""

    algebra: ArtinAlgebra
    coords: Tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.coords) != self.algebra.d + 2:
            raise ValueError("coordinate length must be d+2")

    @property
    def unit_part(self) -> Fraction:
        return self.coords[0]

    @property
    def nilpotent_part(self) -> Tuple[Fraction, ...]:
        return self.coords[1:]

    def is_invertible(self) -> bool:
        return self.coords[0] != 0

    def _check(self, other: "ArtinElement"):
        if other.algebra != self.algebra:
            raise ValueError(f"dimension mismatch: d={self.algebra.d} vs d={other.algebra.d}")

    def __add__(self, other: "ArtinElement") -> "ArtinElement":
        self._check(other)
        return ArtinElement(self.algebra, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "ArtinElement":
        return ArtinElement(self.algebra, tuple(-a for a in self.coords))

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "ArtinElement":
        c = as_rational(c)
        return ArtinElement(self.algebra, tuple(c * a for a in self.coords))

    def __mul__(self, other) -> "ArtinElement":
        if not isinstance(other, ArtinElement):
            return self.scale(other)
        return mul(self, other)

    __rmul__ = __mul__

    def inverse(self) -> "ArtinElement":
        a = self.coords[0]
        if a == 0:
            raise ZeroDivisionError("element is not a unit")
        return ArtinElement(self.algebra, (1 / a,) + tuple(-b / a**2 for b in self.coords[1:]))

    def __repr__(self) -> str:
        a, *b = self.coords
        return f"({a}; {', '.join(str(x) for x in b)})"


def mul(e1: ArtinElement, e2: ArtinElement) -> ArtinElement:
    e1._check(e2)
    a1, *b = e1.coords
    a2, *c = e2.coords
    return ArtinElement(
        e1.algebra, (a1 * a2,) + tuple(a1 * ci + a2 * bi for bi, ci in zip(b, c))
    )


def normalize_projective(v: Sequence) -> Tuple[Fraction, ...]:
    v = tuple(as_rational(x) for x in v)
    lead = next((x for x in v if x != 0), None)
    if lead is None:
        raise ValueError("projective point cannot be all zero")
    return tuple(x / lead for x in v)


@dataclass(frozen=True)
class GammaPoint:
    direction: Tuple[Fraction, ...]
    slope: Tuple[Fraction, Fraction]

    def __init__(self, direction: Sequence, slope: Sequence):
        if len(slope) != 2:
            raise ValueError("slope is a point of P^1")
        object.__setattr__(self, "direction", normalize_projective(direction))
        object.__setattr__(self, "slope", normalize_projective(slope))

    @property
    def d(self) -> int:
        return len(self.direction) - 1


class Submodule:
    """A k-subspace of R_d^2 closed under every x_m, stored by its rref basis."""

    __slots__ = ("algebra", "basis", "pivots")

    def __init__(self, algebra: ArtinAlgebra, vectors: Sequence[Sequence] = ()):
        rows, pivots = rref_rows(list(vectors), algebra.ambient_dim)
        self.algebra = algebra
        self.basis = RatMatrix(rows, cols=algebra.ambient_dim)
        self.pivots = tuple(pivots)

    @property
    def dim(self) -> int:
        return self.basis.rows

    @property
    def quotient_dim(self) -> int:
        return self.algebra.ambient_dim - self.dim

    def rows(self) -> List[Vector]:
        return list(self.basis.entries)

    def contains(self, v: Sequence) -> bool:
        rows, _ = rref_rows(self.rows() + [list(v)], self.algebra.ambient_dim)
        return len(rows) == self.dim

    def is_closed(self) -> bool:
        alg = self.algebra
        return all(
            self.contains(alg.act(m, r)) for r in self.rows() for m in range(alg.d + 1)
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Submodule)
            and self.algebra == other.algebra
            and self.basis == other.basis
        )

    def __hash__(self):
        return hash((self.algebra, self.basis))

    def to_text(self) -> List[List[str]]:
        return self.basis.to_text()

    def __repr__(self) -> str:
        return f"Submodule(d={self.algebra.d}, dim={self.dim}, basis={self.basis!r})"


def rmodule_closure(gens: Sequence[Sequence], algebra: ArtinAlgebra) -> Submodule:
    """Smallest subspace containing ``gens`` and stable under every x_m."""
    n = algebra.ambient_dim
    rows, _ = rref_rows([list(map(as_rational, g)) for g in gens], n)
    while True:
        extended = rows + [algebra.act(m, r) for r in rows for m in range(algebra.d + 1)]
        new_rows, _ = rref_rows(extended, n)
        if len(new_rows) == len(rows):
            return Submodule(algebra, new_rows)
        rows = new_rows


@dataclass(frozen=True)
class PairKernel:
    kernel: Submodule
    chart: Optional[Tuple[Fraction, Tuple[Fraction, ...]]]


def kernel_of_pair(e: ArtinElement, h: ArtinElement) -> PairKernel:
    """Kernel of R^2 -> R, (f, g) -> f*e + g*h, for a surjective pair."""
    e._check(h)
    if not (e.is_invertible() or h.is_invertible()):
        raise NotSurjective("neither e nor h is invertible")
    alg = e.algebra
    kernel = rmodule_closure([alg.pair(-h, e)], alg)
    chart = None
    if e.is_invertible():
        q = e.inverse() * h
        chart = (q.unit_part, q.nilpotent_part)
    return PairKernel(kernel, chart)


def gamma_generators(g: GammaPoint, algebra: ArtinAlgebra) -> List[Vector]:
    if g.d != algebra.d:
        raise ValueError("GammaPoint dimension does not match the algebra")
    u, v = g.slope
    lin = algebra.element(0, g.direction)
    zero = algebra.zero()
    gens = [algebra.pair(lin, zero), algebra.pair(zero, lin)]
    for i in range(algebra.d + 1):
        gens.append(algebra.pair(algebra.x(i) * v, algebra.x(i) * (-u)))
    return gens


def gamma_kernel(g: GammaPoint, algebra: ArtinAlgebra) -> Submodule:
    return Submodule(algebra, gamma_generators(g, algebra))


# ---------------------------------------------------------------------------
# limits along b = u / t, with vectors of Laurent polynomials in t

Laurent = Dict[int, Fraction]


def _laurent_valuation(vec: Sequence[Laurent]) -> Optional[int]:
    exps = [k for entry in vec for k, c in entry.items() if c]
    return min(exps) if exps else None


def _laurent_shift(vec: Sequence[Laurent], s: int) -> List[Laurent]:
    return [{k + s: c for k, c in entry.items() if c} for entry in vec]


def _laurent_combine(vecs: Sequence[Sequence[Laurent]], coeffs: Sequence[Fraction]) -> List[Laurent]:
    n = len(vecs[0])
    out: List[Laurent] = [dict() for _ in range(n)]
    for vec, c in zip(vecs, coeffs):
        if not c:
            continue
        for j, entry in enumerate(vec):
            for k, a in entry.items():
                out[j][k] = out[j].get(k, 0) + c * a
    return [{k: a for k, a in entry.items() if a} for entry in out]


def flat_limit(vectors: Sequence[Sequence[Laurent]], ncols: int, max_steps: int = 10_000) -> List[Vector]:
    """Limit at t=0 of the span of Laurent-polynomial vectors.

    Each vector is rescaled to valuation 0; while the t^0 parts are linearly
    dependent, one vector is replaced by the vanishing combination (which has
    higher valuation) and rescaled again.
    """
    work = []
    for v in vectors:
        val = _laurent_valuation(v)
        if val is not None:
            work.append(_laurent_shift(v, -val))
    for _ in range(max_steps):
        leads = [[entry.get(0, Fraction(0)) for entry in v] for v in work]
        relation = _first_relation(leads, ncols)
        if relation is None:
            return [tuple(row) for row in leads]
        k, coeffs = relation
        combo = _laurent_combine(work, coeffs)
        val = _laurent_valuation(combo)
        if val is None:
            work.pop(k)
        else:
            work[k] = _laurent_shift(combo, -val)
    raise RuntimeError("flat limit did not stabilise")


def _first_relation(rows: Sequence[Sequence[Fraction]], ncols: int):
    """A linear relation among ``rows`` as (index replaced, coefficients), or None."""
    basis: List[Tuple[List[Fraction], List[Fraction], int]] = []
    for idx, row in enumerate(rows):
        vec = list(row)
        comb = [Fraction(0)] * len(rows)
        comb[idx] = Fraction(1)
        for bvec, bcomb, piv in basis:
            f = vec[piv]
            if f:
                vec = [a - f * b for a, b in zip(vec, bvec)]
                comb = [a - f * b for a, b in zip(comb, bcomb)]
        piv = next((j for j, x in enumerate(vec) if x), None)
        if piv is None:
            return idx, comb
        inv = 1 / vec[piv]
        basis.append(([x * inv for x in vec], [x * inv for x in comb], piv))
    return None


def _to_laurent(entry, tvar: str) -> Laurent:
    """Convert a polynomial in t and t^-1 (encoded as variables) into a Laurent map."""
    if not isinstance(entry, Poly):
        entry = as_rational(entry)
        return {0: entry} if entry else {}
    i = entry.ctx.index(tvar)
    j = entry.ctx.index(tvar + "_inv")
    out: Laurent = {}
    for m, c in entry.terms.items():
        if any(e for k, e in enumerate(m) if k not in (i, j)):
            raise ValueError("entry depends on variables other than t")
        out[m[i] - m[j]] = out.get(m[i] - m[j], 0) + c
    return {k: c for k, c in out.items() if c}


def gamma_limit_generators(u: Sequence, a1, algebra: ArtinAlgebra) -> List[Vector]:
    """Limits at t=0 of the kernel of (e, h) = (1, a1 + sum (u_i/t) x_i).

    The pair's kernel is generated by (-h, 1) and its x_m-multiples; entries are
    Laurent polynomials in t.
    """
    u = [as_rational(x) for x in u]
    if len(u) != algebra.d + 1 or not any(u):
        raise ValueError("direction must be a nonzero vector of length d+1")
    a1 = as_rational(a1)
    ctx = VarContext(("t", "t_inv"))
    t_inv = Poly.var(ctx, "t_inv")
    neg_h = [Poly.const(ctx, -a1)] + [t_inv * (-ui) for ui in u]
    e = [Poly.const(ctx, 1)] + [Poly.const(ctx, 0)] * (algebra.d + 1)
    g = neg_h + e
    gens = [g] + [algebra.act(m, g) for m in range(algebra.d + 1)]
    laurent = [[_to_laurent(x, "t") for x in vec] for vec in gens]
    return flat_limit(laurent, algebra.ambient_dim)


def gamma_limit(u: Sequence, a1, algebra: ArtinAlgebra) -> Submodule:
    return Submodule(algebra, gamma_limit_generators(u, a1, algebra))


def gamma_limit_point(u: Sequence, a1) -> GammaPoint:
    """The boundary point reached by gamma_limit: direction u, slope (1 : a1)."""
    return GammaPoint(u, (1, a1))


def pair_chart_point(a1, b: Sequence, algebra: ArtinAlgebra) -> PairKernel:
    """Kernel for the e-invertible chart point e^-1 h = a1 + sum b_i x_i."""
    return kernel_of_pair(algebra.one(), algebra.element(a1, list(b)))


# ---------------------------------------------------------------------------
# transition maps


class RatFunc:
    """Quotient of two polynomials, compared by cross-multiplication."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Optional[Poly] = None):
        if den is None:
            den = Poly.const(num.ctx, 1)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        self.num, self.den = num, den

    def __add__(self, other: "RatFunc") -> "RatFunc":
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    def __neg__(self) -> "RatFunc":
        return RatFunc(-self.num, self.den)

    def __mul__(self, other) -> "RatFunc":
        if isinstance(other, RatFunc):
            return RatFunc(self.num * other.num, self.den * other.den)
        return RatFunc(self.num * other, self.den)

    def __truediv__(self, other: "RatFunc") -> "RatFunc":
        return RatFunc(self.num * other.den, self.den * other.num)

    def __pow__(self, k: int) -> "RatFunc":
        return RatFunc(self.num**k, self.den**k)

    def __eq__(self, other) -> bool:
        return isinstance(other, RatFunc) and (self.num * other.den - other.num * self.den).is_zero()

    __hash__ = None

    def __repr__(self) -> str:
        return f"({self.num}) / ({self.den})"


def substitute_rational(p: Poly, images: Dict[str, RatFunc]) -> RatFunc:
    total = RatFunc(Poly.const(p.ctx, 0))
    for mono, c in p.terms.items():
        term = RatFunc(Poly.const(p.ctx, c))
        for name, e in zip(p.ctx.names, mono):
            if e:
                term = term * images[name] ** e
        total = total + term
    return total


def chart_transition(ctx: VarContext, first: str, fibre: Sequence[str]) -> List[RatFunc]:
    """(y, w) -> (1/y, -w/y^2) as rational functions over ``ctx``."""
    y = Poly.var(ctx, first)
    out = [RatFunc(Poly.const(ctx, 1), y)]
    for name in fibre:
        out.append(RatFunc(-Poly.var(ctx, name), y * y))
    return out


def compose_maps(outer: Sequence[RatFunc], inner: Sequence[RatFunc], names: Sequence[str]) -> List[RatFunc]:
    images = dict(zip(names, inner))
    out = []
    for f in outer:
        num = substitute_rational(f.num, images)
        den = substitute_rational(f.den, images)
        out.append(num / den)
    return out


def quadric_chart_transition(d: int) -> Tuple[List[RatFunc], VarContext, List[str]]:
    """Transition from the x=1 chart to the z=1 chart of the smooth locus of V(xz+y^2).

    A point (y, u) of the x-chart is (1 : y : -y^2 : u).  Dividing by the z
    coordinate and reading (-y', u') in the z-chart yields the transition map.
    """
    names = ["y"] + [f"u{i}" for i in range(d + 1)]
    ctx = VarContext(tuple(names))
    one = RatFunc(Poly.const(ctx, 1))
    y = RatFunc(Poly.var(ctx, "y"))
    point = [one, y, -(y * y)] + [RatFunc(Poly.var(ctx, n)) for n in names[1:]]
    z = point[2]
    scaled = [c / z for c in point]
    if not (scaled[0] * scaled[2] + scaled[1] * scaled[1]) == RatFunc(Poly.const(ctx, 0)):
        raise AssertionError("point left the quadric")
    return [-scaled[1]] + scaled[3:], ctx, names


@dataclass
class TransitionReport:
    d: int
    involution: bool
    fibre_linear: bool
    fibre_factor: str
    quadric_matches: bool
    sample_composition: Tuple[Fraction, Tuple[Fraction, ...]]
    witnesses: Dict[str, object]

    @property
    def ok(self) -> bool:
        return self.involution and self.fibre_linear and self.quadric_matches


def transition_check(d: int, sample: Optional[Tuple] = None) -> TransitionReport:
    if d < 1:
        raise ValueError("d must be at least 1")
    names = ["a1"] + [f"b{i}" for i in range(d + 1)]
    ctx = VarContext(tuple(names))
    phi = chart_transition(ctx, "a1", names[1:])
    identity = [RatFunc(Poly.var(ctx, n)) for n in names]
    involution = compose_maps(phi, phi, names) == identity

    a1 = Poly.var(ctx, "a1")
    factor = RatFunc(Poly.const(ctx, -1), a1 * a1)
    fibre_linear = True
    for name, comp in zip(names[1:], phi[1:]):
        b = Poly.var(ctx, name)
        same = comp == factor * RatFunc(b)
        num_linear = all(
            sum(e for n, e in zip(ctx.names, m) if n != "a1") == 1 for m in comp.num.terms
        )
        den_free = all(comp.den.degree_in(n) <= 0 for n in names[1:])
        fibre_linear = fibre_linear and same and num_linear and den_free

    quad, qctx, qnames = quadric_chart_transition(d)
    renamed = dict(zip(qnames, names))
    quad_in_ctx = [RatFunc(f.num.rename(renamed, ctx), f.den.rename(renamed, ctx)) for f in quad]
    quadric_matches = quad_in_ctx == phi

    if sample is None:
        sample = (Fraction(2), (Fraction(1),) * (d + 1))
    a, bs = sample
    point = dict(zip(names, [as_rational(a)] + [as_rational(x) for x in bs]))
    once = [f.num.evaluate(point) / f.den.evaluate(point) for f in phi]
    point2 = dict(zip(names, once))
    twice = [f.num.evaluate(point2) / f.den.evaluate(point2) for f in phi]
    return TransitionReport(
        d=d,
        involution=involution,
        fibre_linear=fibre_linear,
        fibre_factor="-1/a1^2",
        quadric_matches=quadric_matches,
        sample_composition=(twice[0], tuple(twice[1:])),
        witnesses={
            "map": [f"({f.num}) / ({f.den})" for f in phi],
            "quadric_map": [f"({f.num}) / ({f.den})" for f in quad],
        },
    )


def random_rational(rng: random.Random, bound: int = 5, den: int = 4) -> Fraction:
    return Fraction(rng.randint(-bound, bound), rng.randint(1, den))


def random_gamma_point(rng: random.Random, d: int) -> GammaPoint:
    while True:
        direction = [random_rational(rng) for _ in range(d + 1)]
        slope = [random_rational(rng) for _ in range(2)]
        if any(direction) and any(slope):
            return GammaPoint(direction, slope)


def submodule_rows_text(m: Submodule) -> List[str]:
    return [" ".join(format_rational(x) for x in row) for row in m.basis.entries]
