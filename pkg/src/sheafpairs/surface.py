"""Divisor lattices, blowup bookkeeping and Chern characters of sheaves on surfaces."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .ratpoly import as_rational


class LatticeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class SurfaceLattice:
    labels: Tuple[str, ...]
    gram: Tuple[Tuple[int, ...], ...]

    def __init__(self, labels: Sequence[str], gram: Sequence[Sequence[int]]):
        labels = tuple(labels)
        gram = tuple(tuple(int(x) for x in row) for row in gram)
        n = len(labels)
        if len(gram) != n or any(len(r) != n for r in gram):
            raise ValueError("gram matrix shape does not match labels")
        if any(gram[i][j] != gram[j][i] for i in range(n) for j in range(n)):
            raise ValueError("intersection form must be symmetric")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "gram", gram)

    @property
    def rank(self) -> int:
        return len(self.labels)

    def cls(self, coords: Mapping[str, object] | Sequence) -> "DivisorClass":
        if isinstance(coords, Mapping):
            vec = [Fraction(0)] * self.rank
            for k, v in coords.items():
                vec[self.labels.index(k)] = as_rational(v)
            return DivisorClass(self, tuple(vec))
        return DivisorClass(self, tuple(as_rational(x) for x in coords))

    def generator(self, label: str) -> "DivisorClass":
        return self.cls({label: 1})

    def zero(self) -> "DivisorClass":
        return DivisorClass(self, (Fraction(0),) * self.rank)

    def record(self) -> dict:
        return {"labels": list(self.labels), "gram": [list(r) for r in self.gram]}


@dataclass(frozen=True)
class DivisorClass:
    lattice: SurfaceLattice
    coords: Tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.coords) != self.lattice.rank:
            raise ValueError("coordinate length must equal the lattice rank")

    def _check(self, other: "DivisorClass"):
        if other.lattice != self.lattice:
            raise LatticeMismatch("classes live in different lattices")

    def __add__(self, other: "DivisorClass") -> "DivisorClass":
        self._check(other)
        return DivisorClass(self.lattice, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "DivisorClass":
        return DivisorClass(self.lattice, tuple(-a for a in self.coords))

    def __sub__(self, other: "DivisorClass") -> "DivisorClass":
        return self + (-other)

    def __mul__(self, c) -> "DivisorClass":
        c = as_rational(c)
        return DivisorClass(self.lattice, tuple(c * a for a in self.coords))

    __rmul__ = __mul__

    def square(self) -> Fraction:
        return intersect(self, self)

    def record(self) -> Dict[str, str]:
        return {l: str(c) for l, c in zip(self.lattice.labels, self.coords) if c}


def intersect(a: DivisorClass, b: DivisorClass) -> Fraction:
    a._check(b)
    g = a.lattice.gram
    n = a.lattice.rank
    return sum(
        (a.coords[i] * g[i][j] * b.coords[j] for i in range(n) for j in range(n) if g[i][j]),
        Fraction(0),
    )


@dataclass(frozen=True)
class Blowup:
    lattice: SurfaceLattice
    exceptional: str
    source: SurfaceLattice
    multiplicities: Tuple[Tuple[str, int], ...]

    def pullback(self, d: DivisorClass) -> DivisorClass:
        if d.lattice != self.source:
            raise LatticeMismatch("class is not on the blown-up surface")
        return DivisorClass(self.lattice, d.coords + (Fraction(0),))

    def mult(self, label: str) -> int:
        return dict(self.multiplicities).get(label, 0)

    def strict(self, d: DivisorClass, multiplicity: Optional[int] = None) -> DivisorClass:
        """pullback(D) - mult(D) E; the multiplicity defaults to that of a named generator."""
        if multiplicity is None:
            nonzero = [l for l, c in zip(d.lattice.labels, d.coords) if c]
            if len(nonzero) != 1:
                raise ValueError("give the multiplicity of a non-generator class explicitly")
            label = nonzero[0]
            multiplicity = self.mult(label) * d.coords[d.lattice.labels.index(label)]
        return self.pullback(d) - self.lattice.generator(self.exceptional) * multiplicity


def blowup_point(lat: SurfaceLattice, multiplicities: Mapping[str, int], name: Optional[str] = None) -> Blowup:
    """Blow up a point; ``multiplicities`` gives the multiplicity of each named curve there."""
    if any(m < 0 for m in multiplicities.values()):
        raise ValueError("multiplicities must be non-negative")
    for k in multiplicities:
        if k not in lat.labels:
            raise KeyError(k)
    if name is None:
        k = 1
        while f"E{k}" in lat.labels:
            k += 1
        name = f"E{k}"
    n = lat.rank
    gram = [list(row) + [0] for row in lat.gram] + [[0] * n + [-1]]
    new = SurfaceLattice(lat.labels + (name,), gram)
    return Blowup(new, name, lat, tuple(sorted(multiplicities.items())))


# ---------------------------------------------------------------------------
# chains of point blowups over a curve


@dataclass(frozen=True)
class BlowupStep:
    curve_multiplicity: int
    through: Tuple[int, ...] = ()


@dataclass
class BlowupChain:
    """Successive point blowups starting from a curve C with C^2 = ``csq``.

    Step k blows up a point where the current strict transform of C has the
    given multiplicity and which lies on the exceptional curves ``through``.
    Classes are expressed in the basis (C, e_1, ..., e_k) of total transforms.
    """

    csq: int
    steps: List[BlowupStep] = field(default_factory=list)

    def lattice(self) -> SurfaceLattice:
        lat = SurfaceLattice(["C"], [[self.csq]])
        for _ in self.steps:
            lat = blowup_point(lat, {}).lattice
        return lat

    def strict_curve(self, lat: SurfaceLattice) -> DivisorClass:
        vec = [Fraction(1)] + [Fraction(-s.curve_multiplicity) for s in self.steps]
        return lat.cls(vec)

    def pullback_curve(self, lat: SurfaceLattice) -> DivisorClass:
        return lat.generator("C")

    def exceptional_curves(self, lat: SurfaceLattice) -> List[DivisorClass]:
        """Strict transforms E_j = e_j - sum of later e_k whose centre lies on E_j."""
        curves = []
        for j in range(len(self.steps)):
            vec = [Fraction(0)] * lat.rank
            vec[1 + j] = Fraction(1)
            for k in range(j + 1, len(self.steps)):
                if j in self.steps[k].through:
                    vec[1 + k] -= 1
            curves.append(lat.cls(vec))
        return curves

    def coefficients(self) -> List[int]:
        """n_j with pi^*C = C~ + sum n_j E_j."""
        n: List[int] = []
        for step in self.steps:
            n.append(step.curve_multiplicity + sum(n[j] for j in step.through))
        return n


def strict_transform_defect_check(chain: BlowupChain) -> Tuple[Fraction, Fraction, bool]:
    lat = chain.lattice()
    strict = chain.strict_curve(lat)
    pulled = chain.pullback_curve(lat)
    curves = chain.exceptional_curves(lat)
    coeffs = chain.coefficients()
    tail = lat.zero()
    for n, e in zip(coeffs, curves):
        tail = tail + e * n
    if strict + tail != pulled:
        raise AssertionError("pullback decomposition inconsistent")
    if any(intersect(pulled, e) != 0 for e in curves):
        raise AssertionError("pullback is not orthogonal to exceptional curves")
    lhs = pulled.square() - strict.square()
    rhs = intersect(strict, tail)
    return lhs, rhs, lhs == rhs


def random_chain(rng, max_steps: int = 4, max_mult: int = 3, csq_range=(-5, 9)) -> BlowupChain:
    steps = []
    for k in range(rng.randint(1, max_steps)):
        earlier = list(range(k))
        through = tuple(sorted(rng.sample(earlier, rng.randint(0, min(2, len(earlier))))))
        steps.append(BlowupStep(rng.randint(0, max_mult), through))
    return BlowupChain(rng.randint(*csq_range), steps)


# ---------------------------------------------------------------------------
# Chern characters


@dataclass(frozen=True)
class ChernChar:
    rank: int
    c1: DivisorClass
    ch2: Fraction

    def __add__(self, other: "ChernChar") -> "ChernChar":
        return ChernChar(self.rank + other.rank, self.c1 + other.c1, self.ch2 + other.ch2)

    def record(self) -> dict:
        return {"rank": self.rank, "c1": self.c1.record(), "ch2": str(self.ch2)}


def ch_pushforward(divisor: DivisorClass, deg_l=0) -> ChernChar:
    """Chern character of a line bundle of degree ``deg_l`` pushed forward from a divisor."""
    return ChernChar(0, divisor, -divisor.square() / 2 + as_rational(deg_l))


def ch_additivity_check(left: ChernChar, middle: ChernChar, right: ChernChar) -> bool:
    return middle == left + right


def negative_curve_lattice(d: int) -> SurfaceLattice:
    return SurfaceLattice(["C"], [[-d]])


def picard_one_lattice(h2: int) -> SurfaceLattice:
    return SurfaceLattice(["H"], [[h2]])


# ---------------------------------------------------------------------------
# filtration inequalities


def check_main_ineq(ranks: Sequence[int]) -> Tuple[int, int, str]:
    if not ranks:
        raise ValueError("rank sequence must be non-empty")
    if any(r < 1 for r in ranks):
        raise ValueError("ranks must be positive")
    m = len(ranks)
    lhs = sum(ranks) ** 2
    rhs = sum((2 * m + 1 - 2 * i) * r for i, r in enumerate(ranks, start=1))
    if lhs > rhs:
        kind = "strict"
    elif lhs == rhs:
        kind = "equality"
    else:
        kind = "violated"
    return lhs, rhs, kind


@dataclass(frozen=True)
class FiltrationData:
    csq: int
    ranks: Tuple[int, ...]

    def __post_init__(self):
        if not self.ranks or any(r < 1 for r in self.ranks):
            raise ValueError("need at least one positive rank")


def filtration_ch2_bound(f: FiltrationData) -> Tuple[Fraction, bool]:
    m = len(f.ranks)
    bound = sum(
        (Fraction(-r, 2) - (m - i) * r for i, r in enumerate(f.ranks, start=1)), Fraction(0)
    ) * f.csq
    n = sum(f.ranks)
    return bound, Fraction(-(n**2) * f.csq, 2) == bound


def rank_grid(m_max: int, r_max: int):
    for m in range(1, m_max + 1):
        yield from itertools.product(range(1, r_max + 1), repeat=m)


# ---------------------------------------------------------------------------
# triple intersections after blowing up a curve in a threefold


@dataclass(frozen=True)
class CurveBlowupForm:
    """Triple products on span(pullback S, E) after blowing up a section of S.

    ``b`` is L^2 for the base curve L (so S·section = b) and ``a`` the
    self-intersection of the section inside S; deg N = a + b.
    """

    a: int
    b: int

    def triple(self, i: str, j: str, k: str) -> Fraction:
        n_e = sorted((i, j, k)).count("E")
        if n_e == 0:
            raise ValueError("S^3 is not determined by this model")
        if n_e == 1:
            return Fraction(0)
        if n_e == 2:
            return Fraction(-self.b)
        return Fraction(-(self.a + self.b))

    def expand(self, x: Mapping[str, int], y: Mapping[str, int], z: Mapping[str, int]) -> Fraction:
        total = Fraction(0)
        for (i, ci), (j, cj), (k, ck) in itertools.product(x.items(), y.items(), z.items()):
            if ci and cj and ck:
                total += ci * cj * ck * self.triple(i, j, k)
        return total


def section_selfint_by_lattice(a: int, b: int) -> Fraction:
    """(pullback S - E)^2 · E, the self-intersection of E ∩ strict(S) inside E."""
    form = CurveBlowupForm(a, b)
    strict = {"S": 1, "E": -1}
    return form.expand(strict, strict, {"E": 1})
