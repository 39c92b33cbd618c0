"""Affine Grassmannian charts around boundary points and their invariance loci.

A chart around a (d+2)-dimensional submodule of R_d^2 puts the identity in the
rref pivot columns and a fresh variable in every other column.  Requiring the
row span to be stable under each x_m gives a polynomial system; branching on
exact factor splits then produces triangular components whose smoothness and
dimension are certified by a Jacobian rank at the base point.
"""

from __future__ import annotations

import itertools
import random
import string
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .artinian import ArtinAlgebra, GammaPoint, Submodule, gamma_kernel, kernel_of_pair
from .ratpoly import (
    NotDivisible,
    Poly,
    PolySystem,
    RatMatrix,
    VarContext,
    divide_with_remainder,
    eliminate_linear,
    exact_divide,
    jacobian_rank_at,
    matrix_reduce,
    poly_substitute,
    rref_rows,
)


class InconclusiveBranching(Exception):
    """A generator could neither be split nor solved; carried on a branch, not raised."""


def chart_variable_names(count: int) -> List[str]:
    letters = [c for c in string.ascii_lowercase if c != "o"]
    if count <= len(letters):
        return letters[:count]
    width = len(str(count - 1))
    return [f"p{i:0{width}d}" for i in range(count)]


@dataclass(frozen=True)
class ChartFrame:
    algebra: ArtinAlgebra
    base: Submodule
    pivots: Tuple[int, ...]
    free_columns: Tuple[int, ...]
    ctx: VarContext
    matrix: Tuple[Tuple[Poly, ...], ...]

    @property
    def n(self) -> int:
        return self.algebra.ambient_dim

    @property
    def k(self) -> int:
        return len(self.pivots)

    @property
    def variables(self) -> Tuple[str, ...]:
        return self.ctx.names

    def variable_at(self, row: int, col: int) -> str:
        return self.ctx.names[row * len(self.free_columns) + self.free_columns.index(col)]

    def base_point(self) -> Tuple[Fraction, ...]:
        return (Fraction(0),) * len(self.ctx)

    def evaluate(self, point: Sequence) -> RatMatrix:
        return RatMatrix([[e.evaluate(point) for e in row] for row in self.matrix], cols=self.n)

    def coordinates_of(self, sub: Submodule) -> Optional[Tuple[Fraction, ...]]:
        """Chart coordinates of a subspace, or None when it lies outside this chart."""
        if sub.dim != self.k:
            raise ValueError("subspace has the wrong dimension")
        rows = [list(r) for r in sub.rows()]
        block = [[r[p] for p in self.pivots] for r in rows]
        aug = [b + r for b, r in zip(block, rows)]
        red, piv = rref_rows(aug, self.k + self.n)
        if piv[: self.k] != list(range(self.k)) or len(red) != self.k:
            return None
        normal = [row[self.k:] for row in red]
        base = self.base.rows()
        return tuple(
            normal[i][c] - base[i][c] for i in range(self.k) for c in self.free_columns
        )


def chart_at(m: Submodule) -> ChartFrame:
    alg = m.algebra
    if m.dim != alg.d + 2:
        raise ValueError(f"expected a subspace of dimension {alg.d + 2}, got {m.dim}")
    n = alg.ambient_dim
    pivots = m.pivots
    free = tuple(c for c in range(n) if c not in pivots)
    ctx = VarContext(tuple(chart_variable_names(len(pivots) * len(free))))
    names = iter(ctx.names)
    rows = []
    for base_row in m.rows():
        row = []
        for c in range(n):
            entry = Poly.const(ctx, base_row[c])
            if c in free:
                entry = entry + Poly.var(ctx, next(names))
            row.append(entry)
        rows.append(tuple(row))
    return ChartFrame(alg, m, pivots, free, ctx, tuple(rows))


@dataclass(frozen=True)
class InvarianceSystem:
    chart: ChartFrame
    system: PolySystem
    labels: Tuple[str, ...] = ()


def invariance_system(frame: ChartFrame, actions: Optional[Sequence[RatMatrix]] = None) -> InvarianceSystem:
    """Polynomials forcing the chart row span to be stable under each action.

    For each action X and chart row R, the coefficients of X·R on the rows are
    read off the pivot columns; the residual in each non-pivot column must vanish.
    """
    if actions is None:
        actions = frame.algebra.action_matrices()
    ctx = frame.ctx
    zero = Poly.const(ctx, 0)
    gens, labels = [], []
    for a_idx, X in enumerate(actions):
        for j, row in enumerate(frame.matrix):
            image = [zero] * frame.n
            for src in range(frame.n):
                if row[src].is_zero():
                    continue
                for dst in range(frame.n):
                    if X[src, dst]:
                        image[dst] = image[dst] + row[src] * X[src, dst]
            coeffs = [image[p] for p in frame.pivots]
            for c in frame.free_columns:
                resid = image[c]
                for l, coef in enumerate(coeffs):
                    if not coef.is_zero():
                        resid = resid - coef * frame.matrix[l][c]
                if not resid.is_zero():
                    gens.append(resid)
                    labels.append(f"x{a_idx}*R{j + 1}@col{c}")
    return InvarianceSystem(frame, PolySystem(ctx, gens), tuple(labels))


# ---------------------------------------------------------------------------
# branching


@dataclass
class Branch:
    """A locus V(equations) described, when possible, as a graph over free variables."""

    equations: Tuple[Poly, ...]
    substitution: Dict[str, Poly]
    residual: PolySystem
    history: Tuple[str, ...] = ()

    @property
    def triangular(self) -> bool:
        return len(self.residual) == 0

    def free_variables(self) -> List[str]:
        return [n for n in self.residual.ctx.names if n not in self.substitution]

    def key(self):
        return (
            frozenset((k, v) for k, v in self.substitution.items()),
            frozenset(self.residual.generators),
        )

    def parametrize(self, values: Dict[str, Fraction]) -> Dict[str, Fraction]:
        point = {n: Fraction(values.get(n, 0)) for n in self.free_variables()}
        for k, v in self.substitution.items():
            point[k] = v.evaluate(point | {kk: Fraction(0) for kk in self.substitution})
        return point

    def triangular_equations(self) -> List[Poly]:
        ctx = self.residual.ctx
        return [Poly.var(ctx, k) - v for k, v in sorted(self.substitution.items())]


def _solve(ctx: VarContext, equations: Sequence[Poly], history=()) -> Branch:
    residual, subs = eliminate_linear(PolySystem(ctx, equations), radical=True)
    return Branch(tuple(equations), subs, residual, tuple(history))


def _candidate_divisors(g: Poly, coeffs: Sequence[Fraction]) -> List[Poly]:
    """Variables, and binomials v ± c*w (or v ± c*w*z) built from the support of ``g``."""
    ctx = g.ctx
    names = g.variables()
    out = [Poly.var(ctx, n) for n in names]
    monos = [m for m in g.terms]
    factors = set()
    for m in monos:
        for i, e in enumerate(m):
            if e:
                factors.add(tuple(int(j == i) for j in range(len(ctx))))
    for m in monos:
        reduced = tuple(1 if e else 0 for e in m)
        if 1 <= sum(reduced) <= 2:
            factors.add(reduced)
    factors = sorted(factors, key=lambda m: (sum(m), m))
    scalars = sorted({abs(c) for c in coeffs} | {Fraction(1)})
    for m1, m2 in itertools.combinations(factors, 2):
        if sum(m1) != 1:
            m1, m2 = m2, m1
        if sum(m1) != 1:
            continue
        if any(a and b for a, b in zip(m1, m2)):
            continue
        for s in scalars:
            for sign in (1, -1):
                out.append(Poly(ctx, {m1: 1, m2: sign * s}))
    return out


def _split(g: Poly, coeffs: Sequence[Fraction]) -> Optional[Tuple[Poly, Poly]]:
    if g.total_degree() <= 1:
        return None
    for cand in _candidate_divisors(g, coeffs):
        if cand.total_degree() >= g.total_degree():
            continue
        try:
            q = exact_divide(g, cand)
        except NotDivisible:
            continue
        if q.is_constant():
            continue
        return cand, q
    return None


def _contained(inner: Branch, outer: Branch) -> bool:
    """V(inner) ⊆ V(outer), tested by pushing inner's parametrization through outer's equations."""
    if not inner.triangular:
        return False
    ctx = inner.residual.ctx
    for eq in outer.triangular_equations() + list(outer.residual):
        if not poly_substitute(eq, inner.substitution).embed(ctx).is_zero():
            return False
    return True


def _as_system(sys) -> PolySystem:
    return sys.system if isinstance(sys, InvarianceSystem) else sys


def branch_components(sys, max_branches: int = 5000) -> List[Branch]:
    """Split a locus into triangular branches by exact factor splits.

    Branches that cannot be split or solved are returned with a non-empty
    residual system (``triangular`` is False): an inconclusive verdict.
    """
    system = _as_system(sys)
    ctx = system.ctx
    coeffs = sorted({c for g in system for c in g.terms.values()})
    start = _solve(ctx, list(system))
    pending = [start]
    leaves: Dict[object, Branch] = {}
    seen = set()
    explored = 0
    while pending:
        br = pending.pop()
        if br.key() in seen:
            continue
        seen.add(br.key())
        explored += 1
        if explored > max_branches:
            raise RuntimeError("branch exploration limit exceeded")
        if br.triangular:
            leaves[br.key()] = br
            continue
        split = None
        for g in sorted(br.residual, key=lambda p: (p.total_degree(), len(p.terms), p.sort_key())):
            split = _split(g, coeffs)
            if split is not None:
                break
        if split is None:
            leaves[br.key()] = br
            continue
        left, right = split
        base_eqs = list(br.triangular_equations()) + list(br.residual)
        for extra in (left, right):
            pending.append(_solve(ctx, base_eqs + [extra], br.history + (str(extra),)))
    branches = list(leaves.values())
    kept = []
    for i, b in enumerate(branches):
        dominated = False
        for j, other in enumerate(branches):
            if i == j:
                continue
            if _contained(b, other) and not (_contained(other, b) and j > i):
                dominated = True
                break
        if not dominated:
            kept.append(b)
    kept.sort(key=lambda b: (-len(b.free_variables()), sorted(str(e) for e in b.triangular_equations())))
    return kept


# ---------------------------------------------------------------------------
# certificates


@dataclass
class ComponentCertificate:
    equations: List[Poly]
    substitution: Dict[str, Poly]
    free_variables: List[str]
    smooth: bool
    dimension: int
    jacobian_rank: int
    dimension_by_free_count: Optional[int]
    triangular: bool
    label: str = "invariance-locus component"

    def record(self) -> dict:
        return {
            "label": self.label,
            "equations": [e.to_text() for e in self.equations],
            "substitution": {k: v.to_text() for k, v in sorted(self.substitution.items())},
            "free_variables": list(self.free_variables),
            "smooth": self.smooth,
            "dimension": self.dimension,
            "jacobian_rank": self.jacobian_rank,
            "triangular": self.triangular,
        }


def certify_component(component, frame: ChartFrame) -> ComponentCertificate:
    """Smoothness and dimension of a component at the chart base point.

    ``component`` is a :class:`Branch` or a sequence of equations.
    """
    ctx = frame.ctx
    if not isinstance(component, Branch):
        component = _solve(ctx, [e.embed(ctx) for e in component])
    base = frame.base_point()
    equations = component.triangular_equations() + list(component.residual)
    system = PolySystem(ctx, equations)
    if not system.vanishes_at(base):
        raise ValueError("base point does not satisfy the component equations")
    rank, _ = jacobian_rank_at(system, base)
    n_vars = len(ctx)
    free = component.free_variables()
    if component.triangular:
        codim = len(component.substitution)
        smooth = rank == len(system) and rank == codim
        by_free = len(free)
    else:
        smooth = False
        by_free = None
    return ComponentCertificate(
        equations=list(system),
        substitution=dict(component.substitution),
        free_variables=free,
        smooth=smooth,
        dimension=n_vars - rank,
        jacobian_rank=rank,
        dimension_by_free_count=by_free,
        triangular=component.triangular,
    )


# ---------------------------------------------------------------------------
# union cover


@dataclass
class CoverVerdict:
    verdict: str  # "Covered" | "NotCovered" | "Inconclusive"
    failures: List[str] = field(default_factory=list)
    witness: Optional[Dict[str, str]] = None


def _component_equations(c) -> List[Poly]:
    if isinstance(c, Branch):
        return c.triangular_equations() + list(c.residual)
    if isinstance(c, ComponentCertificate):
        return list(c.equations)
    return list(c)


def _component_parametrization(c):
    if isinstance(c, Branch):
        return c.substitution if c.triangular else None
    if isinstance(c, ComponentCertificate):
        return c.substitution if c.triangular else None
    return None


def verify_union_cover(
    sys: InvarianceSystem,
    components: Sequence,
    probes: Optional[Sequence[Branch]] = None,
    samples: int = 20,
    seed: int = 0,
) -> CoverVerdict:
    """Check that the invariance locus is exactly the union of ``components``.

    (i) every component lies in the locus (exact substitution); (ii) every
    product of one equation per component reduces to zero modulo the system.
    When (ii) fails, points sampled from ``probes`` (default: all branches of
    the locus) are searched for a witness outside the union.
    """
    if not components:
        raise ValueError("at least one component is required")
    system = _as_system(sys)
    ctx = system.ctx
    gens = list(system)
    # bare equation lists are read as V(system + equations)
    components = [
        c if isinstance(c, (Branch, ComponentCertificate)) else _solve(ctx, [e.embed(ctx) for e in c] + gens)
        for c in components
    ]
    failures = []
    for idx, comp in enumerate(components):
        param = _component_parametrization(comp)
        if param is None:
            failures.append(f"component {idx} has no parametrization")
            continue
        for g in gens:
            if not poly_substitute(g, param).embed(ctx).is_zero():
                return CoverVerdict("NotCovered", [f"component {idx} leaves the locus at {g}"])
    if failures:
        return CoverVerdict("Inconclusive", failures)

    eq_lists = [_component_equations(c) for c in components]
    reduced_sys, subs = eliminate_linear(PolySystem(ctx, gens), radical=True)
    divisors = sorted(list(reduced_sys), key=Poly.sort_key)
    product_ok = True
    for combo in itertools.product(*eq_lists):
        prod = Poly.const(ctx, 1)
        for e in combo:
            prod = prod * e
        prod = poly_substitute(prod, subs).embed(ctx) if subs else prod
        if prod.is_zero():
            continue
        if divide_with_remainder(prod, divisors)[1].is_zero():
            continue
        product_ok = False
        failures.append(f"product {' * '.join(str(e) for e in combo)} not reduced")
        break
    if product_ok:
        return CoverVerdict("Covered")

    if probes is None:
        probes = branch_components(sys)
    rng = random.Random(seed)
    for probe in probes:
        if not probe.triangular:
            continue
        for _ in range(samples):
            values = {n: Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for n in probe.free_variables()}
            point = probe.parametrize(values)
            if not all(g.evaluate(point) == 0 for g in gens):
                continue
            if not any(all(e.evaluate(point) == 0 for e in eqs) for eqs in eq_lists):
                return CoverVerdict(
                    "NotCovered", failures, {k: str(v) for k, v in sorted(point.items())}
                )
    return CoverVerdict("Inconclusive", failures)


# ---------------------------------------------------------------------------
# boundary base point and the branch carrying the locally free family


def boundary_base_point(d: int) -> Submodule:
    """Kernel with direction x_d and slope (0:1): span of (x_i,0) and (0,x_d)."""
    alg = ArtinAlgebra(d)
    return gamma_kernel(GammaPoint([0] * d + [1], (0, 1)), alg)


def family_sample_points(frame: ChartFrame, count: int, seed: int = 0) -> List[Tuple[Fraction, ...]]:
    """Chart coordinates of locally free quotients near the base point.

    These are kernels of pairs (e, h) = (s + sum c_i x_i, 1); as c_d -> infinity
    they degenerate onto the base point of :func:`boundary_base_point`.
    """
    alg = frame.algebra
    rng = random.Random(seed)
    points = []
    while len(points) < count:
        s = Fraction(rng.randint(-6, 6), rng.randint(1, 4))
        c = [Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(alg.d + 1)]
        c[-1] = Fraction(rng.choice([-1, 1]) * rng.randint(5, 40), rng.randint(1, 3))
        e = alg.element(s, c)
        ker = kernel_of_pair(e, alg.one()).kernel
        coords = frame.coordinates_of(ker)
        if coords is not None:
            points.append(coords)
    return points


def family_branch(branches: Sequence[Branch], frame: ChartFrame, samples: int = 5, seed: int = 0) -> Optional[int]:
    """Index of the branch containing sampled points of the locally free family."""
    pts = family_sample_points(frame, samples, seed)
    ctx = frame.ctx
    hits = []
    for idx, br in enumerate(branches):
        eqs = br.triangular_equations() + list(br.residual)
        if all(all(e.evaluate(p) == 0 for e in eqs) for p in pts):
            hits.append(idx)
    if not hits:
        return None
    return min(hits, key=lambda i: len(branches[i].free_variables()))


@dataclass
class ChartAnalysis:
    d: int
    frame: ChartFrame
    system: InvarianceSystem
    reduced: PolySystem
    substitution: Dict[str, Poly]
    branches: List[Branch]
    certificates: List[ComponentCertificate]
    family_index: Optional[int]
    cover: CoverVerdict

    @property
    def family_certificate(self) -> Optional[ComponentCertificate]:
        if self.family_index is None:
            return None
        return self.certificates[self.family_index]

    def record(self) -> dict:
        return {
            "d": self.d,
            "base_point": f"Gamma(direction=x{self.d}, slope=(0:1))",
            "chart_variables": len(self.frame.ctx),
            "reduced_system": self.reduced.to_text(),
            "linear_substitution": {k: v.to_text() for k, v in sorted(self.substitution.items())},
            "components": [c.record() for c in self.certificates],
            "family_component": self.family_index,
            "cover": self.cover.verdict,
        }


def analyze_chart(d: int, seed: int = 0, cover: bool = True) -> ChartAnalysis:
    base = boundary_base_point(d)
    frame = chart_at(base)
    inv = invariance_system(frame)
    reduced, subs = eliminate_linear(inv.system, radical=True)
    branches = branch_components(inv)
    certs = [certify_component(b, frame) for b in branches]
    fam = family_branch(branches, frame, seed=seed)
    if fam is not None:
        certs[fam].label = "locally free family component"
    verdict = verify_union_cover(inv, branches, probes=branches, seed=seed) if cover else CoverVerdict("Inconclusive", ["skipped"])
    return ChartAnalysis(d, frame, inv, reduced, subs, branches, certs, fam, verdict)


def matrix_rank(m: RatMatrix) -> int:
    return matrix_reduce(m).rank
