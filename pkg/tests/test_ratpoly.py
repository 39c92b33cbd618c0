import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from strategies import CTX3, matrices, nonzero_polys, points, polys, small_rationals

from sheafpairs.ratpoly import (
    NotDivisible,
    Poly,
    PolySystem,
    RatMatrix,
    UnknownVariable,
    VarContext,
    divide_with_remainder,
    eliminate_linear,
    exact_divide,
    jacobian_at,
    jacobian_rank_at,
    matrix_reduce,
    parse_poly,
    poly_substitute,
    rank_of,
)

D1 = VarContext(tuple("abcdefghi"))


def P(text, ctx=D1):
    return parse_poly(text, ctx)


# ---------------------------------------------------------------------------
# polynomials


def test_parse_and_canonical_text():
    p = P("d^2 + c*d*g")
    assert p.to_text() == "1/1*c*d*g + 1/1*d^2"
    assert P("(d+c*g)*d") == p
    assert P("-3/2*a + 0*b") == Poly.var(D1, "a") * Fraction(-3, 2)


def test_parse_rejects_unknown_names():
    with pytest.raises(UnknownVariable):
        P("z + 1")


@given(polys(), polys())
def test_ring_axioms(p, q):
    assert p + q == q + p
    assert p * q == q * p
    assert (p + q) - q == p
    assert p * (q + 1) == p * q + p


@given(polys(), polys(), points())
def test_evaluation_is_a_homomorphism(p, q, pt):
    assert (p * q).evaluate(pt) == p.evaluate(pt) * q.evaluate(pt)
    assert (p + q).evaluate(pt) == p.evaluate(pt) + q.evaluate(pt)


@given(polys(), polys(), st.sampled_from(CTX3.names))
def test_leibniz_rule(p, q, v):
    assert (p * q).diff(v) == p.diff(v) * q + p * q.diff(v)


# ---------------------------------------------------------------------------
# substitution


def test_substitute_linear_relation():
    assert poly_substitute(P("e - c*d"), {"e": P("c*d")}).is_zero()


def test_substitute_identity():
    x = P("a")
    assert poly_substitute(x, {}) == x


def test_substitute_commutes_with_evaluation():
    import random

    rng = random.Random(7)
    p = P("d^2 + e*g")
    out = poly_substitute(p, {"e": P("c*d")})
    assert out == P("d^2 + c*d*g")
    for _ in range(20):
        pt = {n: Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for n in D1.names}
        inner = dict(pt, e=pt["c"] * pt["d"])
        assert out.evaluate(pt) == p.evaluate(inner)


def test_substitute_unknown_variable():
    with pytest.raises(UnknownVariable):
        poly_substitute(P("a"), {"zz": P("b")})


# ---------------------------------------------------------------------------
# division


def test_exact_divide_example():
    assert exact_divide(P("(d+c*g)*d"), P("d")) == P("d+c*g")
    ctx = VarContext(("x", "y"))
    with pytest.raises(NotDivisible):
        exact_divide(parse_poly("x", ctx), parse_poly("y", ctx))


@settings(max_examples=50)
@given(polys(max_terms=3), nonzero_polys())
def test_exact_divide_roundtrip(p, q):
    assert exact_divide(p * q, q) == p


@given(polys(max_terms=4), st.lists(nonzero_polys(max_terms=2), min_size=1, max_size=3))
def test_division_identity(p, divs):
    quots, rem = divide_with_remainder(p, divs)
    assert sum((a * b for a, b in zip(quots, divs)), Poly.const(CTX3, 0)) + rem == p


# ---------------------------------------------------------------------------
# linear algebra


def test_matrix_reduce_examples():
    r = matrix_reduce(RatMatrix.identity(3))
    assert r.rank == 3 and r.kernel_basis == ()
    r = matrix_reduce(RatMatrix([[1, 2], [2, 4]]))
    assert r.rank == 1
    assert r.kernel_basis == ((Fraction(-2), Fraction(1)),)


def _det(m):
    n = len(m)
    if n == 0:
        return Fraction(1)
    return sum(
        (-1) ** j * m[0][j] * _det([row[:j] + row[j + 1:] for row in m[1:]]) for j in range(n) if m[0][j]
    )


def _rank_by_minors(m):
    rows, cols = len(m), len(m[0])
    for k in range(min(rows, cols), 0, -1):
        for rs in itertools.combinations(range(rows), k):
            for cs in itertools.combinations(range(cols), k):
                if _det([[m[r][c] for c in cs] for r in rs]):
                    return k
    return 0


@settings(max_examples=60)
@given(matrices(4, 6))
def test_rank_matches_minors_oracle(entries):
    assert matrix_reduce(RatMatrix(entries)).rank == _rank_by_minors(entries)


@given(matrices(3, 5))
def test_rref_idempotent_and_kernel(entries):
    m = RatMatrix(entries)
    r = matrix_reduce(m)
    again = matrix_reduce(r.rref)
    assert again.rref == r.rref and again.pivots == r.pivots
    assert r.rank + len(r.kernel_basis) == m.cols
    for v in r.kernel_basis:
        assert all(sum(a * b for a, b in zip(row, v)) == 0 for row in m.entries)


# ---------------------------------------------------------------------------
# Jacobians


def test_jacobian_rank_examples():
    ctx = VarContext(tuple("cdfgi"))
    sys = PolySystem.parse(ctx, ["d+c*g", "f+c*i"])
    rank, jac = jacobian_rank_at(sys, [0] * 5)
    assert rank == 2
    assert sorted(jac.entries) == sorted([(0, 1, 0, 0, 0), (0, 0, 1, 0, 0)])
    x = VarContext(("x",))
    assert jacobian_rank_at(PolySystem.parse(x, ["x^2"]), [0])[0] == 0


@settings(max_examples=30)
@given(nonzero_polys(max_terms=5, max_exp=3), points())
def test_jacobian_against_finite_differences(p, pt):
    h = Fraction(1, 10**6)
    jac = jacobian_at(PolySystem(CTX3, [p]), pt)
    row = jac.row(0)
    for i in range(len(CTX3)):
        up = list(pt)
        dn = list(pt)
        up[i] += h
        dn[i] -= h
        fd = (p.evaluate(up) - p.evaluate(dn)) / (2 * h)
        assert abs(fd - row[i]) < Fraction(1, 10**4)


# ---------------------------------------------------------------------------
# linear elimination


def test_eliminate_linear_trivial_cases():
    x = VarContext(("x",))
    red, subs = eliminate_linear(PolySystem.parse(x, ["x - 1"]))
    assert len(red) == 0 and subs == {"x": parse_poly("1", x)}
    xy = VarContext(("x", "y"))
    sys = PolySystem.parse(xy, ["x*y", "x^2 + y^2"])
    red, subs = eliminate_linear(sys)
    assert red == sys and subs == {}


@given(st.lists(small_rationals, min_size=9, max_size=9))
def test_elimination_preserves_solutions(vals):
    # points on the graph of the substitution over the reduced locus solve the original system
    sys = PolySystem.parse(D1, ["a", "b - a*c", "e - c*d", "h - c*g", "d*(d+c*g)", "g*(f+c*i)"])
    red, subs = eliminate_linear(sys)
    pt = dict(zip(D1.names, vals))
    pt["d"] = Fraction(0)
    pt["g"] = Fraction(0)
    for k, v in subs.items():
        pt[k] = v.evaluate(pt)
    assert red.vanishes_at(pt)
    assert sys.vanishes_at(pt)
