from fractions import Fraction

import pytest

from sheafpairs.artinian import ArtinAlgebra, GammaPoint, Submodule, gamma_kernel
from sheafpairs.checks import D1_REDUCED, reference_family_equations, _same_up_to_sign
from sheafpairs.grassmann import (
    analyze_chart,
    boundary_base_point,
    branch_components,
    certify_component,
    chart_at,
    chart_variable_names,
    invariance_system,
    verify_union_cover,
)
from sheafpairs.ratpoly import Poly, PolySystem, RatMatrix, VarContext, eliminate_linear, parse_poly, poly_substitute


@pytest.fixture(scope="module")
def d1():
    return analyze_chart(1)


@pytest.fixture(scope="module")
def d2():
    return analyze_chart(2)


def test_variable_names():
    assert chart_variable_names(9) == list("abcdefghi")
    names = chart_variable_names(16)
    assert "o" not in names and names[-1] == "q"
    assert len(set(chart_variable_names(40))) == 40


def test_chart_at_d1(d1):
    frame = d1.frame
    assert (frame.k, frame.n) == (3, 6)
    assert len(frame.ctx) == 9
    alg = frame.algebra
    assert frame.pivots == (alg.left(1), alg.left(2), alg.right(2))
    assert frame.evaluate(frame.base_point()) == boundary_base_point(1).basis


def test_chart_at_d2(d2):
    assert (d2.frame.k, len(d2.frame.ctx)) == (4, 16)


def test_chart_rejects_wrong_dimension():
    with pytest.raises(ValueError):
        chart_at(Submodule(ArtinAlgebra(1), [[1, 0, 0, 0, 0, 0]]))


def test_invariance_vanishes_at_base(d2):
    assert d2.system.system.vanishes_at(d2.frame.base_point())


def test_zero_actions_give_empty_system(d1):
    zero = RatMatrix.zeros(6, 6)
    assert len(invariance_system(d1.frame, [zero, zero]).system) == 0


def test_d1_reduced_system(d1):
    red, subs = eliminate_linear(d1.system.system, radical=True)
    ctx = red.ctx
    assert _same_up_to_sign(list(red), [parse_poly(t, ctx) for t in D1_REDUCED])
    assert {k: v.to_text() for k, v in subs.items()} == {"a": "0", "b": "0", "e": "1/1*c*d", "h": "1/1*c*g"}


def test_d2_generators_present(d2):
    # quadratic relations written in relabelled coordinates; pulled back through
    # the linear substitution they appear among the reduced generators
    _, ctx = reference_family_equations(d2)
    full = d2.frame.ctx
    zero = [n for n, v in d2.substitution.items() if v.is_zero()]
    kept = [n for n in full.names if n not in zero]
    back = dict(zip(ctx.names, kept))
    reduced = {min(g.to_text(), (-g).to_text()) for g in d2.reduced}
    for text in ["e^2+f*i", "e*i+i*j", "g*i+j*k", "h*i+j*l"]:
        p = poly_substitute(parse_poly(text, ctx).rename(back, full), d2.substitution).embed(full)
        assert min(p.to_text(), (-p).to_text()) in reduced


def test_d1_components(d1):
    assert len(d1.branches) == 2
    ctx = d1.frame.ctx
    texts = sorted(sorted(e.to_text() for e in c.equations) for c in d1.certificates)
    small = [t for t in texts if "1/1*d" in t and "1/1*g" in t]
    assert small, texts
    fam = d1.family_certificate
    assert fam.smooth and fam.dimension == 3
    eqs = {e.to_text() for e in fam.equations}
    for t in ["c*g + d", "c*i + f"]:
        p = parse_poly(t, ctx)
        assert p.to_text() in eqs or (-p).to_text() in eqs
    assert d1.cover.verdict == "Covered"


def test_d2_family(d2):
    fam = d2.family_certificate
    assert fam.smooth and fam.dimension == 4 and fam.triangular
    assert d2.cover.verdict == "Covered"


def test_components_lie_in_locus(d1, d2):
    for a in (d1, d2):
        for br in a.branches:
            assert br.triangular
            for g in a.system.system:
                assert poly_substitute(g, br.substitution).embed(a.frame.ctx).is_zero()


def test_certify_examples(d1):
    frame = d1.frame
    ctx = frame.ctx
    comp = [parse_poly(t, ctx) for t in ["a", "b", "e-c*d", "h-c*g", "d+c*g", "f+c*i"]]
    cert = certify_component(comp, frame)
    assert cert.smooth and cert.dimension == 3 and cert.jacobian_rank == 6
    cert = certify_component([Poly.var(ctx, n) for n in ctx.names], frame)
    assert cert.smooth and cert.dimension == 0


def test_irreducible_generator_is_not_split():
    ctx = VarContext(("x", "y"))
    branches = branch_components(PolySystem.parse(ctx, ["x^2 + y^2"]))
    assert len(branches) == 1 and not branches[0].triangular


def test_single_component_not_covered(d1):
    comp = [parse_poly(t, d1.frame.ctx) for t in ["d", "g"]]
    verdict = verify_union_cover(d1.system, [comp], probes=d1.branches)
    assert verdict.verdict == "NotCovered"
    pt = {k: Fraction(v) for k, v in verdict.witness.items()}
    assert d1.system.system.vanishes_at(pt)
    assert pt["d"] != 0 or pt["g"] != 0


def test_empty_system_cover():
    ctx = VarContext(("x",))
    assert verify_union_cover(PolySystem(ctx, []), [[]]).verdict == "Covered"


def test_boundary_point_is_gamma():
    assert boundary_base_point(2) == gamma_kernel(GammaPoint([0, 0, 1], [0, 1]), ArtinAlgebra(2))


@pytest.mark.slow
def test_d3_family_extrapolation():
    a = analyze_chart(3, cover=False)
    fam = a.family_certificate
    assert fam.smooth and fam.dimension == 5
