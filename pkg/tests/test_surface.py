import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sheafpairs.surface import (
    BlowupChain,
    BlowupStep,
    ChernChar,
    FiltrationData,
    LatticeMismatch,
    SurfaceLattice,
    blowup_point,
    ch_additivity_check,
    ch_pushforward,
    check_main_ineq,
    filtration_ch2_bound,
    intersect,
    negative_curve_lattice,
    picard_one_lattice,
    random_chain,
    rank_grid,
    section_selfint_by_lattice,
    strict_transform_defect_check,
)

ints = st.integers(-4, 4)


def test_lattice_validation():
    with pytest.raises(ValueError):
        SurfaceLattice(["A", "B"], [[0, 1], [2, 0]])
    with pytest.raises(ValueError):
        SurfaceLattice(["A"], [[0, 1]])


def test_intersect_examples():
    lat = picard_one_lattice(3)
    h = lat.generator("H")
    assert intersect(h, h) == 3
    up = blowup_point(lat, {"H": 1})
    e = up.lattice.generator(up.exceptional)
    assert intersect(e, e) == -1
    with pytest.raises(LatticeMismatch):
        intersect(h, e)


@given(st.lists(st.lists(ints, min_size=3, max_size=3), min_size=4, max_size=4), ints, ints)
def test_bilinear_and_symmetric(vs, s, t):
    lat = SurfaceLattice(["A", "B", "C"], [[1, 2, 0], [2, -3, 1], [0, 1, 0]])
    a, b, c, _ = (lat.cls(v) for v in vs)
    assert intersect(a, b) == intersect(b, a)
    assert intersect(a * s + b * t, c) == s * intersect(a, c) + t * intersect(b, c)


@pytest.mark.parametrize("mult,drop", [(1, 1), (0, 0), (2, 4)])
def test_blowup_strict_transform(mult, drop):
    lat = SurfaceLattice(["C"], [[5]])
    up = blowup_point(lat, {"C": mult})
    c = lat.generator("C")
    e = up.lattice.generator(up.exceptional)
    assert intersect(up.pullback(c), e) == 0
    assert up.strict(c).square() == 5 - drop


def test_blowup_rejects_negative_multiplicity():
    with pytest.raises(ValueError):
        blowup_point(picard_one_lattice(1), {"H": -1})


def test_defect_examples():
    assert strict_transform_defect_check(BlowupChain(3, [BlowupStep(1)])) == (1, 1, True)
    assert strict_transform_defect_check(BlowupChain(3, [BlowupStep(2)])) == (4, 4, True)


def test_defect_random_chains():
    rng = random.Random(11)
    for _ in range(250):
        lhs, rhs, ok = strict_transform_defect_check(random_chain(rng))
        assert ok and lhs == rhs


def test_chain_coefficients_infinitely_near():
    # cusp-like chain: second centre on the first exceptional curve
    chain = BlowupChain(0, [BlowupStep(2), BlowupStep(1, (0,))])
    assert chain.coefficients() == [2, 3]
    assert strict_transform_defect_check(chain)[2]


# ---------------------------------------------------------------------------
# Chern characters


@pytest.mark.parametrize("d", range(1, 11))
def test_pushforward_values(d):
    lat = negative_curve_lattice(d)
    c = lat.generator("C")
    double = ch_pushforward(c * 2, 0)
    assert double == ChernChar(0, c * 2, Fraction(2 * d))
    assert ch_pushforward(c) + ch_pushforward(c) == ChernChar(0, c * 2, Fraction(d))
    left, right = ch_pushforward(c, d), ch_pushforward(c, 0)
    assert (left.ch2, right.ch2) == (Fraction(3 * d, 2), Fraction(d, 2))
    assert ch_additivity_check(left, double, right)


@pytest.mark.parametrize("d,h2", [(1, 1), (3, 2), (4, 5)])
def test_pushforward_picard_one(d, h2):
    lat = picard_one_lattice(h2)
    h = lat.generator("H")
    assert ch_pushforward(h * d) == ChernChar(0, h * d, Fraction(-(d**2) * h2, 2))


def test_additivity_controls():
    lat = negative_curve_lattice(2)
    c = lat.generator("C")
    zero = ChernChar(0, lat.zero(), Fraction(0))
    x = ch_pushforward(c, 1)
    assert ch_additivity_check(zero, x, x)
    assert not ch_additivity_check(x, x, x)


# ---------------------------------------------------------------------------
# inequalities


def test_main_inequality_examples():
    assert check_main_ineq([1, 1, 1]) == (9, 9, "equality")
    assert check_main_ineq([2, 1]) == (9, 7, "strict")
    with pytest.raises(ValueError):
        check_main_ineq([])


def test_main_inequality_grid():
    for ranks in rank_grid(5, 5):
        lhs, rhs, kind = check_main_ineq(ranks)
        assert lhs >= rhs
        assert (lhs == rhs) == all(r == 1 for r in ranks)


def test_filtration_bound_examples():
    assert filtration_ch2_bound(FiltrationData(1, (1, 1))) == (Fraction(-2), True)
    assert filtration_ch2_bound(FiltrationData(1, (2,))) == (Fraction(-1), False)
    with pytest.raises(ValueError):
        FiltrationData(1, ())


@pytest.mark.parametrize("csq", [1, 2, 7])
def test_tightness_matches_equality(csq):
    for ranks in rank_grid(4, 4):
        _, tight = filtration_ch2_bound(FiltrationData(csq, ranks))
        assert tight == (check_main_ineq(ranks)[2] == "equality")


# ---------------------------------------------------------------------------
# curve blowup in a threefold


def test_section_selfint_lattice():
    assert section_selfint_by_lattice(0, -3) == -3
    rng = random.Random(5)
    for _ in range(100):
        a, b = rng.randint(-10, 10), rng.randint(-10, 10)
        assert section_selfint_by_lattice(a, b) == b - a
