import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from strategies import small_rationals

from sheafpairs.artinian import (
    ArtinAlgebra,
    GammaPoint,
    NotSurjective,
    Submodule,
    gamma_generators,
    gamma_kernel,
    gamma_limit,
    gamma_limit_generators,
    gamma_limit_point,
    kernel_of_pair,
    mul,
    random_gamma_point,
    rmodule_closure,
    transition_check,
)
from sheafpairs.ratpoly import matrix_reduce, RatMatrix

A1 = ArtinAlgebra(1)


def vec(alg, left, right):
    return alg.pair(alg.element(*left), alg.element(*right))


# ---------------------------------------------------------------------------
# multiplication


def _table_product(e1, e2):
    # dense multiplication table: basis 1, x_0..x_d with x_i x_j = 0
    n = e1.algebra.d + 2
    table = [[[0] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        table[0][i][i] = 1
        table[i][0][i] = 1
    table[0][0] = [1] + [0] * (n - 1)
    out = [Fraction(0)] * n
    for i in range(n):
        for j in range(n):
            for k in range(n):
                out[k] += e1.coords[i] * e2.coords[j] * table[i][j][k]
    return tuple(out)


def test_mul_examples():
    x, y = A1.x(0), A1.x(1)
    assert mul(x, y) == A1.zero()
    e = A1.element(2, 1, 1)
    assert mul(A1.one(), e) == e
    assert mul(e, A1.element(3, 0, 1)).coords == (6, 3, 5)


@given(st.integers(0, 4), st.data())
def test_mul_matches_table(d, data):
    alg = ArtinAlgebra(d)
    c = st.lists(small_rationals, min_size=d + 2, max_size=d + 2)
    e1 = alg.element(*data.draw(c))
    e2 = alg.element(*data.draw(c))
    assert mul(e1, e2).coords == _table_product(e1, e2)
    assert mul(e1, e2) == mul(e2, e1)


def test_mul_dimension_mismatch():
    with pytest.raises(ValueError):
        mul(A1.one(), ArtinAlgebra(2).one())


@given(st.lists(small_rationals, min_size=3, max_size=3).filter(lambda c: c[0] != 0))
def test_inverse(c):
    e = A1.element(*c)
    assert e * e.inverse() == A1.one()


# ---------------------------------------------------------------------------
# submodules


def test_closure_examples():
    m = rmodule_closure([vec(A1, (0, -1, 0), (1, 0, 0))], A1)
    assert m.dim == 3
    assert m.contains(vec(A1, (0, 0, 0), (0, 1, 0)))
    assert m.contains(vec(A1, (0, 0, 0), (0, 0, 1)))
    assert rmodule_closure([], A1).dim == 0
    gens = [vec(A1, (0, 1, 0), (0, 0, 0)), vec(A1, (0, 0, 1), (0, 0, 0)), vec(A1, (0, 0, 0), (0, 0, 1))]
    m = rmodule_closure(gens, A1)
    assert m.dim == 3 and m == Submodule(A1, gens) and m.is_closed()


def test_kernel_of_pair_examples():
    k = kernel_of_pair(A1.one(), A1.zero())
    assert k.chart == (0, (0, 0))
    assert k.kernel.dim == 3
    # kernel of (f, g) -> f is 0 + R
    assert all(k.kernel.contains(vec(A1, (0, 0, 0), b)) for b in [(1, 0, 0), (0, 1, 0), (0, 0, 1)])

    h = A1.element(Fraction(1, 3), 2, -1)
    k = kernel_of_pair(A1.one(), h)
    assert k.chart == (Fraction(1, 3), (2, -1)) and k.kernel.dim == 3

    a2 = ArtinAlgebra(2)
    e, h = a2.element(2, 0, 0, 0), a2.element(1, 1, 0, 0)
    k = kernel_of_pair(e, h)
    assert k.chart == (Fraction(1, 2), (Fraction(1, 2), 0, 0))
    assert k.kernel.dim == 4
    assert k.kernel == rmodule_closure([a2.pair(-h, e)], a2)


def test_kernel_of_pair_not_surjective():
    with pytest.raises(NotSurjective):
        kernel_of_pair(A1.x(0), A1.x(1))


@settings(max_examples=40)
@given(st.integers(1, 3), st.data())
def test_kernel_scaling_invariance(d, data):
    alg = ArtinAlgebra(d)
    coords = st.lists(small_rationals, min_size=d + 2, max_size=d + 2)
    e = alg.element(*data.draw(coords.filter(lambda c: c[0] != 0)))
    h = alg.element(*data.draw(coords))
    unit = alg.element(*data.draw(coords.filter(lambda c: c[0] != 0)))
    k1 = kernel_of_pair(e, h)
    k2 = kernel_of_pair(unit * e, unit * h)
    assert k1.kernel == k2.kernel and k1.chart == k2.chart
    assert k1.kernel.dim == d + 2 and k1.kernel.quotient_dim == d + 2


# ---------------------------------------------------------------------------
# boundary kernels


def test_gamma_kernel_examples():
    m = gamma_kernel(GammaPoint([0, 1], [0, 1]), A1)
    expected = Submodule(A1, [vec(A1, (0, 1, 0), (0, 0, 0)), vec(A1, (0, 0, 1), (0, 0, 0)), vec(A1, (0, 0, 0), (0, 0, 1))])
    assert m == expected
    a2 = ArtinAlgebra(2)
    g = GammaPoint([1, 0, 0], [1, 1])
    assert matrix_reduce(RatMatrix(gamma_generators(g, a2))).rank == 4
    assert gamma_kernel(g, a2).dim == 4


@settings(max_examples=30)
@given(st.integers(1, 5), st.randoms(use_true_random=False))
def test_gamma_kernel_dimension_and_closure(d, rnd):
    alg = ArtinAlgebra(d)
    g = random_gamma_point(random.Random(rnd.random()), d)
    m = gamma_kernel(g, alg)
    assert m.dim == d + 2 and m.is_closed()


def test_gamma_limit_d1_generators():
    u, a1 = [Fraction(2), Fraction(-3)], Fraction(5, 2)
    lim = gamma_limit(u, a1, A1)
    lin = (0, 2, -3)
    expected = Submodule(A1, [
        vec(A1, lin, (0, 0, 0)),
        vec(A1, (0, -a1, 0), (0, 1, 0)),
        vec(A1, (0, 0, -a1), (0, 0, 1)),
        vec(A1, (0, 0, 0), lin),
    ])
    assert lim == expected
    assert lim == gamma_kernel(gamma_limit_point(u, a1), A1)
    assert len(gamma_limit_generators(u, a1, A1)) >= 3


def test_gamma_limit_zero_slope():
    # with kernel generated by (-h, e) the a1 = 0 limit has generators (0, x_i),
    # which is slope (1:0); slope (0:1) is the limit point of the other chart
    u = [1, 4]
    lim = gamma_limit(u, 0, A1)
    assert lim == gamma_kernel(GammaPoint(u, (1, 0)), A1)
    assert lim != gamma_kernel(GammaPoint(u, (0, 1)), A1)
    assert lim.contains(vec(A1, (0, 0, 0), (0, 1, 0)))


def test_gamma_limit_random_d3():
    rng = random.Random(3)
    alg = ArtinAlgebra(3)
    for _ in range(50):
        u = [Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(4)]
        if not any(u):
            continue
        a1 = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        assert gamma_limit(u, a1, alg) == gamma_kernel(gamma_limit_point(u, a1), alg)


# ---------------------------------------------------------------------------
# transitions


@pytest.mark.parametrize("d", range(1, 6))
def test_transition_check(d):
    rep = transition_check(d)
    assert rep.ok
    assert rep.sample_composition == (2, (1,) * (d + 1))


def test_transition_unit_modulus():
    rep = transition_check(2, sample=(1, (3, -1, 2)))
    assert rep.sample_composition == (1, (3, -1, 2))
