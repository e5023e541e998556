"""Polynomials, root clustering, partial fractions and exponential sums."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from dppeakons.errors import NoRoots, NotRealValued, PoleZeroOverlap
from dppeakons.polycalc import (
    ExpSum,
    Poly,
    RootSet,
    expsum_antiderivative,
    expsum_smallest_positive_root,
    partial_fractions,
    roots,
)
from dppeakons.spectral import spectral_polynomials

from conftest import PORTRAIT_STATE


def poly_from_roots(rs):
    """Monic-in-zero product prod (1 - z/r)."""
    p = Poly([1.0])
    for r in rs:
        p = p * Poly([1.0, -1.0 / r])
    return p


# --- Poly ----------------------------------------------------------------


def test_trailing_zeros_are_trimmed():
    p = Poly([1.0, 2.0, 0.0, 0.0])
    assert p.degree == 1
    assert Poly([0.0, 0.0]).degree == 0


def test_horner_matches_power_sum(rng):
    c = rng.normal(size=6) + 1j * rng.normal(size=6)
    p = Poly(c)
    z = rng.normal(size=10) + 1j * rng.normal(size=10)
    direct = sum(ck * z**k for k, ck in enumerate(c))
    assert np.allclose(p(z), direct, rtol=1e-14, atol=0)


def test_shift_gives_taylor_coefficients():
    p = Poly([1.0, -3.0, 0.0, 2.0])
    a = 0.7
    w = 0.31
    taylor = p.shift(a)
    assert np.isclose(sum(c * w**k for k, c in enumerate(taylor)), p(a + w), rtol=1e-14)


def test_reflect_and_divide_z():
    p = Poly([0.0, 2.0, 5.0])
    assert np.allclose(p.reflect().coeffs, [0.0, -2.0, 5.0])
    assert np.allclose(p.divide_z().coeffs, [2.0, 5.0])
    with pytest.raises(ValueError):
        Poly([1.0, 1.0]).divide_z()


# --- roots ---------------------------------------------------------------


def test_linear_root():
    rs = roots(Poly([1.0, -2.0]))
    assert list(rs) == [(0.5, 1)]


def test_perfect_square_is_a_double_root():
    rs = roots(Poly([1.0, -2.0, 1.0]))
    assert len(rs) == 1
    lam, d = next(iter(rs))
    assert d == 2
    assert abs(lam - 1.0) < 1e-12


def test_degree_zero_has_no_roots():
    with pytest.raises(NoRoots):
        roots(Poly([3.0]))


def test_portrait_cubic_has_two_roots_in_right_half_plane():
    A = spectral_polynomials(PORTRAIT_STATE).A
    rs = roots(A)
    assert rs.total_multiplicity == 3
    assert np.sum(rs.values.real > 0) == 2


def test_widely_spread_roots_are_not_merged():
    # a huge root must not inflate the clustering radius of the small ones
    p = poly_from_roots([0.81, -0.276, -3.5e9])
    rs = roots(p)
    assert rs.is_simple() and len(rs) == 3


def test_roots_are_polished():
    A = spectral_polynomials(PORTRAIT_STATE).A
    for lam, _ in roots(A):
        assert abs(A(lam)) <= 1e-12 * A.maxcoeff()


@settings(max_examples=60, deadline=None)
@given(
    st.lists(
        st.floats(0.05, 20.0).flatmap(lambda r: st.sampled_from([r, -r])),
        min_size=1,
        max_size=6,
        unique=True,
    ),
    st.floats(-3.0, 3.0).filter(lambda v: abs(v) > 0.1),
)
def test_product_form_reproduces_polynomial(rs, scale):
    gap = min((abs(a - b) for i, a in enumerate(rs) for b in rs[i + 1 :]), default=1.0)
    if gap < 1e-3:
        return
    p = poly_from_roots(rs) * scale
    found = roots(p)
    assert found.total_multiplicity == p.degree
    g = np.random.default_rng(1)
    z = g.normal(size=10) + 1j * g.normal(size=10)
    assert np.allclose(found.product_form(z), p(z) / p(0.0), rtol=1e-9, atol=1e-12)


def test_multiplicities_sum_to_degree(rng):
    for _ in range(50):
        n = int(rng.integers(1, 7))
        p = Poly(np.concatenate([[1.0], rng.normal(size=n)]))
        assert roots(p).total_multiplicity == n


# --- partial fractions ---------------------------------------------------


def test_simple_pole():
    pf = partial_fractions(Poly([1.0]), RootSet(np.array([0.5 + 0j]), np.array([1])))
    assert pf.terms == [(0.5, 1, 1.0)]


def test_pure_double_pole():
    pf = partial_fractions(Poly([1.0]), RootSet(np.array([1.0 + 0j]), np.array([2])))
    (lam, k1, c1), (_, k2, c2) = pf.terms
    assert (k1, k2) == (1, 2)
    assert abs(c1) < 1e-15 and abs(c2 - 1.0) < 1e-15


def test_shared_root_is_rejected():
    with pytest.raises(PoleZeroOverlap):
        partial_fractions(Poly([-1.0, 1.0]), RootSet(np.array([1.0 + 0j, 2.0 + 0j]), np.array([1, 1])))


def _random_rational(g):
    npoles = int(g.integers(1, 4))
    poles = g.normal(size=npoles) + 1j * g.normal(size=npoles)
    mult = g.integers(1, 3, size=npoles)
    deg = int(mult.sum())
    num = Poly(g.normal(size=deg) + 1j * g.normal(size=deg))
    scale = complex(g.normal() + 1j * g.normal())
    return num, RootSet(poles, mult), scale


def test_reconstruction_matches_direct_evaluation():
    g = np.random.default_rng(5)
    for _ in range(100):
        num, den, scale = _random_rational(g)
        pf = partial_fractions(num, den, scale, check_overlap=False)
        z = 3 * (g.normal(size=10) + 1j * g.normal(size=10))

        def direct(z):
            return num(z) / (scale * np.prod([(z - lam) ** d for lam, d in den], axis=0))

        assert np.allclose(pf(z), direct(z), rtol=1e-9, atol=0)


def test_random_cubic_with_distinct_roots():
    g = np.random.default_rng(9)
    poles = np.array([-1.3, 0.4, 2.2]) + 0j
    num = Poly(g.normal(size=3))
    pf = partial_fractions(num, RootSet(poles, np.ones(3, dtype=int)))
    z = g.normal(size=10) + 1j * g.normal(size=10)
    direct = num(z) / np.prod([z - p for p in poles], axis=0)
    assert np.allclose(pf(z), direct, rtol=1e-10, atol=0)


# --- ExpSum --------------------------------------------------------------


def test_terms_with_equal_exponents_merge():
    s = ExpSum([(1.0, 0, 2.0), (2.0, 0, 2.0), (1.0, 1, 2.0)])
    assert len(s) == 2
    assert np.isclose(s(0.3), 3 * np.exp(0.6) + 0.3 * np.exp(0.6))


def test_negligible_terms_are_dropped():
    s = ExpSum([(1.0, 0, 1.0), (1e-17, 0, 3.0)])
    assert len(s) == 1


def test_exact_cancellation_leaves_no_term():
    s = ExpSum([(0.1, 0, 1.5)]) * 3.0 - ExpSum([(0.3, 0, 1.5)])
    assert len(s) == 0


def test_antiderivative_of_constant():
    F = expsum_antiderivative(ExpSum.constant(1.0))
    assert F.terms == [(1.0, 1, 0.0)]


def test_antiderivative_of_single_exponential():
    F = expsum_antiderivative(ExpSum.exponential(1.0, 2.0))
    t = np.linspace(-1, 1, 7)
    assert np.allclose(np.real(F(t)), (np.exp(2 * t) - 1) / 2, rtol=1e-14, atol=1e-15)


def _simpson(f, a, b, tol=1e-12):
    """Adaptive Simpson, used as an independent quadrature oracle."""

    def simpson(a, fa, b, fb):
        m = 0.5 * (a + b)
        fm = f(m)
        return m, fm, (b - a) / 6 * (fa + 4 * fm + fb)

    def rec(a, fa, b, fb, m, fm, whole, tol, depth):
        lm, flm, left = simpson(a, fa, m, fm)
        rm, frm, right = simpson(m, fm, b, fb)
        if depth <= 0 or abs(left + right - whole) <= 15 * tol:
            return left + right + (left + right - whole) / 15
        return rec(a, fa, m, fm, lm, flm, left, tol / 2, depth - 1) + rec(
            m, fm, b, fb, rm, frm, right, tol / 2, depth - 1
        )

    fa, fb = f(a), f(b)
    m, fm, whole = simpson(a, fa, b, fb)
    return rec(a, fa, b, fb, m, fm, whole, tol, 50)


def test_anti_resonant_square_gives_linear_term():
    s = ExpSum([(0.7, 0, 1.3), (0.4, 0, -1.3)])
    sq = s * s
    F = expsum_antiderivative(sq)
    assert any(p == 1 and mu == 0 for _, p, mu in F.terms)
    for t in (0.5, 1.0, 2.0):
        exact = _simpson(lambda u: float(np.real(sq(u))), 0.0, t)
        assert abs(np.real(F(t)) - exact) <= 1e-10 * max(1.0, abs(exact))


def test_antiderivative_matches_quadrature_with_polynomial_parts():
    s = ExpSum([(1.2, 1, -0.4), (0.3, 2, 0.2), (-1.0, 0, 1e-12), (0.5 + 0.5j, 0, 0.3 + 1j), (0.5 - 0.5j, 0, 0.3 - 1j)])
    F = expsum_antiderivative(s)
    for t in (-1.5, 0.7, 3.0):
        exact, _ = quad(lambda u: float(np.real(s(u))), 0.0, t, epsabs=1e-13, epsrel=1e-13)
        assert abs(np.real(F(t)) - exact) <= 1e-10 * max(1.0, abs(exact))


def _random_expsum(g, n=5):
    return ExpSum(
        [(complex(g.normal()), int(g.integers(0, 3)), complex(g.normal())) for _ in range(n)]
    )


def test_derivative_then_antiderivative_returns_input():
    g = np.random.default_rng(2)
    for _ in range(20):
        s = _random_expsum(g)
        back = expsum_antiderivative(s.derivative())
        t = g.uniform(-2, 2, 5)
        diff = back(t) - s(t)
        assert np.allclose(diff, diff[0], rtol=0, atol=1e-10 * max(1.0, np.max(np.abs(s(t)))))


def test_antiderivative_differentiates_back_coefficientwise():
    g = np.random.default_rng(3)
    for _ in range(20):
        s = _random_expsum(g)
        d = expsum_antiderivative(s).derivative() - s
        scale = float(np.max(np.abs(s.c)))
        assert len(d) == 0 or float(np.max(np.abs(d.c))) <= 1e-12 * scale


def test_conjugate_closed_sum_is_real():
    g = np.random.default_rng(4)
    c, mu = complex(g.normal(), g.normal()), complex(g.normal(), g.normal())
    s = ExpSum([(c, 1, mu), (c.conjugate(), 1, mu.conjugate()), (0.5, 0, -0.2)])
    assert s.is_conjugate_closed()
    for t in g.uniform(-3, 3, 20):
        v = s(t)
        assert abs(v.imag) <= 1e-12 * abs(v)


def test_scaled_evaluation_survives_overflow():
    s = ExpSum([(1.0, 0, 800.0), (-2.0, 0, 799.0)])
    v, kappa = s.scaled(1.0)
    assert kappa == 800.0
    assert np.isclose(v.real, 1 - 2 * np.exp(-1.0))


# --- smallest positive root ----------------------------------------------


def test_equal_exponents_root():
    s = ExpSum([(1.0, 0, 1.0), (-np.exp(-1.0), 0, 2.0)])
    t = expsum_smallest_positive_root(s, 10.0)
    assert abs(t - 1.0) <= 1e-12


def test_constant_has_no_root():
    assert expsum_smallest_positive_root(ExpSum.constant(1.0), 50.0) is None


def test_asymmetric_sum_is_not_real():
    with pytest.raises(NotRealValued):
        expsum_smallest_positive_root(ExpSum([(1j, 0, 1.0)]), 5.0)


def test_inverse_mass_of_colliding_state_has_root():
    from dppeakons.closedform import DEFAULT_HORIZON, build

    from conftest import states_for

    for s in states_for((1, 1, -1), 5, seed=12):
        cf = build(s)
        t = expsum_smallest_positive_root(cf.q3, DEFAULT_HORIZON)
        assert t is not None and 0 < t < DEFAULT_HORIZON
