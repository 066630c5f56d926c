import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tdsusy.errors import (AccuracyError, CapabilityError, DomainError, SingularEvaluationError)
from tdsusy.numerics import (HALF_LINE, Interval, JetField, PotentialField, SpaceTimeGrid,
                             ZeroField, convergence_ratio, cumulative_quadrature,
                             fd_schrodinger_residual, free_potential, harmonic_potential, jet_div,
                             jet_log_derivative, jet_mul, quadrature, wronskian, wronskian_jet)
from tdsusy.seeds import free_l2_state, free_particle_solution, oscillator_eigenstate


def poly_field(coeffs, label="poly"):
    """Time-independent polynomial with exact derivative jets (test helper)."""
    p = np.polynomial.Polynomial(coeffs)

    def fn(x, t, k):
        x = np.broadcast_to(x, np.broadcast_shapes(x.shape, t.shape))
        return np.stack([p.deriv(j)(x) if j else p(x) for j in range(k + 1)])
    return JetField(fn, label)


def test_grid_validation():
    g = SpaceTimeGrid.uniform((-1, 1, 5), (0, 1, 5))
    assert g.shape == (5, 5)
    assert g.h == pytest.approx(0.5)
    assert g.tau == pytest.approx(0.25)
    with pytest.raises(DomainError):
        SpaceTimeGrid.uniform((-1, 1, 4), (0, 1, 5))
    with pytest.raises(DomainError):
        SpaceTimeGrid(np.array([0, 2, 1, 3, 4.0]), np.linspace(0, 1, 5))
    with pytest.raises(DomainError):
        Interval(1.0, 1.0)
    with pytest.raises(DomainError):
        SpaceTimeGrid.uniform((-1, 1, 5), (0, 1, 5), HALF_LINE)


def test_jet_arithmetic_against_polynomials():
    x = np.linspace(-1, 1, 7)
    f = poly_field([1.0, 2.0, 0.5, 1.0]).derivs(x, 0.0, 4)
    g = poly_field([3.0, -1.0, 0.25]).derivs(x, 0.0, 4)
    prod = np.polynomial.Polynomial([1.0, 2.0, 0.5, 1.0]) * np.polynomial.Polynomial([3.0, -1.0, 0.25])
    ref = np.stack([prod.deriv(j)(x) if j else prod(x) for j in range(5)])
    assert np.allclose(jet_mul(f, g), ref, rtol=1e-13)
    assert np.allclose(jet_mul(jet_div(f, g), g), f, rtol=1e-12)


def test_jet_log_derivative_exponential():
    x = np.linspace(-1, 1, 5)
    e = JetField(lambda x, t, k: np.stack([2.0 ** j * np.exp(2 * x) for j in range(k + 1)]))
    ld = jet_log_derivative(e.derivs(x, 0.0, 3))
    assert np.allclose(ld[0], 2.0) and np.allclose(ld[1:], 0.0, atol=1e-13)


def test_field_capability_limit():
    psi = free_l2_state(0)
    with pytest.raises(CapabilityError):
        psi.derivs(0.0, 0.0, psi.max_order + 1)


# -- Wronskian ------------------------------------------------------------------


def test_wronskian_single_and_repeated():
    u = free_l2_state(2)
    x = np.linspace(-2, 2, 9)
    assert np.allclose(wronskian([u], x, 0.4), u.value(x, 0.4), rtol=1e-15)
    assert np.allclose(wronskian([u, u], x, 0.4), 0.0, atol=1e-15)


def test_wronskian_free_pair_golden():
    W = wronskian([free_l2_state(0), free_l2_state(1)], 1.0, 0.0)
    assert W == pytest.approx(math.exp(-0.5), rel=1e-14)
    u0, u1 = free_l2_state(0).derivs(1.0, 0.0, 1), free_l2_state(1).derivs(1.0, 0.0, 1)
    assert W == pytest.approx(u0[0] * u1[1] - u0[1] * u1[0], rel=1e-14)


def test_wronskian_capability():
    short = JetField(lambda x, t, k: np.zeros((k + 1,) + np.broadcast_shapes(x.shape, t.shape)), "short", 1)
    with pytest.raises(CapabilityError):
        wronskian([short, short, short], 0.0, 0.0)


def test_wronskian_jet_derivatives_vs_fd():
    fns = [free_l2_state(0), free_l2_state(1), free_l2_state(3)]
    x = np.linspace(-1.5, 1.5, 7)
    jet = wronskian_jet(fns, x, 0.3, 2)
    h = 1e-4
    wp, wm = wronskian(fns, x + h, 0.3), wronskian(fns, x - h, 0.3)
    assert np.allclose(jet[1], (wp - wm) / (2 * h), rtol=1e-6, atol=1e-8)
    assert np.allclose(jet[2], (wp - 2 * jet[0] + wm) / h ** 2, rtol=1e-4, atol=1e-6)


coef = st.lists(st.floats(-2, 2, allow_nan=False), min_size=1, max_size=4)


@settings(max_examples=40, deadline=None)
@given(coef, coef, coef, st.floats(-1.5, 1.5))
def test_wronskian_alternates_under_swap(a, b, c, x):
    f, g, h = poly_field(a), poly_field(b), poly_field(c)
    w = wronskian([f, g, h], x, 0.0)
    assert wronskian([g, f, h], x, 0.0) == pytest.approx(-w, abs=1e-10)
    assert wronskian([f, h, g], x, 0.0) == pytest.approx(-w, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(coef, coef, st.floats(-1.5, 1.5), st.floats(-3, 3))
def test_wronskian_ignores_added_multiples(a, b, x, lam):
    f, g = poly_field(a), poly_field(b)
    w = wronskian([f, g], x, 0.0)
    assert wronskian([f, g + lam * f], x, 0.0) == pytest.approx(w, abs=1e-9)


# -- finite-difference residual -------------------------------------------------


def test_fd_residual_zero_state():
    g = SpaceTimeGrid.uniform((-2, 2, 9), (0, 0.01, 11))
    assert fd_schrodinger_residual(ZeroField(), free_potential(), g) == 0.0


@pytest.mark.parametrize("psi,U", [(free_particle_solution(-0.5), free_potential()),
                                   (oscillator_eigenstate(0, 1.0), harmonic_potential(1.0))])
def test_fd_residual_golden_seeds(psi, U):
    def at(tau):
        n = int(round(2 / tau)) + 1
        return fd_schrodinger_residual(psi, U, SpaceTimeGrid.uniform((-6, 6, 61), (0, 2, n)))
    assert at(1e-3) <= 1e-5
    assert 3.5 <= convergence_ratio(at, 1e-3) <= 4.5


def test_fd_residual_rejects_singular_potential():
    bad = PotentialField(lambda x, t, k: np.stack([1 / x] + [0 * x] * k), "pole")
    g = SpaceTimeGrid.uniform((-1, 1, 5), (0, 0.1, 5))
    with np.errstate(divide="ignore"), pytest.raises(SingularEvaluationError):
        fd_schrodinger_residual(free_l2_state(0), bad, g)


def test_fd_residual_needs_second_derivative():
    f = JetField(lambda x, t, k: np.zeros((k + 1,) + np.broadcast_shapes(x.shape, t.shape)), "f", 1)
    with pytest.raises(CapabilityError):
        fd_schrodinger_residual(f, free_potential(), SpaceTimeGrid.uniform((-1, 1, 5), (0, 1, 5)))


# -- quadrature -------------------------------------------------------------------


def trapezoid_oracle(f, a, b, n):
    y = np.linspace(a, b, n)
    return np.trapezoid(f(y), y) if hasattr(np, "trapezoid") else np.trapz(f(y), y)


def test_quadrature_basic():
    assert quadrature(lambda y: np.ones_like(y), 0.0, 1.0) == pytest.approx(1.0, abs=1e-12)
    assert quadrature(np.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-10)
    assert quadrature(np.sin, 1.0, 1.0) == 0
    assert quadrature(np.sin, math.pi, 0.0) == pytest.approx(-2.0, abs=1e-10)


def test_quadrature_half_gaussian_against_trapezoid():
    f = lambda y: np.exp(-y * y / 2)  # noqa: E731
    got = quadrature(f, -math.inf, 0.0, 1e-12)
    oracle = trapezoid_oracle(f, -40.0, 0.0, 400001)
    assert got.real == pytest.approx(oracle, abs=1e-10)
    assert got.real == pytest.approx(math.sqrt(math.pi / 2), abs=1e-10)
    assert quadrature(f, -math.inf, math.inf, 1e-12).real == pytest.approx(math.sqrt(2 * math.pi), abs=1e-10)


def test_cumulative_quadrature_complex():
    xs = np.array([0.5, -1.0, 2.0, 0.0])
    got = cumulative_quadrature(lambda y: np.exp(1j * y), -1.0, xs, 1e-12)
    assert np.allclose(got, (np.exp(1j * xs) - np.exp(-1j)) / 1j, atol=1e-11)


def test_quadrature_rejects_nonfinite():
    with pytest.raises(AccuracyError):
        quadrature(lambda y: np.where(y > 0.5, np.nan, 1.0), 0.0, 1.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(0.1, 3), st.floats(0.2, 2))
def test_quadrature_gaussian_property(a, width, c):
    f = lambda y: np.exp(-c * y * y)  # noqa: E731
    ref = 0.5 * math.sqrt(math.pi / c) * (math.erf(math.sqrt(c) * (a + width)) - math.erf(math.sqrt(c) * a))
    assert quadrature(f, a, a + width, 1e-12).real == pytest.approx(ref, abs=1e-11)
