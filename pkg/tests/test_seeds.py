import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tdsusy.errors import DomainError, SingularEvaluationError, UnsupportedParameterError
from tdsusy.numerics import SpaceTimeGrid, convergence_ratio, fd_schrodinger_residual
from tdsusy.seeds import (SeedSpec, catalog, free_l2_state, free_particle_solution,
                          oscillator_eigenstate, oscillator_growing_state,
                          oscillator_nonstationary_seed)


def sign_changes(v):
    v = v[np.abs(v) > 1e-13 * np.max(np.abs(v))]
    return int(np.count_nonzero(np.diff(np.sign(v))))


def test_free_seed_initial_profiles():
    x = np.linspace(-3, 3, 13)
    assert np.allclose(free_particle_solution(0.5).value(x, 0.0), np.exp(x ** 2 / 4), rtol=1e-15)
    assert np.allclose(free_particle_solution(-0.5).value(x, 0.0), np.exp(-x ** 2 / 4), rtol=1e-15)


def test_free_seed_matches_parabolic_cylinder_form():
    # psi = (1+t^2)^(-1/4) exp(i x^2 t / (4(1+t^2)) + i lam arctan t) Q(z), Q = e^{-z^2/4} He_2(z)
    x, t = np.linspace(-3, 3, 7), 0.8
    z = x / math.sqrt(1 + t * t)
    ref = ((1 + t * t) ** -0.25 * np.exp(1j * x * x * t / (4 * (1 + t * t)) - 2.5j * math.atan(t))
           * np.exp(-z * z / 4) * (z * z - 1))
    assert np.allclose(free_l2_state(2).value(x, t), ref, rtol=1e-14)


@pytest.mark.parametrize("lam", [0.0, 1.0, 0.3, -2.0])
def test_free_seed_rejects_non_half_integer(lam):
    with pytest.raises(UnsupportedParameterError):
        free_particle_solution(lam)


@pytest.mark.parametrize("seed", catalog()[:4] + [oscillator_eigenstate(1), oscillator_growing_state(2)],
                         ids=lambda s: s.label)
def test_seed_solves_equation_second_order(seed):
    def at(tau):
        return fd_schrodinger_residual(seed, seed.potential,
                                       SpaceTimeGrid.uniform((-3, 3, 25), (0, 0.2, int(round(0.2 / tau)) + 1)))
    assert 3.5 <= convergence_ratio(at, 1e-3) <= 4.5
    assert at(1e-4) <= 1e-6


def test_nonstationary_seed_solves_equation():
    s = oscillator_nonstationary_seed(0.7, 1.0)

    def at(tau):
        return fd_schrodinger_residual(s, s.potential,
                                       SpaceTimeGrid.uniform((-2, 2, 17), (0.5, 0.6, int(round(0.1 / tau)) + 1)))
    assert 3.5 <= convergence_ratio(at, 1e-4) <= 4.5


def test_nonstationary_seed_values():
    lam, w = 0.7, 1.3
    s = oscillator_nonstationary_seed(lam, w)
    t = np.linspace(0.1, 1.1, 6)
    sn = np.sin(2 * w * t)
    assert np.allclose(s.value(0.0, t), sn ** -0.5 * np.exp(-1j * lam ** 2 * np.cos(2 * w * t) / sn / (2 * w)),
                       rtol=1e-14)
    x = np.linspace(-2, 2, 5)[None, :]
    assert np.allclose(np.abs(s.value(x, t[:, None])) ** 2,
                       np.cosh(lam * x / sn[:, None]) ** 2 / sn[:, None], rtol=1e-13)


def test_nonstationary_seed_singular_times():
    s = oscillator_nonstationary_seed(0.7, 1.0)
    with pytest.raises(SingularEvaluationError):
        s.value(0.0, 0.0)
    with pytest.raises(SingularEvaluationError):
        s.value(0.0, 2.0)


def test_oscillator_properties():
    assert oscillator_eigenstate(0).node_count == 0
    assert oscillator_eigenstate(3).constant == 7.0
    assert oscillator_growing_state(1).constant == -3.0
    assert np.allclose(oscillator_eigenstate(1, 1.0).value(0.0, np.linspace(0, 5, 11)), 0.0, atol=0)
    with pytest.raises(DomainError):
        oscillator_eigenstate(1, 0.0)
    with pytest.raises(DomainError):
        oscillator_eigenstate(-1)


def test_oscillator_eigenstate_is_stationary():
    psi = oscillator_eigenstate(2, 0.7)
    x = np.linspace(-3, 3, 9)
    assert np.allclose(psi.value(x, 1.3), np.exp(-1j * 0.7 * 5 * 1.3) * psi.value(x, 0.0), rtol=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 6), st.floats(0, 3))
def test_l2_parity_and_zero_count(n, t):
    psi = free_l2_state(n)
    x = np.linspace(0.05, 8, 400)
    assert np.allclose(psi.value(-x, t), (-1) ** n * psi.value(x, t), rtol=1e-13, atol=1e-300)
    xs = (np.linspace(-8, 8, 1601) + 1e-3) * math.sqrt(1 + t * t)  # zeros scale with z
    v = psi.value(xs, t) * np.exp(-1j * psi.envelope(t)[0].imag * xs ** 2)  # strip the chirp
    phase = np.exp(-1j * np.angle(v[np.argmax(np.abs(v))]))
    assert sign_changes((v * phase).real) == n


def test_growing_free_seed_nodes():
    for n in range(7):
        s = free_particle_solution(n + 0.5)
        v = s.value(np.linspace(-5, 5, 1001) + 1e-3, 0.0)
        v = (v * np.exp(-1j * np.angle(v[0]))).real
        assert sign_changes(v) == s.node_count == n % 2


def test_seed_spec_roundtrip():
    spec = SeedSpec.from_dict({"family": "free-lambda", "lambda": -1.5})
    assert spec.build().label == free_l2_state(1).label
    assert SeedSpec.from_dict({"family": "oscillator-eigen", "n": 2, "omega": 0.5}).node_count == 2
    with pytest.raises(DomainError):
        SeedSpec("nope").build()


def test_catalog_contents():
    labels = [s.label for s in catalog()]
    assert len(labels) == 20 and len(set(labels)) == 20
