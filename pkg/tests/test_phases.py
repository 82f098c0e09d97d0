import numpy as np
import pytest
from hypothesis import given, strategies as st

from oscillab.phases import (DegeneratePhaseError, GradientInversionError, Phase, invert_gradient,
                             lambda_constant, make_phase, nondegeneracy_constant)

CATALOG = [("linear", 1), ("linear", 2), ("halfwave", 1), ("halfwave", 2), ("tilt", 2), ("sine", 1)]


@pytest.mark.parametrize("name,n", CATALOG)
def test_homogeneity_and_gradient(name, n, rng):
    p = make_phase(name, n)
    x = rng.uniform(-2, 2, (n, 20))
    xi = rng.standard_normal((n, 20)) * 5
    for s in (2.0, 0.5):
        assert np.allclose(p(x, s * xi), s * p(x, xi), atol=1e-9)
    h = 1e-6
    for j in range(n):
        e = np.zeros((n, 1))
        e[j] = h
        fd = (p(x + e, xi) - p(x - e, xi)) / (2 * h)
        assert np.allclose(fd, p.grad_x(x, xi)[j], rtol=1e-6, atol=1e-6)


@pytest.mark.parametrize("name,n", CATALOG)
def test_warp_shift_form(name, n, rng):
    p = make_phase(name, n)
    x = rng.uniform(-2, 2, (n, 10))
    xi = rng.standard_normal((n, 10))
    rebuilt = np.sum(p.warp(x) * xi, axis=0) + (p.shift(xi) if p.shift else 0)
    assert np.allclose(rebuilt, p(x, xi), atol=1e-12)


def test_nondegeneracy_constants():
    assert nondegeneracy_constant(make_phase("linear", 2), 2.0) == pytest.approx(1.0)
    assert nondegeneracy_constant(make_phase("halfwave", 1), 2.0) == pytest.approx(1.0)
    # det(I + x u^T/<x>) = 1 + u.x/<x>, smallest at x = (-2, 0)
    c = nondegeneracy_constant(make_phase("tilt", 2, u=[0.5, 0.0]), 2.0)
    assert c == pytest.approx(1 - 1 / np.sqrt(5), rel=1e-12)


def test_degenerate_phase_raises():
    p = make_phase("sine", eps=1.0)
    with pytest.raises(DegeneratePhaseError) as exc:
        nondegeneracy_constant(p, np.pi)
    assert exc.value.witness is not None


def test_lambda_constants():
    assert lambda_constant(make_phase("linear", 2), 2.0) == pytest.approx(1.0)
    assert lambda_constant(make_phase("halfwave", 1), 2.0) == pytest.approx(1.0)
    p = make_phase("tilt", 2, u=[0.5, 0.0])
    lam = lambda_constant(p, 2.0)
    fine = lambda_constant(p, 2.0, per_axis=65, n_directions=128)
    assert 0 < lam < 1 and abs(fine / lam - 1) < 0.02


def test_invert_gradient_linear_and_tilt(rng):
    z = np.array([1.5, -0.3])
    assert np.allclose(invert_gradient(make_phase("linear", 2), [0.2, 0.1], z), z)
    p = make_phase("tilt", 2, u=[0.5, 0.0])
    for _ in range(10):
        x = rng.uniform(-2, 2, 2)
        zeta = rng.standard_normal(2)
        xi = invert_gradient(p, x, zeta)
        assert np.allclose(p.grad_x(x[:, None], xi[:, None])[:, 0], zeta, atol=1e-10)
        assert np.allclose(invert_gradient(p, x, 2 * zeta), 2 * xi, atol=1e-9)


def test_invert_gradient_failures():
    with pytest.raises(ValueError):
        invert_gradient(make_phase("linear", 1), [0.0], [0.0])
    # a gradient with no real preimage for negative targets
    bad = Phase(lambda x, xi: x[0] * np.abs(xi[0]), lambda x, xi: np.abs(xi),
                lambda x, xi: np.sign(xi)[None] + 0 * x[None], dim=1, name="bad")
    with pytest.raises((GradientInversionError, np.linalg.LinAlgError)):
        invert_gradient(bad, [0.0], [-1.0], max_iter=5)


@given(st.floats(-3, 3), st.floats(0.1, 10))
def test_sine_gradient_positive_for_small_eps(x, xi):
    p = make_phase("sine", eps=0.5)
    assert p.grad_x(np.array([[x]]), np.array([[xi]]))[0, 0] > 0
