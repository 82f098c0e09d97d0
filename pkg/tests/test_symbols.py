import numpy as np
import pytest
from hypothesis import given, strategies as st

from oscillab.grid import GridFunction, GridSpec
from oscillab.phases import make_phase
from oscillab.symbols import (Amplitude, build_cutoffs, gp_lowfreq_amplitude, japanese, make_amplitude,
                              plateau, separable_amplitude, seminorm_estimate, smoothstep, split_sigma)


def test_smoothstep_and_plateau():
    s = np.array([-1.0, 0.0, 0.5, 1.0, 2.0])
    assert np.allclose(smoothstep(s), [0, 0, 0.5, 1, 1])
    assert plateau(0.5, 1, 2) == 1.0 and plateau(2.5, 1, 2) == 0.0


@given(st.floats(-2, 3), st.floats(-2, 3))
def test_smoothstep_monotone(a, b):
    lo, hi = sorted((a, b))
    assert smoothstep(lo) <= smoothstep(hi)


def test_amplitude_validation():
    with pytest.raises(ValueError):
        Amplitude(lambda x, xi: 1.0, arity_d=3)
    with pytest.raises(ValueError):
        Amplitude(lambda x, xi: 1.0, rho=1.5)
    with pytest.raises(KeyError):
        make_amplitude("nope")
    with pytest.raises(ValueError):
        make_amplitude("order_m_product", m=0.5)


@pytest.mark.parametrize("name", ["one", "order_m", "order_m_product", "cone_test"])
def test_catalog_vanishes_outside_support(name, rng):
    a = make_amplitude(name, 1, 2, m=-0.5)
    x = np.array([[2.0, 2.5, -3.0]])
    Xi = rng.standard_normal((2, 3)) * 10
    assert np.all(a(x, Xi) == 0)


def test_seminorm_weight_cancels():
    bump = lambda x: np.exp(-np.sum(x ** 2, axis=0))
    a = separable_amplitude(bump, [lambda v: japanese(v) ** -1.0], dim=1, arity_d=1, order_m=-1.0)
    assert seminorm_estimate(a, (0,), (0,)) == pytest.approx(1.0)


def test_seminorm_stable_under_sample_refinement():
    a = make_amplitude("order_m", 1, 2, m=-1.0)
    c1 = seminorm_estimate(a, (1, 0), (0,), n_radii=12, n_directions=32)
    c2 = seminorm_estimate(a, (1, 0), (0,), n_radii=24, n_directions=64)
    assert np.isfinite(c1) and abs(c2 / c1 - 1) < 0.2


def test_seminorm_detects_class_violation():
    # order m + 1/2 declared as order m: the weighted sup grows like <xi_max>^(1/2)
    m = -1.0
    chi = lambda x: np.ones(np.shape(x)[1:])
    a = separable_amplitude(chi, [lambda v: japanese(v) ** (m + 0.5)], dim=1, arity_d=1, order_m=m,
                            spatial_support_radius=2.0)
    c64 = seminorm_estimate(a, (0,), (0,), xi_max=64.0)
    c256 = seminorm_estimate(a, (0,), (0,), xi_max=256.0)
    assert c256 / c64 == pytest.approx(np.sqrt(japanese(np.array([256.0])) / japanese(np.array([64.0]))), rel=1e-6)


def test_seminorm_argument_checks():
    a = make_amplitude("order_m", 1, 2)
    with pytest.raises(ValueError):
        seminorm_estimate(a, (1,), (0,))
    with pytest.raises(ValueError):
        seminorm_estimate(a, (3, 2), (0,))
    rough = Amplitude(lambda x, xi: np.ones(np.broadcast_shapes(x.shape[1:], xi.shape[1:])), rough=True)
    with pytest.raises(ValueError):
        seminorm_estimate(rough, (0,), (1,))


def test_cutoff_regions():
    c = build_cutoffs(1.0)
    assert c.mu(np.array([0.25])) == 0.0 and c.mu(np.array([0.34])) == 1.0
    assert c.nu(np.array([100.0]), np.array([1.0])) == 1.0
    assert c.nu(np.array([16.0]), np.array([1.0])) == 0.0
    assert c.chi(np.zeros(1), np.zeros(1)) == 1.0 and c.chi(np.array([3.0]), np.zeros(1)) == 0.0
    with pytest.raises(ValueError):
        build_cutoffs(0.0)
    with pytest.raises(ValueError):
        build_cutoffs(1.5)


@given(st.floats(0.05, 1.0), st.floats(-200, 200), st.floats(-200, 200))
def test_cutoffs_in_unit_interval(lam, a, b):
    c = build_cutoffs(lam)
    for v in (c.mu(np.array([a])), c.nu(np.array([a]), np.array([b])), c.chi(np.array([a]), np.array([b]))):
        assert 0.0 <= float(v) <= 1.0


def test_split_sigma_cases(rng):
    a = make_amplitude("order_m", 1, 2, m=0.0)
    c = build_cutoffs(1.0)
    s1, s2 = split_sigma(a, c)
    x = np.zeros((1, 1))
    small = np.array([[0.3], [0.2]])
    assert s1(x, small)[0] == 0 and s2(x, small)[0] == 0
    cone = np.array([[100.0], [0.1]])
    assert s1(x, cone)[0] == pytest.approx(a(x, cone)[0]) and s2(x, cone)[0] == 0
    # outside the unit ball the two pieces rebuild (1 - chi) sigma
    X = rng.uniform(-2, 2, (1, 50))
    Xi = rng.uniform(-30, 30, (2, 50))
    rec = s1(X, Xi) + s2(X, Xi)
    assert np.allclose(rec, a(X, Xi) * (1 - c.chi(Xi[:1], Xi[1:])), atol=1e-14)
    with pytest.raises(ValueError):
        split_sigma(make_amplitude("order_m", 1, 1), c)


def test_gp_lowfreq_reduces_to_product():
    spec = GridSpec(1, 128)
    g = GridFunction.from_callable(spec, lambda x: np.exp(-x[0] ** 2))
    tau = lambda v: japanese(v) ** -0.5
    chi = make_amplitude("one", 1, 1).spatial_factor
    a = separable_amplitude(chi, [tau, lambda v: np.ones(np.shape(v)[1:])], dim=1)
    psi = lambda xi: plateau(np.abs(xi[0]), 1.0, 2.0)
    A = gp_lowfreq_amplitude(a, make_phase("linear"), g, psi)
    x = spec.coordinates()
    for xi in (0.5, 1.5, 3.0):
        got = A(x, np.array([xi]))
        want = chi(x) * tau(np.array([[xi]]))[0] * psi(np.array([[xi]]))[0] * g.samples
        assert np.max(np.abs(got - want)) < 1e-12


def test_gp_lowfreq_zero_and_bounded():
    spec = GridSpec(1, 64)
    g = GridFunction.from_callable(spec, lambda x: np.cos(x[0]) * np.exp(-x[0] ** 2 / 8))
    psi = lambda xi: np.ones(np.shape(xi)[1:])
    zero = separable_amplitude(lambda x: np.zeros(np.shape(x)[1:]), [lambda v: np.ones(np.shape(v)[1:])] * 2)
    A0 = gp_lowfreq_amplitude(zero, make_phase("linear"), g, psi)
    assert np.all(A0(spec.coordinates(), np.array([1.0])) == 0)
    a = make_amplitude("one", 1, 2)
    A = gp_lowfreq_amplitude(a, make_phase("linear"), g, psi)
    from oscillab.grid import lebesgue_norm
    for xi in (0.0, 2.0, 7.0):
        vals = GridFunction(spec, A(spec.coordinates(), np.array([xi])))
        assert lebesgue_norm(vals, 4) <= lebesgue_norm(g, 4) * (1 + 1e-12)
