import numpy as np
import pytest
from hypothesis import given, strategies as st

from oscillab.grid import GridFunction, GridSpec, lebesgue_norm
from oscillab.littlewood_paley import (ScaleGrid, apply_rt, build_family, build_kt, build_kt_discrete,
                                       calderon_integral, calderon_sum, capital_psi_hat, discrete_partition_sum,
                                       hardy_littlewood_maximal, kt_cancellation, kt_decay_constant,
                                       kt_lipschitz_constant, p_op, paraproduct, paraproduct_discrete,
                                       paraproduct_symbol, peetre_bound_constant, peetre_maximal, q_op,
                                       rt_scale_integral)


@pytest.fixture(scope="module")
def fam():
    return build_family()


def test_reproducing_identity_points(fam):
    r = np.array([0.7, 1.3, 5.0])
    assert np.max(np.abs(calderon_sum(fam, r) - 1)) < 1e-6
    assert np.max(np.abs(calderon_integral(fam, r) - 1)) < 1e-6


@given(st.floats(1e-3, 1e4))
def test_reproducing_identity_everywhere(r):
    assert abs(calderon_sum(build_family(), r)[0] - 1) < 1e-12


def test_bump_profile_quadrature_error_is_visible():
    # the plain bump has the right integral but the coarse q = 4 sum is off
    bump = build_family("bump")
    assert abs(calderon_integral(bump, [1.3])[0] - 1) < 1e-9
    assert abs(calderon_sum(bump, [1.3])[0] - 1) > 1e-5


def test_theta_and_support(fam):
    assert fam.theta_hat(np.array([[0.1]]))[0] == 1.0
    assert fam.theta_hat(np.array([[0.3]]))[0] == 0.0
    assert fam.psi_hat_radial(np.array([0.49, 2.01])).max() == 0.0


def test_discrete_partition(rng):
    d = build_family(normalization="discrete")
    r = np.exp(rng.uniform(np.log(1e-3), np.log(1e3), 200))
    assert np.max(np.abs(discrete_partition_sum(d, r) - 1)) < 1e-12


def test_build_family_errors():
    with pytest.raises(KeyError):
        build_family("nope")
    with pytest.raises(ValueError):
        build_family(normalization="other")
    with pytest.raises(ValueError):
        build_family(lambda r: np.zeros_like(r))


def test_scale_grid_validation():
    g = ScaleGrid.dyadic(1.0, 2.0 ** -3, 2)
    assert len(g) == 7 and np.all(np.diff(g.t_values) < 0)
    with pytest.raises(ValueError):
        ScaleGrid(np.array([1.0, 2.0]), np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        ScaleGrid(np.array([2.0, 1.0]), np.array([1.0, 0.0]))


def test_q_op_mode_and_constants(fam):
    spec = GridSpec(1, 128, 2 * np.pi)
    x = spec.axis()
    mode = GridFunction(spec, np.exp(4j * x))
    out = q_op(mode, 0.25, family=fam).samples
    assert np.allclose(out, fam.psi_hat_radial(np.array([1.0]))[0] * mode.samples, atol=1e-12)
    assert np.max(np.abs(q_op(GridFunction(spec, np.full(128, 3.0)), 0.5, family=fam).samples)) < 1e-13
    assert np.allclose(p_op(GridFunction(spec, np.full(128, 3.0)), 0.5, family=fam).samples, 3.0)
    shifted = q_op(mode, 0.25, u=[0.3], family=fam).samples
    assert np.allclose(shifted, out * np.exp(1j * 4 * 0.25 * 0.3), atol=1e-12)


def test_q_op_bounded_by_bmo_on_log_samples(fam):
    from oscillab.spaces import bmo_norm, log_sample
    spec = GridSpec(1, 1024)
    f = log_sample(spec)
    ratios = [lebesgue_norm(q_op(f, t, family=fam), np.inf) / bmo_norm(f) for t in 2.0 ** -np.arange(0, 7)]
    assert max(ratios) < 2.0


@pytest.mark.parametrize("n,N,W", [(1, 4096, 256.0), (2, 256, 64.0)])
def test_kernel_invariants(n, N, W):
    consts = []
    for t in (2.0 ** -2, 2.0 ** -4):
        K = build_kt(t, GridSpec(n, N, t * W))
        cancel, l1 = kt_cancellation(K)
        assert cancel <= 1e-8 * l1
        consts.append((kt_decay_constant(K), kt_lipschitz_constant(K)))
    (d1, l1_), (d2, l2_) = consts
    assert abs(d2 / d1 - 1) < 0.25 and abs(l2_ / l1_ - 1) < 0.25


def test_kernel_frozen_constants():
    # regression values for n = 1, N = 4096, period 256 t, m2 = -1/2
    K = build_kt(2.0 ** -3, GridSpec(1, 4096, 32.0))
    assert kt_decay_constant(K) == pytest.approx(5.074144022307031, rel=1e-9)
    assert kt_lipschitz_constant(K) == pytest.approx(22.421172385351554, rel=1e-9)


def test_kernel_argument_checks():
    spec = GridSpec(1, 64)
    with pytest.raises(ValueError):
        build_kt(0.25, spec, m2=0.0)
    with pytest.raises(ValueError):
        build_kt(0.25, spec, per_octave=4)
    with pytest.raises(ValueError):
        build_kt(16.0, spec)
    with pytest.raises(ValueError):
        build_kt_discrete(2, spec, m2=0.5)


def test_discrete_kernel_cancels():
    K = build_kt_discrete(3, GridSpec(1, 2048, 32.0))
    cancel, l1 = kt_cancellation(K)
    assert K.discrete and cancel <= 1e-8 * l1


def test_rt_convolution_matches_scale_integral(rng):
    t = 0.125
    spec = GridSpec(1, 1024, t * 256)
    K = build_kt(t, spec)
    g = GridFunction(spec, rng.standard_normal(1024))
    a = apply_rt(g, K).samples
    b = rt_scale_integral(g, t).samples
    assert np.max(np.abs(a - b)) < 1e-12 * max(1.0, np.max(np.abs(b)))
    assert np.max(np.abs(apply_rt(GridFunction(spec, np.ones(1024)), K).samples)) < 1e-12
    with pytest.raises(ValueError):
        apply_rt(GridFunction.zeros(GridSpec(1, 64)), K)


def test_capital_psi_weight(fam):
    Psi = capital_psi_hat(fam, -0.5)
    assert Psi(np.array([[1.0]]))[0] == pytest.approx(fam.psi_hat_radial(np.array([1.0]))[0] ** 2)


def test_paraproduct_single_mode_closed_form(fam):
    spec = GridSpec(1, 256, 2 * np.pi)
    f = GridFunction(spec, np.exp(3j * spec.axis()))
    one = GridFunction(spec, np.ones(256))
    scales = ScaleGrid.dyadic(1.0, 2.0 ** -10, 4)
    # P_t 1 = 1, so only the psi_hat weights of the mode survive
    weight = np.sum(scales.quadrature_weights * fam.psi_hat_radial(3.0 * scales.t_values))
    out = paraproduct(f, one, scales=scales, family=fam).samples
    assert np.max(np.abs(out - weight * f.samples)) < 1e-12
    assert np.max(np.abs(paraproduct(one, f, scales=scales, family=fam).samples)) < 1e-12
    disc = build_family(normalization="discrete")
    dw = sum(disc.psi_hat_radial(np.array([3.0 * 2.0 ** -k]))[0] for k in range(12))
    d = paraproduct_discrete(f, one, k_max=11).samples
    assert np.max(np.abs(d - dw * f.samples)) < 1e-12


def test_paraproduct_symbol_matches_operator(fam, rng):
    # lambda applied as a bilinear multiplier reproduces the operator on modes
    spec = GridSpec(1, 64, 2 * np.pi)
    m_fn = lambda t, x: 1 + 0.5 * np.sin(x[0] + t)
    scales = ScaleGrid.dyadic(1.0, 2.0 ** -8, 4)
    lam = paraproduct_symbol(m_fn, [0.7], [1.3], 1, fam, scales, support_radius=np.inf)
    x = spec.coordinates()
    f = GridFunction(spec, np.exp(5j * x[0]))
    g = GridFunction(spec, np.exp(-1j * x[0]) + 0.5)
    op = paraproduct(f, g, m_fn, [0.7], [1.3], scales, fam).samples
    sym = (lam(x, np.stack([np.full_like(x[0], 5.0), np.full_like(x[0], -1.0)])) * np.exp(4j * x[0])
           + 0.5 * lam(x, np.stack([np.full_like(x[0], 5.0), np.zeros_like(x[0])])) * np.exp(5j * x[0]))
    assert np.max(np.abs(op - sym)) < 1e-12


def test_peetre_maximal_properties(fam, rng):
    spec = GridSpec(1, 64, 8.0)
    G = GridFunction(spec, rng.standard_normal(64))
    star = peetre_maximal(G, 0.5, 2.0, family=fam).samples
    from oscillab.grid import apply_multiplier
    F = np.abs(apply_multiplier(G, fam.psi_hat, 0.5).samples)
    assert np.all(star >= F - 1e-14)
    flat = peetre_maximal(GridFunction(spec, np.ones(64)), 0.5, 2.0, psi=lambda xi: np.ones(xi.shape[1:]))
    assert np.allclose(flat.samples, 1.0)
    assert np.isfinite(peetre_bound_constant(G, 0.5, 2.0, family=fam))
    with pytest.raises(ValueError):
        peetre_maximal(G, 0.5, 0.0)


def test_hardy_littlewood_maximal_dominates():
    spec = GridSpec(1, 64)
    h = GridFunction(spec, np.exp(-spec.axis() ** 2))
    M = hardy_littlewood_maximal(h).samples
    assert np.all(M >= np.abs(h.samples) - 1e-15)
