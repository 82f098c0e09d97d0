import numpy as np
import pytest
from hypothesis import given, strategies as st

from oscillab.grid import (GridFunction, GridSpec, apply_multiplier, exponential_filter, forward_transform,
                           inner_product, inverse_transform, lebesgue_norm)


def test_spec_invariants():
    s = GridSpec(1, 64, 8.0)
    assert s.frequency_spacing == pytest.approx(2 * np.pi / 8.0)
    assert s.nyquist == pytest.approx(np.pi * 64 / 8.0)
    assert s.axis()[0] == pytest.approx(-4.0)
    with pytest.raises(ValueError):
        GridSpec(1, 8)
    with pytest.raises(ValueError):
        GridSpec(1, 64, -1.0)


def test_constant_transforms_to_delta():
    s = GridSpec(2, 32, 5.0)
    fh = forward_transform(GridFunction(s, np.ones(s.shape))).samples.copy()
    k0 = tuple(np.argwhere(np.all(s.frequencies(centered=True) == 0, axis=0))[0])
    assert fh[k0] == pytest.approx(5.0 ** 2)
    fh[k0] = 0
    assert np.max(np.abs(fh)) < 1e-10


def test_pure_mode_lands_on_index_one():
    s = GridSpec(1, 64, 3.0)
    f = GridFunction.from_callable(s, lambda x: np.exp(2j * np.pi / 3.0 * x[0]))
    fh = forward_transform(f).samples
    idx = s.frequency_indices(centered=True)[0]
    assert idx[np.argmax(np.abs(fh))] == 1


def test_plancherel_against_direct_sum(rng):
    s = GridSpec(1, 64, 7.0)
    f = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    x, xi = s.axis(), s.frequencies(centered=True)[0]
    direct = np.exp(-1j * np.outer(xi, x)) @ f * s.spacing
    fh = forward_transform(GridFunction(s, f)).samples
    assert np.allclose(fh, direct, atol=1e-12)
    lhs = np.sum(np.abs(f) ** 2) * s.spacing
    rhs = np.sum(np.abs(fh) ** 2) * s.frequency_spacing / (2 * np.pi)
    assert lhs == pytest.approx(rhs, rel=1e-10)


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([1, 2]))
def test_round_trip(seed, n):
    r = np.random.default_rng(seed)
    s = GridSpec(n, 16, r.uniform(1, 20))
    f = GridFunction(s, r.standard_normal(s.shape) + 1j * r.standard_normal(s.shape))
    g = inverse_transform(forward_transform(f))
    assert np.max(np.abs(g.samples - f.samples)) <= 1e-12 * np.max(np.abs(f.samples))


def test_multiplier_identity_and_translation(rng):
    s = GridSpec(1, 128)
    f = GridFunction(s, rng.standard_normal(128))
    assert np.allclose(apply_multiplier(f, lambda xi: np.ones(xi.shape[1:])).samples, f.samples, atol=1e-12)
    h = 5 * s.spacing
    g = apply_multiplier(f, lambda xi: np.exp(1j * xi[0] * h))
    assert np.allclose(g.samples, np.roll(f.samples, -5), atol=1e-12)


def test_multiplier_hilbert_of_cosine():
    s = GridSpec(1, 128, 10.0)
    w = 2 * np.pi / 10.0
    f = GridFunction.from_callable(s, lambda x: np.cos(w * x[0]))
    g = apply_multiplier(f, lambda xi: -1j * np.sign(xi[0]))
    assert np.max(np.abs(g.samples - np.sin(w * s.axis()))) < 1e-10


def test_multiplier_rejects_bad_scale():
    f = GridFunction.zeros(GridSpec(1, 16))
    with pytest.raises(ValueError):
        apply_multiplier(f, lambda xi: xi[0], t=0.0)


def test_lebesgue_norm_cases():
    s = GridSpec(2, 32, 3.0)
    c = GridFunction(s, np.full(s.shape, -2.0))
    assert lebesgue_norm(c, 3) == pytest.approx(2.0 * 3.0 ** (2 / 3))
    assert lebesgue_norm(c, np.inf) == 2.0
    s1 = GridSpec(1, 256, 10.0)
    half = GridFunction(s1, (s1.axis() >= 0).astype(float))
    assert abs(lebesgue_norm(half, 1) - 5.0) <= s1.spacing
    with pytest.raises(ValueError):
        lebesgue_norm(c, 0.0)


def test_gaussian_l2_against_refined_grid():
    bump = lambda x: np.exp(-x[0] ** 2)
    coarse = lebesgue_norm(GridFunction.from_callable(GridSpec(1, 128, 16.0), bump), 2)
    fine = lebesgue_norm(GridFunction.from_callable(GridSpec(1, 1024, 16.0), bump), 2)
    assert coarse == pytest.approx(fine, rel=1e-6)
    assert fine == pytest.approx((np.pi / 2) ** 0.25, rel=1e-10)


def test_inner_product_conjugates_second_argument():
    s = GridSpec(1, 64, 2 * np.pi)
    f = GridFunction.from_callable(s, lambda x: np.exp(1j * x[0]))
    assert inner_product(f, f) == pytest.approx(2 * np.pi)


def test_exponential_filter_shape():
    s = GridSpec(1, 64)
    m = exponential_filter(s)
    assert m(np.zeros((1, 1)))[0] == 1.0
    assert m(np.array([[s.nyquist]]))[0] == pytest.approx(np.exp(-36.0))
