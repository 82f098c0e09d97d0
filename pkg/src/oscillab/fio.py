"""Linear and bilinear Fourier integral operators on periodic grids.

The reference evaluation is direct summation over the grid frequencies for
every output point.  When the amplitude factors as ``s(x) prod_j q_j(xi_j)``
and the phase is ``warp(x).xi + shift(xi)`` (true for the whole phase
catalog) a fast path sums the same quadrature with FFTs or matrix products.
"""

from dataclasses import dataclass

import numpy as np

from .grid import GridFunction, _sign_pattern, apply_multiplier, forward_transform
from .symbols import separable_amplitude

__all__ = [
    "LinearFIO",
    "BilinearFIO",
    "apply_linear",
    "apply_linear_batch",
    "apply_bilinear",
    "apply_bilinear_batch",
    "hilbert_transform",
    "riesz_transform",
]

_CHUNK = 2 ** 21


@dataclass(frozen=True)
class LinearFIO:
    amplitude: object
    phase: object

    def __post_init__(self):
        if self.amplitude.arity_d != 1:
            raise ValueError("a linear FIO needs an amplitude of arity 1")
        if self.amplitude.dim != self.phase.dim:
            raise ValueError("amplitude and phase dimensions differ")


@dataclass(frozen=True)
class BilinearFIO:
    amplitude: object
    phase1: object
    phase2: object

    def __post_init__(self):
        if self.amplitude.arity_d != 2:
            raise ValueError("a bilinear FIO needs an amplitude of arity 2")
        if not (self.amplitude.dim == self.phase1.dim == self.phase2.dim):
            raise ValueError("amplitude and phase dimensions differ")


def _spectrum(f):
    """Transform samples in FFT order, flattened, and the matching frequencies."""
    spec = f.spec
    fhat = np.fft.ifftshift(forward_transform(f).samples).reshape(-1)
    return fhat, spec.frequencies().reshape(spec.dim, -1)


def _fast_ok(amp, phase):
    return amp.separable and phase.warp is not None


def _direct_linear(T, spec, fhats, xi):
    # fhats: (Q, B); returns (P, B)
    n = spec.dim
    x = spec.coordinates().reshape(n, -1)
    P, Q = x.shape[1], xi.shape[1]
    out = np.zeros((P, fhats.shape[1]), dtype=complex)
    step = max(1, _CHUNK // Q)
    w = 1.0 / spec.period ** n
    for s in range(0, P, step):
        xs = x[:, s:s + step, None]
        xis = xi[:, None, :]
        K = T.amplitude(xs, xis) * np.exp(1j * T.phase(xs, xis))
        out[s:s + step] = K @ fhats * w
    return out


def _warped_sum(spec, coeffs, y):
    """``L^-n sum_xi c(xi) exp(i xi.y)`` at the points ``y``; ``coeffs`` in FFT order, shape (*shape, B)."""
    n = spec.dim
    k = spec.frequency_axis()
    w = 1.0 / spec.period ** n
    P = y.shape[1]
    B = coeffs.shape[-1]
    out = np.zeros((P, B), dtype=complex)
    step = max(1, _CHUNK // (spec.points_per_axis ** (n - 1) * spec.points_per_axis * B))
    for s in range(0, P, step):
        E1 = np.exp(1j * np.outer(y[0, s:s + step], k))
        if n == 1:
            out[s:s + step] = E1 @ coeffs * w
        else:
            E2 = np.exp(1j * np.outer(y[1, s:s + step], k))
            tmp = np.einsum("pa,abk->pbk", E1, coeffs)
            out[s:s + step] = np.einsum("pbk,pb->pk", tmp, E2) * w
    return out


def _fast_linear(T, spec, fhats):
    amp, ph = T.amplitude, T.phase
    n = spec.dim
    xi = spec.frequencies()
    q = np.asarray(amp.symbol_factors[0](xi), dtype=complex)
    if ph.shift is not None:
        q = q * np.exp(1j * ph.shift(xi))
    coeffs = fhats.reshape(spec.shape + (-1,)) * q[..., None]
    x = spec.coordinates()
    s = np.asarray(amp.spatial_factor(x), dtype=complex).reshape(-1)
    y = ph.warp(x)
    same = [bool(np.array_equal(y[j], x[j])) for j in range(n)]
    N, B = spec.points_per_axis, coeffs.shape[-1]
    if all(same):
        coeffs = coeffs * _sign_pattern(spec)[..., None]
        vals = np.fft.ifftn(coeffs, axes=tuple(range(n))) * N ** n / spec.period ** n
        vals = vals.reshape(-1, B)
    elif n == 2 and any(same):
        # sum the unwarped axis by FFT, the warped one directly
        j = same.index(True)
        sgn = np.where(np.arange(N) % 2 == 0, 1.0, -1.0)
        shp = [1, 1, 1]
        shp[j] = N
        part = np.fft.ifft(coeffs * sgn.reshape(shp), axis=j) * N
        k = spec.frequency_axis()
        E = np.exp(1j * y[1 - j][..., None] * k)  # (i0, i1, k)
        if j == 1:
            vals = np.matmul(E.transpose(1, 0, 2), part.transpose(1, 0, 2)).transpose(1, 0, 2)
        else:
            vals = np.matmul(E, part)
        vals = vals.reshape(-1, B) / spec.period ** 2
    else:
        vals = _warped_sum(spec, coeffs, y.reshape(n, -1))
    return vals * s[:, None]


def _resolve(method, ok):
    if method == "auto":
        return "fast" if ok else "direct"
    if method == "fast" and not ok:
        raise ValueError("fast path needs a separable amplitude and a warp-type phase")
    if method not in ("fast", "direct"):
        raise ValueError(f"unknown method {method!r}")
    return method


def apply_linear_batch(T, fs, method="auto"):
    """Apply ``T`` to a list of grid functions sharing one grid."""
    if not fs:
        return []
    spec = fs[0].spec
    if spec.dim != T.phase.dim:
        raise ValueError("grid and operator dimensions differ")
    cols, xi = zip(*[_spectrum(f) for f in fs])
    fhats = np.stack(cols, axis=1)
    how = _resolve(method, _fast_ok(T.amplitude, T.phase))
    if how == "fast":
        vals = _fast_linear(T, spec, fhats)
    else:
        vals = _direct_linear(T, spec, fhats, xi[0])
    return [GridFunction(spec, vals[:, b].reshape(spec.shape)) for b in range(vals.shape[1])]


def apply_linear(T, f, method="auto"):
    """``T f(x) = int exp(i phi(x, xi)) sigma(x, xi) f_hat(xi) dbar xi`` on the grid.

    ``method`` is ``"direct"`` (summation per output point), ``"fast"``
    (separable path) or ``"auto"``.
    """
    return apply_linear_batch(T, [f], method)[0]


def _direct_bilinear(T, f, g):
    spec = f.spec
    n = spec.dim
    fhat, xi = _spectrum(f)
    ghat, eta = _spectrum(g)
    kf, kg = fhat != 0, ghat != 0
    fhat, xi, ghat, eta = fhat[kf], xi[:, kf], ghat[kg], eta[:, kg]
    x = spec.coordinates().reshape(n, -1)
    P = x.shape[1]
    out = np.zeros(P, dtype=complex)
    if fhat.size == 0 or ghat.size == 0:
        return GridFunction(spec, out.reshape(spec.shape))
    Q, R = xi.shape[1], eta.shape[1]
    step = max(1, _CHUNK // (Q * R))
    w = 1.0 / spec.period ** (2 * n)
    for s in range(0, P, step):
        xs = x[:, s:s + step, None, None]
        Xi = np.concatenate([np.broadcast_to(xi[:, None, :, None], (n, 1, Q, R)),
                             np.broadcast_to(eta[:, None, None, :], (n, 1, Q, R))])
        amp = T.amplitude(xs, Xi)
        e1 = np.exp(1j * T.phase1(x[:, s:s + step, None], xi[:, None, :])) * fhat
        e2 = np.exp(1j * T.phase2(x[:, s:s + step, None], eta[:, None, :])) * ghat
        out[s:s + step] = np.einsum("pqr,pq,pr->p", np.broadcast_to(amp, (xs.shape[1], Q, R)), e1, e2) * w
    return GridFunction(spec, out.reshape(spec.shape))


def _split_factors(T):
    amp = T.amplitude
    one = lambda x: np.ones(np.shape(x)[1:])
    meta = dict(dim=amp.dim, arity_d=1)
    t1 = LinearFIO(separable_amplitude(one, [amp.symbol_factors[0]], **meta), T.phase1)
    t2 = LinearFIO(separable_amplitude(one, [amp.symbol_factors[1]], **meta), T.phase2)
    return t1, t2


def _bilinear_fast_ok(T):
    return T.amplitude.separable and T.phase1.warp is not None and T.phase2.warp is not None


def apply_bilinear(T, f, g, method="auto"):
    """``T(f, g)(x) = iint sigma e^{i phi1(x, xi) + i phi2(x, eta)} f_hat g_hat dbar xi dbar eta``."""
    return apply_bilinear_batch(T, [f], [g], method)[0]


def apply_bilinear_batch(T, fs, gs, method="auto"):
    """Apply ``T`` to the pairs ``zip(fs, gs)`` on one grid."""
    if len(fs) != len(gs):
        raise ValueError("fs and gs differ in length")
    if not fs:
        return []
    spec = fs[0].spec
    if any(h.spec != spec for h in list(fs) + list(gs)):
        raise ValueError("f and g must share a grid")
    how = _resolve(method, _bilinear_fast_ok(T))
    if how == "direct":
        return [_direct_bilinear(T, f, g) for f, g in zip(fs, gs)]
    t1, t2 = _split_factors(T)
    s = T.amplitude.spatial_factor(spec.coordinates())
    a = apply_linear_batch(t1, list(fs), "fast")
    b = apply_linear_batch(t2, list(gs), "fast")
    return [GridFunction(spec, s * u.samples * v.samples) for u, v in zip(a, b)]


def hilbert_transform(f):
    """Multiplier ``-i sgn(xi)`` with ``sgn(0) = 0``; one dimension only."""
    if f.spec.dim != 1:
        raise ValueError("the Hilbert transform is defined here for dim = 1 only")
    return apply_multiplier(f, lambda xi: -1j * np.sign(xi[0]))


def riesz_transform(f, j):
    """Multiplier ``-i xi_j / |xi|``, zero at the origin (mean is projected out)."""
    if not 0 <= j < f.spec.dim:
        raise ValueError(f"axis {j} out of range")

    def m(xi):
        r = np.sqrt(np.sum(xi ** 2, axis=0))
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(r > 0, -1j * xi[j] / np.where(r > 0, r, 1.0), 0.0)

    return apply_multiplier(f, m)
