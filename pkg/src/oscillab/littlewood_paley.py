"""Littlewood-Paley families, band operators, the kernels K_t and paraproducts.

Profiles are radial.  The default ``"telescoping"`` profile is built so that
``psi_hat(r)^2 ln 2 / q``, sampled on the geometric scale grid
``t = 2^(-k/q)``, sums to one exactly; the continuous identity
``int_0^inf psi_hat(t xi)^2 dt/t = 1`` then holds as well, since the
profile in ``log2 r`` is a box average of a smooth bump.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, ndimage

from .grid import GridFunction, apply_multiplier, forward_transform, inverse_transform
from .symbols import Amplitude, plateau, smoothstep

__all__ = [
    "LPFamily",
    "ScaleGrid",
    "KtKernel",
    "build_family",
    "calderon_sum",
    "calderon_integral",
    "discrete_partition_sum",
    "q_op",
    "p_op",
    "capital_psi_hat",
    "build_kt",
    "build_kt_discrete",
    "kt_cancellation",
    "kt_decay_constant",
    "kt_lipschitz_constant",
    "apply_rt",
    "rt_scale_integral",
    "paraproduct",
    "paraproduct_discrete",
    "paraproduct_symbol",
    "peetre_maximal",
    "hardy_littlewood_maximal",
    "peetre_bound_constant",
]

LN2 = np.log(2.0)


def _radius(xi):
    return np.sqrt(np.sum(np.asarray(xi, dtype=float) ** 2, axis=0))


def _telescoping_sq(r, q):
    """Unnormalised ``psi_hat0(r)^2`` supported in ``1/2 <= r <= 2``."""
    h = 1.0 / q
    a = 1.0 - h / 2
    with np.errstate(divide="ignore"):
        s = np.log2(np.where(r > 0, r, np.inf))
    s = np.where(np.isfinite(s), s, -np.inf)
    up = smoothstep((s + h / 2 + a) / (2 * a))
    lo = smoothstep((s - h / 2 + a) / (2 * a))
    return np.clip(q * (up - lo), 0.0, None)


def _bump_sq(r):
    with np.errstate(divide="ignore"):
        s = np.log2(np.where(r > 0, r, np.inf))
    out = np.zeros_like(s)
    m = np.abs(s) < 1
    out[m] = np.exp(-2.0 / (1 - s[m] ** 2))
    return out


def _discrete_sq(r):
    # phi0 = 1 on r <= 1, 0 on r >= 2; psi^2 = phi0(r) - phi0(2r)
    phi0 = lambda rr: plateau(rr, 1.0, 2.0)
    return np.clip(phi0(r) - phi0(2 * r), 0.0, None)


@dataclass(frozen=True)
class LPFamily:
    """Calderon pair ``(psi_hat, theta_hat)``; both radial.

    ``psi_hat`` is supported in ``1/2 <= |xi| <= 2``; ``theta_hat`` equals one
    on ``|xi| <= 1/8`` and vanishes for ``|xi| >= 1/4``.
    """

    profile: str
    normalization: str
    q: int
    c: float
    _sq: object = field(repr=False, compare=False, default=None)

    def psi_hat_radial(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        return np.sqrt(self._sq(r) / self.c)

    def psi_hat(self, xi):
        return self.psi_hat_radial(_radius(xi))

    def theta_hat(self, xi):
        return plateau(_radius(xi), 1.0 / 8, 1.0 / 4)

    def metadata(self):
        return {"profile": self.profile, "normalization": self.normalization, "q": self.q, "c": self.c}


def build_family(profile_name="telescoping", normalization="continuous", q=4):
    """Build a Littlewood-Paley family.

    Parameters
    ----------
    profile_name : str or callable
        ``"telescoping"`` (default), ``"bump"`` or a callable returning the
        unnormalised squared radial profile.
    normalization : {"continuous", "discrete"}
        ``continuous`` divides by ``c = int_0^inf psi_hat0(r)^2 dr/r``;
        ``discrete`` uses ``psi_hat^2 = phi0(r) - phi0(2r)`` so that the
        dyadic sum telescopes to one.
    """
    if normalization == "discrete":
        return LPFamily("dyadic_telescoping", "discrete", 1, 1.0, _discrete_sq)
    if normalization != "continuous":
        raise ValueError(f"unknown normalization {normalization!r}")
    if callable(profile_name):
        sq, name = profile_name, getattr(profile_name, "__name__", "custom")
    elif profile_name == "telescoping":
        sq, name = (lambda r: _telescoping_sq(r, q)), "telescoping"
    elif profile_name == "bump":
        sq, name = _bump_sq, "bump"
    else:
        raise KeyError(f"unknown profile {profile_name!r}")
    # c = int_0^inf psi0(r)^2 dr/r, integrated in s = log2 r over the annulus
    c = integrate.quad(lambda s: float(sq(np.array([2.0 ** s]))[0]) * LN2, -1.0, 1.0,
                       epsabs=1e-15, epsrel=1e-13, limit=200)[0]
    if not np.isfinite(c) or c <= 0:
        raise ValueError(f"profile normalisation constant is {c}")
    return LPFamily(name, "continuous", q, float(c), sq)


def calderon_sum(family, r, q=None):
    """``sum_k psi_hat(2^(-k/q) r)^2 ln2/q`` over all integers ``k`` (log-trapezoid rule)."""
    q = family.q if q is None else q
    r = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.zeros_like(r)
    for i, ri in enumerate(r):
        k = np.arange(np.floor(q * (np.log2(ri) - 1.5)), np.ceil(q * (np.log2(ri) + 1.5)) + 1)
        out[i] = np.sum(family.psi_hat_radial(2.0 ** (-k / q) * ri) ** 2) * LN2 / q
    return out


def calderon_integral(family, r):
    """Adaptive quadrature of ``int_0^inf psi_hat(t r)^2 dt/t`` (independent oracle)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    out = []
    for ri in r:
        f = lambda s: float(family.psi_hat_radial(np.array([2.0 ** s * ri]))[0] ** 2) * LN2
        lo, hi = -1.0 - np.log2(ri), 1.0 - np.log2(ri)
        out.append(integrate.quad(f, lo, hi, epsabs=1e-14, epsrel=1e-13, limit=400)[0])
    return np.array(out)


def discrete_partition_sum(family, r, j_range=64):
    """``sum_j psi_hat(2^j r)^2`` for the discrete family."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    j = np.arange(-j_range, j_range + 1)
    return np.sum(family.psi_hat_radial(np.multiply.outer(2.0 ** j, r)) ** 2, axis=0)


@dataclass(frozen=True)
class ScaleGrid:
    """Descending scales with log-trapezoid weights for ``int dt/t``."""

    t_values: np.ndarray
    quadrature_weights: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t_values, dtype=float)
        w = np.asarray(self.quadrature_weights, dtype=float)
        if t.shape != w.shape or t.ndim != 1 or t.size == 0:
            raise ValueError("t_values and weights must be matching 1-d arrays")
        if np.any(np.diff(t) >= 0):
            raise ValueError("t_values must be strictly decreasing")
        if np.any(w <= 0) or np.any(t <= 0):
            raise ValueError("scales and weights must be positive")
        object.__setattr__(self, "t_values", t)
        object.__setattr__(self, "quadrature_weights", w)

    @classmethod
    def dyadic(cls, t_max=1.0, t_min=2.0 ** -10, q=4, endpoint_halving=True):
        k0 = int(np.round(-q * np.log2(t_max)))
        k1 = int(np.round(-q * np.log2(t_min)))
        k = np.arange(k0, k1 + 1)
        t = 2.0 ** (-k / q)
        w = np.full(t.shape, LN2 / q)
        if endpoint_halving and t.size > 1:
            w[0] *= 0.5
            w[-1] *= 0.5
        return cls(t, w)

    def __len__(self):
        return self.t_values.size

    def to_dict(self):
        return {"t_values": self.t_values.tolist(), "weights": self.quadrature_weights.tolist()}


def _modulated(profile, u):
    def m(xi):
        val = profile(xi)
        if u is None:
            return val
        uu = np.asarray(u, dtype=float).reshape((-1,) + (1,) * (xi.ndim - 1))
        return val * np.exp(1j * np.sum(xi * uu, axis=0))
    return m


def q_op(f, t, u=None, family=None, profile=None):
    """``Q_t^u f``: multiplier ``psi_hat(t xi) exp(i t xi.u)``.

    ``profile`` replaces ``psi_hat`` by another symbol (used for the
    operators ``Q_{ts}`` built from ``Psi_hat`` inside ``R_t``).
    """
    if profile is None:
        family = family or build_family()
        profile = family.psi_hat
    return apply_multiplier(f, _modulated(profile, u), t)


def p_op(f, t, u=None, family=None):
    """``P_t^u f``: multiplier ``theta_hat(t xi) exp(i t xi.u)``."""
    family = family or build_family()
    return apply_multiplier(f, _modulated(family.theta_hat, u), t)


def capital_psi_hat(family, m2, kappa1=1.0):
    """``Psi_hat(eta) = psi_hat(kappa1 eta)^2 |eta|^(-m2)``."""
    def Psi(eta):
        r = _radius(eta)
        return family.psi_hat_radial(kappa1 * r) ** 2 * r ** (-m2)
    return Psi


def _s_nodes(t, kappa, per_octave):
    top = 1.0 / t
    if top <= kappa:
        raise ValueError("need 1/t > kappa for a non-empty scale integral")
    octaves = np.log2(top / kappa)
    M = max(1, int(np.ceil(octaves * per_octave)))
    s = kappa * (top / kappa) ** (np.arange(M + 1) / M)
    w = np.full(M + 1, np.log(top / kappa) / M)
    w[0] *= 0.5
    w[-1] *= 0.5
    return s, w


@dataclass(frozen=True)
class KtKernel:
    """Samples of ``K_t`` on a grid together with its grid transform."""

    t: float
    m2: float
    kappa: float
    kappa1: float
    spec: object
    fourier: np.ndarray  # FFT order
    samples: np.ndarray = field(repr=False)
    discrete: bool = False

    @property
    def delta(self):
        return -self.m2 / 2

    def metadata(self):
        return {"t": self.t, "m2": self.m2, "kappa": self.kappa, "kappa1": self.kappa1,
                "discrete": self.discrete, "grid": self.spec.to_dict()}


def _kernel_from_fourier(spec, khat, **meta):
    if not np.all(np.isfinite(khat)):
        raise ValueError("kernel transform is not finite")
    centred = GridFunction(spec, np.fft.fftshift(khat), "frequency")
    samples = inverse_transform(centred).samples.real
    return KtKernel(spec=spec, fourier=khat, samples=samples, **meta)


def build_kt(t, spec, m2=-0.5, kappa=1.0 / 8, kappa1=1.0, family=None, per_octave=8):
    """``K_t(z) = int_kappa^(1/t) s^m2 Psi(z/(ts)) (ts)^(-n) ds/s`` on ``spec``.

    Computed on the grid frequencies as ``sum_j w_j s_j^m2 Psi_hat(t s_j xi)``
    with a log-trapezoid rule of ``per_octave`` nodes per octave.
    """
    if m2 >= 0:
        raise ValueError("m2 must be negative")
    if per_octave < 8:
        raise ValueError("use at least 8 nodes per octave")
    family = family or build_family()
    Psi = capital_psi_hat(family, m2, kappa1)
    xi = spec.frequencies()
    s, w = _s_nodes(t, kappa, per_octave)
    khat = np.zeros(spec.shape)
    for sj, wj in zip(s, w):
        khat += wj * sj ** m2 * Psi(t * sj * xi)
    return _kernel_from_fourier(spec, khat, t=float(t), m2=float(m2), kappa=float(kappa), kappa1=float(kappa1))


def build_kt_discrete(k, spec, m2=-0.5, kappa=1.0 / 8, kappa1=1.0, family=None):
    """Dyadic kernel ``sum_{log2 kappa <= j <= k} 2^(j m2) Psi(2^(k-j) z) 2^(n(k-j))`` with ``t = 2^-k``."""
    if m2 >= 0:
        raise ValueError("m2 must be negative")
    family = family or build_family(normalization="discrete")
    Psi = capital_psi_hat(family, m2, kappa1)
    xi = spec.frequencies()
    j0 = int(np.round(np.log2(kappa)))
    khat = np.zeros(spec.shape)
    for j in range(j0, int(k) + 1):
        khat += 2.0 ** (j * m2) * Psi(2.0 ** (j - k) * xi)
    return _kernel_from_fourier(spec, khat, t=2.0 ** (-k), m2=float(m2), kappa=float(kappa),
                                kappa1=float(kappa1), discrete=True)


def kt_cancellation(K):
    """``(|int K|, ||K||_1)`` by the grid rule."""
    dv = K.spec.cell_volume
    return abs(float(np.sum(K.samples) * dv)), float(np.sum(np.abs(K.samples)) * dv)


def kt_decay_constant(K, delta=None):
    """``max_z |K_t(z)| t^n (1 + |z|/t)^(n+delta)``."""
    delta = K.delta if delta is None else delta
    n = K.spec.dim
    r = _radius(K.spec.coordinates())
    env = K.t ** n * (1 + r / K.t) ** (n + delta)
    return float(np.max(np.abs(K.samples) * env))


def kt_lipschitz_constant(K):
    """``max |grad K_t| t^(n+1)`` with a spectral gradient."""
    spec = K.spec
    xi = spec.frequencies()
    grads = [np.fft.ifftn(1j * xi[j] * np.fft.fftn(K.samples)).real for j in range(spec.dim)]
    g = np.sqrt(sum(gj ** 2 for gj in grads))
    return float(g.max() * K.t ** (spec.dim + 1))


def apply_rt(g, K):
    """``R_t g = int K_t(x - y) g(y) dy``, a periodic convolution with the kernel samples."""
    if g.spec != K.spec:
        raise ValueError("function and kernel live on different grids")
    dv = g.spec.cell_volume
    khat = np.fft.fftn(np.fft.ifftshift(K.samples)) * dv
    return GridFunction(g.spec, np.fft.ifftn(khat * np.fft.fftn(g.samples)))


def rt_scale_integral(g, t, m2=-0.5, kappa=1.0 / 8, kappa1=1.0, family=None, per_octave=8):
    """``int_kappa^(1/t) s^m2 Q_ts g ds/s`` with ``Q_ts`` the ``Psi_hat(ts D)`` multiplier."""
    family = family or build_family()
    Psi = capital_psi_hat(family, m2, kappa1)
    s, w = _s_nodes(t, kappa, per_octave)
    acc = np.zeros(g.spec.shape, dtype=complex)
    for sj, wj in zip(s, w):
        acc += wj * sj ** m2 * q_op(g, t * sj, profile=Psi).samples
    return GridFunction(g.spec, acc)


def paraproduct(f, g, m_fn=None, u=None, v=None, scales=None, family=None):
    """``int_0^1 Q_t^u f . P_t^v g . m(t, x) dt/t`` on a :class:`ScaleGrid`."""
    if f.spec != g.spec:
        raise ValueError("f and g must share a grid")
    family = family or build_family()
    scales = scales or ScaleGrid.dyadic(1.0, max(f.spec.spacing / 4, 2.0 ** -12), family.q)
    x = f.spec.coordinates()
    acc = np.zeros(f.spec.shape, dtype=complex)
    for t, w in zip(scales.t_values, scales.quadrature_weights):
        term = q_op(f, t, u, family).samples * p_op(g, t, v, family).samples
        if m_fn is not None:
            term = term * m_fn(t, x)
        acc += w * term
    return GridFunction(f.spec, acc)


def paraproduct_discrete(f, g, m_fn=None, u=None, v=None, k_max=None, family=None):
    """``sum_{k >= 0} Q_t^u f . P_t^v g . m(t, x)`` with ``t = 2^-k``."""
    family = family or build_family(normalization="discrete")
    if k_max is None:
        k_max = int(np.ceil(np.log2(f.spec.nyquist))) + 2
    x = f.spec.coordinates()
    acc = np.zeros(f.spec.shape, dtype=complex)
    for k in range(k_max + 1):
        t = 2.0 ** (-k)
        term = q_op(f, t, u, family).samples * p_op(g, t, v, family).samples
        if m_fn is not None:
            term = term * m_fn(t, x)
        acc += term
    return GridFunction(f.spec, acc)


def paraproduct_symbol(m_fn, u, v, dim=1, family=None, scales=None, support_radius=2.0):
    """Bilinear symbol of :func:`paraproduct`:
    ``lambda(x, xi, eta) = int_0^1 psi_hat(t xi) e^{i t xi.u} theta_hat(t eta) e^{i t eta.v} m(t, x) dt/t``.
    """
    family = family or build_family()
    scales = scales or ScaleGrid.dyadic(1.0, 2.0 ** -10, family.q)
    uu = np.zeros(dim) if u is None else np.asarray(u, dtype=float).reshape(dim)
    vv = np.zeros(dim) if v is None else np.asarray(v, dtype=float).reshape(dim)
    n = dim

    def ev(x, Xi):
        xi, eta = Xi[:n], Xi[n:]
        shp = (n,) + (1,) * (np.ndim(xi) - 1)
        pu = np.sum(xi * uu.reshape(shp), axis=0)
        pv = np.sum(eta * vv.reshape(shp), axis=0)
        out = 0j
        for t, w in zip(scales.t_values, scales.quadrature_weights):
            a = family.psi_hat(t * xi)
            if not np.any(a):
                continue
            out = out + w * a * np.exp(1j * t * (pu + pv)) * family.theta_hat(t * eta) * m_fn(t, x)
        return out * np.ones(np.broadcast_shapes(np.shape(x)[1:], np.shape(xi)[1:]))

    return Amplitude(ev, dim=n, order_m=0.0, rho=1.0, delta=0.0, arity_d=2,
                     spatial_support_radius=support_radius, name=f"paraproduct_symbol[u={uu.tolist()},v={vv.tolist()}]")


def peetre_maximal(G, u, b, psi=None, family=None):
    """``sup_y |psi_u * G(x - y)| / (1 + |y|/u)^b`` over grid offsets within half a period."""
    if b <= 0:
        raise ValueError("b must be positive")
    if psi is None:
        family = family or build_family()
        psi = family.psi_hat
    F = np.abs(apply_multiplier(G, psi, u).samples)
    spec = G.spec
    n = spec.dim
    N = spec.points_per_axis
    offs = np.arange(-N // 2, N // 2)
    out = np.zeros(spec.shape)
    for idx in np.ndindex(*([N] * n)):
        o = tuple(int(offs[i]) for i in idx)
        y = np.sqrt(sum((oi * spec.spacing) ** 2 for oi in o))
        shifted = np.roll(F, o, axis=tuple(range(n)))  # F(x - y)
        np.maximum(out, shifted / (1 + y / u) ** b, out=out)
    return GridFunction(spec, out)


def hardy_littlewood_maximal(h):
    """Centred maximal function over grid cubes of half-width ``j dx``, ``0 <= j < N/2``."""
    spec = h.spec
    a = np.abs(h.samples if isinstance(h, GridFunction) else h)
    out = a.copy()
    for j in range(1, spec.points_per_axis // 2):
        avg = ndimage.uniform_filter(a, size=2 * j + 1, mode="wrap")
        np.maximum(out, avg, out=out)
    return GridFunction(spec, out)


def peetre_bound_constant(G, u, b, psi=None, family=None):
    """Empirical ``C`` in ``M**_b(G, psi_u) <= C [M(|psi_u * G|^(b/n))]^(n/b)``."""
    if psi is None:
        family = family or build_family()
        psi = family.psi_hat
    n = G.spec.dim
    star = peetre_maximal(G, u, b, psi=psi).samples.real
    F = np.abs(apply_multiplier(G, psi, u).samples)
    M = hardy_littlewood_maximal(GridFunction(G.spec, F ** (b / n))).samples.real ** (n / b)
    mask = M > 1e-12 * M.max()
    return float(np.max(star[mask] / M[mask]))
