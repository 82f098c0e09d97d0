"""Amplitudes with symbol-class metadata, seminorm estimates and cutoffs.

An amplitude is a callable ``a(x, Xi)`` where ``x`` has shape ``(n, ...)`` and
``Xi`` has shape ``(d*n, ...)`` (for ``d = 2`` the first ``n`` rows are ``xi``
and the last ``n`` are ``eta``).  The evaluator must broadcast.
"""

import itertools
from dataclasses import dataclass, replace

import numpy as np

from .grid import forward_transform

__all__ = [
    "smoothstep",
    "plateau",
    "japanese",
    "Amplitude",
    "separable_amplitude",
    "make_amplitude",
    "AMPLITUDE_CATALOG",
    "seminorm_estimate",
    "CutoffSet",
    "build_cutoffs",
    "split_sigma",
    "gp_lowfreq_amplitude",
]


def _e(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def smoothstep(s):
    """C-infinity monotone step: 0 for ``s <= 0``, 1 for ``s >= 1``."""
    s = np.asarray(s, dtype=float)
    a = _e(s)
    b = _e(1.0 - s)
    return a / (a + b)


def plateau(r, inner, outer):
    """1 for ``r <= inner``, 0 for ``r >= outer``, smooth in between."""
    return 1.0 - smoothstep((np.asarray(r, dtype=float) - inner) / (outer - inner))


def japanese(v):
    """``<v> = (1 + |v|^2)^(1/2)`` for stacked vectors ``v`` of shape ``(k, ...)``."""
    v = np.asarray(v)
    return np.sqrt(1.0 + np.sum(np.abs(v) ** 2, axis=0))


def _norm(v):
    return np.sqrt(np.sum(np.asarray(v, dtype=float) ** 2, axis=0))


@dataclass(frozen=True)
class Amplitude:
    """Symbol ``sigma(x, Xi)`` together with its declared class.

    Attributes
    ----------
    evaluator : callable
        ``(x, Xi) -> complex array``.
    dim : int
        Spatial dimension ``n``.
    order_m, rho, delta : float
        Class ``S^m_{rho,delta}``.
    arity_d : int
        1 for linear, 2 for bilinear amplitudes.
    spatial_support_radius : float
        The evaluator vanishes for ``|x| > spatial_support_radius``.
    rough : bool
        Selects the ``L^inf S^m_rho`` class (no spatial regularity).
    spatial_factor, symbol_factors :
        Optional factorisation ``sigma = s(x) * prod_j q_j(xi_j)`` used by
        the separable fast paths of :mod:`oscillab.fio`.
    """

    evaluator: object
    dim: int = 1
    order_m: float = 0.0
    rho: float = 1.0
    delta: float = 0.0
    arity_d: int = 1
    spatial_support_radius: float = 2.0
    rough: bool = False
    name: str = "custom"
    spatial_factor: object = None
    symbol_factors: tuple = None

    def __post_init__(self):
        if self.arity_d not in (1, 2):
            raise ValueError("arity_d must be 1 or 2")
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if not (0 <= self.rho <= 1 and 0 <= self.delta <= 1):
            raise ValueError("rho and delta must lie in [0, 1]")

    def __call__(self, x, Xi):
        return np.asarray(self.evaluator(np.asarray(x, dtype=float), np.asarray(Xi, dtype=float)), dtype=complex)

    @property
    def separable(self):
        return self.spatial_factor is not None and self.symbol_factors is not None

    def metadata(self):
        return {
            "name": self.name,
            "dim": self.dim,
            "order_m": self.order_m,
            "rho": self.rho,
            "delta": self.delta,
            "arity_d": self.arity_d,
            "spatial_support_radius": self.spatial_support_radius,
            "rough": self.rough,
        }


def separable_amplitude(spatial, factors, dim=1, **meta):
    """Amplitude ``spatial(x) * prod_j factors[j](xi_j)``."""
    factors = tuple(factors)
    n = dim

    def ev(x, Xi):
        out = np.asarray(spatial(x), dtype=complex)
        for j, q in enumerate(factors):
            out = out * q(Xi[j * n:(j + 1) * n])
        return out

    meta.setdefault("arity_d", len(factors))
    return Amplitude(ev, dim=dim, spatial_factor=spatial, symbol_factors=factors, **meta)


def _chi0(radius):
    def chi0(x):
        return plateau(_norm(x), radius / 2.0, radius)
    return chi0


def make_amplitude(name, dim=1, arity=2, m=0.0, eps=0.5, radius=2.0):
    """Build a catalog amplitude.

    ``"one"``: ``chi0(x)``; ``"order_m"``: ``chi0(x) <Xi>^m``;
    ``"sine_modulated"`` (also registered as ``"grafakos_sin"``):
    ``chi0(x) exp(i eps xi sin x)`` (n = 1);
    ``"cone_test"``: ``chi0(x) <Xi>^m <xi>^2 / <Xi>^2`` (arity 2), large in
    the cone ``|eta| << |xi|``; ``"order_m_product"``: ``chi0(x) prod_j
    <xi_j>^m``, separable and of order ``m`` when ``m <= 0``.  ``chi0`` equals 1 on ``|x| <= radius/2``
    and vanishes for ``|x| >= radius``.
    """
    chi0 = _chi0(radius)
    meta = dict(dim=dim, arity_d=arity, spatial_support_radius=radius, name=name)
    one = lambda v: np.ones(np.shape(v)[1:])
    if name == "one":
        return separable_amplitude(chi0, [one] * arity, order_m=0.0, **meta)
    if name == "order_m":
        if arity == 1:
            return separable_amplitude(chi0, [lambda v: japanese(v) ** m], order_m=m, **meta)
        return Amplitude(lambda x, Xi: chi0(x) * japanese(Xi) ** m, order_m=m, **meta)
    if name == "order_m_product":
        if m > 0:
            raise ValueError("order_m_product has order m only for m <= 0")
        return separable_amplitude(chi0, [lambda v: japanese(v) ** m] * arity, order_m=m, **meta)
    if name in ("sine_modulated", "grafakos_sin"):
        if dim != 1:
            raise ValueError(f"{name} is one-dimensional")
        return Amplitude(lambda x, Xi: chi0(x) * np.exp(1j * eps * Xi[0] * np.sin(x[0])),
                         order_m=0.0, rho=0.0, delta=1.0, **meta)
    if name == "cone_test":
        if arity != 2:
            raise ValueError("cone_test is bilinear")

        def ev(x, Xi):
            big = japanese(Xi)
            return chi0(x) * big ** m * japanese(Xi[:dim]) ** 2 / big ** 2
        return Amplitude(ev, order_m=m, **meta)
    raise KeyError(f"unknown amplitude {name!r}; choose from {AMPLITUDE_CATALOG}")


AMPLITUDE_CATALOG = ("one", "order_m", "order_m_product", "sine_modulated", "grafakos_sin", "cone_test")


# central stencils of second-order accuracy: order -> (offsets, weights)
_STENCILS = {
    0: ((0,), (1.0,)),
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
}


def _sphere_directions(k, count):
    if k == 1:
        return np.array([[1.0, -1.0]])
    if k == 2:
        ang = 2 * np.pi * np.arange(count) / count
        return np.stack([np.cos(ang), np.sin(ang)])
    v = np.random.default_rng(0).standard_normal((k, count))
    return v / _norm(v)


def seminorm_samples(a, xi_max=64.0, n_radii=12, n_directions=32, n_x=5):
    """Sample set ``(x, Xi)`` used by :func:`seminorm_estimate`."""
    n, D = a.dim, a.dim * a.arity_d
    R = a.spatial_support_radius
    xs1 = np.linspace(-R, R, n_x)
    xs = np.stack(np.meshgrid(*([xs1] * n), indexing="ij")).reshape(n, -1)
    radii = np.concatenate([[0.0], np.geomspace(0.5, xi_max, n_radii)])
    dirs = _sphere_directions(D, n_directions)
    Xis = np.concatenate([np.zeros((D, 1)), (dirs[:, :, None] * radii[None, None, 1:]).reshape(D, -1)], axis=1)
    X = np.repeat(xs, Xis.shape[1], axis=1)
    XI = np.tile(Xis, (1, xs.shape[1]))
    return X, XI


def seminorm_estimate(a, alpha, beta, xi_max=64.0, n_radii=12, n_directions=32, n_x=5, max_order=4,
                      return_argmax=False):
    """Weighted sup of ``|d_Xi^alpha d_x^beta a|`` over a sample set.

    The weight is ``<Xi>^(-m + rho|alpha| - delta|beta|)``; derivatives are
    central finite differences with step ``max(1e-3, 1e-2 <Xi>)`` in
    frequency and ``1e-3 R`` in space.  The result is a lower bound for the
    true seminorm.
    """
    alpha = tuple(int(v) for v in np.atleast_1d(alpha))
    beta = tuple(int(v) for v in np.atleast_1d(beta))
    n, D = a.dim, a.dim * a.arity_d
    if len(alpha) != D or len(beta) != n:
        raise ValueError(f"alpha needs {D} entries and beta needs {n}")
    if min(alpha + beta) < 0:
        raise ValueError("multi-indices must be nonnegative")
    if a.rough and any(beta):
        raise ValueError("spatial derivatives undefined for L∞S class")
    if sum(alpha) + sum(beta) > max_order:
        raise ValueError(f"total derivative order exceeds {max_order}")

    X, XI = seminorm_samples(a, xi_max, n_radii, n_directions, n_x)
    bracket = japanese(XI)
    h_xi = np.maximum(1e-3, 1e-2 * bracket)
    h_x = 1e-3 * a.spatial_support_radius

    orders = beta + alpha
    axes = [i for i, k in enumerate(orders) if k]
    terms = itertools.product(*[list(zip(*_STENCILS[orders[i]])) for i in axes])
    acc = np.zeros(X.shape[1], dtype=complex)
    for combo in terms:
        dx = np.zeros_like(X)
        dxi = np.zeros_like(XI)
        w = 1.0
        for ax, (off, wt) in zip(axes, combo):
            w *= wt
            if ax < n:
                dx[ax] = off * h_x
            else:
                dxi[ax - n] = off * h_xi
        acc += w * a(X + dx, XI + dxi)
    scale = h_x ** sum(beta) * h_xi ** sum(alpha)
    deriv = np.abs(acc) / scale
    expo = -a.order_m + a.rho * sum(alpha) - (0.0 if a.rough else a.delta * sum(beta))
    vals = deriv * bracket ** expo
    i = int(np.argmax(vals))
    if return_argmax:
        return float(vals[i]), (X[:, i], XI[:, i])
    return float(vals[i])


@dataclass(frozen=True)
class CutoffSet:
    """Frequency cutoffs ``mu``, ``chi`` and the cone cutoff ``nu``."""

    lam: float

    def mu(self, xi):
        lo, hi = 1.0 / (4 * self.lam), 1.0 / (3 * self.lam)
        return smoothstep((_norm(xi) - lo) / (hi - lo))

    def chi(self, xi, eta):
        r = np.sqrt(_norm(xi) ** 2 + _norm(eta) ** 2)
        return plateau(r, 1.0, 2.0)

    def nu(self, xi, eta):
        a = self.lam ** 2 * _norm(xi)
        b = _norm(eta)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.log(a / (16.0 * b)) / np.log(4.0)
        s = np.where(b == 0, np.where(a > 0, 1.0, 0.0), s)
        s = np.nan_to_num(s, nan=0.0, neginf=0.0, posinf=1.0)
        return smoothstep(s)


def build_cutoffs(lam=1.0):
    """Cutoffs with ``mu = 0`` on ``|xi| <= 1/(4 lam)``, ``1`` on ``|xi| >= 1/(3 lam)``;
    ``chi = 1`` on the unit ball, ``0`` outside radius 2; ``nu = 0`` when
    ``lam^2 |xi| <= 16 |eta|`` and ``1`` when ``64 |eta| <= lam^2 |xi|``."""
    if not (0 < lam <= 1):
        raise ValueError(f"lambda must lie in (0, 1], got {lam}")
    return CutoffSet(float(lam))


def split_sigma(a, c):
    """Return ``((1-chi) nu a, (1-chi)(1-nu) a)``."""
    if a.arity_d != 2:
        raise ValueError("split_sigma needs a bilinear amplitude")
    n = a.dim

    def s1(x, Xi):
        xi, eta = Xi[:n], Xi[n:]
        return a(x, Xi) * ((1 - c.chi(xi, eta)) * c.nu(xi, eta))

    def s2(x, Xi):
        xi, eta = Xi[:n], Xi[n:]
        return a(x, Xi) * ((1 - c.chi(xi, eta)) * (1 - c.nu(xi, eta)))

    base = dict(spatial_factor=None, symbol_factors=None)
    return (replace(a, evaluator=s1, name=a.name + ":sigma1", **base),
            replace(a, evaluator=s2, name=a.name + ":sigma2", **base))


def gp_lowfreq_amplitude(a, phi2, g, psi_cut, chunk=2 ** 22):
    """Amplitude ``psi(xi) int a(x, xi, eta) g_hat(eta) exp(i phi2(x, eta)) dbar eta``.

    The ``eta`` integral is the grid quadrature over ``g``'s frequencies.  The
    result is a linear amplitude of the rough class.
    """
    if a.arity_d != 2:
        raise ValueError("a must be bilinear")
    spec = g.spec
    n = spec.dim
    ghat = np.fft.ifftshift(forward_transform(g).samples).reshape(-1)
    eta = spec.frequencies().reshape(n, -1)
    keep = ghat != 0
    ghat, eta = ghat[keep], eta[:, keep]
    weight = 1.0 / spec.period ** n

    def ev(x, xi):
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        shape = np.broadcast_shapes(x.shape[1:], xi.shape[1:])
        xb = np.broadcast_to(x, (n,) + shape).reshape(n, -1)
        xib = np.broadcast_to(xi, (n,) + shape).reshape(n, -1)
        out = np.zeros(xb.shape[1], dtype=complex)
        step = max(1, chunk // max(1, eta.shape[1]))
        for s in range(0, xb.shape[1], step):
            xs = xb[:, s:s + step, None]
            xis = xib[:, s:s + step, None]
            et = eta[:, None, :]
            Xi = np.concatenate([np.broadcast_to(xis, (n,) + (xs.shape[1], eta.shape[1])),
                                 np.broadcast_to(et, (n,) + (xs.shape[1], eta.shape[1]))])
            vals = a(xs, Xi) * np.exp(1j * phi2(xs, et)) * ghat
            out[s:s + step] = vals.sum(axis=-1) * weight
        return (psi_cut(xib) * out).reshape(shape)

    return Amplitude(ev, dim=n, order_m=0.0, rho=1.0, delta=0.0, arity_d=1,
                     spatial_support_radius=a.spatial_support_radius, rough=True,
                     name=f"gp_lowfreq[{a.name}]")
