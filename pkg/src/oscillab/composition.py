"""The composition ``rho(tD) o T^phi_{a}``: exact amplitude, expansion and remainder decay.

With ``b(y) = a(y, xi) exp(i phi(y, xi))`` the composed amplitude is

    sigma_t(x, xi) = exp(-i phi(x, xi)) [rho(tD) b](x),

which is evaluated spectrally on the periodic ``y`` grid.  The expansion
terms use ``D_y = -i d/dy``, so that

    sigma_alpha = (d^alpha rho)(t grad_x phi) D_y^alpha [e^{i Phi} a](y = x).
"""

import math
import warnings
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy.special import eval_hermitenorm

from .grid import GridSpec
from .littlewood_paley import ScaleGrid
from .symbols import japanese, separable_amplitude, smoothstep, _chi0

__all__ = [
    "GaussianSymbol",
    "ConstantSymbol",
    "CompositionStudy",
    "QuadratureBoxError",
    "high_frequency_amplitude",
    "snap_frequencies",
    "exact_sigma",
    "exact_sigma_direct",
    "expansion_terms",
    "multi_indices",
    "remainder_decay",
    "RemainderFit",
    "fd_derivative",
]


class QuadratureBoxError(RuntimeError):
    pass


@dataclass(frozen=True)
class GaussianSymbol:
    """``rho(eta) = exp(-|eta|^2 / 2)``; derivatives via Hermite polynomials."""

    def __call__(self, eta):
        eta = np.asarray(eta, dtype=float)
        return np.exp(-0.5 * np.sum(eta ** 2, axis=0))

    def derivative(self, alpha, eta):
        eta = np.asarray(eta, dtype=float)
        out = self(eta)
        for j, k in enumerate(alpha):
            if k:
                out = out * (-1) ** k * eval_hermitenorm(k, eta[j])
        return out


@dataclass(frozen=True)
class ConstantSymbol:
    """``rho = 1``: the composition is the identity."""

    def __call__(self, eta):
        return np.ones(np.shape(eta)[1:])

    def derivative(self, alpha, eta):
        return self(eta) if not any(alpha) else np.zeros(np.shape(eta)[1:])


def high_frequency_amplitude(dim=1, m=-0.5, radius=2.0, spatial=True):
    """``mu(xi) <xi>^m chi0(x)`` with ``mu = 0`` on ``|xi| <= 1`` and ``1`` on ``|xi| >= 2``.

    Without ``spatial`` the amplitude is ``x``-independent.
    """
    def q(xi):
        r = np.sqrt(np.sum(xi ** 2, axis=0))
        return smoothstep(r - 1.0) * japanese(xi) ** m

    chi0 = _chi0(radius) if spatial else (lambda x: np.ones(np.shape(x)[1:]))
    return separable_amplitude(chi0, [q], dim=dim, arity_d=1, order_m=m,
                               spatial_support_radius=radius if spatial else np.inf,
                               name="high_frequency" if spatial else "high_frequency_const")


@dataclass(frozen=True)
class CompositionStudy:
    rho: object
    a: object
    phi: object
    spec: GridSpec
    M: int = 1
    epsilon: float = 0.25
    t_values: ScaleGrid = field(default_factory=lambda: ScaleGrid.dyadic(2.0 ** -2, 2.0 ** -8, 2))

    def __post_init__(self):
        if self.a.arity_d != 1:
            raise ValueError("the composition study needs a linear amplitude")
        if not (self.a.dim == self.phi.dim == self.spec.dim):
            raise ValueError("dimensions of amplitude, phase and grid differ")
        if not 1 <= self.M <= 3:
            raise ValueError("expansion order M must be 1, 2 or 3")
        if not 0 < self.epsilon < 0.5:
            raise ValueError("epsilon must lie in (0, 1/2)")
        if self.a.order_m > 0:
            raise ValueError("amplitude order must be <= 0")

    def check_support(self, n_points=64):
        """The amplitude must vanish on ``|xi| <= 1``."""
        xi = np.linspace(-1, 1, n_points)
        if self.spec.dim == 1:
            Xi = xi[None]
        else:
            Xi = np.stack(np.meshgrid(xi, xi, indexing="ij")).reshape(2, -1)
            Xi = Xi[:, np.sum(Xi ** 2, axis=0) <= 1]
        x = np.zeros((self.spec.dim, 1))
        return float(np.max(np.abs(self.a(x, Xi))))

    def metadata(self):
        return {"M": self.M, "epsilon": self.epsilon, "rho": type(self.rho).__name__,
                "amplitude": self.a.metadata(), "phase": self.phi.metadata(),
                "grid": self.spec.to_dict(), "t_values": self.t_values.t_values.tolist()}


def snap_frequencies(spec, xi):
    """Round frequency points (shape ``(dim, k)``) to grid frequencies."""
    dk = spec.frequency_spacing
    return np.rint(np.asarray(xi, dtype=float) / dk) * dk


def _boundary_ratio(spec, integrand):
    mag = np.abs(np.fft.fftshift(integrand))
    peak = mag.max()
    if peak == 0:
        return 0.0
    edge = np.zeros_like(mag, dtype=bool)
    for ax in range(spec.dim):
        idx = [slice(None)] * spec.dim
        idx[ax] = 0
        edge[tuple(idx)] = True
    return float(mag[edge].max() / peak)


def exact_sigma(s, t, xi, warn=1e-6, fail=1e-3):
    """``sigma_t(x, xi)`` on every grid point ``x`` for one frequency ``xi``.

    Returns an array of shape ``spec.shape``.  The boundary value of
    ``rho(t eta) b_hat(eta)`` on the frequency box, relative to its peak,
    triggers a warning above ``warn`` and :class:`QuadratureBoxError` above
    ``fail``.
    """
    spec = s.spec
    n = spec.dim
    xi = np.asarray(xi, dtype=float).reshape((n,) + (1,) * n)
    y = spec.coordinates()
    b = s.a(y, xi) * np.exp(1j * s.phi(y, xi))
    bhat = np.fft.fftn(b)
    integrand = s.rho(t * spec.frequencies()) * bhat
    ratio = _boundary_ratio(spec, integrand)
    if ratio > fail:
        raise QuadratureBoxError(f"boundary mass {ratio:.2e} exceeds {fail:g}; refine the grid")
    if ratio > warn:
        warnings.warn(f"boundary mass {ratio:.2e} exceeds {warn:g}", RuntimeWarning, stacklevel=2)
    vals = np.fft.ifftn(integrand)
    return vals * np.exp(-1j * s.phi(y, xi))


def exact_sigma_direct(s, t, x, xi):
    """Brute-force ``sum_eta sum_y`` quadrature at the points ``x`` (shape ``(dim, P)``)."""
    spec = s.spec
    n = spec.dim
    xi = np.asarray(xi, dtype=float).reshape(n, 1)
    y = spec.coordinates().reshape(n, -1)
    eta = spec.frequencies().reshape(n, -1)
    b = s.a(y, xi) * np.exp(1j * s.phi(y, xi))
    bhat = np.exp(-1j * (eta.T @ y)) @ b * spec.cell_volume
    w = s.rho(t * eta) * bhat / spec.period ** n
    x = np.asarray(x, dtype=float).reshape(n, -1)
    return (np.exp(1j * (x.T @ eta)) @ w) * np.exp(-1j * s.phi(x, xi))


_FD4 = {1: (np.array([1, -8, 0, 8, -1]) / 12.0, 1), 2: (np.array([-1, 16, -30, 16, -1]) / 12.0, 2)}


def fd_derivative(fn, x, alpha, h):
    """``d^alpha fn`` at ``x`` (shape ``(dim, P)``) by tensor 4th-order central differences."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    axes = []
    for j in range(n):
        k = alpha[j]
        if k == 0:
            axes.append((np.array([1.0]), np.array([0])))
        elif k in _FD4:
            w, _ = _FD4[k]
            axes.append((w / h ** k, np.arange(-2, 3)))
        else:
            raise ValueError("derivative order above 2 per axis is not supported")
    out = 0j
    for combo in product(*[range(len(a[0])) for a in axes]):
        weight = np.prod([axes[j][0][c] for j, c in enumerate(combo)])
        if weight == 0:
            continue
        shift = np.array([axes[j][1][c] for j, c in enumerate(combo)], dtype=float).reshape(n, 1) * h
        out = out + weight * fn(x + shift)
    return out


def multi_indices(n, order):
    return [a for a in product(range(order + 1), repeat=n) if sum(a) == order]


def _Phi(phi, x, y, xi):
    g = phi.grad_x(x, xi)
    return phi(y, xi) - phi(x, xi) + np.sum((x - y) * g, axis=0)


def expansion_terms(s, t, x, xi, h=None):
    """``(main, corrections)`` at points ``x`` (shape ``(dim, P)``) and one ``xi``.

    ``corrections`` lists ``(alpha, t^|alpha| / alpha! sigma_alpha)`` for
    ``0 < |alpha| < M``.
    """
    n = s.spec.dim
    x = np.asarray(x, dtype=float).reshape(n, -1)
    xi = np.asarray(xi, dtype=float).reshape(n, 1)
    h = 1e-2 * s.a.spatial_support_radius if h is None else h
    if not np.isfinite(h):
        h = 2e-2
    zeta = s.phi.grad_x(x, xi)
    main = s.rho(t * zeta) * s.a(x, xi)
    corrections = []
    for order in range(1, s.M):
        for alpha in multi_indices(n, order):
            c = lambda y: np.exp(1j * _Phi(s.phi, x, y, xi)) * s.a(y, xi)
            dy = fd_derivative(c, x, alpha, h) * (-1j) ** order
            sig = s.rho.derivative(alpha, t * zeta) * dy
            fact = np.prod([math.factorial(k) for k in alpha])
            corrections.append((alpha, t ** order / fact * sig))
    return main, corrections


@dataclass
class RemainderFit:
    slope: float
    t_values: list
    residuals: list
    envelope_constants: dict
    samples: dict


def _default_samples(s, n_x=16, n_xi=16):
    spec = s.spec
    R = s.a.spatial_support_radius
    R = 2.0 if not np.isfinite(R) else R
    grid = spec.axis()
    inside = np.nonzero(np.abs(grid) < R)[0]
    pick = inside[np.linspace(0, inside.size - 1, n_x).round().astype(int)]
    radii = np.geomspace(2.0, spec.nyquist / 8, n_xi)
    if spec.dim == 1:
        xidx = pick[None]
        xis = snap_frequencies(spec, radii[None])
    else:
        xidx = np.stack([pick, pick[::-1]])
        ang = np.linspace(0, np.pi, n_xi, endpoint=False)
        xis = snap_frequencies(spec, np.stack([radii * np.cos(ang), radii * np.sin(ang)]))
    keep = np.sqrt(np.sum(xis ** 2, axis=0)) > 1
    return xidx, xis[:, keep]


def remainder_decay(s, n_x=16, n_xi=16, noise_floor=1e-9):
    """Per-``t`` residual ``max |exact - main - corrections|`` and its log-log slope.

    Also records, for each ``0 < |alpha| < M``, the constant
    ``max |sigma_alpha| / (t^(|alpha|(eps-1)) <xi>^(m - |alpha|(1/2 - eps)))``
    per ``t``.
    """
    t = s.t_values.t_values
    if np.log2(t.max() / t.min()) < 5 - 1e-9:
        raise ValueError("t_values must span at least 5 octaves")
    spec = s.spec
    n = spec.dim
    xidx, xis = _default_samples(s, n_x, n_xi)
    axis = spec.axis()
    xpts = axis[xidx]
    m, eps = s.a.order_m, s.epsilon
    res, env = [], {}
    for tv in t:
        worst = 0.0
        for k in range(xis.shape[1]):
            xi = xis[:, k]
            ex = exact_sigma(s, tv, xi)[tuple(xidx)]
            main, corr = expansion_terms(s, tv, xpts, xi)
            approx = main + sum(c for _, c in corr)
            worst = max(worst, float(np.max(np.abs(ex - approx))))
            w = japanese(xi.reshape(n, 1))[0]
            for alpha, c in corr:
                order = sum(alpha)
                sig = c * np.prod([math.factorial(a) for a in alpha]) / tv ** order
                bound = tv ** (order * (eps - 1)) * w ** (m - order * (0.5 - eps))
                key = str(tuple(alpha))
                env.setdefault(key, {}).setdefault(float(tv), 0.0)
                env[key][float(tv)] = max(env[key][float(tv)], float(np.max(np.abs(sig)) / bound))
        res.append(worst)
    res = np.array(res)
    if np.all(res < noise_floor):
        raise ArithmeticError("expansion exact to precision; decay unmeasurable")
    ok = res > noise_floor
    slope = float(np.polyfit(np.log(t[ok]), np.log(res[ok]), 1)[0]) if ok.sum() >= 2 else float("nan")
    return RemainderFit(slope, t.tolist(), res.tolist(), env,
                        {"x": xpts.tolist(), "xi": xis.tolist()})
