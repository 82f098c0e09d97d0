"""Norm estimators: BMO, Hardy (maximal), Carleson, and the embedding checks."""

from collections import namedtuple
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import ndimage

from .grid import GridFunction, lebesgue_norm
from .littlewood_paley import ScaleGrid, build_family, build_kt, capital_psi_hat, p_op, q_op

__all__ = [
    "bmo_norm",
    "bmo_local_norm",
    "log_sample",
    "hardy_maximal",
    "hardy_norm",
    "CarlesonMeasure",
    "carleson_norm",
    "smooth_carleson",
    "kernel_family",
    "bmo_embedding_check",
    "EmbeddingCheck",
    "corollary_49_check",
    "Corollary49Check",
    "hardy_bmo_product_check",
    "HardyBmoProductCheck",
]


def _mean_osc(win, k):
    ax = tuple(range(win.ndim - k, win.ndim))
    avg = win.mean(axis=ax, keepdims=True)
    return np.abs(win - avg).mean(axis=ax)


def bmo_norm(f, translates="half", return_cube=False):
    """Supremum of mean oscillation over dyadic cubes of side ``L/2^j``.

    Levels run over ``0 <= j <= log2(N) - 2``.  ``translates="half"`` moves
    each cube by half its side (periodic wrap), ``"all"`` by every grid step
    (one dimension only).  With ``return_cube`` the best ``(side, start
    indices)`` is returned as well.
    """
    spec = f.spec
    a = np.asarray(f.samples if isinstance(f, GridFunction) else f)
    N, n = spec.points_per_axis, spec.dim
    if translates not in ("half", "all"):
        raise ValueError(f"unknown translate family {translates!r}")
    if translates == "all" and n != 1:
        raise ValueError("all-translate family is one-dimensional")
    ext = np.pad(a, [(0, N)] * n, mode="wrap")
    best, where = 0.0, None
    for j in range(int(np.log2(N)) - 1):
        w = N >> j
        stride = 1 if translates == "all" else max(w // 2, 1)
        starts = np.arange(0, N, stride)
        if n == 1:
            view = sliding_window_view(ext, w)
            chunk = max(1, 2 ** 22 // w)
            for s in range(0, starts.size, chunk):
                st = starts[s:s + chunk]
                osc = _mean_osc(view[st], 1)
                i = int(np.argmax(osc))
                if osc[i] > best:
                    best, where = float(osc[i]), (w, (int(st[i]),))
        else:
            view = sliding_window_view(ext, (w, w))
            sub = view[np.ix_(starts, starts)]
            osc = _mean_osc(sub, 2)
            i, k = np.unravel_index(int(np.argmax(osc)), osc.shape)
            if osc[i, k] > best:
                best, where = float(osc[i, k]), (w, (int(starts[i]), int(starts[k])))
    return (best, where) if return_cube else best


def bmo_local_norm(f, family=None, translates="half"):
    """``||f||_BMO + ||theta_hat(D) f||_inf``."""
    return bmo_norm(f, translates) + lebesgue_norm(p_op(f, 1.0, family=family), np.inf)


def log_sample(spec, center=0.0, floor=None, window=True):
    """``log|x - center|`` floored at the grid scale; a standard unbounded BMO function.

    With ``window`` the sample is multiplied by a smooth plateau that keeps
    the periodic extension away from the box edge.
    """
    from .symbols import plateau

    floor = spec.spacing if floor is None else floor
    x = spec.coordinates()
    c = np.asarray(center, dtype=float).reshape((-1,) + (1,) * spec.dim)
    r = np.sqrt(np.sum((x - c) ** 2, axis=0))
    vals = np.log(np.maximum(r, floor))
    if window:
        vals = vals * plateau(np.sqrt(np.sum(x ** 2, axis=0)), spec.period / 8, spec.period / 4)
    return GridFunction(spec, vals)


def _hardy_scales(spec, local, q=4):
    # below 1/(8 Nyquist) theta_hat(tD) is the identity on the grid
    t_max = 2.0 ** (-1.0 / q) if local else spec.period / 4
    return ScaleGrid.dyadic(t_max, 1.0 / (8 * spec.nyquist), q)


def hardy_maximal(f, local=False, family=None, q=4):
    """``sup_t |theta_hat(tD) f|`` over ``t`` from the grid scale ``1/(8 Nyquist)`` to ``L/4``
    (``local``: ``t < 1``)."""
    scales = _hardy_scales(f.spec, local, q)
    out = np.zeros(f.spec.shape)
    for t in scales.t_values:
        np.maximum(out, np.abs(p_op(f, t, family=family).samples), out=out)
    return GridFunction(f.spec, out)


def hardy_norm(f, p=1.0, local=False, family=None, q=4):
    """Maximal-function ``H^p`` (or ``h^p``) quasi-norm with the truncated scale range."""
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    return lebesgue_norm(hardy_maximal(f, local, family, q), p)


@dataclass(frozen=True)
class CarlesonMeasure:
    """Nonnegative density on (scale x grid point); cell measure ``dx^n w_t``."""

    spec: object
    scales: ScaleGrid
    density: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.density, dtype=float)
        if d.shape != (len(self.scales),) + self.spec.shape:
            raise ValueError(f"density has shape {d.shape}, expected {(len(self.scales),) + self.spec.shape}")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ValueError("density must be finite and nonnegative")
        d = d.copy()
        d.flags.writeable = False
        object.__setattr__(self, "density", d)

    def cell_mass(self):
        w = self.scales.quadrature_weights.reshape((-1,) + (1,) * self.spec.dim)
        return self.density * self.spec.cell_volume * w

    @classmethod
    def from_band_energy(cls, f, scales=None, family=None, u=None):
        """``|Q_t^u f|^2 dx dt/t``."""
        scales = scales or ScaleGrid.dyadic(1.0, f.spec.spacing, 4)
        dens = np.stack([np.abs(q_op(f, t, u, family).samples) ** 2 for t in scales.t_values])
        return cls(f.spec, scales, dens)


def _eps_values(mu):
    spec = mu.spec
    eps = list(mu.scales.t_values)
    e = 2.0 ** np.ceil(np.log2(max(eps)))
    while e <= spec.period / 2:
        if e > max(eps):
            eps.append(e)
        e *= 2
    return sorted(set(float(v) for v in eps))


def _ball_footprint(spec, eps):
    r = int(np.ceil(eps / spec.spacing))
    o = np.arange(-r, r + 1) * spec.spacing
    if spec.dim == 1:
        fp = np.abs(o) < eps
    else:
        fp = np.sqrt(o[:, None] ** 2 + o[None, :] ** 2) < eps
    keep = np.nonzero(fp.reshape(fp.shape[0], -1).any(axis=1))[0]
    trim = slice(keep[0], keep[-1] + 1)
    return fp[(trim,) * spec.dim].astype(float)


def carleson_norm(mu, return_box=False):
    """``sup_eps sup_y eps^-n mu({(x, t): t <= eps, |x - y| < eps})`` over grid centres."""
    spec = mu.spec
    mass = mu.cell_mass()
    t = mu.scales.t_values
    best, where = 0.0, None
    for eps in _eps_values(mu):
        col = mass[t <= eps * (1 + 1e-12)].sum(axis=0)
        if not np.any(col):
            continue
        fp = _ball_footprint(spec, eps)
        if fp.shape[0] > spec.points_per_axis:
            continue
        box = ndimage.correlate(col, fp, mode="wrap")
        i = np.unravel_index(int(np.argmax(box)), box.shape)
        val = float(box[i]) / eps ** spec.dim
        if val > best:
            best, where = val, (eps, tuple(int(k) for k in i))
    return (best, where) if return_box else best


def kernel_family(spec, scales, m2=-0.5, kappa=1.0 / 8, kappa1=1.0, family=None):
    """``K_t`` on ``spec`` at every scale of ``scales``."""
    return [build_kt(t, spec, m2, kappa, kappa1, family) for t in scales.t_values]


def smooth_carleson(mu, kernels):
    """Density ``int |K_t(x - y)| dmu(y, t)`` per scale, by periodic convolution."""
    if len(kernels) != len(mu.scales):
        raise ValueError("need one kernel per scale")
    spec = mu.spec
    out = np.empty_like(mu.density)
    for i, K in enumerate(kernels):
        if K.spec != spec:
            raise ValueError("kernel grid differs from the measure grid")
        khat = np.fft.fftn(np.fft.ifftshift(np.abs(K.samples))) * spec.cell_volume
        out[i] = np.clip(np.fft.ifftn(khat * np.fft.fftn(mu.density[i])).real, 0.0, None)
    return CarlesonMeasure(spec, mu.scales, out)


EmbeddingCheck = namedtuple("EmbeddingCheck", "lhs rhs ratio average average_bound")


def bmo_embedding_check(a, R, q=4.0, atol=0.0):
    """``||a||_q`` against ``||a||_BMO`` for ``a`` supported in ``Q_R = [-R, R)^n``.

    ``R`` must be ``L / 2^(j+2)`` so that both ``Q_R`` and ``Q_2R`` belong to
    the dyadic cube family; the average bound
    ``|Avg_{Q_R} a| <= 2^(2n)/(2^n - 1) ||a||_BMO`` then holds for the grid
    sums exactly as computed.
    """
    spec = a.spec
    n = spec.dim
    ratio_l = spec.period / (4 * R)
    j = np.log2(ratio_l)
    if not (ratio_l >= 1 and abs(j - round(j)) < 1e-12):
        raise ValueError("R must equal L / 2^(j+2) for an integer j >= 0")
    x = spec.coordinates()
    inside = np.all((x >= -R - 1e-12 * R) & (x < R - 1e-12 * R), axis=0)
    if np.any(np.abs(a.samples[~inside]) > atol):
        raise ValueError("sample is not supported in Q_R")
    lhs = lebesgue_norm(a, q)
    rhs = bmo_norm(a)
    avg = abs(a.samples[inside].mean()) if inside.any() else 0.0
    ratio = lhs / rhs if rhs > 0 else 0.0
    return EmbeddingCheck(lhs, rhs, ratio, float(avg), 2 ** (2 * n) / (2 ** n - 1) * rhs)


HardyBmoProductCheck = namedtuple("HardyBmoProductCheck", "lhs rhs_product ratio")
Corollary49Check = HardyBmoProductCheck


def corollary_49_check(F, G, v_fn, scales=None, family=None, m2=-0.5):
    """``|int int Q_t F . Qtilde_t G . v dt/t dx|`` against ``||F||_H1 ||G||_BMO ||v||_inf``.

    ``Qtilde_t`` uses the annulus symbol ``Psi_hat`` of the ``K_t`` construction.
    """
    family = family or build_family()
    spec = F.spec
    scales = scales or ScaleGrid.dyadic(1.0, spec.spacing, 4)
    Psi = capital_psi_hat(family, m2)
    x = spec.coordinates()
    acc, vmax = 0j, 0.0
    for t, w in zip(scales.t_values, scales.quadrature_weights):
        v = np.broadcast_to(v_fn(t, x), spec.shape)
        vmax = max(vmax, float(np.max(np.abs(v))))
        prod = q_op(F, t, family=family).samples * q_op(G, t, profile=Psi).samples * v
        acc += w * prod.sum() * spec.cell_volume
    lhs = abs(acc)
    rhs = hardy_norm(F, 1.0, family=family) * bmo_norm(G) * vmax
    return HardyBmoProductCheck(float(lhs), float(rhs), float(lhs / rhs) if rhs > 0 else 0.0)


hardy_bmo_product_check = corollary_49_check
