"""Phase functions, non-degeneracy constants and gradient inversion."""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Phase",
    "make_phase",
    "PHASE_CATALOG",
    "DegeneratePhaseError",
    "GradientInversionError",
    "box_points",
    "sphere_samples",
    "nondegeneracy_constant",
    "lambda_constant",
    "invert_gradient",
]


class DegeneratePhaseError(ValueError):
    """Raised when ``|det d2phi/dxdxi|`` drops below tolerance; carries the witness."""

    def __init__(self, message, witness):
        super().__init__(message)
        self.witness = witness


class GradientInversionError(RuntimeError):
    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class Phase:
    """A real phase ``phi(x, xi)`` with its derivatives.

    ``warp`` and ``shift`` are set when ``phi(x, xi) = warp(x).xi + shift(xi)``;
    every catalog phase has this form, which the fast paths in
    :mod:`oscillab.fio` exploit.  ``mixed_hessian`` returns the array
    ``H[i, j] = d^2 phi / dx_i dxi_j`` with shape ``(n, n, ...)``.
    """

    evaluator: object
    grad_x: object
    mixed_hessian: object
    dim: int = 1
    homogeneous: bool = True
    name: str = "custom"
    params: dict = field(default_factory=dict)
    warp: object = None
    shift: object = None

    def __call__(self, x, xi):
        return self.evaluator(np.asarray(x, dtype=float), np.asarray(xi, dtype=float))

    @property
    def is_linear(self):
        return self.name == "linear"

    def metadata(self):
        return {"name": self.name, "dim": self.dim, "homogeneous": self.homogeneous,
                "params": {k: np.asarray(v).tolist() for k, v in self.params.items()}}


def _bracket(x):
    return np.sqrt(1.0 + np.sum(x ** 2, axis=0))


def _dot(a, b):
    return np.sum(a * b, axis=0)


def _eye_like(x, n):
    shape = np.shape(x)[1:]
    return np.broadcast_to(np.eye(n).reshape((n, n) + (1,) * len(shape)), (n, n) + shape)


def make_phase(name, dim=1, u=None, eps=0.5):
    """Catalog phase: ``linear``, ``halfwave``, ``tilt`` (parameter ``u``) or ``sine`` (``eps``)."""
    n = dim
    if name == "linear":
        return Phase(lambda x, xi: _dot(x, xi),
                     lambda x, xi: np.broadcast_to(xi, np.broadcast_shapes(np.shape(x), np.shape(xi))) * 1.0,
                     lambda x, xi: _eye_like(np.broadcast_to(x, np.broadcast_shapes(np.shape(x), np.shape(xi))), n),
                     dim=n, name=name, warp=lambda x: x, shift=None)
    if name == "halfwave":
        return Phase(lambda x, xi: _dot(x, xi) + np.sqrt(np.sum(xi ** 2, axis=0)),
                     lambda x, xi: np.broadcast_to(xi, np.broadcast_shapes(np.shape(x), np.shape(xi))) * 1.0,
                     lambda x, xi: _eye_like(np.broadcast_to(x, np.broadcast_shapes(np.shape(x), np.shape(xi))), n),
                     dim=n, name=name, warp=lambda x: x,
                     shift=lambda xi: np.sqrt(np.sum(xi ** 2, axis=0)))
    if name == "tilt":
        uu = np.zeros(n) if u is None else np.asarray(u, dtype=float).reshape(n)
        if u is None:
            uu[0] = 0.5
        ub = uu

        def ev(x, xi):
            return _dot(x, xi) + _dot(_ub(ub, xi), xi) * _bracket(x)

        def grad(x, xi):
            return xi + _dot(_ub(ub, xi), xi) * x / _bracket(x)

        def hess(x, xi):
            shape = np.broadcast_shapes(np.shape(x), np.shape(xi))
            xb = np.broadcast_to(x, shape)
            uvec = _ub(ub, xb)
            outer = xb[:, None] * uvec[None, :] / _bracket(xb)
            return _eye_like(xb, n) + outer

        return Phase(ev, grad, hess, dim=n, name=name, params={"u": uu},
                     warp=lambda x: x + _ub(ub, x) * _bracket(x), shift=None)
    if name == "sine":
        if n != 1:
            raise ValueError("the sine phase is one-dimensional")
        e = float(eps)
        return Phase(lambda x, xi: (x * xi + e * xi * np.sin(x))[0],
                     lambda x, xi: xi * (1 + e * np.cos(x)),
                     lambda x, xi: (1 + e * np.cos(x) + 0 * xi)[None],
                     dim=1, name=name, params={"eps": e},
                     warp=lambda x: x + e * np.sin(x), shift=None)
    raise KeyError(f"unknown phase {name!r}; choose from {PHASE_CATALOG}")


def _ub(u, like):
    like = np.asarray(like)
    return u.reshape((u.shape[0],) + (1,) * (like.ndim - 1))


PHASE_CATALOG = ("linear", "halfwave", "tilt", "sine")


def box_points(K, dim, per_axis=33):
    """Stacked sample points of a box.

    ``K`` is a half-width ``h`` (meaning ``[-h, h]^dim``) or a sequence of
    ``(lo, hi)`` pairs.
    """
    if np.isscalar(K):
        K = [(-float(K), float(K))] * dim
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in K]
    return np.stack(np.meshgrid(*axes, indexing="ij")).reshape(dim, -1)


def sphere_samples(dim, n_directions=None, n_radial=8, r_min=1.0, r_max=128.0):
    """Frequency samples: directions times log-spaced radii."""
    if dim == 1:
        dirs = np.array([[1.0, -1.0]])
    else:
        count = 256 if n_directions is None else n_directions
        ang = 2 * np.pi * np.arange(count) / count
        dirs = np.stack([np.cos(ang), np.sin(ang)])
    radii = np.geomspace(r_min, r_max, n_radial)
    return (dirs[:, :, None] * radii[None, None, :]).reshape(dim, -1)


def _pairs(p, K, per_axis, n_directions, n_radial):
    xs = box_points(K, p.dim, per_axis)
    xis = sphere_samples(p.dim, n_directions, n_radial)
    X = np.repeat(xs, xis.shape[1], axis=1)
    XI = np.tile(xis, (1, xs.shape[1]))
    return X, XI


def nondegeneracy_constant(p, K, per_axis=33, n_directions=None, n_radial=8, tol=1e-10):
    """``min |det d2phi/dxdxi|`` over ``K`` times sphere samples."""
    if not p.homogeneous:
        raise ValueError("nondegeneracy_constant expects a homogeneous phase")
    X, XI = _pairs(p, K, per_axis, n_directions, n_radial)
    H = p.mixed_hessian(X, XI)
    det = np.abs(np.linalg.det(np.moveaxis(H, (0, 1), (-2, -1))))
    i = int(np.argmin(det))
    if det[i] < tol:
        raise DegeneratePhaseError(f"phase {p.name} is degenerate: |det| = {det[i]:.3e}",
                                   (X[:, i].tolist(), XI[:, i].tolist()))
    return float(det[i])


def lambda_constant(p, K, per_axis=33, n_directions=None, n_radial=8):
    """Largest ``lam <= 1`` with ``lam |xi| <= |grad_x phi| <= |xi| / lam`` on the samples."""
    X, XI = _pairs(p, K, per_axis, n_directions, n_radial)
    g = p.grad_x(X, XI)
    ratio = np.sqrt(np.sum(g ** 2, axis=0)) / np.sqrt(np.sum(XI ** 2, axis=0))
    lo, hi = float(ratio.min()), float(ratio.max())
    if lo <= 0:
        raise ValueError(f"grad_x phi vanishes on the sample set of {p.name}")
    return min(lo, 1.0 / hi, 1.0)


def invert_gradient(p, x, zeta, tol=1e-10, max_iter=50):
    """Solve ``grad_x phi(x, xi) = zeta`` by Newton's method on the unit sphere.

    Homogeneity of degree one lets us solve for ``zeta/|zeta|`` and rescale.
    """
    x = np.asarray(x, dtype=float).reshape(p.dim, 1)
    zeta = np.asarray(zeta, dtype=float).reshape(p.dim)
    r = float(np.linalg.norm(zeta))
    if r == 0:
        raise ValueError("zeta must be nonzero")
    target = zeta / r
    xi = target.copy()
    res = np.inf
    for _ in range(max_iter + 1):
        resid = p.grad_x(x, xi[:, None])[:, 0] - target
        res = float(np.linalg.norm(resid))
        if res <= tol:
            return xi * r
        H = p.mixed_hessian(x, xi[:, None])[:, :, 0]
        xi = xi - np.linalg.solve(H, resid)
    raise GradientInversionError(f"Newton iteration did not converge, residual {res:.3e}", res)
