"""Experiment runners: each returns a :class:`NormReport` with named gates.

Runners take an :class:`ExperimentConfig`; ``cfg.params`` overrides the
defaults listed in each runner's docstring.  Reports contain no timing
data, so a fixed config and seed give byte-identical output files.
"""

import math

import numpy as np
from scipy import integrate

from .composition import (CompositionStudy, GaussianSymbol, exact_sigma, high_frequency_amplitude,
                          multi_indices, remainder_decay, snap_frequencies)
from .fio import (BilinearFIO, LinearFIO, apply_bilinear, apply_bilinear_batch, apply_linear,
                  apply_linear_batch)
from .grid import (GridFunction, GridSpec, apply_multiplier, exponential_filter, lebesgue_norm)
from .littlewood_paley import (ScaleGrid, apply_rt, build_family, build_kt, calderon_integral,
                               calderon_sum, discrete_partition_sum, kt_cancellation,
                               kt_decay_constant, kt_lipschitz_constant, paraproduct_symbol)
from .phases import make_phase
from .reports import ExperimentConfig, NormReport
from .spaces import (CarlesonMeasure, bmo_embedding_check, bmo_norm, carleson_norm, hardy_norm,
                     kernel_family, log_sample, smooth_carleson)
from .symbols import (_chi0, gp_lowfreq_amplitude, make_amplitude, plateau, separable_amplitude,
                      seminorm_estimate)

__all__ = [
    "EXPERIMENTS",
    "run_experiment",
    "cell_fraction",
    "closed_form_h",
    "bmo_average_oracle",
    "bmo_average_displayed",
    "lp_ratio_oracle",
    "lp_ratio_exact",
    "counterexample_bmo",
    "counterexample_lp",
    "fourier_series_localized",
    "boundedness_sweep",
    "composition_study",
    "kernel_constants",
    "rt_constants",
    "kernel_check",
    "carleson_check",
    "calderon_check",
    "hilbert_check",
    "paraproduct_symbol_check",
    "embedding_check",
    "oracle_equivalence",
    "random_band_limited",
]

TWO_PI = 2 * np.pi


def _cfg(cfg, name):
    return cfg if cfg is not None else ExperimentConfig(name)


def _p(cfg, key, default):
    return cfg.params.get(key, default)


def cell_fraction(spec, a, b):
    """Indicator of ``[a, b]`` weighted by each cell's overlap (one dimension)."""
    x = spec.axis()
    dx = spec.spacing
    lo = np.clip(x - dx / 2, a, b)
    hi = np.clip(x + dx / 2, a, b)
    return GridFunction(spec, (hi - lo) / dx)


def _identity_amplitude(dim=1):
    one = lambda v: np.ones(np.shape(v)[1:])
    return separable_amplitude(one, [one], dim=dim, arity_d=1, spatial_support_radius=np.inf, name="identity")


def closed_form_h(x):
    """``h(x) = (i/2pi) log|(x + 2)(x - 2)/x^2|``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return 1j / TWO_PI * np.log(np.abs((x + 2) * (x - 2) / x ** 2))


def _h_antiderivative(x):
    # int log|(x^2 - 4)/x^2| dx
    x = np.asarray(x, dtype=float)

    def xlogx(u):
        u = np.abs(u)
        return np.where(u > 0, u * np.log(np.where(u > 0, u, 1.0)), 0.0)

    return np.sign(x + 2) * xlogx(x + 2) + np.sign(x - 2) * xlogx(x - 2) - 2 * np.sign(x) * xlogx(x)


def bmo_average_oracle(eps):
    """``|Avg_(-eps, eps) h_+|`` from the exact antiderivative."""
    e = float(eps)
    integral = (2 + e) * np.log(2 + e) - (2 - e) * np.log(2 - e) - 2 * e * np.log(e)
    return integral / (TWO_PI * 2 * e)


def bmo_average_displayed(eps):
    """The closed form for the same average as printed in the source (kept for comparison)."""
    e = float(eps)
    return abs(np.log((2 + e) * (2 - e) / e ** 2) - 2 / e * (2 - np.log((2 + e) / (2 - e)))) / (4 * np.pi)


def _bmo_average_quad(eps):
    f = lambda x: np.log(abs((x * x - 4) / (x * x)))
    val = integrate.quad(f, 0.0, eps, limit=200, epsabs=1e-14, epsrel=1e-12)[0]
    return val / (TWO_PI * 2 * eps)


def counterexample_bmo(cfg=None):
    """``|Avg h_+|`` growth and BMO divergence for the halfwave operator.

    Params: ``eps_list`` (1e-1..1e-5), ``n_points`` (2^14), ``period`` (16 pi),
    ``bmo_resolutions`` (2^10..2^14), ``avg_tol`` (0.05), ``corr_min`` (0.999),
    ``h_tol`` (5e-3).
    """
    cfg = _cfg(cfg, "bmo-counterexample")
    eps_list = [float(e) for e in _p(cfg, "eps_list", [1e-1, 1e-2, 1e-3, 1e-4, 1e-5])]
    N = int(_p(cfg, "n_points", 2 ** 14))
    L = float(_p(cfg, "period", 16 * np.pi))
    rep = NormReport("bmo-counterexample", {"eps_list": eps_list, "n_points": N, "period": L})

    spec = GridSpec(1, N, L)
    x = spec.axis()
    f = cell_fraction(spec, -1.0, 1.0)
    T1 = LinearFIO(_identity_amplitude(), make_phase("halfwave"))
    S = 0.5 * (cell_fraction(spec, -2.0, 0.0).samples + cell_fraction(spec, 0.0, 2.0).samples)
    h_spec = apply_linear(T1, f).samples - S
    mask = (np.abs(x) >= 0.05) & (np.abs(x) <= 1.9)
    h_err = float(np.max(np.abs(h_spec[mask] - closed_form_h(x[mask]))))
    rep.add_row(N, cfg.seed, quantity="h_spectral_vs_closed_form", value=h_err)
    rep.add_row(N, cfg.seed, quantity="abs_h_at_3", value=float(abs(closed_form_h(3.0))))

    avgs, logs = [], []
    for e in eps_list:
        oracle = bmo_average_oracle(e)
        quad = _bmo_average_quad(e)
        shown = bmo_average_displayed(e)
        ref = abs(np.log(e)) / TWO_PI
        avgs.append(quad)
        logs.append(abs(np.log(e)))
        rep.add_row(N, cfg.seed, quantity="avg", eps=e, avg_quadrature=quad, avg_antiderivative=oracle,
                    avg_displayed_formula=shown, log_reference=ref, rel_dev_from_log=abs(quad - ref) / ref)
    corr = float(np.corrcoef(avgs, logs)[0, 1])

    bmo_vals = []
    for n_b in _p(cfg, "bmo_resolutions", [2 ** 10, 2 ** 11, 2 ** 12, 2 ** 13, 2 ** 14]):
        sb = GridSpec(1, int(n_b), L)
        xb, dx = sb.axis(), sb.spacing
        lo, hi = np.clip(xb - dx / 2, 0.0, 1.0), np.clip(xb + dx / 2, 0.0, 1.0)
        hplus = 1j / TWO_PI * (_h_antiderivative(hi) - _h_antiderivative(lo)) / dx
        val = bmo_norm(GridFunction(sb, hplus))
        bmo_vals.append(val)
        rep.add_row(int(n_b), cfg.seed, quantity="bmo_norm_h_plus", value=val)

    tol = cfg.tolerance("avg_tol", _p(cfg, "avg_tol", 0.05))
    i3 = int(np.argmin(np.abs(np.log(np.array(eps_list)) - np.log(1e-3))))
    dev = abs(avgs[i3] - logs[i3] / TWO_PI) / (logs[i3] / TWO_PI)
    rep.gate("avg_matches_log_at_1e-3", dev <= tol, dev, tol, eps=eps_list[i3])
    cmin = cfg.tolerance("corr_min", _p(cfg, "corr_min", 0.999))
    rep.gate("growth_correlation", corr >= cmin, corr, cmin)
    htol = cfg.tolerance("h_tol", _p(cfg, "h_tol", 5e-3))
    rep.gate("spectral_h_matches_closed_form", h_err <= htol, h_err, htol)
    rep.gate("bmo_norm_diverges", all(b > a for a, b in zip(bmo_vals, bmo_vals[1:])),
             bmo_vals[-1] / bmo_vals[0], 1.0)
    rep.notes["displayed_average_formula"] = ("differs from the antiderivative by the constant inside the "
                                              "second parenthesis; both are reported")
    return rep


def lp_ratio_exact(eps):
    """``(1/eps) int_0^eps |T_1 f|^2`` with ``|T_1 f|^2 = 1/4 + |h|^2`` on ``(0, eps)``."""
    g = lambda x: 0.25 + (np.log(abs((x * x - 4) / (x * x))) / TWO_PI) ** 2
    return integrate.quad(g, 0.0, eps, limit=200, epsabs=1e-14, epsrel=1e-12)[0] / eps


def lp_ratio_oracle(eps, p=2):
    """``(1/eps) int_0^eps |log x|^p dx = sum_j p!/j! |log eps|^j`` (integer ``p``)."""
    lg = abs(np.log(eps))
    return float(sum(math.factorial(p) / math.factorial(j) * lg ** j for j in range(p + 1)))


def counterexample_lp(cfg=None):
    """``||T(f, g_eps)||_p / (||f||_inf ||g_eps||_p)`` for ``f = 1_[-1,1]``, ``g_eps = 1_[0,eps]``.

    Params: ``p`` (2), ``eps_list`` (1e-2..1e-5), ``n_points`` (2^22),
    ``period`` (16), ``growth_min`` (2), ``oracle_tol`` (0.15), ``zero_f`` (False).
    """
    cfg = _cfg(cfg, "lp-counterexample")
    p = float(_p(cfg, "p", 2))
    eps_list = [float(e) for e in _p(cfg, "eps_list", [1e-2, 1e-3, 1e-4, 1e-5])]
    N = int(_p(cfg, "n_points", 2 ** 22))
    L = float(_p(cfg, "period", 16.0))
    if not 1 < p < np.inf:
        raise ValueError("p must lie in (1, inf)")
    rep = NormReport("lp-counterexample", {"p": p, "eps_list": eps_list, "n_points": N, "period": L})
    spec = GridSpec(1, N, L)
    f = cell_fraction(spec, -1.0, 1.0)
    if _p(cfg, "zero_f", False):
        f = GridFunction.zeros(spec)
    T = BilinearFIO(make_amplitude("one", 1, 2, radius=2.0), make_phase("halfwave"), make_phase("linear"))
    t1 = apply_linear(LinearFIO(_identity_amplitude(), T.phase1), f).samples
    chi = T.amplitude.spatial_factor(spec.coordinates())
    finf = lebesgue_norm(f, np.inf)
    ratios = []
    for e in eps_list:
        g = cell_fraction(spec, 0.0, e)
        out = GridFunction(spec, chi * t1 * g.samples)
        denom = finf * lebesgue_norm(g, p)
        ratio = lebesgue_norm(out, p) / denom if denom > 0 else 0.0
        ratios.append(ratio)
        row = dict(eps=e, ratio=ratio, ratio_pow_p=ratio ** p, oracle_log_moment=lp_ratio_oracle(e, int(p))
                   if float(p).is_integer() else float("nan"))
        if p == 2:
            row["exact_ratio_pow_p"] = lp_ratio_exact(e)
        rep.add_row(N, cfg.seed, **row)
    growth = ratios[-1] / ratios[0] if ratios[0] > 0 else 0.0
    gmin = cfg.tolerance("growth_min", _p(cfg, "growth_min", 2.0))
    rep.gate("ratio_growth", growth >= gmin, growth, gmin, eps_from=eps_list[0], eps_to=eps_list[-1])
    if float(p).is_integer():
        otol = cfg.tolerance("oracle_tol", _p(cfg, "oracle_tol", 0.15))
        ora = lp_ratio_oracle(eps_list[0], int(p))
        dev = abs(ratios[0] ** p - ora) / ora
        rep.gate("ratio_pow_p_matches_log_moment", dev <= otol, dev, otol, eps=eps_list[0],
                 computed=ratios[0] ** p, oracle=ora)
    return rep


def fourier_series_localized(cfg=None):
    """Fourier coefficients of the localized amplitude in ``xi`` and the reconstructed operator.

    Params: ``n_points`` (256), ``period`` (16 pi), ``box`` (6.5), ``quad_points`` (512),
    ``psi_cut`` ([0.5, 3]), ``zeta`` ([3, 3.2]), ``k_fit`` (128), ``k_rec`` (32),
    ``n_target`` (6), ``q`` (4), ``rec_tol`` (1e-6), ``amplitude`` ("cone_test"),
    ``phi1`` ("sine"), ``phi2`` ("linear").
    """
    cfg = _cfg(cfg, "fourier-series")
    N = int(_p(cfg, "n_points", 256))
    L = float(_p(cfg, "period", 16 * np.pi))
    P = float(_p(cfg, "box", 6.5))
    Mq = int(_p(cfg, "quad_points", 512))
    pc = _p(cfg, "psi_cut", [0.5, 3.0])
    zc = _p(cfg, "zeta", [3.0, 3.2])
    k_fit, k_rec = int(_p(cfg, "k_fit", 128)), int(_p(cfg, "k_rec", 32))
    n_target, q = float(_p(cfg, "n_target", 6)), float(_p(cfg, "q", 4))
    amp_name = _p(cfg, "amplitude", "cone_test")
    spec = GridSpec(1, N, L)
    rep = NormReport("fourier-series", {"n_points": N, "period": L, "box": P, "quad_points": Mq,
                                        "psi_cut": pc, "zeta": zc, "k_fit": k_fit, "k_rec": k_rec,
                                        "n_target": n_target, "q": q, "amplitude": amp_name})
    sig = make_amplitude(amp_name, 1, 2, m=0.0)
    phi1, phi2 = make_phase(_p(cfg, "phi1", "sine")), make_phase(_p(cfg, "phi2", "linear"))
    g = GridFunction.from_callable(spec, lambda x: np.exp(-x[0] ** 2 / 4) * np.cos(x[0]))
    f = GridFunction.from_callable(spec, lambda x: np.exp(-(x[0] - 1) ** 2) * np.sin(3 * x[0]))
    psi = lambda xi: plateau(np.abs(xi[0]), pc[0], pc[1])
    A = gp_lowfreq_amplitude(sig, phi2, g, psi)
    x = spec.coordinates()
    if pc[1] >= P / 2 or zc[1] > P / 2:
        raise ValueError("amplitude is not compactly supported inside the period box in xi")
    edge = A(x[:, ::8, None], np.array([[[-P / 2, P / 2]]]))
    if np.max(np.abs(edge)) > 0:
        raise ValueError("amplitude does not vanish on the boundary of the period box in xi")

    xq = -P / 2 + P * np.arange(Mq) / Mq
    vals = A(x[:, :, None], xq[None, None, :])
    k = np.arange(-max(k_fit, k_rec), max(k_fit, k_rec) + 1)
    ak = vals @ np.exp(-1j * TWO_PI / P * np.outer(xq, k)) / Mq
    norms = np.array([lebesgue_norm(GridFunction(spec, ak[:, i]), q) for i in range(k.size)])
    floor = 1e-12 * norms.max()
    sel = (np.abs(k) >= 1) & (np.abs(k) <= k_fit) & (norms > floor)
    slope = -float(np.polyfit(np.log(1 + np.abs(k[sel])), np.log(norms[sel]), 1)[0])
    for kk, nv in zip(k, norms):
        if kk >= 0:
            rep.add_row(N, cfg.seed, k=int(kk), coeff_norm=float(nv))

    zeta = lambda xi: plateau(np.abs(xi[0]), zc[0], zc[1])
    one = lambda v: np.ones(np.shape(v)[1:])
    Tz = LinearFIO(separable_amplitude(one, [zeta], dim=1, arity_d=1), phi1)
    idx = np.nonzero(np.abs(k) <= k_rec)[0]
    shifted = [apply_multiplier(f, lambda xi, s=TWO_PI * k[i] / P: np.exp(1j * xi[0] * s)) for i in idx]
    outs = apply_linear_batch(Tz, shifted, "fast")
    rec = sum(ak[:, i] * o.samples for i, o in zip(idx, outs))
    direct = apply_linear(LinearFIO(A, phi1), f, "direct").samples
    err = float(np.max(np.abs(rec - direct)))
    rep.add_row(N, cfg.seed, quantity="reconstruction_error", value=err, k_rec=k_rec)
    rep.gate("decay_exponent", slope >= n_target, slope, n_target, k_fit=k_fit)
    rtol = cfg.tolerance("rec_tol", _p(cfg, "rec_tol", 1e-6))
    rep.gate("reconstruction", err <= rtol, err, rtol)
    return rep


def random_band_limited(rng, spec, band, slope=0.0):
    """Complex Gaussian coefficients on grid frequencies with ``|xi| <= band``.

    The coefficients depend only on the frequency lattice (fixed by the
    period), so the same draw gives the same function at every resolution.
    """
    dk = spec.frequency_spacing
    kmax = int(np.floor(band / dk))
    ks = np.arange(-kmax, kmax + 1)
    grids = np.meshgrid(*([ks] * spec.dim), indexing="ij")
    r = np.sqrt(sum(g.astype(float) ** 2 for g in grids)) * dk
    inside = r <= band
    c = (rng.standard_normal(r.shape) + 1j * rng.standard_normal(r.shape)) * (1 + r) ** (-slope) * inside
    if kmax >= spec.points_per_axis // 2:
        raise ValueError("band exceeds the grid Nyquist frequency")
    x = spec.coordinates()
    vals = np.zeros(spec.shape, dtype=complex)
    for idx in zip(*np.nonzero(inside)):
        kv = np.array([ks[i] for i in idx]) * dk
        vals += c[idx] * np.exp(1j * np.tensordot(kv, x, axes=1))
    return vals


def _mean_zero_atom(rng, spec):
    x = spec.coordinates()
    c = rng.uniform(-2, 2, size=(2, spec.dim))
    w = rng.uniform(0.3, 1.0)
    bump = lambda cc: np.exp(-np.sum((x - cc.reshape((-1,) + (1,) * spec.dim)) ** 2, axis=0) / w ** 2)
    return bump(c[0]) - bump(c[1])


def _norm(h, p):
    if p == "H1":
        return hardy_norm(h, 1.0)
    return lebesgue_norm(h, float(p))


def _exp_inv(p):
    if p == "H1":
        return 1.0
    p = float(p)
    return 0.0 if np.isinf(p) else 1.0 / p


def boundedness_sweep(cfg=None):
    """Ratios ``||T(f, g)||_r / (||f||_p ||g||_q)`` over seeded random inputs and a resolution ladder.

    Params: ``p``, ``q``, ``r`` (2, 2, 1; "inf" and "H1" allowed), ``m`` (0),
    ``dim`` (1), ``amplitude`` ("order_m_product", or "zero"), ``phases``
    (["halfwave", "linear"]), ``period`` (16 pi), ``band`` (8), ``slope`` (0),
    ``trials`` (50), ``inputs`` ("random" or "indicator"), ``drift_max`` (2).
    Resolutions come from ``cfg.resolutions`` (default 2^8, 2^10, 2^12).
    """
    cfg = _cfg(cfg, "sweep")
    parse = lambda v: v if v == "H1" else float(v)
    p, q, r = parse(_p(cfg, "p", 2)), parse(_p(cfg, "q", 2)), parse(_p(cfg, "r", 1))
    if abs(_exp_inv(r) - _exp_inv(p) - _exp_inv(q)) > 1e-12:
        raise ValueError(f"exponents violate 1/r = 1/p + 1/q: p={p}, q={q}, r={r}")
    m, n = float(_p(cfg, "m", 0.0)), int(_p(cfg, "dim", 1))
    amp_name = _p(cfg, "amplitude", "order_m_product")
    phases = _p(cfg, "phases", ["halfwave", "linear"])
    L = float(_p(cfg, "period", 16 * np.pi))
    band, slope = float(_p(cfg, "band", 8.0)), float(_p(cfg, "slope", 0.0))
    trials = int(_p(cfg, "trials", 50))
    inputs = _p(cfg, "inputs", "random")
    resolutions = cfg.resolutions or [2 ** 8, 2 ** 10, 2 ** 12]
    if amp_name == "zero":
        zero = lambda v: np.zeros(np.shape(v)[1:])
        amp = separable_amplitude(zero, [lambda v: np.ones(np.shape(v)[1:])] * 2, dim=n, arity_d=2,
                                  order_m=m, name="zero")
    else:
        amp = make_amplitude(amp_name, n, 2, m=m)
    T = BilinearFIO(amp, make_phase(phases[0], n), make_phase(phases[1], n))
    rep = NormReport("sweep", {"p": p, "q": q, "r": r, "m": m, "dim": n, "amplitude": amp.metadata(),
                               "phases": phases, "period": L, "band": band, "slope": slope,
                               "trials": trials, "inputs": inputs, "resolutions": resolutions})
    sem = {}
    for order in range(2):
        for alpha in multi_indices(2 * n, order):
            if amp_name != "zero":
                sem[str(alpha)] = seminorm_estimate(amp, alpha, (0,) * n, xi_max=32, n_radii=6,
                                                    n_directions=8, n_x=3)
    rep.notes["amplitude_seminorms"] = sem

    children = np.random.SeedSequence(cfg.seed).spawn(trials)
    maxima = []
    for N in resolutions:
        spec = GridSpec(n, int(N), L)
        if inputs == "indicator":
            if n != 1:
                raise ValueError("indicator inputs are one-dimensional")
            fs = [cell_fraction(spec, -1.0, 1.0)]
            gs = [cell_fraction(spec, 0.0, 8 * spec.spacing)]
        else:
            fs, gs = [], []
            for child in children:
                rng = np.random.default_rng(child)
                a = random_band_limited(rng, spec, band, slope) if p != "H1" else _mean_zero_atom(rng, spec)
                b = random_band_limited(rng, spec, band, slope) if q != "H1" else _mean_zero_atom(rng, spec)
                fs.append(GridFunction(spec, a))
                gs.append(GridFunction(spec, b))
        outs = apply_bilinear_batch(T, fs, gs)
        ratios = []
        for i, (f, g, o) in enumerate(zip(fs, gs, outs)):
            den = _norm(f, p) * _norm(g, q)
            ratios.append(_norm(o, r) / den if den > 0 else 0.0)
        ratios = np.array(ratios)
        maxima.append(float(ratios.max()))
        rep.add_row(N, cfg.seed, max_ratio=float(ratios.max()), median_ratio=float(np.median(ratios)),
                    min_ratio=float(ratios.min()), trials=len(ratios))
    lo, hi = min(maxima), max(maxima)
    drift = hi / lo if lo > 0 else (1.0 if hi == 0 else float("inf"))
    dmax = cfg.tolerance("drift_max", _p(cfg, "drift_max", 2.0))
    if inputs == "indicator":
        grows = all(b > a for a, b in zip(maxima, maxima[1:]))
        rep.gate("ratio_grows_with_resolution", grows, maxima[-1] / maxima[0] if maxima[0] else 0.0, 1.0)
    else:
        rep.gate("max_ratio_drift", drift < dmax, drift, dmax)
    return rep


def composition_study(cfg=None):
    """Trivial-case exactness, quadrature refinement, and remainder slopes for ``M = 1, 2``.

    Params: ``n_points`` (4096), ``period`` (16 pi), ``radius`` (4), ``m`` (-0.5),
    ``epsilon`` (0.25), ``t_min`` (2^-8), ``t_max`` (2^-2), ``per_octave`` (2),
    ``slope_min`` (0.20), ``refine_tol`` (1e-9), ``trivial_tol`` (1e-10).
    """
    cfg = _cfg(cfg, "composition")
    N = int(_p(cfg, "n_points", 4096))
    L = float(_p(cfg, "period", 16 * np.pi))
    R = float(_p(cfg, "radius", 4.0))
    m, eps = float(_p(cfg, "m", -0.5)), float(_p(cfg, "epsilon", 0.25))
    scales = ScaleGrid.dyadic(float(_p(cfg, "t_max", 2.0 ** -2)), float(_p(cfg, "t_min", 2.0 ** -8)),
                              int(_p(cfg, "per_octave", 2)), endpoint_halving=False)
    spec = GridSpec(1, N, L)
    rho = GaussianSymbol()
    rep = NormReport("composition", {"n_points": N, "period": L, "radius": R, "m": m, "epsilon": eps,
                                     "t_values": scales.t_values.tolist(), "rho": "gaussian"})

    # trivial case: linear phase, x-independent amplitude
    at = high_frequency_amplitude(1, m, spatial=False)
    st = CompositionStudy(rho, at, make_phase("linear"), spec, M=1, epsilon=eps, t_values=scales)
    xis = snap_frequencies(spec, [np.geomspace(2.0, spec.nyquist / 8, 16)])
    triv = 0.0
    for tv in scales.t_values:
        for xi in xis[0]:
            ex = exact_sigma(st, tv, [xi])
            ref = rho(tv * np.array([[xi]])) * at(np.zeros((1, 1)), np.array([[xi]]))
            triv = max(triv, float(np.max(np.abs(ex - ref))))
    try:
        remainder_decay(st)
        triv_raises = False
    except ArithmeticError:
        triv_raises = True
    rep.add_row(N, cfg.seed, quantity="trivial_max_error", value=triv)
    ttol = cfg.tolerance("trivial_tol", _p(cfg, "trivial_tol", 1e-10))
    rep.gate("trivial_exact", triv <= ttol and triv_raises, triv, ttol, raises_unmeasurable=triv_raises)

    a = high_frequency_amplitude(1, m, radius=R)
    phi = make_phase("halfwave")
    s1 = CompositionStudy(rho, a, phi, spec, M=1, epsilon=eps, t_values=scales)
    s_fine = CompositionStudy(rho, a, phi, spec.refined(), M=1, epsilon=eps, t_values=scales)
    ref_err = 0.0
    for tv in (scales.t_values[0], scales.t_values[-1]):
        for xi in xis[0]:
            ref_err = max(ref_err, float(np.max(np.abs(exact_sigma(s_fine, tv, [xi])[::2] - exact_sigma(s1, tv, [xi])))))
    rtol = cfg.tolerance("refine_tol", _p(cfg, "refine_tol", 1e-9))
    rep.gate("quadrature_refinement", ref_err <= rtol, ref_err, rtol)

    fits = {}
    for M in (1, 2):
        s = CompositionStudy(rho, a, phi, spec, M=M, epsilon=eps, t_values=scales)
        fit = remainder_decay(s)
        fits[M] = fit
        for tv, res in zip(fit.t_values, fit.residuals):
            rep.add_row(N, cfg.seed, quantity="residual", M=M, t=tv, value=res)
        rep.notes[f"sigma_alpha_envelope_M{M}"] = fit.envelope_constants
    smin = cfg.tolerance("slope_min", _p(cfg, "slope_min", 0.20))
    rep.gate("remainder_slope_M1", fits[1].slope >= smin, fits[1].slope, smin)
    t = np.array(fits[1].t_values)
    r1, r2 = np.array(fits[1].residuals), np.array(fits[2].residuals)
    sel = t <= 2.0 ** -4 * (1 + 1e-12)
    rep.gate("M2_below_M1", bool(np.all(r2[sel] <= r1[sel])), float(np.max(r2[sel] / r1[sel])), 1.0)
    rep.notes["slopes"] = {"M1": fits[1].slope, "M2": fits[2].slope}
    return rep


def kernel_constants(dims=(1, 2), t_values=None, m2=-0.5, kappa=1.0 / 8, window=None, points=None):
    """Cancellation, decay and Lipschitz constants of ``K_t`` on grids of period ``t * window``."""
    t_values = t_values or [2.0 ** -k for k in range(2, 7)]
    out = []
    for n in dims:
        W = (window or {1: 256.0, 2: 64.0})[n] if isinstance(window or {}, dict) else window
        Np = (points or {1: 4096, 2: 512})[n] if isinstance(points or {}, dict) else points
        for t in t_values:
            spec = GridSpec(n, Np, t * W)
            K = build_kt(t, spec, m2, kappa)
            cancel, l1 = kt_cancellation(K)
            out.append({"dim": n, "t": t, "resolution": Np, "cancellation": cancel, "l1": l1,
                        "decay_constant": kt_decay_constant(K), "lipschitz_constant": kt_lipschitz_constant(K)})
    return out


def _drift(vals):
    vals = np.asarray(vals, dtype=float)
    return float(vals.max() / vals.min()) if vals.min() > 0 else float("inf")


def rt_constants(t_values=None, resolutions=(2048, 4096), window=256.0, m2=-0.5, kappa=1.0 / 8,
                 trials=8, seed=0):
    """Empirical ``R_t`` constants on ``L^1``, ``L^2``, ``L^inf`` and BMO in one dimension.

    Each constant is the largest ratio over a fixed input family: seeded
    band-limited functions, narrow bumps, windowed ``log|x/t - c|`` samples,
    and ``sign K_t(-x)`` (the ``L^inf`` extremizer, also used for BMO).

    Grids have period ``t * window`` and inputs are fixed in ``x / t`` units,
    so the constants measure the scale-invariant operator family.
    """
    t_values = t_values or [2.0 ** -k for k in range(2, 7)]
    rows = []
    for N in resolutions:
        for t in t_values:
            spec = GridSpec(1, N, t * window)
            K = build_kt(t, spec, m2, kappa)
            ref_spec = GridSpec(1, N, window)
            children = np.random.SeedSequence(seed).spawn(trials)
            rand = [GridFunction(spec, random_band_limited(np.random.default_rng(c), ref_spec, 16.0).real)
                    for c in children]
            x = spec.coordinates()[0] / t
            bumps = [GridFunction(spec, np.exp(-((x - c) / w) ** 2)) for c in (0.0, 3.0) for w in (0.05, 0.2)]
            ext = GridFunction(spec, np.sign(K.samples[::-1]))
            row = {"t": t, "resolution": N, "l1_kernel": kt_cancellation(K)[1]}
            for qn, q in (("q1", 1.0), ("q2", 2.0), ("qinf", np.inf)):
                family = rand + bumps + ([ext] if q == np.inf else [])
                row[qn] = max(lebesgue_norm(apply_rt(g, K), q) / lebesgue_norm(g, q) for g in family)
            logs = []
            for c in (0.0, 5.0, -7.0):
                base = log_sample(GridSpec(1, N, window), center=c, floor=window / N)
                logs.append(GridFunction(spec, base.samples))
            bmo_ratio = lambda g: lebesgue_norm(apply_rt(g, K), np.inf) / bmo_norm(g)
            row["bmo_log_only"] = max(bmo_ratio(g) for g in logs)
            # the L^inf extremizer lies in BMO and keeps the family sup close to the true constant
            row["bmo"] = max(row["bmo_log_only"], bmo_ratio(ext))
            rows.append(row)
    return rows


def kernel_check(cfg=None):
    """``K_t`` invariants and ``R_t`` constants.

    Params: ``m2`` (-0.5), ``kappa`` (1/8), ``dims`` ([1, 2]), ``cancel_tol`` (1e-8),
    ``drift_max`` (1.25), ``rt_resolutions`` ([2048, 4096]).
    """
    cfg = _cfg(cfg, "kernel-check")
    m2, kappa = float(_p(cfg, "m2", -0.5)), float(_p(cfg, "kappa", 1.0 / 8))
    rep = NormReport("kernel-check", {"m2": m2, "kappa": kappa, "kappa1": 1.0, "delta": -m2 / 2})
    ctol = cfg.tolerance("cancel_tol", _p(cfg, "cancel_tol", 1e-8))
    dmax = cfg.tolerance("drift_max", _p(cfg, "drift_max", 1.25))
    krows = kernel_constants(tuple(_p(cfg, "dims", [1, 2])), m2=m2, kappa=kappa)
    for r in krows:
        rep.add_row(r["resolution"], cfg.seed, **{k: v for k, v in r.items() if k != "resolution"})
    worst = max(r["cancellation"] / r["l1"] for r in krows)
    rep.gate("kernel_cancellation", worst <= ctol, worst, ctol)
    for n in sorted({r["dim"] for r in krows}):
        sub = [r for r in krows if r["dim"] == n]
        d1, d2 = _drift([r["decay_constant"] for r in sub]), _drift([r["lipschitz_constant"] for r in sub])
        rep.gate(f"decay_constant_stable_dim{n}", d1 < dmax, d1, dmax)
        rep.gate(f"lipschitz_constant_stable_dim{n}", d2 < dmax, d2, dmax)
    rrows = rt_constants(resolutions=tuple(_p(cfg, "rt_resolutions", [2048, 4096])), m2=m2, kappa=kappa,
                         seed=cfg.seed)
    for r in rrows:
        rep.add_row(r["resolution"], cfg.seed, quantity="rt_constants",
                    **{k: v for k, v in r.items() if k != "resolution"})
    for key in ("q1", "q2", "qinf", "bmo"):
        d = _drift([r[key] for r in rrows])
        rep.gate(f"rt_constant_stable_{key}", d < dmax, d, dmax)
    return rep


def _random_sparse_measure(rng, spec, scales, cells):
    d = np.zeros((len(scales),) + spec.shape)
    idx = rng.integers(0, spec.points_per_axis, size=(cells, spec.dim))
    ti = rng.integers(0, len(scales), size=cells)
    for a, b in zip(ti, idx):
        d[(a,) + tuple(b)] += rng.random()
    return CarlesonMeasure(spec, scales, d)


def carleson_check(cfg=None):
    """Carleson smoothing ratios: single-cell enumeration and random sparse measures.

    Params: ``dims`` ([1, 2]), ``points`` ({1: 256, 2: 64}), ``draws`` (50), ``cells`` (100),
    ``t_min`` (2^-2), ``positions`` (8).
    """
    cfg = _cfg(cfg, "carleson-check")
    dims = _p(cfg, "dims", [1, 2])
    pts = {int(k): int(v) for k, v in _p(cfg, "points", {1: 256, 2: 64}).items()}
    draws, cells = int(_p(cfg, "draws", 50)), int(_p(cfg, "cells", 100))
    t_min = float(_p(cfg, "t_min", 2.0 ** -2))
    positions = int(_p(cfg, "positions", 8))
    rep = NormReport("carleson-check", {"dims": dims, "points": pts, "draws": draws, "cells": cells,
                                        "t_min": t_min})
    for n in dims:
        N = pts[n]
        spec = GridSpec(n, N)
        scales = ScaleGrid.dyadic(1.0, t_min, 4)
        K = kernel_family(spec, scales)
        single = []
        for pos in np.linspace(0, N - 1, positions).astype(int):
            for ti in range(len(scales)):
                d = np.zeros((len(scales),) + spec.shape)
                d[(ti,) + (pos,) * n] = 1.0
                mu = CarlesonMeasure(spec, scales, d)
                single.append(carleson_norm(smooth_carleson(mu, K)) / carleson_norm(mu))
        c_single = max(single)
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, n]))
        ratios = []
        for _ in range(draws):
            mu = _random_sparse_measure(rng, spec, scales, cells)
            ratios.append(carleson_norm(smooth_carleson(mu, K)) / carleson_norm(mu))
        rep.add_row(N, cfg.seed, dim=n, single_cell_constant=c_single, single_cell_min=min(single),
                    random_max=max(ratios), random_median=float(np.median(ratios)))
        rep.gate(f"random_ratio_bounded_dim{n}", max(ratios) <= c_single, max(ratios), c_single)
        # |Q_t f|^2 dx dt/t for a log-type BMO sample
        for Nr in (N, 2 * N):
            sr = GridSpec(n, Nr)
            f = log_sample(sr)
            mu = CarlesonMeasure.from_band_energy(f, ScaleGrid.dyadic(1.0, sr.spacing, 4))
            rep.add_row(Nr, cfg.seed, dim=n, quantity="band_energy_carleson_over_bmo2",
                        value=carleson_norm(mu) / bmo_norm(f) ** 2)
    return rep


def calderon_check(n_points=1024, period=16 * np.pi, samples=64):
    """Max deviation of the continuous (quadrature and adaptive) and discrete identities."""
    spec = GridSpec(1, n_points, period)
    fam = build_family()
    r = np.geomspace(0.1, spec.nyquist / 4, samples)
    cont = float(np.max(np.abs(calderon_sum(fam, r) - 1)))
    quad = float(np.max(np.abs(calderon_integral(fam, r) - 1)))
    disc = float(np.max(np.abs(discrete_partition_sum(build_family(normalization="discrete"), r) - 1)))
    return {"continuous_quadrature": cont, "continuous_adaptive": quad, "discrete": disc}


def hilbert_check(n_points=4096, period=16 * np.pi, window=4.0, gap=0.1):
    """Filtered spectral Hilbert transform of ``1_[-1,1]`` against ``(1/pi) log|(x+1)/(x-1)|``."""
    spec = GridSpec(1, n_points, period)
    f = cell_fraction(spec, -1.0, 1.0)
    filt = exponential_filter(spec)
    H = apply_multiplier(f, lambda xi: -1j * np.sign(xi[0]) * filt(xi)).real
    x = spec.axis()
    mask = (np.abs(x - 1) > gap) & (np.abs(x + 1) > gap) & (np.abs(x) <= window)
    ref = np.log(np.abs((x[mask] + 1) / (x[mask] - 1))) / np.pi
    return float(np.max(np.abs(H[mask] - ref)))


def _m_fn(t, x):
    chi = _chi0(2.0)(x)
    return chi * (1 + 0.5 * np.sin(x[0] + t))


def paraproduct_symbol_check(shifts=range(5), max_order=2, xi_max=64.0, dim=1):
    """Seminorms of the paraproduct symbol over ``(u, v)`` and the fitted polynomial degree."""
    fam = build_family()
    scales = ScaleGrid.dyadic(1.0, 2.0 ** -10, 4)
    combos = []
    for oa in range(max_order + 1):
        for ob in range(max_order + 1 - oa):
            for alpha in multi_indices(2 * dim, oa):
                for beta in multi_indices(dim, ob):
                    combos.append((alpha, beta))
    table = []
    for u in shifts:
        for v in shifts:
            lam = paraproduct_symbol(_m_fn, [float(u)] * dim, [float(v)] * dim, dim, fam, scales)
            for alpha, beta in combos:
                c = seminorm_estimate(lam, alpha, beta, xi_max=xi_max, n_radii=12, n_directions=16, n_x=5)
                table.append({"u": u, "v": v, "alpha": list(alpha), "beta": list(beta), "constant": c})
    degrees = {}
    for alpha, beta in combos:
        sub = [r for r in table if r["alpha"] == list(alpha) and r["beta"] == list(beta)]
        z = np.log(1 + np.array([r["u"] + r["v"] for r in sub], dtype=float))
        c = np.array([r["constant"] for r in sub])
        degrees[f"{tuple(alpha)}|{tuple(beta)}"] = float(np.polyfit(z, np.log(c), 1)[0]) if np.all(c > 0) else 0.0
    return table, degrees


def embedding_check(samples=100, seed=0, dims=(1, 2), points=None):
    """Average bound ``|Avg_{Q_R} a| <= 2^(2n)/(2^n - 1) ||a||_BMO`` on random supported samples."""
    points = points or {1: 256, 2: 64}
    out = []
    rng = np.random.default_rng(np.random.SeedSequence([seed, 31]))
    for n in dims:
        spec = GridSpec(n, points[n])
        R = spec.period / 16
        x = spec.coordinates()
        inside = np.all((x >= -R) & (x < R), axis=0)
        for _ in range(samples):
            kind = rng.integers(3)
            if kind == 0:
                vals = rng.standard_normal(spec.shape) + rng.normal(0, 3)
            elif kind == 1:
                vals = rng.exponential(1.0, spec.shape) * rng.choice([-1, 1])
            else:
                vals = random_band_limited(rng, GridSpec(n, points[n]), 1.0).real + rng.normal(0, 2)
            a = GridFunction(spec, vals * inside)
            chk = bmo_embedding_check(a, R, 4.0)
            out.append({"dim": n, "average": chk.average, "bound": chk.average_bound, "ratio_q4": chk.ratio,
                        "holds": chk.average <= chk.average_bound})
    return out


def oracle_equivalence(seed=0):
    """Fast path against direct summation for every catalog phase, linear and bilinear."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 11]))
    worst = {}
    for n, N in ((1, 256), (2, 16)):
        spec = GridSpec(n, N)
        f = GridFunction(spec, rng.standard_normal(spec.shape) + 1j * rng.standard_normal(spec.shape))
        g = GridFunction(spec, rng.standard_normal(spec.shape))
        for name in ("linear", "halfwave", "tilt") + (("sine",) if n == 1 else ()):
            ph = make_phase(name, n)
            a1 = make_amplitude("order_m_product", n, 1, m=-0.5)
            T = LinearFIO(a1, ph)
            e1 = np.max(np.abs(apply_linear(T, f, "fast").samples - apply_linear(T, f, "direct").samples))
            a2 = make_amplitude("order_m_product", n, 2, m=-0.5)
            B = BilinearFIO(a2, ph, make_phase("linear", n))
            e2 = np.max(np.abs(apply_bilinear(B, f, g, "fast").samples - apply_bilinear(B, f, g, "direct").samples))
            worst[f"dim{n}:{name}"] = float(max(e1, e2))
    return worst


def _calderon_report(cfg):
    cfg = _cfg(cfg, "calderon-check")
    vals = calderon_check()
    rep = NormReport("calderon-check", {"samples": 64})
    rep.add_row(1024, cfg.seed, **vals)
    rep.gate("continuous", vals["continuous_quadrature"] <= 1e-6, vals["continuous_quadrature"], 1e-6)
    rep.gate("discrete", vals["discrete"] <= 1e-12, vals["discrete"], 1e-12)
    h = hilbert_check()
    rep.add_row(4096, cfg.seed, quantity="hilbert_max_error", value=h)
    rep.gate("hilbert_closed_form", h <= 5e-3, h, 5e-3)
    return rep


def _paraproduct_report(cfg):
    cfg = _cfg(cfg, "paraproduct-check")
    table, degrees = paraproduct_symbol_check()
    rep = NormReport("paraproduct-check", {"shifts": list(range(5))})
    for r in table:
        rep.add_row(16, cfg.seed, **r)
    rep.notes["fitted_degrees"] = degrees
    c = max(r["constant"] for r in table)
    rep.gate("finite", np.isfinite(c), c, None)
    d = max(degrees.values())
    rep.gate("polynomial_degree", d <= 3, d, 3)
    return rep


def _embedding_report(cfg):
    cfg = _cfg(cfg, "embedding-check")
    rows = embedding_check(seed=cfg.seed)
    rep = NormReport("embedding-check", {"samples": 100})
    for r in rows:
        rep.add_row(256 if r["dim"] == 1 else 64, cfg.seed, **r)
    rep.gate("average_bound", all(r["holds"] for r in rows), max(r["average"] / r["bound"] for r in rows), 1.0)
    return rep


def _oracle_report(cfg):
    cfg = _cfg(cfg, "oracle-check")
    worst = oracle_equivalence(cfg.seed)
    rep = NormReport("oracle-check", {})
    for k, v in sorted(worst.items()):
        rep.add_row(256 if k.startswith("dim1") else 16, cfg.seed, case=k, max_error=v)
    w = max(worst.values())
    rep.gate("fast_matches_direct", w <= 1e-9, w, 1e-9)
    return rep


EXPERIMENTS = {
    "bmo-counterexample": counterexample_bmo,
    "lp-counterexample": counterexample_lp,
    "fourier-series": fourier_series_localized,
    "sweep": boundedness_sweep,
    "composition": composition_study,
    "kernel-check": kernel_check,
    "carleson-check": carleson_check,
    "calderon-check": _calderon_report,
    "paraproduct-check": _paraproduct_report,
    "embedding-check": _embedding_report,
    "oracle-check": _oracle_report,
}


def run_experiment(cfg):
    try:
        fn = EXPERIMENTS[cfg.experiment]
    except KeyError:
        raise KeyError(f"unknown experiment {cfg.experiment!r}; choose from {sorted(EXPERIMENTS)}") from None
    return fn(cfg)
