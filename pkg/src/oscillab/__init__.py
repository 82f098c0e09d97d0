"""Spectral toolkit for linear and bilinear Fourier integral operators on periodic grids."""

from .composition import CompositionStudy, GaussianSymbol, exact_sigma, remainder_decay
from .fio import BilinearFIO, LinearFIO, apply_bilinear, apply_linear, hilbert_transform, riesz_transform
from .grid import GridFunction, GridSpec, apply_multiplier, forward_transform, inverse_transform, lebesgue_norm
from .littlewood_paley import LPFamily, ScaleGrid, build_family, build_kt, paraproduct, q_op, p_op
from .phases import Phase, make_phase
from .reports import ExperimentConfig, NormReport, emit_report
from .spaces import CarlesonMeasure, bmo_norm, carleson_norm, hardy_norm
from .symbols import Amplitude, make_amplitude, seminorm_estimate

__version__ = "0.1.0"

__all__ = [
    "Amplitude", "BilinearFIO", "CarlesonMeasure", "CompositionStudy", "ExperimentConfig", "GaussianSymbol",
    "GridFunction", "GridSpec", "LPFamily", "LinearFIO", "NormReport", "Phase", "ScaleGrid", "apply_bilinear",
    "apply_linear", "apply_multiplier", "bmo_norm", "build_family", "build_kt", "carleson_norm", "emit_report",
    "exact_sigma", "forward_transform", "hardy_norm", "hilbert_transform", "inverse_transform", "lebesgue_norm",
    "make_amplitude", "make_phase", "p_op", "paraproduct", "q_op", "remainder_decay", "riesz_transform",
    "seminorm_estimate", "__version__",
]
