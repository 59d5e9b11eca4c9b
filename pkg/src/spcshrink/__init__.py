"""Wavelet shrinkage denoising with thresholds from iterated control-chart limits."""

__version__ = "0.1.0"

from .denoise import DenoiseResult, Method, denoise, parse_method
from .metrics import rmse, snr, snr_gain
from .shrinkage import (
    ThresholdPlan,
    bayesshrink,
    estimate_sigma,
    hard_threshold,
    smedian,
    soft_threshold,
    sureshrink,
    visushrink,
)
from .signals import NoiseSpec, Signal, add_noise, load_signal_csv, make_test_signal, save_signal_csv
from .spc import (
    SpcConfig,
    SpcLevelTrace,
    control_distance,
    corrected_std,
    level_distances,
    spc_iterate_level,
    spcshrink,
)
from .wavelets import MultiresDecomposition, WaveletFilter, build_filter, forward_dwt, inverse_dwt

__all__ = [
    "DenoiseResult", "Method", "denoise", "parse_method",
    "rmse", "snr", "snr_gain",
    "ThresholdPlan", "bayesshrink", "estimate_sigma", "hard_threshold", "smedian",
    "soft_threshold", "sureshrink", "visushrink",
    "NoiseSpec", "Signal", "add_noise", "load_signal_csv", "make_test_signal", "save_signal_csv",
    "SpcConfig", "SpcLevelTrace", "control_distance", "corrected_std", "level_distances",
    "spc_iterate_level", "spcshrink",
    "MultiresDecomposition", "WaveletFilter", "build_filter", "forward_dwt", "inverse_dwt",
]
