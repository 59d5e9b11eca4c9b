"""Signal fidelity measures: SNR (variance ratio, dB), SNR gain and RMSE."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SignalLengthError, TooFewSamplesError

__all__ = ["MetricSample", "snr", "snr_gain", "rmse", "evaluate", "format_db"]


def _pair(x, xhat):
    x = np.asarray(x, dtype=float)
    xhat = np.asarray(xhat, dtype=float)
    if x.shape != xhat.shape:
        raise SignalLengthError(f"length mismatch: {x.shape[-1]} vs {xhat.shape[-1]}")
    return x, xhat


def snr(x, xhat) -> float:
    """``10 log10(var(x) / var(x - xhat))`` with n - 1 variances.

    Returns ``inf`` when the error has zero variance (including a pure
    constant offset).
    """
    x, xhat = _pair(x, xhat)
    if x.size < 2:
        raise TooFewSamplesError("SNR needs at least 2 samples")
    err_var = float(np.var(x - xhat, ddof=1))
    if err_var == 0.0:
        return math.inf
    return 10.0 * math.log10(float(np.var(x, ddof=1)) / err_var)


def snr_gain(x, y_noisy, xhat) -> float:
    return snr(x, xhat) - snr(x, y_noisy)


def rmse(x, xhat) -> float:
    x, xhat = _pair(x, xhat)
    return float(np.sqrt(np.mean((x - xhat) ** 2)))


@dataclass(frozen=True)
class MetricSample:
    snr_db: float
    snr_gain_db: float
    rmse: float


def evaluate(x, y_noisy, xhat) -> MetricSample:
    out = snr(x, xhat)
    return MetricSample(snr_db=out, snr_gain_db=out - snr(x, y_noisy), rmse=rmse(x, xhat))


def format_db(value: float) -> str:
    """CSV rendering that spells infinities as ``inf``/``-inf``."""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(float(value))
