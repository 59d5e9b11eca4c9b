"""Threshold selection by iterated Shewhart-style control limits.

For each detail level j the coefficients are treated as a control chart with
center line 0 and limits ``+-d_j * s_j``, where ``s_j`` is the corrected
sample standard deviation of the coefficients still in the chart.
Coefficients outside the limits are dropped and the limits re-estimated until
every remaining coefficient is in control.  The final upper limit is the
threshold for that level.  The significance level grows linearly with the
scale, ``alpha_j = j * alpha1``, so the limit distance ``d_j`` shrinks on
coarser levels.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, TooFewSamplesError
from .shrinkage import MODES, ThresholdPlan
from .wavelets import MultiresDecomposition

__all__ = [
    "DEFAULT_ALPHA1",
    "SMOOTH_ALPHA1",
    "SpcConfig",
    "ControlLimits",
    "SpcLevelTrace",
    "norm_ppf",
    "erfcinv",
    "control_distance",
    "level_distances",
    "corrected_std",
    "spc_iterate_level",
    "spcshrink",
    "save_traces_csv",
]

DEFAULT_ALPHA1 = 0.015
SMOOTH_ALPHA1 = 0.010

# Wichura's AS 241 (PPND16) rational approximations, ~1e-16 relative accuracy.
_A = (3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3)
_B = (1.0, 4.2313330701600911252e1, 6.8718700749205790830e2, 5.3941960214247511077e3,
      2.1213794301586595867e4, 3.9307895800092710610e4, 2.8729085735721942674e4,
      5.2264952788528545610e3)
_C = (1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4)
_D = (1.0, 2.05319162663775882187e0, 1.67638483018380384940e0, 6.89767334985100004550e-1,
      1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
      1.05075007164441684324e-9)
_E = (6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
      7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
      2.04426310338993978564e-15)


def _poly(coeffs, x):
    acc = np.zeros_like(x) + coeffs[-1]
    for c in coeffs[-2::-1]:
        acc = acc * x + c
    return acc


def norm_ppf(p):
    """Standard normal quantile function, vectorized over ``p`` in (0, 1).

    Returns -inf/+inf at 0/1 and nan outside [0, 1].
    """
    p = np.asarray(p, dtype=float)
    scalar = p.ndim == 0
    p = np.atleast_1d(p)
    q = p - 0.5
    out = np.full(p.shape, np.nan)

    central = np.abs(q) <= 0.425
    if central.any():
        qc = q[central]
        r = 0.180625 - qc * qc
        out[central] = qc * _poly(_A, r) / _poly(_B, r)

    tail = ~central & (p > 0) & (p < 1)
    if tail.any():
        pt = p[tail]
        qt = q[tail]
        r = np.sqrt(-np.log(np.minimum(pt, 1.0 - pt)))
        near = r <= 5.0
        val = np.empty_like(r)
        rn = r[near] - 1.6
        val[near] = _poly(_C, rn) / _poly(_D, rn)
        rf = r[~near] - 5.0
        val[~near] = _poly(_E, rf) / _poly(_F, rf)
        out[tail] = np.where(qt < 0, -val, val)

    out[p == 0] = -np.inf
    out[p == 1] = np.inf
    return float(out[0]) if scalar else out


def erfcinv(y):
    """Inverse complementary error function on (0, 2)."""
    return -norm_ppf(np.asarray(y, dtype=float) / 2.0) / math.sqrt(2.0)


def control_distance(alpha: float) -> float:
    """Half-width ``d = sqrt(2) * erfcinv(alpha)`` of a two-sided band of size ``alpha``.

    >>> round(control_distance(0.05), 2)
    1.96
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"significance level must lie in (0, 1), got {alpha}")
    # -ppf(alpha/2) keeps full relative precision for small alpha
    return float(-norm_ppf(alpha / 2.0))


@dataclass(frozen=True)
class SpcConfig:
    alpha1: float = DEFAULT_ALPHA1
    levels: int = 5
    mode: str = "soft"

    def __post_init__(self):
        if not isinstance(self.levels, (int, np.integer)) or self.levels < 1:
            raise ConfigError(f"levels must be a positive integer, got {self.levels!r}")
        if not (self.alpha1 > 0.0 and self.alpha1 * self.levels < 1.0):
            raise ConfigError(
                f"alpha1={self.alpha1} with levels={self.levels} gives "
                f"alpha_{self.levels}={self.alpha1 * self.levels:g}; "
                "need 0 < alpha1 and alpha1 * levels < 1"
            )
        if self.mode not in MODES:
            raise ConfigError(f"unknown threshold mode {self.mode!r}")

    def alphas(self) -> tuple[float, ...]:
        return tuple(j * self.alpha1 for j in range(1, self.levels + 1))


def level_distances(config: SpcConfig) -> tuple[float, ...]:
    """Control distances ``d_1 > d_2 > ... > d_J0`` for ``alpha_j = j * alpha1``."""
    return tuple(control_distance(a) for a in config.alphas())


@dataclass(frozen=True)
class ControlLimits:
    lcl: float
    cl: float
    ucl: float

    @classmethod
    def symmetric(cls, d: float, s: float) -> "ControlLimits":
        ucl = d * s
        return cls(lcl=-ucl, cl=0.0, ucl=ucl)


@dataclass(frozen=True)
class SpcLevelTrace:
    """Audit record of one level's limit iteration.

    ``s_sequence[i]`` and ``surviving_counts[i]`` describe iteration i: the
    coefficient count the standard deviation was computed over, and that
    value.  ``final_survivors`` is the count left after the last exclusion
    pass (below 2 only when the iteration ran out of data).
    """

    level: int
    d: float
    s_sequence: tuple[float, ...]
    surviving_counts: tuple[int, ...]
    lam: float
    converged: bool
    final_survivors: int
    kept: np.ndarray = field(repr=False, compare=False)

    @property
    def iterations(self) -> int:
        return len(self.s_sequence)

    def limits(self) -> list[ControlLimits]:
        return [ControlLimits.symmetric(self.d, s) for s in self.s_sequence]

    def to_rows(self):
        rows = [
            (self.level, i, n, s, self.d * s)
            for i, (n, s) in enumerate(zip(self.surviving_counts, self.s_sequence), start=1)
        ]
        return rows


def corrected_std(coeffs) -> float:
    """Sample standard deviation with the n - 1 denominator."""
    w = np.asarray(coeffs, dtype=float).ravel()
    if w.size < 2:
        raise TooFewSamplesError(f"need at least 2 coefficients, got {w.size}")
    if np.all(w == w[0]):
        # the mean of equal values can round away from them
        return 0.0
    dev = w - w.mean()
    return float(math.sqrt(float(dev @ dev) / (w.size - 1)))


def spc_iterate_level(coeffs, d: float, level: int = 1) -> tuple[float, SpcLevelTrace]:
    """Run the exclude-and-re-estimate loop on one level.

    All coefficients outside ``+-d*s`` are dropped in each pass (a coefficient
    exactly on a limit is in control).  Dropped coefficients never come back.
    The loop stops when a pass drops nothing, or when fewer than two
    coefficients remain, in which case the last valid limit is kept.

    ``s`` usually falls from pass to pass, but the limits are centred at 0
    while ``s`` is taken about the survivors' mean, so it can rise when the
    survivors share a sign.
    """
    w = np.asarray(coeffs, dtype=float).ravel()
    if w.size < 2:
        raise TooFewSamplesError(f"level {level}: need at least 2 coefficients, got {w.size}")
    if not d > 0:
        raise ConfigError(f"control distance must be positive, got {d}")

    absw = np.abs(w)
    kept = np.arange(w.size)
    s_seq: list[float] = []
    counts: list[int] = []
    converged = False
    while True:
        s = corrected_std(w[kept])
        s_seq.append(s)
        counts.append(kept.size)
        inside = absw[kept] <= d * s
        if inside.all():
            converged = True
            break
        kept = kept[inside]
        if kept.size < 2:
            break

    lam = d * s_seq[-1]
    trace = SpcLevelTrace(
        level=level,
        d=float(d),
        s_sequence=tuple(s_seq),
        surviving_counts=tuple(counts),
        lam=lam,
        converged=converged,
        final_survivors=int(kept.size),
        kept=kept,
    )
    return lam, trace


def spcshrink(
    decomp: MultiresDecomposition, config: SpcConfig | float | None = None
) -> tuple[ThresholdPlan, list[SpcLevelTrace]]:
    """Per-level SPC thresholds for every detail level of ``decomp``.

    ``config`` may be a bare alpha1, in which case the level count is taken
    from the decomposition.
    """
    if config is None:
        config = SpcConfig(levels=decomp.levels)
    elif not isinstance(config, SpcConfig):
        config = SpcConfig(alpha1=float(config), levels=decomp.levels)
    if config.levels != decomp.levels:
        raise ConfigError(
            f"config has {config.levels} levels, decomposition has {decomp.levels}"
        )
    lams = []
    traces = []
    for j, (d_j, coeffs) in enumerate(zip(level_distances(config), decomp.details), start=1):
        lam, trace = spc_iterate_level(coeffs, d_j, level=j)
        lams.append(lam)
        traces.append(trace)
    return ThresholdPlan(config.mode, tuple(lams)), traces


def save_traces_csv(traces, path) -> None:
    """Write iteration rows, then one ``final`` row per level carrying lambda."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["level", "iteration", "survivors", "s", "ucl", "lambda"])
        for tr in traces:
            for level, i, n, s, ucl in tr.to_rows():
                writer.writerow([level, i, n, repr(s), repr(ucl), ""])
            writer.writerow([tr.level, "final", tr.final_survivors, "", "", repr(tr.lam)])
