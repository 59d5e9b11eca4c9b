"""Thresholding functions and the baseline threshold-selection rules.

Every rule maps a :class:`MultiresDecomposition` to a :class:`ThresholdPlan`
holding one threshold per detail level (index 0 = finest level).  The
approximation coefficients are left alone unless a plan says otherwise.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInputError, ThresholdError, ConfigError
from .wavelets import MultiresDecomposition

__all__ = [
    "MAD_SCALE",
    "ThresholdPlan",
    "hard_threshold",
    "soft_threshold",
    "apply_threshold",
    "estimate_sigma",
    "visushrink",
    "sureshrink",
    "sure_risk",
    "bayesshrink",
    "smedian",
]

# median(|Z|) for Z ~ N(0, 1), truncated as is customary for the MAD rule
MAD_SCALE = 0.6745

MODES = ("hard", "soft")


def _check_lambda(lam):
    if np.any(np.asarray(lam) < 0):
        raise ThresholdError(f"threshold must be non-negative, got {lam}")


def hard_threshold(w, lam):
    """Keep ``w`` where ``|w| > lam``, zero elsewhere (boundary maps to 0)."""
    _check_lambda(lam)
    w = np.asarray(w, dtype=float)
    out = np.where(np.abs(w) > lam, w, 0.0)
    return float(out) if out.ndim == 0 else out


def soft_threshold(w, lam):
    """``sign(w) * (|w| - lam)`` where ``|w| > lam``, zero elsewhere."""
    _check_lambda(lam)
    w = np.asarray(w, dtype=float)
    out = np.sign(w) * np.maximum(np.abs(w) - lam, 0.0)
    # maximum() already yields +0.0 at the boundary; normalize -0.0 too
    out = out + 0.0
    return float(out) if out.ndim == 0 else out


def apply_threshold(w, lam, mode="soft"):
    if mode == "soft":
        return soft_threshold(w, lam)
    if mode == "hard":
        return hard_threshold(w, lam)
    raise ConfigError(f"unknown threshold mode {mode!r}; use 'hard' or 'soft'")


@dataclass(frozen=True)
class ThresholdPlan:
    """Per-level thresholds; ``per_level[0]`` applies to level j = 1."""

    mode: str
    per_level: tuple[float, ...]
    shrink_approx: bool = False
    approx_lambda: float = 0.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown threshold mode {self.mode!r}")
        if len(self.per_level) == 0:
            raise ConfigError("plan needs at least one level")
        if any(not np.isfinite(l) or l < 0 for l in self.per_level):
            raise ThresholdError(f"invalid thresholds {self.per_level}")
        object.__setattr__(self, "per_level", tuple(float(l) for l in self.per_level))

    @property
    def levels(self) -> int:
        return len(self.per_level)

    def with_mode(self, mode: str) -> "ThresholdPlan":
        return ThresholdPlan(mode, self.per_level, self.shrink_approx, self.approx_lambda)

    def apply(self, decomp: MultiresDecomposition) -> MultiresDecomposition:
        if decomp.levels != self.levels:
            raise ConfigError(
                f"plan has {self.levels} levels, decomposition has {decomp.levels}"
            )
        details = [apply_threshold(d, lam, self.mode) for d, lam in zip(decomp.details, self.per_level)]
        approx = decomp.approx
        if self.shrink_approx:
            approx = apply_threshold(approx, self.approx_lambda, self.mode)
        return MultiresDecomposition(
            details=tuple(np.asarray(d) for d in details),
            approx=np.asarray(approx),
            original_length=decomp.original_length,
        )

    def to_rows(self):
        return [(j, lam, self.mode) for j, lam in enumerate(self.per_level, start=1)]

    def save_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["level", "lambda", "mode"])
            for j, lam, mode in self.to_rows():
                writer.writerow([j, repr(lam), mode])

    @classmethod
    def load_csv(cls, path) -> "ThresholdPlan":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise EmptyInputError(f"{path}: no plan rows")
        rows.sort(key=lambda r: int(r["level"]))
        modes = {r["mode"] for r in rows}
        if len(modes) != 1:
            raise ConfigError(f"{path}: mixed modes {sorted(modes)}")
        return cls(modes.pop(), tuple(float(r["lambda"]) for r in rows))


def estimate_sigma(finest_details) -> float:
    """Robust noise scale ``median(|w|) / 0.6745`` from the finest details."""
    w = np.asarray(finest_details, dtype=float).ravel()
    if w.size == 0:
        raise EmptyInputError("cannot estimate sigma from an empty sequence")
    return float(np.median(np.abs(w)) / MAD_SCALE)


def visushrink(decomp: MultiresDecomposition, mode="soft") -> ThresholdPlan:
    """Universal threshold ``sigma * sqrt(2 ln N)`` on every level."""
    sigma = estimate_sigma(decomp.details[0])
    lam = sigma * np.sqrt(2.0 * np.log(decomp.original_length))
    return ThresholdPlan(mode, (lam,) * decomp.levels)


def sure_risk(x, t) -> float:
    """Stein's unbiased risk of soft thresholding unit-variance data ``x`` at ``t``."""
    x = np.asarray(x, dtype=float)
    return float(x.size - 2 * np.count_nonzero(np.abs(x) <= t) + np.sum(np.minimum(x * x, t * t)))


def _sure_minimizer(x: np.ndarray) -> float:
    # SURE evaluated at every candidate |x_k| via sorted cumulative sums
    a = np.sort(np.abs(x))
    n = a.size
    a2 = a * a
    csum = np.cumsum(a2)
    # number of entries <= a[i], counting the whole run of ties
    last = np.searchsorted(a, a, side="right")
    risks = n - 2 * last + csum[last - 1] + (n - last) * a2
    return float(a[int(np.argmin(risks))])


def sureshrink(decomp: MultiresDecomposition, mode="soft") -> ThresholdPlan:
    """Hybrid SURE threshold per level, capped at the level's universal threshold."""
    sigma = estimate_sigma(decomp.details[0])
    lams = []
    for d in decomp.details:
        n = d.size
        universal = np.sqrt(2.0 * np.log(n)) if n > 1 else 0.0
        if sigma == 0.0:
            lams.append(0.0)
            continue
        x = d / sigma
        sparsity = np.mean(x * x) - 1.0
        critical = np.log2(n) ** 1.5 / np.sqrt(n)
        if sparsity <= critical:
            t = universal
        else:
            t = min(_sure_minimizer(x), universal)
        lams.append(sigma * t)
    return ThresholdPlan(mode, tuple(lams))


def bayesshrink(decomp: MultiresDecomposition, mode="soft") -> ThresholdPlan:
    """``sigma**2 / sigma_x`` per level; levels that look like pure noise are killed."""
    sigma = estimate_sigma(decomp.details[0])
    lams = []
    for d in decomp.details:
        sigma_x = np.sqrt(max(float(np.mean(d * d)) - sigma**2, 0.0))
        if sigma_x > 0:
            lams.append(sigma**2 / sigma_x)
        else:
            lams.append(float(np.max(np.abs(d))))
    return ThresholdPlan(mode, tuple(lams))


def smedian(decomp: MultiresDecomposition, mode="soft", scale: float = 1.0, noise: str = "finest") -> ThresholdPlan:
    """Level-dependent universal threshold ``scale * sigma * sqrt(2 ln N_j)``.

    ``noise="finest"`` (default) takes sigma from the finest-level MAD, shared
    by all levels.  ``noise="level"`` uses each level's own MAD instead; on
    coarse levels that estimate is dominated by signal coefficients and the
    rule then over-smooths badly.
    """
    if scale < 0:
        raise ThresholdError(f"scale must be non-negative, got {scale}")
    if noise not in ("finest", "level"):
        raise ConfigError(f"noise must be 'finest' or 'level', got {noise!r}")
    shared = estimate_sigma(decomp.details[0]) if noise == "finest" else None
    lams = []
    for d in decomp.details:
        sigma_j = shared if shared is not None else estimate_sigma(d)
        lams.append(scale * sigma_j * np.sqrt(2.0 * np.log(d.size)))
    return ThresholdPlan(mode, tuple(lams))
