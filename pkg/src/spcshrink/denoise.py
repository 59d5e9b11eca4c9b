"""End-to-end wavelet shrinkage: transform, threshold details, reconstruct."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .shrinkage import MODES, ThresholdPlan, bayesshrink, smedian, sureshrink, visushrink
from .spc import DEFAULT_ALPHA1, SpcConfig, SpcLevelTrace, spcshrink
from .wavelets import MultiresDecomposition, build_filter, forward_dwt, inverse_dwt

__all__ = ["Method", "parse_method", "parse_alpha", "select_plan", "denoise", "DenoiseResult"]

_RULES = {
    "visu": visushrink,
    "sure": sureshrink,
    "bayes": bayesshrink,
    "smedian": smedian,
}

_ALIASES = {
    "visushrink": "visu",
    "universal": "visu",
    "sureshrink": "sure",
    "bayesshrink": "bayes",
    "s-median": "smedian",
    "spcshrink": "spc",
}


@dataclass(frozen=True)
class Method:
    """A threshold rule name plus alpha1 for the SPC rule."""

    name: str
    alpha1: float | None = None

    @property
    def label(self) -> str:
        if self.name == "spc":
            return f"spc({self.alpha1 * 100:g}%)"
        return self.name

    def __str__(self):
        return self.label


def parse_alpha(text) -> float:
    """Accept ``0.015``, ``1.5%`` or a bare float."""
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip()
    try:
        if s.endswith("%"):
            return float(s[:-1]) / 100.0
        return float(s)
    except ValueError:
        raise ConfigError(f"cannot parse significance level {text!r}") from None


_SPC_RE = re.compile(r"^(?P<name>[a-z\-]+)\s*(?:[=:]\s*(?P<a>[^()]+)|\((?P<b>[^()]+)\))?$")


def parse_method(spec) -> Method:
    """Parse ``visu``, ``sure``, ``bayes``, ``smedian``, ``spc``, ``spc=0.015``,
    ``spc=1.5%`` or ``spc(1.5%)``."""
    if isinstance(spec, Method):
        return spec
    m = _SPC_RE.match(str(spec).strip().lower())
    if not m:
        raise ConfigError(f"cannot parse method {spec!r}")
    name = _ALIASES.get(m["name"], m["name"])
    arg = m["a"] or m["b"]
    if name == "spc":
        alpha = parse_alpha(arg) if arg is not None else DEFAULT_ALPHA1
        if not 0.0 < alpha < 1.0:
            raise ConfigError(f"alpha1 must lie in (0, 1), got {alpha}")
        return Method("spc", alpha)
    if name not in _RULES:
        raise ConfigError(
            f"unknown method {spec!r}; choose from visu, sure, bayes, smedian, spc[=alpha1]"
        )
    if arg is not None:
        raise ConfigError(f"method {name!r} takes no parameter")
    return Method(name)


def select_plan(
    decomp: MultiresDecomposition, method, mode: str = "soft"
) -> tuple[ThresholdPlan, list[SpcLevelTrace] | None]:
    method = parse_method(method)
    if mode not in MODES:
        raise ConfigError(f"unknown threshold mode {mode!r}")
    if method.name == "spc":
        return spcshrink(decomp, SpcConfig(method.alpha1, decomp.levels, mode))
    return _RULES[method.name](decomp, mode=mode), None


@dataclass(frozen=True)
class DenoiseResult:
    denoised: np.ndarray
    plan: ThresholdPlan
    decomposition_before: MultiresDecomposition
    decomposition_after: MultiresDecomposition
    method: str
    traces: list[SpcLevelTrace] | None = None


def denoise(signal, method="spc", wavelet="db8", levels: int = 5, mode: str = "soft") -> DenoiseResult:
    """Denoise a power-of-two length signal with the named threshold rule."""
    wf = build_filter(wavelet)
    method = parse_method(method)
    if method.name == "spc":
        # validate alpha1 against the depth before doing any work
        SpcConfig(method.alpha1, levels, mode)
    before = forward_dwt(np.asarray(signal, dtype=float), wf, levels)
    plan, traces = select_plan(before, method, mode)
    after = plan.apply(before)
    out = inverse_dwt(after, wf)
    return DenoiseResult(
        denoised=out,
        plan=plan,
        decomposition_before=before,
        decomposition_after=after,
        method=method.label,
        traces=traces,
    )
