"""Benchmark test signals, SNR-calibrated Gaussian noise and CSV signal I/O."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, EmptyInputError, SignalLengthError, SignalParseError
from .spc import norm_ppf
from .wavelets import is_power_of_two

__all__ = [
    "RNG_ID",
    "SIGNAL_KINDS",
    "Signal",
    "NoiseSpec",
    "make_test_signal",
    "noise_sigma",
    "gaussian_noise",
    "add_noise",
    "load_signal_csv",
    "save_signal_csv",
]

# Philox4x64 counter-based bit generator keyed through SeedSequence; normals
# are the inverse normal CDF of 53-bit midpoint uniforms.
RNG_ID = "philox4x64+invcdf-as241"

SIGNAL_KINDS = ("blocks", "bumps", "doppler")

# Donoho & Johnstone (1994) test-function parameters.
_POSITIONS = np.array([0.10, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81])
_BLOCK_HEIGHTS = np.array([4.0, -5.0, 3.0, -4.0, 5.0, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2])
_BUMP_HEIGHTS = np.array([4.0, 5.0, 3.0, 4.0, 5.0, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2])
_BUMP_WIDTHS = np.array([0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01, 0.005, 0.008, 0.005])


@dataclass(frozen=True)
class NoiseSpec:
    target_input_snr_db: float
    seed: int
    realized_sigma: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.target_input_snr_db):
            raise ConfigError(f"input SNR must be finite, got {self.target_input_snr_db}")


@dataclass(frozen=True)
class Signal:
    """A finite real sample sequence.  ``noise`` is set on noisy signals."""

    samples: np.ndarray
    name: str | None = None
    noise: NoiseSpec | None = None

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        if x.ndim != 1:
            raise SignalLengthError(f"signal must be one-dimensional, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ConfigError("signal contains NaN or infinite samples")
        x = x.copy()
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)

    def __len__(self):
        return self.samples.size

    def __array__(self, dtype=None, copy=None):
        return self.samples if dtype is None else self.samples.astype(dtype)


def _canonical(kind: str, t: np.ndarray) -> np.ndarray:
    if kind == "blocks":
        steps = (1.0 + np.sign(t[:, None] - _POSITIONS[None, :])) / 2.0
        return steps @ _BLOCK_HEIGHTS
    if kind == "bumps":
        u = np.abs((t[:, None] - _POSITIONS[None, :]) / _BUMP_WIDTHS[None, :])
        return (1.0 + u) ** -4 @ _BUMP_HEIGHTS
    if kind == "doppler":
        return np.sqrt(t * (1.0 - t)) * np.sin(2.0 * np.pi * 1.05 / (t + 0.05))
    raise ConfigError(f"unknown signal kind {kind!r}; choose from {', '.join(SIGNAL_KINDS)}")


def make_test_signal(kind: str, n: int = 4096) -> Signal:
    """Sample a Donoho-Johnstone test function at ``t = (i + 0.5) / n``.

    The result is standardized to zero mean and unit (n - 1) sample variance.
    """
    kind = kind.lower()
    if kind not in SIGNAL_KINDS:
        raise ConfigError(f"unknown signal kind {kind!r}; choose from {', '.join(SIGNAL_KINDS)}")
    if not isinstance(n, (int, np.integer)) or not is_power_of_two(int(n)) or n < 2:
        raise SignalLengthError(f"signal length {n} is not a power of two >= 2")
    t = (np.arange(n) + 0.5) / n
    x = _canonical(kind, t)
    x = (x - x.mean()) / x.std(ddof=1)
    return Signal(x, name=kind)


def noise_sigma(clean, snr_db: float) -> float:
    """Noise standard deviation giving ``10 log10(var(x) / sigma**2) == snr_db``."""
    x = np.asarray(clean, dtype=float)
    var = float(x.var(ddof=1)) if x.size > 1 else 0.0
    if var == 0.0:
        raise ConfigError("cannot calibrate noise against a constant signal")
    return math.sqrt(var / 10.0 ** (snr_db / 10.0))


def gaussian_noise(seed: int, n: int) -> np.ndarray:
    """``n`` i.i.d. standard normal draws fully determined by ``seed``."""
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
    bits = gen.integers(0, 1 << 53, size=n, dtype=np.uint64)
    u = (bits.astype(float) + 0.5) * 2.0**-53
    return norm_ppf(u)


def add_noise(clean, spec: NoiseSpec) -> Signal:
    """Return ``clean + sigma * z`` with sigma calibrated to the target input SNR."""
    x = np.asarray(clean, dtype=float)
    sigma = noise_sigma(x, spec.target_input_snr_db)
    y = x + sigma * gaussian_noise(spec.seed, x.size)
    name = getattr(clean, "name", None)
    return Signal(y, name=name, noise=replace(spec, realized_sigma=sigma))


def load_signal_csv(path) -> Signal:
    """Read one value per row.

    Lines starting with ``#`` are comments.  A first data line that is not a
    number is taken as a header.
    """
    path = Path(path)
    text = path.read_text()
    values = []
    seen_data = False
    for rowno, line in enumerate(text.splitlines(), start=1):
        cell = line.strip()
        if not cell or cell.startswith("#"):
            continue
        cell = cell.split(",")[0].strip()
        try:
            v = float(cell)
        except ValueError:
            if not seen_data:
                seen_data = True
                continue
            raise SignalParseError(
                f"{path}: row {rowno}: cannot parse {cell!r} as a number", row=rowno, path=str(path)
            ) from None
        if not math.isfinite(v):
            raise SignalParseError(
                f"{path}: row {rowno}: non-finite value {cell!r}", row=rowno, path=str(path)
            )
        seen_data = True
        values.append(v)
    if not values:
        raise EmptyInputError(f"{path}: no numeric samples")
    return Signal(np.array(values), name=path.stem)


def save_signal_csv(signal, path, header: bool = True, comments=()) -> None:
    """Write one sample per line with round-trip precision."""
    x = np.asarray(signal, dtype=float)
    with open(path, "w", newline="\n") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        if header:
            fh.write("value\n")
        fh.writelines(f"{v!r}\n" for v in x.tolist())
