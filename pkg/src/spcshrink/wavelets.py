"""Periodized orthonormal discrete wavelet transform with Daubechies filters.

The analysis step at each level computes

    approx[k] = sum_t h[t] * x[(2k + t) mod n]
    detail[k] = sum_t g[t] * x[(2k + t) mod n]

with ``g[t] = (-1)**t * h[L - 1 - t]``.  Because boundaries wrap, the full
transform is an orthogonal matrix and the synthesis step is its transpose.

All transform kernels operate on the last axis, so a 2-D array of signals is
transformed row by row in one call.  The benchmark harness relies on this.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from ._filters import DAUBECHIES
from .errors import LevelError, SignalLengthError, StructureError, UnknownWaveletError

__all__ = [
    "WaveletFilter",
    "MultiresDecomposition",
    "build_filter",
    "forward_dwt",
    "inverse_dwt",
    "max_levels",
    "is_power_of_two",
]


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def max_levels(n: int) -> int:
    """Largest J such that ``n == 2**J``."""
    if not is_power_of_two(n):
        raise SignalLengthError(f"length {n} is not a power of two")
    return n.bit_length() - 1


@dataclass(frozen=True)
class WaveletFilter:
    name: str
    lowpass: np.ndarray
    highpass: np.ndarray

    @property
    def length(self) -> int:
        return len(self.lowpass)


@lru_cache(maxsize=None)
def _cached_filter(name: str) -> WaveletFilter:
    h = np.array(DAUBECHIES[name], dtype=float)
    L = len(h)
    g = np.array([(-1) ** k * h[L - 1 - k] for k in range(L)])
    h.setflags(write=False)
    g.setflags(write=False)
    return WaveletFilter(name=name, lowpass=h, highpass=g)


def build_filter(name: str) -> WaveletFilter:
    """Return the Daubechies filter pair for ``name`` ("db1" ... "db10").

    "haar" is accepted as an alias for "db1".  A :class:`WaveletFilter` is
    returned unchanged.
    """
    if isinstance(name, WaveletFilter):
        return name
    key = str(name).strip().lower()
    if key == "haar":
        key = "db1"
    if key not in DAUBECHIES:
        raise UnknownWaveletError(
            f"unknown wavelet {name!r}; supported: db1..db10"
        )
    return _cached_filter(key)


@dataclass(frozen=True)
class MultiresDecomposition:
    """Detail coefficients per level plus the coarsest approximation.

    ``details[0]`` holds level j = 1 (finest, length N/2), ``details[-1]``
    level J0 (coarsest).  Arrays may carry leading batch axes; the
    transform always runs along the last axis.
    """

    details: tuple[np.ndarray, ...]
    approx: np.ndarray
    original_length: int

    @property
    def levels(self) -> int:
        return len(self.details)

    def level(self, j: int) -> np.ndarray:
        """Detail coefficients at level ``j`` (1-based, 1 = finest)."""
        if not 1 <= j <= self.levels:
            raise IndexError(f"level {j} outside 1..{self.levels}")
        return self.details[j - 1]

    def with_details(self, details: Sequence[np.ndarray]) -> "MultiresDecomposition":
        return MultiresDecomposition(
            details=tuple(np.asarray(d, dtype=float) for d in details),
            approx=self.approx,
            original_length=self.original_length,
        )

    def validate(self) -> None:
        n = self.original_length
        if not is_power_of_two(n) or n < 2:
            raise StructureError(f"original length {n} is not a power of two >= 2")
        if self.levels < 1:
            raise StructureError("decomposition has no detail levels")
        for j, d in enumerate(self.details, start=1):
            if d.shape[-1] != n >> j:
                raise StructureError(
                    f"level {j} has {d.shape[-1]} coefficients, expected {n >> j}"
                )
        if self.approx.shape[-1] != n >> self.levels:
            raise StructureError(
                f"approximation has {self.approx.shape[-1]} coefficients, "
                f"expected {n >> self.levels}"
            )

    def to_vector(self) -> np.ndarray:
        """Flatten as approx, then details coarsest to finest."""
        parts = [self.approx] + [self.details[j] for j in range(self.levels - 1, -1, -1)]
        return np.concatenate(parts, axis=-1)

    def energy(self) -> float:
        return float(np.sum(self.to_vector() ** 2))

    def to_rows(self) -> list[tuple[int, int, float]]:
        """(level, index, value) rows; level 0 is the approximation."""
        if self.approx.ndim != 1:
            raise StructureError("only single-signal decompositions serialize")
        rows = [(0, k, float(v)) for k, v in enumerate(self.approx)]
        for j in range(self.levels, 0, -1):
            rows.extend((j, k, float(v)) for k, v in enumerate(self.details[j - 1]))
        return rows

    def save_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["level", "index", "value"])
            for level, k, v in self.to_rows():
                writer.writerow([level, k, repr(v)])

    @classmethod
    def load_csv(cls, path) -> "MultiresDecomposition":
        by_level: dict[int, dict[int, float]] = {}
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["level", "index", "value"]:
                raise StructureError(f"{path}: expected header level,index,value")
            for row in reader:
                if not row:
                    continue
                level, k, v = int(row[0]), int(row[1]), float(row[2])
                by_level.setdefault(level, {})[k] = v
        if 0 not in by_level:
            raise StructureError(f"{path}: no approximation (level 0) rows")

        def dense(level):
            entries = by_level[level]
            if sorted(entries) != list(range(len(entries))):
                raise StructureError(f"{path}: level {level} has gaps in its indices")
            return np.array([entries[k] for k in range(len(entries))])

        levels = max(by_level)
        if sorted(by_level) != list(range(levels + 1)):
            raise StructureError(f"{path}: missing detail levels")
        details = tuple(dense(j) for j in range(1, levels + 1))
        approx = dense(0)
        n = sum(len(d) for d in details) + len(approx)
        decomp = cls(details=details, approx=approx, original_length=n)
        decomp.validate()
        return decomp


@lru_cache(maxsize=None)
def _wrap_index(n: int, taps: int) -> np.ndarray:
    # row k holds the input positions (2k + t) mod n for t = 0..taps-1
    k = np.arange(n // 2)[:, None]
    t = np.arange(taps)[None, :]
    idx = (2 * k + t) % n
    idx.setflags(write=False)
    return idx


def _analysis_step(x: np.ndarray, wf: WaveletFilter) -> tuple[np.ndarray, np.ndarray]:
    n = x.shape[-1]
    windows = x[..., _wrap_index(n, wf.length)]
    return windows @ wf.lowpass, windows @ wf.highpass


def _synthesis_step(a: np.ndarray, d: np.ndarray, wf: WaveletFilter) -> np.ndarray:
    half = a.shape[-1]
    n = 2 * half
    out = np.zeros(a.shape[:-1] + (n,))
    idx = _wrap_index(n, wf.length)
    h, g = wf.lowpass, wf.highpass
    # For a fixed tap the targets (2k + t) mod n are distinct over k, so a
    # plain fancy-index += never collides.
    for t in range(wf.length):
        out[..., idx[:, t]] += a * h[t] + d * g[t]
    return out


def forward_dwt(signal, wavelet="db8", levels: int = 5) -> MultiresDecomposition:
    """Periodized multilevel DWT of ``signal`` down to depth ``levels``."""
    wf = build_filter(wavelet)
    x = np.asarray(signal, dtype=float)
    n = x.shape[-1]
    if not is_power_of_two(n) or n < 2:
        raise SignalLengthError(f"signal length {n} is not a power of two >= 2")
    depth = max_levels(n)
    if not 1 <= levels <= depth:
        raise LevelError(f"levels={levels} outside 1..{depth} for length {n}")
    details = []
    a = x
    for _ in range(levels):
        a, d = _analysis_step(a, wf)
        details.append(d)
    return MultiresDecomposition(details=tuple(details), approx=a, original_length=n)


def inverse_dwt(decomp: MultiresDecomposition, wavelet="db8") -> np.ndarray:
    """Reconstruct the signal from ``decomp``; exact inverse of :func:`forward_dwt`."""
    wf = build_filter(wavelet)
    decomp.validate()
    a = np.asarray(decomp.approx, dtype=float)
    for d in reversed(decomp.details):
        if d.shape[:-1] != a.shape[:-1]:
            raise StructureError("batch shapes of approximation and details differ")
        a = _synthesis_step(a, np.asarray(d, dtype=float), wf)
    return a
