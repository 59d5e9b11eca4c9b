"""Deterministic Monte Carlo comparison of threshold rules.

Every replication's noise is keyed by ``(master_seed, signal, input SNR,
replication)``, so all methods (and all decomposition depths) in a cell are
evaluated on the same noisy realizations, and results do not depend on the
order in which cells run or on the number of worker processes.
"""

from __future__ import annotations

import csv
import io
import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from typing import Sequence

import numpy as np

from .denoise import Method, parse_method, select_plan
from .errors import ConfigError
from .metrics import format_db
from .shrinkage import MODES
from .signals import RNG_ID, SIGNAL_KINDS, gaussian_noise, make_test_signal, noise_sigma
from .spc import SpcConfig, spcshrink
from .wavelets import MultiresDecomposition, build_filter, forward_dwt, inverse_dwt, max_levels

__all__ = [
    "REPORT_COLUMNS",
    "COMPARISON_METHODS",
    "BenchmarkConfig",
    "BenchmarkRow",
    "BenchmarkReport",
    "AlphaSearchResult",
    "replication_seed",
    "noisy_batch",
    "run_benchmark",
    "optimize_alpha1",
    "default_alpha_grid",
]

REPORT_COLUMNS = (
    "signal", "J0", "input_snr", "method", "mean_snr", "mean_snr_gain",
    "mean_rmse", "std_snr", "replications", "seed", "wavelet", "rng_id",
)

COMPARISON_METHODS = ("visu", "sure", "smedian", "bayes", "spc=1%", "spc=1.5%")

DESK_REPLICATIONS = 100
FULL_REPLICATIONS = 1000


def replication_seed(master_seed: int, signal: str, input_snr_db: float, replication: int) -> int:
    """64-bit noise seed for one replication of one (signal, input SNR) cell."""
    key = f"{signal}|{float(input_snr_db)!r}".encode()
    ss = np.random.SeedSequence(
        entropy=int(master_seed) & (2**64 - 1),
        spawn_key=(zlib.crc32(key), int(replication)),
    )
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)


def noisy_batch(clean: np.ndarray, signal: str, input_snr_db: float, replications: int,
                master_seed: int) -> np.ndarray:
    """``(replications, n)`` array of noisy copies of ``clean``."""
    sigma = noise_sigma(clean, input_snr_db)
    out = np.empty((replications, clean.size))
    for r in range(replications):
        seed = replication_seed(master_seed, signal, input_snr_db, r)
        out[r] = clean + sigma * gaussian_noise(seed, clean.size)
    return out


def _row_decomp(batch: MultiresDecomposition, r: int) -> MultiresDecomposition:
    return MultiresDecomposition(
        details=tuple(d[r] for d in batch.details),
        approx=batch.approx[r],
        original_length=batch.original_length,
    )


def _threshold_batch(batch: MultiresDecomposition, plans, mode: str) -> MultiresDecomposition:
    lam = np.array([p.per_level for p in plans])  # (replications, levels)
    details = []
    for j, d in enumerate(batch.details):
        t = lam[:, j : j + 1]
        if mode == "soft":
            details.append(np.sign(d) * np.maximum(np.abs(d) - t, 0.0))
        else:
            details.append(np.where(np.abs(d) > t, d, 0.0))
    return batch.with_details(details)


def _snr_rows(clean: np.ndarray, est: np.ndarray) -> np.ndarray:
    err_var = np.var(est - clean, axis=-1, ddof=1)
    sig_var = np.var(clean, ddof=1)
    with np.errstate(divide="ignore"):
        return np.where(err_var == 0, np.inf, 10.0 * np.log10(sig_var / err_var))


def _rmse_rows(clean: np.ndarray, est: np.ndarray) -> np.ndarray:
    return np.sqrt(np.mean((est - clean) ** 2, axis=-1))


@dataclass(frozen=True)
class BenchmarkConfig:
    signals: tuple[str, ...] = SIGNAL_KINDS
    n: int = 4096
    wavelet: str = "db8"
    levels_list: tuple[int, ...] = (3, 5, 7)
    input_snrs_db: tuple[float, ...] = (10.0, 20.0, 30.0)
    methods: tuple[str, ...] = COMPARISON_METHODS
    replications: int = DESK_REPLICATIONS
    master_seed: int = 2019
    mode: str = "soft"

    def __post_init__(self):
        object.__setattr__(self, "signals", tuple(s.lower() for s in self.signals))
        object.__setattr__(self, "levels_list", tuple(int(j) for j in self.levels_list))
        object.__setattr__(self, "input_snrs_db", tuple(float(s) for s in self.input_snrs_db))
        object.__setattr__(self, "methods", tuple(parse_method(m).label for m in self.methods))
        if not self.signals:
            raise ConfigError("no signals selected")
        for s in self.signals:
            if s not in SIGNAL_KINDS:
                raise ConfigError(f"unknown signal {s!r}; choose from {', '.join(SIGNAL_KINDS)}")
        if not self.methods:
            raise ConfigError("no methods selected")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigError("duplicate methods")
        if not isinstance(self.replications, (int, np.integer)) or self.replications < 1:
            raise ConfigError(f"replications must be >= 1, got {self.replications!r}")
        if not all(math.isfinite(s) for s in self.input_snrs_db) or not self.input_snrs_db:
            raise ConfigError("input SNRs must be finite and nonempty")
        if self.mode not in MODES:
            raise ConfigError(f"unknown threshold mode {self.mode!r}")
        build_filter(self.wavelet)
        depth = max_levels(self.n)
        for j in self.levels_list:
            if not 1 <= j <= depth:
                raise ConfigError(f"J0={j} outside 1..{depth} for n={self.n}")
            for m in self.methods:
                pm = parse_method(m)
                if pm.name == "spc":
                    SpcConfig(pm.alpha1, j, self.mode)

    def cells(self):
        for s in self.signals:
            for j in self.levels_list:
                for snr in self.input_snrs_db:
                    yield s, j, snr


@dataclass(frozen=True)
class BenchmarkRow:
    signal: str
    J0: int
    input_snr: float
    method: str
    mean_snr: float
    mean_snr_gain: float
    mean_rmse: float
    std_snr: float
    replications: int
    seed: int
    wavelet: str
    rng_id: str = RNG_ID

    def csv_fields(self) -> list[str]:
        return [
            self.signal, str(self.J0), repr(self.input_snr), self.method,
            format_db(self.mean_snr), format_db(self.mean_snr_gain), repr(self.mean_rmse),
            repr(self.std_snr), str(self.replications), str(self.seed), self.wavelet, self.rng_id,
        ]


@dataclass
class BenchmarkReport:
    config: BenchmarkConfig
    rows: list[BenchmarkRow]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for row in self.rows:
            writer.writerow(row.csv_fields())
        return buf.getvalue()

    def save_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())

    def metadata(self) -> dict:
        meta = asdict(self.config)
        meta["rng_id"] = RNG_ID
        meta["design"] = (
            "paired: within a (signal, input_snr) cell every method and every J0 "
            "is evaluated on identical noisy realizations"
        )
        meta["noise_seed"] = "replication_seed(master_seed, signal, input_snr, replication)"
        return meta

    def lookup(self, signal: str, J0: int, input_snr: float, method) -> BenchmarkRow:
        label = parse_method(method).label
        for row in self.rows:
            if (row.signal, row.J0, row.input_snr, row.method) == (signal, J0, float(input_snr), label):
                return row
        raise KeyError((signal, J0, input_snr, label))


def _run_cell(config: BenchmarkConfig, signal: str, J0: int, input_snr: float) -> list[BenchmarkRow]:
    try:
        wf = build_filter(config.wavelet)
        clean = np.asarray(make_test_signal(signal, config.n))
        noisy = noisy_batch(clean, signal, input_snr, config.replications, config.master_seed)
        input_snr_measured = _snr_rows(clean, noisy)
        batch = forward_dwt(noisy, wf, J0)
        rows = []
        for label in config.methods:
            method = parse_method(label)
            plans = [
                select_plan(_row_decomp(batch, r), method, config.mode)[0]
                for r in range(config.replications)
            ]
            est = inverse_dwt(_threshold_batch(batch, plans, config.mode), wf)
            snrs = _snr_rows(clean, est)
            gains = snrs - input_snr_measured
            rmses = _rmse_rows(clean, est)
            std = float(np.std(snrs, ddof=1)) if snrs.size > 1 and np.all(np.isfinite(snrs)) else 0.0
            rows.append(
                BenchmarkRow(
                    signal=signal, J0=J0, input_snr=float(input_snr), method=method.label,
                    mean_snr=float(np.mean(snrs)), mean_snr_gain=float(np.mean(gains)),
                    mean_rmse=float(np.mean(rmses)), std_snr=std,
                    replications=config.replications, seed=int(config.master_seed),
                    wavelet=config.wavelet,
                )
            )
        return rows
    except Exception as exc:
        raise type(exc)(f"cell signal={signal} J0={J0} input_snr={input_snr}: {exc}") from exc


def _run_cell_args(args):
    return _run_cell(*args)


def run_benchmark(config: BenchmarkConfig, workers: int = 1) -> BenchmarkReport:
    """Evaluate every (signal, J0, input SNR, method) cell of ``config``."""
    cells = list(config.cells())
    jobs = [(config, *cell) for cell in cells]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell_args, jobs))
    else:
        results = [_run_cell_args(job) for job in jobs]
    rows = [row for cell_rows in results for row in cell_rows]
    order = {
        "signal": {s: i for i, s in enumerate(config.signals)},
        "J0": {j: i for i, j in enumerate(config.levels_list)},
        "snr": {s: i for i, s in enumerate(config.input_snrs_db)},
        "method": {m: i for i, m in enumerate(config.methods)},
    }
    rows.sort(key=lambda r: (order["signal"][r.signal], order["J0"][r.J0],
                             order["snr"][r.input_snr], order["method"][r.method]))
    return BenchmarkReport(config=config, rows=rows)


def default_alpha_grid(step: int = 1) -> tuple[float, ...]:
    """{0.1%, 0.2%, ..., 5.0%}; ``step=2`` keeps every other point."""
    return tuple(k / 1000.0 for k in range(1, 51, step))


@dataclass
class AlphaSearchResult:
    search_space: tuple[float, ...]
    noise_levels_db: tuple[float, ...]
    optima: dict[float, float]
    optimum_error: dict[float, float]
    curves: dict[float, np.ndarray] = field(repr=False)
    overall_mean: float = 0.0
    recommended: float = 0.0
    error: str = "snr"

    def curve_rows(self):
        """(noise_db, alpha1, mean figure of merit) rows."""
        for level in self.noise_levels_db:
            for a, v in zip(self.search_space, self.curves[level]):
                yield level, a, float(v)

    def save_csv(self, path) -> None:
        col = "mean_snr" if self.error == "snr" else "mean_rmse"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["noise_db", "alpha1", col, "is_optimum"])
            for level, a, v in self.curve_rows():
                writer.writerow([repr(level), repr(a), format_db(v), int(a == self.optima[level])])


def _grid_step(space: Sequence[float]) -> float | None:
    pts = sorted(set(space))
    if len(pts) < 2:
        return None
    return float(np.min(np.diff(pts)))


def _alpha_curve(args) -> np.ndarray:
    space, signal, level_db, m, seed, wavelet, levels, mode, n, error = args
    wf = build_filter(wavelet)
    clean = np.asarray(make_test_signal(signal, n))
    noisy = noisy_batch(clean, signal, level_db, m, seed)
    batch = forward_dwt(noisy, wf, levels)
    rows = [_row_decomp(batch, r) for r in range(m)]
    sums = np.zeros(len(space))
    for i, alpha in enumerate(space):
        cfg = SpcConfig(alpha, levels, mode)
        plans = [spcshrink(dec, cfg)[0] for dec in rows]
        est = inverse_dwt(_threshold_batch(batch, plans, mode), wf)
        vals = _snr_rows(clean, est) if error == "snr" else _rmse_rows(clean, est)
        sums[i] = float(np.sum(vals))
    return sums


def optimize_alpha1(
    search_space: Sequence[float] | None = None,
    signals: Sequence[str] = SIGNAL_KINDS,
    noise_levels_db: Sequence[float] = (5.0, 15.0, 25.0, 35.0),
    m_per_signal: int = 100,
    seed: int = 2019,
    wavelet: str = "db8",
    levels: int = 5,
    mode: str = "soft",
    n: int = 4096,
    error: str = "snr",
    workers: int = 1,
) -> AlphaSearchResult:
    """Grid search for the finest-scale significance level.

    For each noise level the figure of merit is averaged over
    ``len(signals) * m_per_signal`` noisy signals; with ``error="snr"`` the
    optimum maximizes mean output SNR, with ``error="rmse"`` it minimizes mean
    RMSE.  Ties go to the smallest alpha1.
    """
    space = tuple(float(a) for a in (search_space if search_space is not None else default_alpha_grid()))
    if not space:
        raise ConfigError("empty alpha1 search space")
    for a in space:
        if not (0.0 < a and a * levels < 1.0):
            raise ConfigError(f"alpha1={a} outside (0, 1/J0) for J0={levels}")
    if error not in ("snr", "rmse"):
        raise ConfigError(f"error must be 'snr' or 'rmse', got {error!r}")
    if m_per_signal < 1:
        raise ConfigError("m_per_signal must be >= 1")
    signals = tuple(s.lower() for s in signals)
    levels_db = tuple(float(v) for v in noise_levels_db)

    jobs = [
        (space, s, lvl, m_per_signal, seed, wavelet, levels, mode, n, error)
        for lvl in levels_db for s in signals
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            sums = list(pool.map(_alpha_curve, jobs))
    else:
        sums = [_alpha_curve(job) for job in jobs]

    total = len(signals) * m_per_signal
    curves, optima, optimum_error = {}, {}, {}
    for i, lvl in enumerate(levels_db):
        curve = np.sum(sums[i * len(signals):(i + 1) * len(signals)], axis=0) / total
        curves[lvl] = curve
        k = int(np.argmax(curve) if error == "snr" else np.argmin(curve))
        optima[lvl] = space[k]
        optimum_error[lvl] = float(-curve[k] if error == "snr" else curve[k])

    overall = float(np.mean(list(optima.values())))
    step = _grid_step(space)
    recommended = overall if step is None else round(overall / step) * step
    if step is not None:
        recommended = min(space, key=lambda a: abs(a - recommended))
    return AlphaSearchResult(
        search_space=space,
        noise_levels_db=levels_db,
        optima=optima,
        optimum_error=optimum_error,
        curves=curves,
        overall_mean=overall,
        recommended=float(recommended),
        error=error,
    )
