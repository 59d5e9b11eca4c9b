"""Command-line interface.

Exit codes: 0 success, 1 data error (unreadable or malformed input), 2 usage
or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import (
    DESK_REPLICATIONS,
    FULL_REPLICATIONS,
    COMPARISON_METHODS,
    BenchmarkConfig,
    default_alpha_grid,
    optimize_alpha1,
    run_benchmark,
)
from .denoise import denoise, parse_alpha, parse_method
from .errors import ConfigError, SpcShrinkError
from .metrics import evaluate, format_db
from .signals import SIGNAL_KINDS, NoiseSpec, add_noise, load_signal_csv, make_test_signal, save_signal_csv
from .spc import SpcConfig, save_traces_csv
from .wavelets import build_filter, is_power_of_two

EXIT_OK = 0
EXIT_DATA = 1
EXIT_USAGE = 2


class UsageError(argparse.ArgumentTypeError):
    pass


def _csv_list(text, conv=str):
    items = [t.strip() for t in str(text).split(",") if t.strip()]
    try:
        return tuple(conv(t) for t in items)
    except ValueError as exc:
        raise UsageError(f"cannot parse list {text!r}: {exc}") from None


def _parse_grid(text) -> tuple[float, ...]:
    """``lo:hi:step`` (percent or fraction) or a comma list."""
    if ":" in text:
        lo, hi, step = (parse_alpha(p) for p in text.split(":"))
        if step <= 0 or hi < lo:
            raise UsageError(f"bad grid {text!r}")
        count = int(round((hi - lo) / step)) + 1
        return tuple(round(lo + k * step, 12) for k in range(count))
    return _csv_list(text, parse_alpha)


def cmd_denoise(args) -> int:
    wf = build_filter(args.wavelet)
    method = parse_method(args.method)
    if method.name == "spc":
        SpcConfig(method.alpha1, args.levels, args.mode)
    if args.trace and method.name != "spc":
        raise UsageError("--trace is only available for the spc method")

    signal = load_signal_csv(args.input)
    x = np.asarray(signal)
    n = x.size
    comments = [f"denoised with method={method.label} wavelet={wf.name} levels={args.levels} mode={args.mode}"]
    if not is_power_of_two(n):
        if not args.pad:
            raise SpcShrinkError(
                f"{args.input}: {n} samples is not a power of two (use --pad to zero-extend)"
            )
        padded = 1 << (n - 1).bit_length()
        x = np.concatenate([x, np.zeros(padded - n)])
        comments.append(f"input zero-padded from {n} to {padded} samples; output truncated back to {n}")

    result = denoise(x, method, wf, args.levels, args.mode)
    save_signal_csv(result.denoised[:n], args.output, comments=comments)
    if args.trace:
        save_traces_csv(result.traces, args.trace)
    if args.plan:
        result.plan.save_csv(args.plan)
    lams = ", ".join(f"{lam:.6g}" for lam in result.plan.per_level)
    print(f"{args.output}: {n} samples, {result.method}, thresholds [{lams}]")
    return EXIT_OK


def cmd_gen_signal(args) -> int:
    if not is_power_of_two(args.n) or args.n < 2:
        raise UsageError(f"--n {args.n} is not a power of two >= 2")
    clean = make_test_signal(args.kind, args.n)
    save_signal_csv(clean, args.output)
    print(f"{args.output}: clean {args.kind}, {args.n} samples")
    if args.snr_db is not None:
        noisy_path = args.noisy_output or _noisy_name(args.output)
        noisy = add_noise(clean, NoiseSpec(args.snr_db, args.seed))
        save_signal_csv(
            noisy,
            noisy_path,
            comments=[f"{args.kind} + WGN, input SNR {args.snr_db:g} dB, sigma "
                      f"{noisy.noise.realized_sigma!r}, seed {args.seed}"],
        )
        print(f"{noisy_path}: noisy {args.kind}, {args.snr_db:g} dB, seed {args.seed}")
    elif args.noisy_output:
        raise UsageError("--noisy-output requires --snr-db")
    return EXIT_OK


def _noisy_name(path) -> str:
    p = Path(path)
    return str(p.with_name(f"{p.stem}.noisy{p.suffix or '.csv'}"))


def cmd_metrics(args) -> int:
    x = np.asarray(load_signal_csv(args.clean))
    xhat = np.asarray(load_signal_csv(args.denoised))
    y = np.asarray(load_signal_csv(args.noisy)) if args.noisy else None
    if xhat.size != x.size or (y is not None and y.size != x.size):
        raise SpcShrinkError("clean, denoised and noisy files must have the same length")
    m = evaluate(x, y if y is not None else xhat, xhat)
    print(f"snr_db={format_db(m.snr_db)}")
    if y is not None:
        print(f"snr_gain_db={format_db(m.snr_gain_db)}")
    print(f"rmse={m.rmse!r}")
    return EXIT_OK


_CONFIG_KEYS = {
    "signals": ("signals", lambda v: _csv_list(v)),
    "n": ("n", int),
    "wavelet": ("wavelet", str),
    "levels": ("levels_list", lambda v: _csv_list(v, int)),
    "levels_list": ("levels_list", lambda v: _csv_list(v, int)),
    "snr": ("input_snrs_db", lambda v: _csv_list(v, float)),
    "input_snrs_db": ("input_snrs_db", lambda v: _csv_list(v, float)),
    "methods": ("methods", lambda v: _csv_list(v)),
    "replications": ("replications", int),
    "seed": ("master_seed", int),
    "master_seed": ("master_seed", int),
    "mode": ("mode", str),
}


def read_config_file(path) -> dict:
    """Parse a flat ``key = value`` file into BenchmarkConfig keyword arguments."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (t.strip() for t in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        field, conv = _CONFIG_KEYS[key]
        try:
            out[field] = conv(value)
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
    return out


def cmd_benchmark(args) -> int:
    kwargs = read_config_file(args.config) if args.config else {}
    flag_values = {
        "signals": args.signals, "n": args.n, "wavelet": args.wavelet,
        "levels_list": args.levels, "input_snrs_db": args.snr, "methods": args.methods,
        "replications": args.replications, "master_seed": args.seed, "mode": args.mode,
    }
    kwargs.update({k: v for k, v in flag_values.items() if v is not None})
    if args.full:
        kwargs["replications"] = FULL_REPLICATIONS
    config = BenchmarkConfig(**kwargs)
    report = run_benchmark(config, workers=args.workers)
    if args.output:
        report.save_csv(args.output)
        Path(str(args.output) + ".meta.json").write_text(json.dumps(report.metadata(), indent=2) + "\n")
        _print_summary(report, sys.stdout)
    else:
        # keep stdout a clean CSV stream
        sys.stdout.write(report.to_csv())
        _print_summary(report, sys.stderr)
    return EXIT_OK


def _print_summary(report, out) -> None:
    print(f"{'signal':8s} {'J0':>3s} {'in_snr':>7s} {'method':12s} {'mean_snr':>9s} {'gain':>7s} {'rmse':>9s}",
          file=out)
    for r in report.rows:
        print(f"{r.signal:8s} {r.J0:3d} {r.input_snr:7.2f} {r.method:12s} "
              f"{r.mean_snr:9.3f} {r.mean_snr_gain:7.3f} {r.mean_rmse:9.5f}", file=out)


def cmd_optimize_alpha(args) -> int:
    space = _parse_grid(args.grid) if args.grid else default_alpha_grid(2 if args.reduced else 1)
    if args.reduced and args.grid:
        space = space[::2]
    result = optimize_alpha1(
        search_space=space,
        signals=args.signals,
        noise_levels_db=args.snr,
        m_per_signal=args.m_per_signal,
        seed=args.seed,
        wavelet=args.wavelet,
        levels=args.levels,
        mode=args.mode,
        n=args.n,
        error=args.error,
        workers=args.workers,
    )
    if args.output:
        result.save_csv(args.output)
    label = "-SNR" if result.error == "snr" else "RMSE"
    print(f"{'noise_db':>8s} {'alpha1*':>8s} {label:>10s}")
    for lvl in result.noise_levels_db:
        print(f"{lvl:8.2f} {result.optima[lvl] * 100:7.2f}% {result.optimum_error[lvl]:10.4f}")
    print(f"mean of optima: {result.overall_mean * 100:.3f}%  recommended alpha1: {result.recommended * 100:.2f}%")
    return EXIT_OK


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spcshrink",
        description="Wavelet shrinkage denoising with control-chart thresholds.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("denoise", help="denoise a one-column CSV signal")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--method", default="spc=1.5%",
                   help="visu | sure | bayes | smedian | spc[=alpha1] (default spc=1.5%%)")
    p.add_argument("--wavelet", default="db8")
    p.add_argument("--levels", type=_positive_int, default=5)
    p.add_argument("--mode", choices=("soft", "hard"), default="soft")
    p.add_argument("--trace", help="write the SPC iteration trace CSV here (spc only)")
    p.add_argument("--plan", help="write the per-level threshold CSV here")
    p.add_argument("--pad", action="store_true",
                   help="zero-pad to the next power of two, truncate the output back")
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("gen-signal", help="write a standardized test signal")
    p.add_argument("--kind", choices=SIGNAL_KINDS, required=True)
    p.add_argument("--n", type=int, default=4096)
    p.add_argument("--snr-db", type=float)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--output", required=True)
    p.add_argument("--noisy-output", help="noisy CSV path (default: <output>.noisy.csv)")
    p.set_defaults(func=cmd_gen_signal)

    p = sub.add_parser("metrics", help="SNR, SNR gain and RMSE of a denoised CSV")
    p.add_argument("--clean", required=True)
    p.add_argument("--denoised", required=True)
    p.add_argument("--noisy")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("benchmark", help="Monte Carlo comparison of threshold rules")
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--signals", type=_csv_list)
    p.add_argument("--n", type=int)
    p.add_argument("--wavelet")
    p.add_argument("--levels", type=lambda v: _csv_list(v, int))
    p.add_argument("--snr", type=lambda v: _csv_list(v, float), help="input SNRs in dB")
    p.add_argument("--methods", type=_csv_list,
                   help=f"comma list (default {','.join(COMPARISON_METHODS)})")
    p.add_argument("--replications", type=int, help=f"default {DESK_REPLICATIONS}")
    p.add_argument("--full", action="store_true", help=f"use {FULL_REPLICATIONS} replications")
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=("soft", "hard"))
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--output", help="report CSV (default: standard output)")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("optimize-alpha", help="grid search for alpha1")
    p.add_argument("--grid", help="lo:hi:step or comma list, e.g. 0.1%%:5%%:0.1%%")
    p.add_argument("--reduced", action="store_true", help="keep every other grid point")
    p.add_argument("--signals", type=_csv_list, default=SIGNAL_KINDS)
    p.add_argument("--snr", type=lambda v: _csv_list(v, float), default=(5.0, 15.0, 25.0, 35.0))
    p.add_argument("--m-per-signal", type=_positive_int, default=100)
    p.add_argument("--seed", type=int, default=2019)
    p.add_argument("--wavelet", default="db8")
    p.add_argument("--levels", type=_positive_int, default=5)
    p.add_argument("--mode", choices=("soft", "hard"), default="soft")
    p.add_argument("--n", type=int, default=4096)
    p.add_argument("--error", choices=("snr", "rmse"), default="snr")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--output", help="curve CSV (noise_db, alpha1, mean, is_optimum)")
    p.set_defaults(func=cmd_optimize_alpha)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"spcshrink {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, SpcShrinkError) as exc:
        print(f"spcshrink {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
