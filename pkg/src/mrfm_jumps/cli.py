"""Command-line entry point: ``mrfm-jumps {simulate,stats,correlate,sweep,convert}``.

Exit codes: 0 success, 2 configuration error, 3 runtime or statistical
failure, 4 I/O error. Default output files go to ``$MRFM_JUMPS_OUTDIR``
(or the working directory).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from . import io as mio
from .config import KEYS, parse_config, read_config_file
from .correlation import (
    DEFAULT_SAMPLE_SPACING,
    DEFAULT_THRESHOLD,
    autocorrelation,
    default_max_lag,
    fit_exponential,
    sign_signal,
)
from .dynamics import simulate_run
from .errors import ConfigError, InsufficientDataError
from .stats import build_histogram, fit_peak_envelope, interval_moments
from .sweep import SWEEP_COLUMNS, fit_scaling, predict_physical_time, run_sweep
from .units import conversion_report

OUTDIR_ENV = "MRFM_JUMPS_OUTDIR"
EXIT_CONFIG, EXIT_RUNTIME, EXIT_IO = 2, 3, 4

log = logging.getLogger("mrfm_jumps")


def _out_path(value, default_name):
    if value is not None:
        return value
    return str(Path(os.environ.get(OUTDIR_ENV, ".")) / default_name)


def _add_config_flags(p):
    p.add_argument("--config", metavar="FILE", help="flat 'key = value' configuration file")
    g = p.add_argument_group("configuration keys (override the file)")
    for key, (_, help_text) in KEYS.items():
        g.add_argument("--" + key.replace("_", "-"), dest=key, metavar="V", help=help_text)


def _add_report_flag(p):
    p.add_argument("--report", metavar="FILE", help="also write the report as JSON")


def _resolve(args):
    file_values = read_config_file(args.config) if args.config else {}
    flags = {k: getattr(args, k) for k in KEYS if getattr(args, k, None) is not None}
    return parse_config(file_values, flags)


def _emit_report(report: dict, args):
    # keep stdout clean when the data itself goes there
    stream = sys.stderr if getattr(args, "out", None) == "-" else sys.stdout
    stream.write(mio.report_text(report))
    if getattr(args, "report", None):
        mio.atomic_write(args.report, mio.report_json(report))


def cmd_simulate(args):
    cfg = _resolve(args)
    if cfg.max_kicks is None and cfg.max_time is None:
        raise ConfigError("give a stop criterion: --kicks N or --tau-max T")
    trace = simulate_run(cfg.model, cfg.telegraph, max_kicks=cfg.max_kicks, max_time=cfg.max_time,
                         seed=cfg.seed, initial_branch=cfg.initial_branch,
                         record_kicks=args.dump_kicks or 0)
    meta = cfg.provenance()
    out = _out_path(args.out, "jumps.csv")
    mio.atomic_write(out, mio.jumps_csv(trace, meta))
    if args.dump_kicks:
        mio.atomic_write(_out_path(args.kicks_out, "kicks.csv"), mio.kicks_csv(trace, meta))
    report = {"n_jumps": trace.n_jumps, "kick_count": trace.kick_count,
              "total_duration": trace.total_duration, "seed": cfg.seed}
    if trace.n_jumps >= 3:
        report["mean"], report["std"] = interval_moments(trace)
    elif trace.n_jumps == 0:
        log.warning("no jumps occurred")
    _emit_report(report, args)
    return 0


def cmd_stats(args):
    trace, meta = mio.read_jumps(args.input)
    hist = build_histogram(trace, args.mode, args.bin_width)
    peak = hist if args.mode == "peak" else build_histogram(trace, "peak")
    fit = fit_peak_envelope(peak, args.min_count, weighted=args.weighted)
    mean, std = interval_moments(trace)
    opts = [("stats.mode", args.mode), ("stats.bin_width", hist.bin_width),
            ("stats.min_count", args.min_count), ("stats.weighted", args.weighted)]
    rows = zip(hist.bin_centers, hist.counts, hist.probabilities)
    text = mio.csv_text(mio.header_lines("stats", list(meta.items()) + opts),
                        ("bin_center", "count", "probability"), rows)
    mio.atomic_write(_out_path(args.out, "histogram.csv"), text)
    _emit_report({"tau_d": fit.tau_d, "intercept": fit.intercept, "r_squared": fit.r_squared,
                  "mean": mean, "std": std, "n_intervals": hist.total_intervals}, args)
    return 0


def cmd_correlate(args):
    trace, meta = mio.read_jumps(args.input)
    if trace.n_jumps < 2:
        raise InsufficientDataError("correlation needs at least 2 jumps")
    max_lag = args.max_lag if args.max_lag is not None else default_max_lag(trace, args.sample_dt)
    result = fit_exponential(autocorrelation(sign_signal(trace, args.sample_dt), max_lag), args.threshold)
    mean, _ = interval_moments(trace) if trace.n_jumps >= 3 else (float("nan"), None)
    opts = [("correlate.sample_dt", args.sample_dt), ("correlate.max_lag", max_lag),
            ("correlate.threshold", args.threshold)]
    text = mio.csv_text(mio.header_lines("correlate", list(meta.items()) + opts),
                        ("lag", "c"), zip(result.lags, result.c_values))
    mio.atomic_write(_out_path(args.out, "correlation.csv"), text)
    _emit_report({"tau_c": result.tau_c, "fit_points": result.fit_points, "r_squared": result.r_squared,
                  "ratio_mean_jump_over_tau_c": mean / result.tau_c,
                  "signal_mean": result.signal_mean}, args)
    return 0


def cmd_sweep(args):
    cfg = _resolve(args)
    grid = cfg.sweep_grid()
    predictions = []
    for item in args.predict or []:
        try:
            d, t = (float(v) for v in item.split(","))
        except ValueError:
            raise ConfigError(f"--predict expects 'delta,tau0', got {item!r}") from None
        predictions.append((d, t))
    rows = run_sweep(grid, cfg.model, n_jobs=args.jobs)
    meta = cfg.provenance() + [("sweep.dtau_rule", grid.dtau_rule), ("sweep.jobs_independent", True)]
    text = mio.csv_text(mio.header_lines("sweep", meta), SWEEP_COLUMNS,
                        ([r.as_record()[c] for c in SWEEP_COLUMNS] for r in rows))
    mio.atomic_write(_out_path(args.out, "sweep.csv"), text)
    flagged = [r.point_index for r in rows if not r.ok]
    if flagged:
        log.warning("grid points with fewer than 2 intervals: %s", flagged)
    fit = fit_scaling(rows)
    report = {"p": fit.p, "q": fit.q, "residual_rms": fit.residual_rms, "n_points": len(fit.points)}
    for d, t in predictions:
        report[f"predict_seconds[delta={d:g},tau0={t:g}]"] = predict_physical_time(fit, d, t, cfg.physical)
    _emit_report(report, args)
    return 0


def cmd_convert(args):
    cfg = _resolve(args)
    report = conversion_report(cfg.physical)
    if args.json:
        sys.stdout.write(mio.report_json(report))
    else:
        sys.stdout.write(mio.report_text(report))
    if args.report:
        mio.atomic_write(args.report, mio.report_json(report))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mrfm-jumps", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the jump model and write jump times")
    _add_config_flags(p)
    p.add_argument("--out", help="jumps CSV (default jumps.csv; '-' for stdout)")
    p.add_argument("--dump-kicks", type=int, metavar="N", help="also write the first N kicks")
    p.add_argument("--kicks-out", help="kick dump CSV (default kicks.csv)")
    _add_report_flag(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("stats", help="interval histogram and exponential peak fit")
    p.add_argument("input", help="jumps CSV from 'simulate' ('-' for stdin)")
    p.add_argument("--mode", choices=("peak", "fine"), default="peak")
    p.add_argument("--bin-width", type=float, help="fine-mode bin width (default pi/50)")
    p.add_argument("--min-count", type=int, default=50, help="minimum peak count entering the fit")
    p.add_argument("--weighted", action="store_true", help="weight log-counts by counts")
    p.add_argument("--out", help="histogram CSV (default histogram.csv)")
    _add_report_flag(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("correlate", help="frequency-shift autocorrelation and tau_c")
    p.add_argument("input", help="jumps CSV from 'simulate' ('-' for stdin)")
    p.add_argument("--sample-dt", type=float, default=DEFAULT_SAMPLE_SPACING,
                   help="sampling step (dimensionless time, default pi/8)")
    p.add_argument("--max-lag", type=float, help="largest lag (default 8 mean intervals)")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD,
                   help="fit lags while C exceeds this (default 0.05)")
    p.add_argument("--out", help="correlation CSV (default correlation.csv)")
    _add_report_flag(p)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("sweep", help="grid over (delta, tau0) and the scaling-law fit")
    _add_config_flags(p)
    p.add_argument("--out", help="sweep CSV (default sweep.csv)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--predict", action="append", metavar="DELTA,TAU0",
                   help="print the fitted mean jump interval in seconds")
    _add_report_flag(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("convert", help="convert laboratory parameters to model units")
    _add_config_flags(p)
    p.add_argument("--json", action="store_true", help="print JSON instead of key = value")
    _add_report_flag(p)
    p.set_defaults(func=cmd_convert)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InsufficientDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        where = f" ({exc.filename})" if getattr(exc, "filename", None) else ""
        print(f"error: I/O failure{where}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
