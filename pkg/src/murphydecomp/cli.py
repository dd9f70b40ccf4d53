"""Command line entry point: ``murphy <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 unreadable or malformed input,
3 estimation or domain failure.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

import numpy as np

from . import __version__
from .benchmarks import DEFAULT_BURN_IN, BenchmarkKind, rolling_benchmark_series
from .decomp import calibration_curve, estimate_decomposition
from .exceptions import DomainError, InputError, MurphyError
from .kernelreg import KernelFitConfig
from .scoring import LossSpec
from .stylized import (
    Forecaster,
    ForecasterKind,
    analytic_logscore_decomposition,
    analytic_mse_decomposition,
    simulate,
)
from .tables import (
    read_boe_table,
    read_forecast_table,
    read_realizations,
    render_csv,
    render_json,
    write_text,
)
from .twopiece import BoeReportedParams, boe_quantile_forecasts

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_ESTIMATION = 3

DECILES = tuple(round(0.1 * k, 1) for k in range(1, 10))

DECOMPOSITION_COLUMNS = ("horizon", "mean_score", "unc", "res", "cal", "n", "bandwidth")
CURVE_COLUMNS = ("x", "fitted", "unconditional")
PANEL_COLUMNS = ("period", "mu", "y", "mean_forecast", "pred_mu", "pred_sigma2")
QUANTILE_COLUMNS = ("period", "horizon", "tau", "quantile_forecast")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; 2 is reserved for input errors here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> List[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma separated list of numbers, got {text!r}")


def _int_list(text: str) -> List[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma separated list of integers, got {text!r}")


def _loss_from_args(args) -> LossSpec:
    if args.loss == "check":
        if args.tau is None:
            raise UsageError("--loss check requires --tau")
        if not 0.0 < args.tau < 1.0:
            raise UsageError(f"--tau must lie in (0, 1), got {args.tau}")
        return LossSpec.check(args.tau)
    if args.tau is not None:
        raise UsageError("--tau only applies to --loss check")
    return LossSpec.squared()


def _config_from_args(args) -> KernelFitConfig:
    if args.bandwidth is not None:
        if not args.bandwidth > 0:
            raise UsageError(f"--bandwidth must be positive, got {args.bandwidth}")
        return KernelFitConfig(bandwidth=args.bandwidth)
    return KernelFitConfig()


def _metadata(loss: LossSpec, args, **extra) -> dict:
    meta = {
        "version": __version__,
        "loss": loss.kind.value,
        "tau": loss.tau,
        "bandwidth": args.bandwidth if args.bandwidth is not None else "cv",
        "seed": None,
    }
    meta.update(extra)
    return meta


def _emit(args, columns, rows, metadata):
    if args.format == "json":
        text = render_json(columns, rows, metadata)
    else:
        text = render_csv(columns, rows)
    write_text(args.output, text)


def _report_stream(args):
    # keep stdout clean when the data file itself goes there
    return sys.stderr if args.output == "-" else sys.stdout


def format_decomposition_table(results) -> str:
    lines = [f"{'h':>3} {'score':>12} {'UNC':>12} {'RES':>12} {'CAL':>12}"]
    for r in results:
        lines.append(f"{r.horizon:>3} {r.mean_score:>12.6f} {r.unc:>12.6f} {r.res:>12.6f} {r.cal:>12.6f}")
    return "\n".join(lines) + "\n"


def cmd_decompose(args) -> int:
    loss = _loss_from_args(args)
    config = _config_from_args(args)
    by_h = read_forecast_table(args.input, tau=loss.tau)
    if len(by_h) > 1 and not args.by_horizon:
        raise UsageError(f"input holds horizons {list(by_h)}; pass --by-horizon")
    results = [estimate_decomposition(s, loss, config) for s in by_h.values()]
    rows = [
        (r.horizon, r.mean_score, r.unc, r.res, r.cal, r.n, r.bandwidth)
        for r in results
    ]
    _emit(args, DECOMPOSITION_COLUMNS, rows, _metadata(loss, args))
    _report_stream(args).write(format_decomposition_table(results))
    return EXIT_OK


def cmd_calcurve(args) -> int:
    loss = _loss_from_args(args)
    config = _config_from_args(args)
    if args.grid_size < 2:
        raise UsageError(f"--grid-size must be at least 2, got {args.grid_size}")
    by_h = read_forecast_table(args.input, tau=loss.tau)
    if args.horizon is not None:
        if args.horizon not in by_h:
            raise InputError(f"no rows at horizon {args.horizon}; available {list(by_h)}")
        series = by_h[args.horizon]
    elif len(by_h) > 1:
        raise UsageError(f"input holds horizons {list(by_h)}; select one with --horizon")
    else:
        series = next(iter(by_h.values()))
    curve = calibration_curve(series, loss, config, grid_size=args.grid_size)
    rows = [(float(x), float(f), float(curve.unconditional)) for x, f in zip(curve.grid, curve.conditional)]
    meta = _metadata(loss, args, horizon=series.horizon, grid_size=args.grid_size)
    meta["bandwidth"] = curve.bandwidth
    _emit(args, CURVE_COLUMNS, rows, meta)
    return EXIT_OK


def cmd_simulate(args) -> int:
    kind = Forecaster(args.forecaster)
    if kind in (Forecaster.NI, Forecaster.REC):
        if args.sigma_nu2 is None:
            raise UsageError(f"--forecaster {kind.value} requires --sigma-nu2")
        if not args.sigma_nu2 >= 0:
            raise UsageError(f"--sigma-nu2 must be non-negative, got {args.sigma_nu2}")
    elif args.sigma_nu2 is not None:
        raise UsageError(f"--sigma-nu2 does not apply to --forecaster {kind.value}")
    if args.n < 1:
        raise UsageError(f"--n must be positive, got {args.n}")
    f = ForecasterKind(kind, args.sigma_nu2)
    panel = simulate(f, args.n, args.seed)
    rows = zip(
        range(1, len(panel) + 1),
        panel.mu.tolist(),
        panel.y.tolist(),
        panel.mean_forecast.tolist(),
        panel.pred_mu.tolist(),
        panel.pred_sigma2.tolist(),
    )
    write_text(args.output, render_csv(PANEL_COLUMNS, rows))

    out = _report_stream(args)
    out.write(f"{'loss':<9} {'score':>10} {'UNC':>10} {'RES':>10} {'CAL':>10}\n")
    for name, d in (("squared", analytic_mse_decomposition(f)), ("log", analytic_logscore_decomposition(f))):
        out.write(f"{name:<9} {d.score:>10.6f} {d.unc:>10.6f} {d.res:>10.6f} {d.cal:>10.6f}\n")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    kind = BenchmarkKind(args.kind)
    if kind is BenchmarkKind.UNC_QUANTILE:
        if args.tau is None:
            raise UsageError("--kind unc-quantile requires --tau")
        if not 0.0 < args.tau < 1.0:
            raise UsageError(f"--tau must lie in (0, 1), got {args.tau}")
    elif args.tau is not None:
        raise UsageError(f"--tau does not apply to --kind {kind.value}")
    if any(h < 0 for h in args.horizons):
        raise UsageError("--horizons must be non-negative")
    periods, values = read_realizations(args.input)
    columns = ["period", "horizon", "forecast", "realization"]
    if args.tau is not None:
        columns.append("tau")
    rows = []
    for h in sorted(set(args.horizons)):
        s = rolling_benchmark_series(values, h, kind, tau=args.tau, burn_in=args.burn_in, periods=periods)
        for p, x, y in zip(s.periods, s.forecasts.tolist(), s.realizations.tolist()):
            rows.append((p, h, x, y) + ((args.tau,) if args.tau is not None else ()))
    write_text(args.output, render_csv(columns, rows))
    return EXIT_OK


def cmd_boe_quantiles(args) -> int:
    taus = np.asarray(args.taus, dtype=float)
    if len(taus) == 0 or np.any((taus <= 0) | (taus >= 1)):
        raise UsageError("--taus must lie strictly inside (0, 1)")
    if np.any(np.diff(taus) <= 0):
        raise UsageError("--taus must be strictly increasing")
    rows = []
    for lineno, period, h, mu, sigma, xi in read_boe_table(args.input):
        try:
            q = boe_quantile_forecasts(BoeReportedParams(mu, sigma, xi), taus)
        except MurphyError as exc:
            raise DomainError(f"row {lineno} (period={period}, horizon={h}): {exc}") from exc
        rows.extend((period, h, float(t), float(v)) for t, v in zip(taus, q))
    write_text(args.output, render_csv(QUANTILE_COLUMNS, rows))
    return EXIT_OK


def _add_fit_flags(p):
    p.add_argument("--input", required=True, help="forecast CSV, or - for stdin")
    p.add_argument("--loss", required=True, choices=("squared", "check"))
    p.add_argument("--tau", type=float, help="quantile level for check loss")
    bw = p.add_mutually_exclusive_group()
    bw.add_argument("--bandwidth", type=float, help="fixed kernel bandwidth")
    bw.add_argument("--cv", action="store_true", help="cross-validated bandwidth (default)")
    p.add_argument("--output", required=True, help="output path, or - for stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="murphy", description="Murphy decomposition of forecast scores.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("decompose", help="estimate score = UNC - RES + CAL")
    _add_fit_flags(p)
    p.add_argument("--by-horizon", action="store_true", help="one row per horizon")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("calcurve", help="calibration curve on a uniform grid")
    _add_fit_flags(p)
    p.add_argument("--grid-size", type=int, default=101)
    p.add_argument("--horizon", type=int, help="horizon to plot when the input holds several")
    p.set_defaults(func=cmd_calcurve)

    p = sub.add_parser("simulate", help="simulate the stylised forecaster panel")
    p.add_argument("--forecaster", required=True, type=str.lower, choices=[f.value for f in Forecaster])
    p.add_argument("--sigma-nu2", type=float, help="noise variance (ni and rec)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("benchmark", help="expanding-window benchmark forecasts")
    p.add_argument("--input", required=True, help="CSV with period and realization")
    p.add_argument("--kind", required=True, choices=[k.value for k in BenchmarkKind])
    p.add_argument("--tau", type=float)
    p.add_argument("--horizons", type=_int_list, default=[0])
    p.add_argument("--burn-in", type=int, default=DEFAULT_BURN_IN)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("boe-quantiles", help="quantiles of two-piece normal fan charts")
    p.add_argument("--input", required=True, help="CSV with period, horizon, mu, sigma, xi")
    p.add_argument("--taus", type=_float_list, default=list(DECILES))
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_boe_quantiles)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"murphy {args.command}: error: {exc}\n")
        return EXIT_USAGE
    except InputError as exc:
        sys.stderr.write(f"murphy {args.command}: input error: {exc}\n")
        return EXIT_INPUT
    except MurphyError as exc:
        sys.stderr.write(f"murphy {args.command}: {exc}\n")
        return EXIT_ESTIMATION
    except OSError as exc:
        sys.stderr.write(f"murphy {args.command}: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
