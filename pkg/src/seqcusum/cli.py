"""Command-line entry point.

Exit codes: 0 success / no alarm, 1 usage or configuration error,
2 alarm raised (``monitor``), 3 data error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import __version__
from .calibration import CalibrationConfig, brownian_quantile_unit_interval, calibrate
from .detectors import DetectorKind, ThresholdSpec
from .errors import DataError, SeqCusumError
from .io import parse_series
from .lrv import long_run_variance
from .monitor import AlarmReport, MonitorConfig, create_monitor, report_dict, run_stream
from .params import Parameter
from .quantiles import QuantileTable, default_table, table_load
from .simulation import DetectorCell, ExperimentConfig, ShiftSpec, run_experiment

EXIT_OK, EXIT_USAGE, EXIT_ALARM, EXIT_DATA = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="seqcusum", description="Open-end sequential change-point detection.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("calibrate", help="estimate limiting quantiles by simulation")
    c.add_argument("--detector", required=True, choices=[k.value for k in DetectorKind])
    c.add_argument("--eta", type=float, default=0.001)
    c.add_argument("--gamma", type=float, default=0.0)
    c.add_argument("--alpha", type=_floats, default=[0.01, 0.05, 0.1], help="comma list of levels")
    c.add_argument("--m-sim", type=int, default=100)
    c.add_argument("--paths", type=int, default=4000)
    c.add_argument("--p-min", type=int, default=10)
    c.add_argument("--p-max", type=int, default=14)
    c.add_argument("--full-scale", action="store_true", help="m=500, 15000 paths, p=10..18")
    c.add_argument("--grid", type=int, default=2**13, help="Brownian grid size (E, Q)")
    c.add_argument("--brownian-paths", type=int, default=100_000)
    c.add_argument("--one-sided", action="store_true", help="E/Q: functional without absolute values")
    c.add_argument("--seed", type=int, default=20210611)
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--output", help="write the quantile table CSV here")
    c.add_argument("--output-format", choices=["csv", "json"], default="csv")

    m = sub.add_parser("monitor", help="run the sequential test on a CSV column")
    m.add_argument("--detector", default="T", choices=[k.value for k in DetectorKind])
    m.add_argument("--eta", type=float, default=0.001)
    m.add_argument("--gamma", type=float, default=0.0)
    m.add_argument("--alpha", type=float, default=0.05)
    m.add_argument("--m", type=int, required=True, help="learning sample size")
    m.add_argument("--input", required=True)
    m.add_argument("--column", default="0")
    m.add_argument("--table", help="quantile table CSV (default: $SEQCUSUM_TABLE or shipped)")
    m.add_argument("--quantile", type=float, help="explicit critical value")
    m.add_argument("--parameter", default="mean", help="mean | variance | quantile:p")
    m.add_argument("--sigma", type=float, help="explicit sigma (required for quantile:p)")
    m.add_argument("--output", help="also write the report to this file")
    m.add_argument("--output-format", choices=["json", "csv"], default="json")

    s = sub.add_parser("simulate", help="replicated level / power experiment")
    s.add_argument("--model", required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--n", type=int, required=True, help="total series length (horizon)")
    s.add_argument("--kstar", type=int)
    s.add_argument("--delta", type=float, default=0.0)
    s.add_argument("--reps", type=int, default=1000)
    s.add_argument("--seed", type=int, default=1)
    s.add_argument("--detectors", default="R:0.001:0:0.05,S:0.001:0:0.05,T:0.001:0:0.05,E:0:0:0.05,Q:0:0:0.05",
                   help="comma list of kind:eta:gamma:alpha")
    s.add_argument("--table")
    s.add_argument("--quantile", type=float, help="override every critical value")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--output", help="write the CSV here instead of stdout")
    s.add_argument("--output-format", choices=["csv", "json"], default="csv")

    v = sub.add_parser("lrv", help="long-run variance of a CSV column")
    v.add_argument("--input", required=True)
    v.add_argument("--column", default="0")
    v.add_argument("--output-format", choices=["json", "csv"], default="json")
    return p


def _emit(rows: list[dict], fmt: str, out) -> str:
    if fmt == "json":
        text = json.dumps(rows[0] if len(rows) == 1 else rows, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        text = buf.getvalue()
    out.write(text)
    return text


def _table(path: str | None) -> QuantileTable:
    return table_load(path) if path else default_table()


def _cmd_calibrate(a) -> int:
    kind = DetectorKind.parse(a.detector)
    if kind.uses_eta:
        if a.full_scale:
            cfg = CalibrationConfig.full_scale(seed=a.seed, workers=a.workers)
        else:
            cfg = CalibrationConfig(a.m_sim, a.paths, a.p_min, a.p_max, a.seed, a.workers)
        entries = calibrate(ThresholdSpec(kind, a.eta, a.gamma), a.alpha, cfg)
    else:
        entries = [
            brownian_quantile_unit_interval(kind, a.gamma, al, a.grid, a.brownian_paths, a.seed, absolute=not a.one_sided)
            for al in sorted(a.alpha)
        ]
    table = QuantileTable(entries)
    if a.output:
        Path(a.output).write_text(table.to_csv())
    if a.output_format == "csv":
        sys.stdout.write(table.to_csv())
    else:
        rows = [dict(kind=e.kind.value, eta=e.eta, gamma=e.gamma, alpha=e.alpha, quantile=e.quantile, stderr=e.stderr, provenance=e.provenance) for e in entries]
        json.dump(rows, sys.stdout, indent=2)
        sys.stdout.write("\n")
    return EXIT_OK


def _cmd_monitor(a) -> int:
    data = parse_series(a.input, a.column)
    if a.m < 4:
        raise UsageError("--m must be at least 4")
    if len(data) < a.m:
        raise DataError(f"input has {len(data)} rows, fewer than the learning sample m={a.m}")
    param = Parameter.parse(a.parameter)
    if param.name == "quantile" and a.sigma is None:
        raise UsageError("--parameter quantile:p requires an explicit --sigma")
    spec = ThresholdSpec(DetectorKind.parse(a.detector), a.eta, a.gamma)
    config = MonitorConfig(spec, a.alpha, a.quantile, param, a.sigma)
    table = None if a.quantile is not None else _table(a.table)
    mon = create_monitor(config, data[: a.m], table)
    report = run_stream(mon, data[a.m :])
    text = _emit([report_dict(report)], a.output_format, sys.stdout)
    if a.output:
        Path(a.output).write_text(text)
    return EXIT_ALARM if isinstance(report, AlarmReport) else EXIT_OK


def _cmd_simulate(a) -> int:
    cells = [DetectorCell.parse(t) for t in a.detectors.split(",") if t.strip()]
    shift = None
    if a.kstar is not None:
        shift = ShiftSpec(a.kstar, a.delta)
    elif a.delta:
        raise UsageError("--delta needs --kstar")
    cfg = ExperimentConfig(a.model, a.m, a.n, shift, cells, a.reps, a.seed, a.quantile, a.workers)
    table = None if a.quantile is not None else _table(a.table)
    res = run_experiment(cfg, table)
    if a.output_format == "csv":
        text = res.to_csv()
        if a.output:
            Path(a.output).write_text(text)
        else:
            sys.stdout.write(text)
    else:
        rows = [
            dict(kind=c.cell.kind.value, eta=c.cell.eta, gamma=c.cell.gamma, alpha=c.cell.alpha,
                 rejection_pct=c.rejection_pct, mean_delay=None if c.mean_delay != c.mean_delay else c.mean_delay)
            for c in res.cells
        ]
        text = json.dumps(rows, indent=2) + "\n"
        if a.output:
            Path(a.output).write_text(text)
        else:
            sys.stdout.write(text)
    return EXIT_OK


def _cmd_lrv(a) -> int:
    est = long_run_variance(parse_series(a.input, a.column))
    _emit([dict(sigma2=est.sigma2, sigma=est.sigma, bandwidth=est.bandwidth, m=est.m, floored=est.floored)], a.output_format, sys.stdout)
    return EXIT_OK


COMMANDS = {"calibrate": _cmd_calibrate, "monitor": _cmd_monitor, "simulate": _cmd_simulate, "lrv": _cmd_lrv}


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SeqCusumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
