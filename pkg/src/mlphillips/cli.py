"""Command-line front end.

Exit codes: 0 success, 2 usage, 3 data, 4 non-convergence,
5 reproduction failure, 6 numeric guard.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import dataio, fitting
from .models import ModelKind
from .optimizer import SimplexConfig
from .special_functions import (
    DEFAULT_POLICY,
    ArgumentGuardError,
    CancellationError,
    MLTwoParams,
    NonConvergenceError,
    PrabhakarParams,
    SeriesOverflowError,
    ShuklaParams,
    SpecialFunctionError,
    ml_one,
    ml_prabhakar,
    ml_shukla,
    ml_two,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NONCONVERGED = 4
EXIT_REPRODUCTION = 5
EXIT_NUMERIC = 6

FORMATS = ("table", "json", "csv")
MODEL_FLAGS = {"ml": ModelKind.MITTAG_LEFFLER, "exp": ModelKind.EXPONENTIAL, "power": ModelKind.POWER}
MODEL_SHORT = {kind: flag for flag, kind in MODEL_FLAGS.items()}
ALL_PARAM_NAMES = ("alpha", "beta", "a", "b", "c", "C")

# errors that mean "the series evaluator refused or gave up"
GUARD_ERRORS = (ArgumentGuardError, NonConvergenceError, SeriesOverflowError, CancellationError)


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# formatting helpers


def _num(x: float) -> str:
    """Full double precision, stable across runs."""
    return repr(float(x))


def _fix(x: float) -> str:
    return f"{x:.4f}"


def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _columns(rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "".join(
        "  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() + "\n" for r in rows
    )


def _write_xy(path: Path, x, y) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = [(_num(a), _num(b)) for a, b in zip(x, y)]
    path.write_text(_csv_text(("x", "y"), rows), encoding="utf-8")


# ---------------------------------------------------------------------------
# argument helpers


def _config(args, base: SimplexConfig = SimplexConfig()) -> SimplexConfig:
    changes = {}
    if args.tol is not None:
        changes.update(x_tol=args.tol, f_tol=args.tol)
    if args.max_iter is not None:
        changes["max_iter"] = args.max_iter
    if args.restarts is not None:
        changes["restarts"] = args.restarts
    try:
        return replace(base, **changes)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _dataset(args) -> dataio.DataSet:
    if args.data is not None:
        return dataio.load_dataset(args.data)
    return dataio.embedded_datasets()[args.country]


def _range(text: str, parts: int) -> tuple:
    pieces = text.split(":")
    if len(pieces) != parts:
        raise UsageError(f"expected {parts} colon-separated fields, got {text!r}")
    try:
        lo, hi = float(pieces[0]), float(pieces[1])
        n = int(pieces[2]) if parts == 3 else None
    except ValueError:
        raise UsageError(f"cannot parse range {text!r}") from None
    if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
        raise UsageError(f"range {text!r} must satisfy lo < hi")
    if n is not None and n < 1:
        raise UsageError("range point count must be positive")
    return (lo, hi) if n is None else (lo, hi, n)


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", metavar="PATH", help="CSV with year,unemployment_rate,inflation_rate")
    src.add_argument("--country", choices=dataio.EMBEDDED_LABELS, help="built-in dataset")


def _add_optim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, help="simplex x and f tolerance")
    p.add_argument("--max-iter", type=int, help="iterations per simplex descent")
    p.add_argument("--restarts", type=int, help="restarts from the incumbent")


def _add_format(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=FORMATS, default="table")


# ---------------------------------------------------------------------------
# fit


def _report_dict(rep: fitting.FitReport) -> dict:
    return {
        "model": MODEL_SHORT[rep.model_kind],
        "params": asdict(rep.params),
        "sse_average": rep.sse_average,
        "sse_original": rep.sse_original,
        "converged": rep.converged,
    }


def _render_reports(reports, fmt: str, title: str) -> str:
    dicts = [_report_dict(r) for r in reports]
    if fmt == "json":
        return _json_text(dicts[0] if len(dicts) == 1 else dicts)
    if fmt == "csv":
        header = ("model", "sse_average", "sse_original", "converged") + ALL_PARAM_NAMES
        rows = []
        for d in dicts:
            row = [d["model"], _num(d["sse_average"]), _num(d["sse_original"]), str(d["converged"]).lower()]
            row += [_num(d["params"][k]) if k in d["params"] else "" for k in ALL_PARAM_NAMES]
            rows.append(row)
        return _csv_text(header, rows)
    rows = [("model", "params", "sse_average", "sse_original", "converged")]
    for d in dicts:
        params = " ".join(f"{k}={_fix(v)}" for k, v in d["params"].items())
        rows.append((d["model"], params, _fix(d["sse_average"]), _fix(d["sse_original"]),
                     "yes" if d["converged"] else "no"))
    return f"{title}\n" + _columns(rows)


def _curve_path(base: Path, model: str, many: bool) -> Path:
    return base.with_name(f"{base.stem}_{model}{base.suffix}") if many else base


def cmd_fit(args, out) -> int:
    data = _dataset(args)
    config = _config(args)
    kinds = list(fitting.MODEL_ORDER) if args.model == "all" else [MODEL_FLAGS[args.model]]
    reports = [
        fitting.fit_model(k, data, config, use_rounded_averages=args.rounded_averages) for k in kinds
    ]
    out.write(_render_reports(reports, args.format, f"dataset: {data.label}"))
    if args.emit_curve:
        if args.samples < 2:
            raise UsageError("--samples must be at least 2")
        xs = [p[0] for p in data.points]
        lo, hi = min(xs) - 0.5, max(xs) + 0.5
        for rep in reports:
            x, y = fitting.curve_samples(rep.model_kind, rep.params, lo, hi, args.samples)
            _write_xy(_curve_path(Path(args.emit_curve), MODEL_SHORT[rep.model_kind], len(reports) > 1), x, y)
    return EXIT_OK if all(r.converged for r in reports) else EXIT_NONCONVERGED


# ---------------------------------------------------------------------------
# reproduce


def _cell_dict(c: fitting.Cell) -> dict:
    return {
        "country": c.country,
        "model": MODEL_SHORT[c.kind],
        "source": c.source,
        "sse_average": c.sse_average,
        "published_sse_average": c.published_sse_average,
        "sse_original": c.sse_original,
        "published_sse_original": c.published_sse_original,
        "passed": c.passed,
        "error": c.error,
    }


def cmd_reproduce(args, out) -> int:
    report = fitting.reproduce_tables(
        _config(args), use_rounded_averages=args.rounded_averages
    )
    cells = [_cell_dict(c) for c in report.cells]
    if args.format == "json":
        out.write(_json_text({"cells": cells, "all_passed": report.all_passed}))
    elif args.format == "csv":
        header = tuple(cells[0])
        rows = [
            [_num(v) if isinstance(v, float) else ("" if v is None else str(v).lower() if isinstance(v, bool) else v)
             for v in d.values()]
            for d in cells
        ]
        out.write(_csv_text(header, rows))
    else:
        for d in cells:
            verdict = "PASS" if d["passed"] else "FAIL"
            line = (
                f"{d['country']} / {d['model']} / {d['source']}: {_fix(d['sse_average'])}"
                f"  (published {_fix(d['published_sse_average'])})"
                f"  original {_fix(d['sse_original'])} (published {_fix(d['published_sse_original'])})"
                f"  {verdict}"
            )
            if d["error"]:
                line += f"  [{d['error']}]"
            out.write(line + "\n")
        out.write(f"{sum(c.passed for c in report.cells)}/{len(cells)} cells pass\n")
    return EXIT_OK if report.all_passed else EXIT_REPRODUCTION


# ---------------------------------------------------------------------------
# ml-eval


def _ml_function(args):
    if args.q is not None and args.gamma is None:
        raise UsageError("--q requires --gamma")
    beta = 1.0 if args.beta is None else args.beta
    if args.q is not None:
        p = ShuklaParams(args.alpha, beta, args.gamma, args.q)
        return lambda z: ml_shukla(p, z, DEFAULT_POLICY)
    if args.gamma is not None:
        p = PrabhakarParams(args.alpha, beta, args.gamma)
        return lambda z: ml_prabhakar(p, z, DEFAULT_POLICY)
    if args.beta is not None:
        p = MLTwoParams(args.alpha, beta)
        return lambda z: ml_two(p, z, DEFAULT_POLICY)
    MLTwoParams(args.alpha)  # validates alpha
    return lambda z: ml_one(args.alpha, z, DEFAULT_POLICY)


def cmd_ml_eval(args, out) -> int:
    if (args.z is None) == (args.z_range is None):
        raise UsageError("give exactly one of --z or --z-range")
    try:
        fn = _ml_function(args)
    except (SpecialFunctionError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    if args.z is not None:
        zs = np.array([args.z])
    else:
        lo, hi, n = _range(args.z_range, 3)
        zs = np.linspace(lo, hi, n)
    values = np.atleast_1d(fn(zs))
    if args.format == "json":
        out.write(_json_text([{"z": float(z), "value": float(v)} for z, v in zip(zs, values)]))
    elif args.format == "csv":
        out.write(_csv_text(("z", "value"), [(_num(z), _num(v)) for z, v in zip(zs, values)]))
    else:
        # function values keep full precision; four decimals would hide the point of the command
        out.write(_columns([("z", "E(z)")] + [(_num(z), _num(v)) for z, v in zip(zs, values)]))
    return EXIT_OK


# ---------------------------------------------------------------------------
# bin


def cmd_bin(args, out) -> int:
    data = _dataset(args)
    try:
        points = dataio.bin_average(data, args.bin_width)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.format == "json":
        out.write(_json_text([asdict(p) for p in points]))
    elif args.format == "csv":
        header = ("level_low", "level_high", "mean_unemployment", "mean_inflation", "count")
        rows = [(f"{p.level_low:g}", f"{p.level_high:g}", _num(p.mean_unemployment),
                 _num(p.mean_inflation), p.count) for p in points]
        out.write(_csv_text(header, rows))
    else:
        rows = [("level", "mean_unemployment", "mean_inflation", "count")]
        rows += [(f"{p.level_low:g}-{p.level_high:g}", _fix(p.mean_unemployment),
                  _fix(p.mean_inflation), str(p.count)) for p in points]
        out.write(f"dataset: {data.label}\n" + _columns(rows))
    return EXIT_OK


# ---------------------------------------------------------------------------
# demo


def cmd_demo(args, out) -> int:
    target = args.target.replace("-", "_")
    if args.samples < 2:
        raise UsageError("--samples must be at least 2")
    x_range = _range(args.x_range, 2) if args.x_range else fitting.DEMO_DEFAULT_RANGES[target]
    try:
        report, x, y = fitting.synthetic_demo(
            target, x_range, args.points, _config(args, fitting.DEMO_CONFIG),
            alpha=args.alpha, beta=args.beta,
        )
    except ValueError as exc:
        if isinstance(exc, SpecialFunctionError):
            raise
        raise UsageError(str(exc)) from None
    out_dir = Path(args.out_dir)
    fx, fy = fitting.curve_samples(report.model_kind, report.params, x_range[0], x_range[1],
                                   args.samples, fitting.DEMO_POLICY)
    target_file = out_dir / f"demo_{target}_target.csv"
    fit_file = out_dir / f"demo_{target}_fit.csv"
    _write_xy(target_file, x, y)
    _write_xy(fit_file, fx, fy)

    d = _report_dict(report)
    d = {"target": args.target, "target_params": {}, **d}
    if target == "damped_cos":
        d["target_params"] = {"alpha": args.alpha, "beta": args.beta}
    d["sum_y_squared"] = math.fsum((y * y).tolist())
    d["files"] = {"target": str(target_file), "fit": str(fit_file)}
    if args.format == "json":
        out.write(_json_text(d))
    elif args.format == "csv":
        header = ("target", "target_params", "sse", "sum_y_squared", "converged") + tuple(d["params"])
        row = [args.target, ";".join(f"{k}={_num(v)}" for k, v in d["target_params"].items()),
               _num(d["sse_average"]), _num(d["sum_y_squared"]), str(d["converged"]).lower()]
        row += [_num(v) for v in d["params"].values()]
        out.write(_csv_text(header, [row]))
    else:
        lines = [f"target: {args.target}"]
        if d["target_params"]:
            lines.append("target params: " + " ".join(f"{k}={v:g}" for k, v in d["target_params"].items()))
        lines.append("fitted: " + " ".join(f"{k}={_fix(v)}" for k, v in d["params"].items()))
        lines.append(f"sse: {d['sse_average']:.4e} (sum y^2 {_fix(d['sum_y_squared'])})")
        lines.append(f"converged: {'yes' if d['converged'] else 'no'}")
        lines.append(f"target samples: {target_file}")
        lines.append(f"fitted samples: {fit_file}")
        out.write("\n".join(lines) + "\n")
    return EXIT_OK if report.converged else EXIT_NONCONVERGED


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlphillips",
        description="Mittag-Leffler, exponential and power-law fits of unemployment/inflation data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit models to a dataset")
    _add_data_flags(p)
    p.add_argument("--model", choices=("power", "exp", "ml", "all"), default="all")
    _add_format(p)
    p.add_argument("--emit-curve", metavar="PATH", help="write x,y samples of the fitted curve")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--rounded-averages", action="store_true", help="round bin means to 3 decimals")
    _add_optim_flags(p)
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("reproduce", help="refit and re-score the published tables")
    _add_format(p)
    p.add_argument("--rounded-averages", action="store_true")
    _add_optim_flags(p)
    p.set_defaults(handler=cmd_reproduce)

    p = sub.add_parser("ml-eval", help="evaluate a Mittag-Leffler type function")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--z", type=float)
    p.add_argument("--z-range", metavar="LO:HI:N", help="use --z-range=LO:HI:N when LO is negative")
    _add_format(p)
    p.set_defaults(handler=cmd_ml_eval)

    p = sub.add_parser("bin", help="average records per unemployment level")
    _add_data_flags(p)
    p.add_argument("--bin-width", type=float, default=1.0)
    _add_format(p)
    p.set_defaults(handler=cmd_bin)

    p = sub.add_parser("demo", help="fit the Mittag-Leffler model to a synthetic curve")
    p.add_argument("--target", choices=("sine", "damped-cos", "exp-erfc"), required=True)
    p.add_argument("--alpha", type=float, default=0.3, help="damped-cos decay rate")
    p.add_argument("--beta", type=float, default=2.0, help="damped-cos angular frequency")
    p.add_argument("--points", type=int, default=30, help="target samples used in the fit")
    p.add_argument("--samples", type=int, default=200, help="fitted-curve samples written")
    p.add_argument("--x-range", metavar="LO:HI")
    p.add_argument("--out-dir", default=".")
    _add_format(p)
    _add_optim_flags(p)
    p.set_defaults(handler=cmd_demo)
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors this way
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.handler(args, out)
    except UsageError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (dataio.DataError, OSError) as exc:
        err.write(f"data error: {exc}\n")
        return EXIT_DATA
    except GUARD_ERRORS as exc:
        err.write(f"numeric error: {exc}\n")
        return EXIT_NUMERIC
    except fitting.FitError as exc:
        err.write(f"data error: {exc}\n")
        return EXIT_DATA
    except SpecialFunctionError as exc:
        err.write(f"numeric error: {exc}\n")
        return EXIT_NUMERIC


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
