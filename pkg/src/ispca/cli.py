"""Command-line interface: ``ispca {fit,transform,eval,plot,toy}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
All outputs are deterministic given the inputs and ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .data import Dataset
from .errors import ConvergenceError, InvalidInputError, ISPCAError, NoSignalError
from .io import (
    MODEL_FORMAT,
    format_float,
    infer_target,
    load_model,
    matrix_csv,
    read_table,
    save_model,
)
from .iterative import FitConfig
from .projection import ProjectionModel, transform
from .protocol import SplitPlan, run_protocol
from .spca import METHODS, fit_reduction
from .svg import scatter_svg
from . import synthetic

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _add_data_args(p):
    p.add_argument("input", help="labeled CSV file")
    p.add_argument("--label-col", default=None, help="label column name or 0-based index (default: last)")
    p.add_argument("--no-header", action="store_true", help="the file has no header row")
    p.add_argument("--task", choices=("auto", "regression", "classification"), default="auto")


def _add_fit_args(p):
    p.add_argument("--method", choices=METHODS, default="ispca")
    p.add_argument("--k-total", type=int, default=None,
                   help="total components (default 50, or 20 for multiclass)")
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--n-perms", type=int, default=1000)
    p.add_argument("--grid-size", type=int, default=10)
    p.add_argument("--window", type=int, default=500)
    p.add_argument("--screening-p", type=float, default=0.001)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ispca", description="Iterative supervised principal components.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="fit a reduction, write model, Z and summary")
    _add_data_args(p)
    _add_fit_args(p)
    p.add_argument("--out-dir", default=".")

    p = sub.add_parser("transform", help="apply a saved model to new data")
    p.add_argument("input")
    p.add_argument("--model", required=True, help="model JSON written by 'fit'")
    p.add_argument("--label-col", default=None)
    p.add_argument("--no-header", action="store_true")
    p.add_argument("--out", default=None, help="output CSV (default: <out-dir>/Z.csv)")
    p.add_argument("--out-dir", default=".")

    p = sub.add_parser("eval", help="repeated-split predictive comparison")
    _add_data_args(p)
    _add_fit_args(p)
    p.add_argument("--methods", default="pca,spca,ispca", help="comma-separated method list")
    p.add_argument("--n-repeats", type=int, default=50)
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--out-dir", default=".")

    p = sub.add_parser("plot", help="scatter two latent features as CSV + SVG")
    _add_data_args(p)
    _add_fit_args(p)
    p.add_argument("--model", default=None, help="use a saved model instead of fitting")
    p.add_argument("--components", type=int, nargs=2, default=(1, 2), metavar=("I", "J"))
    p.add_argument("--out-dir", default=".")

    p = sub.add_parser("toy", help="write a synthetic dataset as CSV")
    p.add_argument("kind", choices=("toy1", "toy2", "noise", "blobs"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--d", type=int, default=100)
    p.add_argument("--classes", type=int, default=4)
    p.add_argument("--separation", type=float, default=3.0)
    p.add_argument("--out", required=True)
    return parser


def _config(args) -> FitConfig:
    try:
        return FitConfig(
            alpha=args.alpha,
            n_permutations=args.n_perms,
            grid_size=args.grid_size,
            window=args.window,
            k_total=args.k_total,
            seed=args.seed,
            screening_level=args.screening_p,
        )
    except InvalidInputError as exc:
        raise UsageError(str(exc)) from None


def _load(args):
    table = read_table(args.input, args.label_col, not args.no_header)
    data = Dataset(table.X, infer_target(table.raw_labels, args.task), table.feature_names)
    return table, data


def _write(path, text):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _z_csv(Z, table) -> str:
    header = [f"z{k + 1}" for k in range(Z.shape[1])]
    extra = table.raw_labels if table.raw_labels else None
    return matrix_csv(Z, header, extra, table.label_name or "label")


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return format_float(v)
    return str(v)


def summary_text(model: ProjectionModel, data: Dataset, input_name: str) -> str:
    lines = [
        f"format: {MODEL_FORMAT}",
        f"input: {input_name}",
        f"method: {model.method}",
        f"n: {data.n}",
        f"D: {data.D}",
        f"target: {model.target_kind}",
        f"labels: {', '.join(str(lab) for lab in model.labels) or '-'}",
        f"K total: {model.K_total}",
        f"K supervised: {model.n_supervised}",
        "config: " + " ".join(f"{k}={_fmt(v)}" for k, v in sorted(model.config.items())),
        "components:",
    ]
    for k, c in enumerate(model.components, start=1):
        lines.append(
            f"  {k} {c.kind} gamma={_fmt(c.gamma)} pvalue={_fmt(c.pvalue)} "
            f"score={_fmt(c.score)} n_features={c.n_features} source_class={_fmt(c.source_class)}"
        )
    lines.append("warnings: " + ("; ".join(model.warnings) if model.warnings else "none"))
    return "\n".join(lines) + "\n"


def cmd_fit(args) -> int:
    cfg = _config(args)
    table, data = _load(args)
    model = fit_reduction(args.method, data, cfg)
    if model.K_total == 0:
        raise NoSignalError("no component could be extracted; every feature is constant")
    extra = {
        "label_column": table.label_name,
        "label_index": table.label_index,
        "has_header": not args.no_header,
    }
    save_model(model, args.out_dir, extra=extra)
    Z = transform(model, data.X)
    _write(os.path.join(args.out_dir, "Z.csv"), _z_csv(Z, table))
    _write(os.path.join(args.out_dir, "summary.txt"),
           summary_text(model, data, os.path.basename(args.input)))
    print(f"K supervised: {model.n_supervised} of {model.K_total}")
    return EXIT_OK


def cmd_transform(args) -> int:
    model, doc = load_model(args.model)
    label_col = args.label_col
    if label_col is None:
        label_col = doc.get("label_column") if not args.no_header else doc.get("label_index")
    table = read_table(args.input, label_col, not args.no_header, require_label=False)
    if not args.no_header and table.feature_names != model.feature_names:
        missing = [f for f in model.feature_names if f not in table.feature_names]
        if missing:
            raise InvalidInputError(f"input lacks model features: {', '.join(missing[:5])}")
        raise InvalidInputError("input feature columns are not in the model's order")
    Z = transform(model, table.X)
    out = args.out or os.path.join(args.out_dir, "Z.csv")
    _write(out, _z_csv(Z, table))
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = _config(args)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise UsageError(f"unknown methods {bad}; choose from {', '.join(METHODS)}")
    try:
        plan = SplitPlan(args.n_repeats, args.test_fraction, args.seed)
    except InvalidInputError as exc:
        raise UsageError(str(exc)) from None
    _, data = _load(args)
    report = run_protocol(data, methods, plan, cfg)
    _write(os.path.join(args.out_dir, "report.csv"), report.to_csv())
    _write(os.path.join(args.out_dir, "report.json"), report.to_json())
    for m, s in report.summary().items():
        print(f"{m}: mlpd={s['mlpd']['mean']:.4f} accuracy={s['accuracy']['mean']:.4f} failed={s['n_failed']}")
    return EXIT_OK


def cmd_plot(args) -> int:
    table, data = _load(args)
    if args.model:
        model, _ = load_model(args.model)
    else:
        model = fit_reduction(args.method, data, _config(args))
    i, j = args.components
    if not (1 <= i <= model.K_total and 1 <= j <= model.K_total):
        raise UsageError(f"components must lie in 1..{model.K_total}")
    Z = transform(model, data.X)
    labels = table.raw_labels if data.target.is_classification else ["all"] * data.n
    pts = np.column_stack([Z[:, i - 1], Z[:, j - 1]])
    _write(os.path.join(args.out_dir, "plot.csv"),
           matrix_csv(pts, [f"z{i}", f"z{j}"], labels, table.label_name or "label"))
    _write(os.path.join(args.out_dir, "plot.svg"),
           scatter_svg(pts[:, 0], pts[:, 1], labels, f"z{i}", f"z{j}", model.method))
    return EXIT_OK


def cmd_toy(args) -> int:
    if args.kind == "toy1":
        data = synthetic.gen_toy1(args.seed, args.n or synthetic.TOY_N)
    elif args.kind == "toy2":
        data = synthetic.gen_toy2(args.seed, args.n or synthetic.TOY_N)
    elif args.kind == "noise":
        data = synthetic.gen_noise(args.n or 30, args.d, args.seed)
    else:
        data = synthetic.gen_blobs(args.n or 120, args.d, args.classes, args.separation, args.seed)
    labels = [data.target.labels[c] for c in data.target.class_codes()]
    _write(args.out, matrix_csv(data.X, data.feature_names, labels))
    return EXIT_OK


COMMANDS = {
    "fit": cmd_fit,
    "transform": cmd_transform,
    "eval": cmd_eval,
    "plot": cmd_plot,
    "toy": cmd_toy,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"ispca: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NoSignalError, ConvergenceError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"ispca: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ISPCAError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"ispca: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
