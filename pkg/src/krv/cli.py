"""Command-line entry point.

    krv bench run CONFIG [overrides]    grid-searched cross-validation benchmark
    krv bench stats REPORT_DIR          rebuild tables and the Nemenyi diagram
    krv train DATASET [flags]           fit one model on a whole CSV and save it
    krv predict MODEL CSV               print one predicted class per row
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench.config import KERNELS, LEARNERS, SCALINGS, ConfigError, load_config
from .bench.diagram import emit_nemenyi_diagram
from .bench.report import emit_tables, emit_timings, load_report, write_report
from .bench.runner import run_experiment
from .data import DataError, encode_csv, fit_scaler, load_csv
from .kernels import KernelSpec
from .neighbors import krv_train, sparsity_accounting
from .persist import StoredModel, load_model, save_model
from .sbl import SblConfig, train_classifier

log = logging.getLogger("krv")


def _number_list(conv):
    def parse(text: str):
        values = []
        for part in text.split(","):
            part = part.strip()
            if ":" in part and conv is int:
                lo, hi = part.split(":")
                values.extend(range(int(lo), int(hi) + 1))
            elif part:
                values.append(conv(part))
        if not values:
            raise argparse.ArgumentTypeError("empty list")
        return tuple(values)

    return parse


def _names(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.split(",") if p.strip())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="krv", description="k-relevance-vector classification and benchmarks")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="benchmark runs and statistics")
    bsub = bench.add_subparsers(dest="bench_command", required=True)
    run = bsub.add_parser("run", help="run a benchmark described by a TOML config")
    run.add_argument("config", type=Path)
    run.add_argument("--datasets", type=_names, help="comma-separated CSV paths")
    run.add_argument("--learners", type=_names, help=f"comma-separated subset of {','.join(LEARNERS)}")
    run.add_argument("--kernel", choices=KERNELS)
    run.add_argument("--k-grid", type=_number_list(int), help="e.g. 1:51 or 1,3,5")
    run.add_argument("--width-grid", type=_number_list(float))
    run.add_argument("--delta-grid", type=_number_list(float))
    run.add_argument("--poly-order", type=int)
    run.add_argument("--scaling", choices=SCALINGS)
    run.add_argument("--runs", type=int)
    run.add_argument("--folds", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--output-dir")
    run.add_argument("--label-column", type=int)
    run.add_argument("--n-jobs", type=int)
    stats = bsub.add_parser("stats", help="re-emit tables and diagram from a report directory")
    stats.add_argument("report_dir", type=Path)

    train = sub.add_parser("train", help="train a k-RV or RVM model on a CSV file")
    train.add_argument("dataset", type=Path)
    train.add_argument("--learner", choices=("krv", "rvm_bern", "rvm_gauss"), default="krv")
    train.add_argument("--kernel", choices=KERNELS, default="gaussian")
    train.add_argument("--width", type=float, default=0.5, help="Gaussian kernel width")
    train.add_argument("--order", type=int, default=2, help="polynomial kernel order")
    train.add_argument("--scaling", choices=SCALINGS, default="minmax")
    train.add_argument("--delta", type=float, default=0.1, help="delta_alpha stopping threshold")
    train.add_argument("--k", type=int, default=1, help="neighbour count (krv)")
    train.add_argument("--label-column", default="-1", help="index or header name")
    train.add_argument("-o", "--output", type=Path, help="model file (default: <dataset>.model.json)")

    pred = sub.add_parser("predict", help="predict classes for the rows of a CSV file")
    pred.add_argument("model", type=Path)
    pred.add_argument("csv", type=Path)
    return p


def _cmd_bench_run(args) -> int:
    cfg = load_config(args.config)
    overrides = {
        key: getattr(args, key)
        for key in (
            "datasets", "learners", "kernel", "k_grid", "width_grid", "delta_grid", "poly_order", "scaling",
            "runs", "folds", "seed", "output_dir", "label_column", "n_jobs",
        )
        if getattr(args, key) is not None
    }
    cfg = cfg.replace(**overrides)
    report = run_experiment(cfg)
    if not report.datasets:
        print("error: no dataset could be evaluated", file=sys.stderr)
        return 1
    out = Path(cfg.output_dir)
    write_report(report, out)
    emit_tables(report, out)
    emit_timings(report, out)
    if report.rank_report is not None:
        emit_nemenyi_diagram(report.rank_report, out / "nemenyi.svg")
    print((out / "accuracy.txt").read_text(encoding="utf-8"), end="")
    print(f"{report.cells_evaluated} grid cells evaluated; outputs in {out}")
    return 0


def _cmd_bench_stats(args) -> int:
    report = load_report(args.report_dir)
    emit_tables(report, args.report_dir)
    if report.rank_report is not None:
        emit_nemenyi_diagram(report.rank_report, Path(args.report_dir) / "nemenyi.svg")
        print((Path(args.report_dir) / "ranks.txt").read_text(encoding="utf-8"), end="")
    else:
        print((Path(args.report_dir) / "accuracy.txt").read_text(encoding="utf-8"), end="")
    return 0


def _cmd_train(args) -> int:
    label = int(args.label_column) if args.label_column.lstrip("-").isdigit() else args.label_column
    d = load_csv(args.dataset, label_column=label)
    scaler = fit_scaler(d.instances, args.scaling)
    ds = d.with_instances(scaler.transform(d.instances))
    spec = KernelSpec.gaussian(args.width) if args.kernel == "gaussian" else KernelSpec.polynomial(args.order)
    cfg = SblConfig(delta_alpha=args.delta)
    if args.learner == "krv":
        model = krv_train(ds, spec, args.k, cfg)
        rv, used = sparsity_accounting(model, ds.n_instances)
    else:
        likelihood = "bernoulli" if args.learner == "rvm_bern" else "gaussian"
        model = train_classifier(ds.instances, ds.labels, ds.n_classes, spec, likelihood, cfg)
        rv = int(model.relevance_vectors.size)
        used = rv / ds.n_instances
    stored = StoredModel(model=model, scaler=scaler, classes=d.classes, schema=d.schema)
    out = args.output or args.dataset.with_suffix(".model.json")
    save_model(stored, out)
    train_acc = float(np.mean(stored.predict(d.instances) == d.labels))
    print(f"{args.learner} on {d.name}: {rv} relevance vectors (used {used:.4f}), training accuracy {train_acc:.4f}")
    print(f"model written to {out}")
    return 0


def _cmd_predict(args) -> int:
    stored = load_model(args.model)
    if not stored.schema:
        raise DataError("model file carries no column layout")
    X, labels = encode_csv(args.csv, stored.schema)
    pred = stored.predict(X)
    for c in pred:
        print(stored.classes[int(c)])
    if labels is not None:
        acc = np.mean([stored.classes[int(c)] == t for c, t in zip(pred, labels)])
        print(f"accuracy {acc:.4f} on {len(labels)} labelled rows", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "bench":
            return _cmd_bench_run(args) if args.bench_command == "run" else _cmd_bench_stats(args)
        if args.command == "train":
            return _cmd_train(args)
        return _cmd_predict(args)
    except (ConfigError, DataError, ValueError, OSError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
