"""Report files: JSON run record plus CSV and aligned-text tables.

``report.json`` holds everything needed to rebuild the tables and is free of
wall-clock data, so fixed-seed reruns produce identical bytes.  Timings are
written to ``timings.csv`` / ``timings.txt`` only.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Sequence

import numpy as np

from ..stats import build_rank_report, paired_t_statistic
from .config import ExperimentConfig, config_from_dict
from .runner import SBL_LEARNERS, LearnerResult, RunReport

REPORT_FILE = "report.json"
REPORT_VERSION = 1
NOTE = "hyperparameters selected on the same cross-validation that yields the accuracy (optimistic)"


# ------------------------------------------------------------------ JSON


def _opt(a):
    return None if a is None else np.asarray(a).tolist()


def report_to_dict(report: RunReport) -> dict:
    entries = []
    for (dataset, learner), r in sorted(report.results.items()):
        entries.append(
            {
                "dataset": dataset,
                "learner": learner,
                "best_params": r.best_params,
                "mean_accuracy": r.mean_accuracy,
                "std_accuracy": r.std_accuracy,
                "fold_accuracies": _opt(r.fold_accuracies),
                "rv_counts": _opt(r.rv_counts),
                "used_fractions": _opt(r.used_fractions),
                "seeds": list(r.seeds),
                "cells": list(r.cells),
                "cell_means": _opt(r.cell_means),
                "cell_rv_means": _opt(r.cell_rv_means),
                "cell_used_means": _opt(r.cell_used_means),
            }
        )
    return {
        "version": REPORT_VERSION,
        "note": NOTE,
        "config": report.config.to_dict(),
        "datasets": list(report.datasets),
        "skipped": list(report.skipped),
        "cells_evaluated": report.cells_evaluated,
        "results": entries,
    }


def report_from_dict(d: dict) -> RunReport:
    if d.get("version") != REPORT_VERSION:
        raise ValueError(f"unsupported report version {d.get('version')!r}")
    cfg = config_from_dict(d["config"])
    report = RunReport(config=cfg, datasets=tuple(d["datasets"]), skipped=tuple(d["skipped"]))
    report.cells_evaluated = int(d["cells_evaluated"])
    for e in d["results"]:
        arr = lambda key, dtype=float: None if e[key] is None else np.array(e[key], dtype=dtype)
        report.results[(e["dataset"], e["learner"])] = LearnerResult(
            dataset=e["dataset"],
            learner=e["learner"],
            best_params=e["best_params"],
            mean_accuracy=e["mean_accuracy"],
            std_accuracy=e["std_accuracy"],
            fold_accuracies=arr("fold_accuracies"),
            rv_counts=arr("rv_counts", np.int64),
            used_fractions=arr("used_fractions"),
            seeds=tuple(e["seeds"]),
            cells=tuple(e["cells"]),
            cell_means=arr("cell_means"),
            cell_rv_means=arr("cell_rv_means"),
            cell_used_means=arr("cell_used_means"),
        )
    if len(report.datasets) >= 2 and len(cfg.learners) >= 2:
        report.rank_report = build_rank_report(cfg.learners, report.datasets, report.accuracy_matrix())
    return report


def write_report(report: RunReport, out_dir: str | Path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / REPORT_FILE
    path.write_text(json.dumps(report_to_dict(report), indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_report(report_dir: str | Path) -> RunReport:
    path = Path(report_dir) / REPORT_FILE
    if not path.is_file():
        raise FileNotFoundError(f"no {REPORT_FILE} in {report_dir}")
    return report_from_dict(json.loads(path.read_text(encoding="utf-8")))


# ---------------------------------------------------------------- tables


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.3g}" if 0 < abs(v) < 1e-3 else f"{v:.4f}"
    return str(v)


def aligned(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    """Plain-text table with right-aligned columns."""
    cells = [list(map(str, header))] + [[_fmt(v) for v in row] for row in rows]
    widths = [max(len(r[j]) for r in cells) for j in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])
    return buf.getvalue()


def _kernel_param(r: LearnerResult):
    return r.best_params.get("width", r.best_params.get("order"))


def ttest_rows(report: RunReport, alpha: float = 0.05) -> list[list]:
    """k-RV vs ker-NN per dataset over the runs x folds accuracy samples of the best cells."""
    rows = []
    for d in report.datasets:
        a = report.results[(d, "krv")].fold_accuracies.ravel()
        b = report.results[(d, "kernn")].fold_accuracies.ravel()
        t, p = paired_t_statistic(a, b)
        rows.append([d, float(a.mean()), float(b.mean()), float(t), float(p), int(p < alpha)])
    return rows


def _write(path: Path, text: str, written: list[Path]):
    path.write_text(text, encoding="utf-8")
    written.append(path)


def emit_tables(report: RunReport, out_dir: str | Path) -> list[Path]:
    """Write accuracy, best-cell, sparsity, t-test and rank tables as CSV and text."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    learners = list(report.config.learners)
    written: list[Path] = []

    header = ["dataset", *learners]
    rows = [[d, *(report.results[(d, n)].mean_accuracy for n in learners)] for d in report.datasets]
    _write(out_dir / "accuracy.csv", _csv(header, rows), written)
    _write(out_dir / "accuracy.txt", f"# {NOTE}\n" + aligned(header, rows), written)

    header = ["dataset", "learner", "mean", "std", "params", "rv_count", "used"]
    rows = []
    for d in report.datasets:
        for n in learners:
            r = report.results[(d, n)]
            params = " ".join(f"{k}={v}" for k, v in r.best_params.items())
            rows.append([d, n, r.mean_accuracy, r.std_accuracy, params, r.rv_count, r.used_fraction])
    _write(out_dir / "best.csv", _csv(header, rows), written)
    _write(out_dir / "best.txt", aligned(header, rows), written)

    sparse = [n for n in learners if n in SBL_LEARNERS]
    if sparse:
        param = "width" if report.config.kernel == "gaussian" else "order"
        header = ["dataset", "learner", "rv_count", param, "delta", "used"]
        rows = []
        for d in report.datasets:
            for n in sparse:
                r = report.results[(d, n)]
                rows.append([d, n, r.rv_count, _kernel_param(r), r.best_params["delta"], r.used_fraction])
        _write(out_dir / "sparsity.csv", _csv(header, rows), written)
        _write(out_dir / "sparsity.txt", aligned(header, rows), written)

    if "krv" in learners and "kernn" in learners:
        header = ["dataset", "krv_mean", "kernn_mean", "t", "p", "S"]
        rows = ttest_rows(report)
        _write(out_dir / "ttest.csv", _csv(header, rows), written)
        _write(out_dir / "ttest.txt", aligned(header, rows), written)

    rr = report.rank_report
    if rr is not None:
        _write(out_dir / "ranks.csv", rr.to_csv(), written)
        rows = [[d, *r] for d, r in zip(rr.datasets, rr.ranks.tolist())]
        rows.append(["avg", *rr.avg_ranks.tolist()])
        stats = (
            f"chi2_F = {rr.chi2_F:.4f}  critical({rr.alpha}) = {rr.critical:.4f}  "
            f"rejected = {str(rr.rejected).lower()}\nfisher_f = {rr.fisher_f:.4f}  CD = {rr.cd:.4f}\n"
            + "".join(f"group: {' '.join(g)}\n" for g in rr.groups)
        )
        _write(out_dir / "ranks.txt", aligned(["dataset", *rr.learners], rows) + "\n" + stats, written)
    return written


def emit_timings(report: RunReport, out_dir: str | Path) -> list[Path]:
    """Mean wall-clock seconds per (run, fold) unit; shared work counts for each learner using it."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    header = ["dataset", "learner", "train_s", "test_s"]
    rows = [
        [d, n, report.results[(d, n)].train_seconds, report.results[(d, n)].test_seconds]
        for d in report.datasets
        for n in report.config.learners
    ]
    written: list[Path] = []
    _write(out_dir / "timings.csv", _csv(header, rows), written)
    _write(out_dir / "timings.txt", aligned(header, rows), written)
    return written
