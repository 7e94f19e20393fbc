"""Repeated stratified cross-validation with a full grid search per learner.

Every (run, fold) pair is an independent work unit.  Within a unit all grid
cells of a learner are scored at once: one distance matrix serves every k,
and one sparse Bayesian trajectory serves every delta_alpha (see
:func:`krv.sbl.train_path`).  Bernoulli trajectories are shared by k-RV and
RVM-Bernoulli.

Hyperparameters are selected on the same cross-validation that produces the
reported accuracy, so the reported numbers are optimistic.  The best cell is
the first cell in grid order with the highest mean accuracy.
"""
from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..data import Dataset, DataError, fit_scaler, load_csv, stratified_kfold
from ..kernels import KernelSpec, design_matrix
from ..neighbors import distances, inverse_variance_weights, krv_from_sbl, vote_sweep
from ..sbl import SblConfig, ovr_decide, predict, train_ovr_path
from ..stats import RankReport, build_rank_report
from .config import LEARNERS, ExperimentConfig

log = logging.getLogger(__name__)

SBL_LEARNERS = ("krv", "rvm_bern", "rvm_gauss")


def _kernel_axis(cfg: ExperimentConfig) -> list[tuple[str, float]]:
    if cfg.kernel == "gaussian":
        return [("width", w) for w in cfg.width_grid]
    return [("order", cfg.poly_order)]


def _spec(cfg: ExperimentConfig, value) -> KernelSpec:
    if cfg.kernel == "gaussian":
        return KernelSpec.gaussian(value)
    return KernelSpec.polynomial(int(value))


def learner_grid(learner: str, cfg: ExperimentConfig) -> list[dict]:
    """Grid cells of ``learner`` in selection order (earlier cells win ties)."""
    ks = cfg.k_grid
    kern = _kernel_axis(cfg)
    if learner in ("knn", "wnn"):
        return [{"k": k} for k in ks]
    if learner == "kernn":
        return [{name: v, "k": k} for name, v in kern for k in ks]
    if learner == "krv":
        return [{name: v, "delta": d, "k": k} for name, v in kern for d in cfg.delta_grid for k in ks]
    if learner in ("rvm_bern", "rvm_gauss"):
        return [{name: v, "delta": d} for name, v in kern for d in cfg.delta_grid]
    raise ValueError(f"unknown learner {learner!r}")


@dataclass
class FoldScores:
    """Per-cell results of one learner on one (run, fold) unit."""

    accuracy: np.ndarray
    rv_count: np.ndarray | None = None
    train_seconds: float = 0.0
    test_seconds: float = 0.0


def _union_rv(models) -> int:
    active = np.unique(np.concatenate([m.active for m in models]))
    return int(np.count_nonzero(active > 0))


def evaluate_fold(
    X: np.ndarray, y: np.ndarray, n_classes: int, train: np.ndarray, test: np.ndarray, cfg: ExperimentConfig
) -> dict[str, FoldScores]:
    """Score every grid cell of every configured learner on one train/test split."""
    scaler = fit_scaler(X[train], cfg.scaling)
    Xtr, Xte = scaler.transform(X[train]), scaler.transform(X[test])
    ytr, yte = y[train], y[test]
    ks = list(cfg.k_grid)
    deltas = list(cfg.delta_grid)
    sbl_cfg = SblConfig()
    out: dict[str, FoldScores] = {}

    def accuracy(pred):
        return (np.atleast_2d(pred) == yte).mean(axis=1)

    if "knn" in cfg.learners:
        t0 = time.perf_counter()
        acc = accuracy(vote_sweep(distances(Xte, Xtr), ytr, ks, n_classes))
        out["knn"] = FoldScores(acc, test_seconds=time.perf_counter() - t0)
    if "wnn" in cfg.learners:
        t0 = time.perf_counter()
        weights = inverse_variance_weights(Xtr, ytr)
        t1 = time.perf_counter()
        acc = accuracy(vote_sweep(distances(Xte, Xtr, weights), ytr, ks, n_classes))
        out["wnn"] = FoldScores(acc, train_seconds=t1 - t0, test_seconds=time.perf_counter() - t1)

    kernel_learners = [name for name in ("kernn", *SBL_LEARNERS) if name in cfg.learners]
    if not kernel_learners:
        return out
    parts: dict[str, list] = {name: [] for name in kernel_learners}
    rvs: dict[str, list] = {name: [] for name in kernel_learners}
    timing = {name: [0.0, 0.0] for name in kernel_learners}
    for _, value in _kernel_axis(cfg):
        spec = _spec(cfg, value)
        t0 = time.perf_counter()
        H = design_matrix(spec, Xtr, Xtr).values
        t1 = time.perf_counter()
        Ht = design_matrix(spec, Xte, Xtr).values
        t_expand_train, t_expand_test = t1 - t0, time.perf_counter() - t1
        for name in kernel_learners:
            timing[name][0] += t_expand_train
            timing[name][1] += t_expand_test

        if "kernn" in cfg.learners:
            t0 = time.perf_counter()
            parts["kernn"].append(accuracy(vote_sweep(distances(Ht, H), ytr, ks, n_classes)))
            timing["kernn"][1] += time.perf_counter() - t0

        if "krv" in cfg.learners or "rvm_bern" in cfg.learners:
            t0 = time.perf_counter()
            paths = train_ovr_path(H, ytr, n_classes, "bernoulli", sbl_cfg, deltas)
            t_sbl = time.perf_counter() - t0
            for d in deltas:
                models = paths[d]
                if "rvm_bern" in cfg.learners:
                    t0 = time.perf_counter()
                    scores = np.column_stack([predict(m, Ht[:, m.active])[0] for m in models])
                    parts["rvm_bern"].append(accuracy(ovr_decide(scores, n_classes)))
                    rvs["rvm_bern"].append([_union_rv(models)])
                    timing["rvm_bern"][1] += time.perf_counter() - t0
                if "krv" in cfg.learners:
                    t0 = time.perf_counter()
                    km = krv_from_sbl(models, H, Xtr, ytr, spec, ks[0], n_classes)
                    t1 = time.perf_counter()
                    dist = distances(Ht[:, km.retained_dims], km.train_features, km.metric_weights)
                    parts["krv"].append(accuracy(vote_sweep(dist, ytr, ks, n_classes)))
                    rvs["krv"].append([km.rv_count] * len(ks))
                    timing["krv"][0] += t1 - t0
                    timing["krv"][1] += time.perf_counter() - t1
            for name in ("krv", "rvm_bern"):
                if name in cfg.learners:
                    timing[name][0] += t_sbl

        if "rvm_gauss" in cfg.learners:
            t0 = time.perf_counter()
            paths = train_ovr_path(H, ytr, n_classes, "gaussian", sbl_cfg, deltas)
            timing["rvm_gauss"][0] += time.perf_counter() - t0
            t0 = time.perf_counter()
            for d in deltas:
                models = paths[d]
                scores = np.column_stack([predict(m, Ht[:, m.active])[0] for m in models])
                parts["rvm_gauss"].append(accuracy(ovr_decide(scores, n_classes)))
                rvs["rvm_gauss"].append([_union_rv(models)])
            timing["rvm_gauss"][1] += time.perf_counter() - t0

    for name in kernel_learners:
        out[name] = FoldScores(
            accuracy=np.concatenate(parts[name]),
            rv_count=np.concatenate(rvs[name]).astype(np.int64) if name in SBL_LEARNERS else None,
            train_seconds=timing[name][0],
            test_seconds=timing[name][1],
        )
    return out


@dataclass(frozen=True)
class LearnerResult:
    """Grid-search outcome of one learner on one dataset.

    ``fold_accuracies``, ``rv_counts`` and ``used_fractions`` belong to the
    best cell and have shape (runs, folds).
    """

    dataset: str
    learner: str
    best_params: dict
    mean_accuracy: float
    std_accuracy: float
    fold_accuracies: np.ndarray
    rv_counts: np.ndarray | None
    used_fractions: np.ndarray | None
    seeds: tuple[int, ...]
    cells: tuple[dict, ...]
    cell_means: np.ndarray
    cell_rv_means: np.ndarray | None
    cell_used_means: np.ndarray | None
    train_seconds: float = 0.0
    test_seconds: float = 0.0

    @property
    def rv_count(self) -> float | None:
        return None if self.rv_counts is None else float(self.rv_counts.mean())

    @property
    def used_fraction(self) -> float | None:
        return None if self.used_fractions is None else float(self.used_fractions.mean())

    def cell_index(self, **params) -> int:
        """Index of the grid cell matching every given parameter."""
        for i, cell in enumerate(self.cells):
            if all(cell.get(key) == value for key, value in params.items()):
                return i
        raise KeyError(f"no grid cell with {params}")

    def best_among(self, **params) -> int:
        """Index of the best cell among those matching ``params`` (first max in grid order)."""
        idx = [i for i, cell in enumerate(self.cells) if all(cell.get(k) == v for k, v in params.items())]
        if not idx:
            raise KeyError(f"no grid cell with {params}")
        means = self.cell_means[idx]
        return idx[int(np.argmax(means == means.max()))]


@dataclass
class RunReport:
    config: ExperimentConfig
    results: dict[tuple[str, str], LearnerResult] = field(default_factory=dict)
    datasets: tuple[str, ...] = ()
    skipped: tuple[str, ...] = ()
    cells_evaluated: int = 0
    rank_report: RankReport | None = None

    def result(self, dataset: str, learner: str) -> LearnerResult:
        return self.results[(dataset, learner)]

    def accuracy_matrix(self) -> np.ndarray:
        return np.array(
            [[self.results[(d, name)].mean_accuracy for name in self.config.learners] for d in self.datasets]
        )


def _fold_unit(args):
    X, y, n_classes, run, fold, train, test, cfg = args
    return run, fold, evaluate_fold(X, y, n_classes, train, test, cfg)


def _exact_mean(values: np.ndarray) -> float:
    # fsum: equal multisets of fold accuracies give bit-equal means in any order
    return math.fsum(values.ravel().tolist()) / values.size


def evaluate_dataset(d: Dataset, cfg: ExperimentConfig) -> dict[str, LearnerResult]:
    """Grid-searched cross-validation results of every configured learner on ``d``."""
    plans = [stratified_kfold(d.labels, cfg.folds, cfg.seed + run) for run in range(cfg.runs)]
    min_train = min(int(np.count_nonzero(p.assignments != f)) for p in plans for f in range(cfg.folds))
    if max(cfg.k_grid) > min_train:
        raise ValueError(f"k up to {max(cfg.k_grid)} exceeds the smallest training fold ({min_train} rows)")
    units = [
        (d.instances, d.labels, d.n_classes, run, fold, *plans[run].split(fold), cfg)
        for run in range(cfg.runs)
        for fold in range(cfg.folds)
    ]
    if cfg.n_jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.n_jobs) as pool:
            finished = list(pool.map(_fold_unit, units))
    else:
        finished = [_fold_unit(u) for u in units]
    finished.sort(key=lambda r: (r[0], r[1]))

    train_sizes = np.array([[u[5].size for u in units if u[3] == run] for run in range(cfg.runs)])
    seeds = tuple(cfg.seed + run for run in range(cfg.runs))
    out = {}
    for name in cfg.learners:
        cells = learner_grid(name, cfg)
        acc = np.array([r[2][name].accuracy for r in finished]).reshape(cfg.runs, cfg.folds, len(cells))
        if acc.shape[-1] != len(cells):
            raise AssertionError(f"{name}: scored {acc.shape[-1]} cells, grid has {len(cells)}")
        cell_means = np.array([_exact_mean(acc[:, :, j]) for j in range(len(cells))])
        best = int(np.argmax(cell_means == cell_means.max()))
        fold_acc = acc[:, :, best]
        rv = used = cell_rv = cell_used = None
        if name in SBL_LEARNERS:
            rv_all = np.array([r[2][name].rv_count for r in finished]).reshape(cfg.runs, cfg.folds, len(cells))
            used_all = rv_all / train_sizes[:, :, None]
            rv, used = rv_all[:, :, best], used_all[:, :, best]
            cell_rv, cell_used = rv_all.mean(axis=(0, 1)), used_all.mean(axis=(0, 1))
        out[name] = LearnerResult(
            dataset=d.name,
            learner=name,
            best_params=dict(cells[best]),
            mean_accuracy=cell_means[best],
            std_accuracy=float(np.std(fold_acc)),
            fold_accuracies=fold_acc,
            rv_counts=rv,
            used_fractions=used,
            seeds=seeds,
            cells=tuple(cells),
            cell_means=cell_means,
            cell_rv_means=cell_rv,
            cell_used_means=cell_used,
            train_seconds=float(np.mean([r[2][name].train_seconds for r in finished])),
            test_seconds=float(np.mean([r[2][name].test_seconds for r in finished])),
        )
    return out


def run_experiment(cfg: ExperimentConfig) -> RunReport:
    """Evaluate every (dataset, learner) pair of ``cfg``.

    Datasets that cannot be loaded, or are too small for the k grid, are
    skipped with a warning.  A rank report is attached when at least two
    datasets and two learners were evaluated.
    """
    if not cfg.learners:
        raise ValueError("empty learner set")
    report = RunReport(config=cfg)
    names, skipped = [], []
    for path in cfg.datasets:
        try:
            d = load_csv(path, label_column=cfg.label_column)
            if d.name in names:
                raise DataError(f"duplicate dataset name {d.name!r}")
            results = evaluate_dataset(d, cfg)
        except (DataError, ValueError, OSError) as exc:
            log.warning("skipping dataset %s: %s", path, exc)
            skipped.append(str(path))
            continue
        names.append(d.name)
        for name, res in results.items():
            report.results[(d.name, name)] = res
            report.cells_evaluated += len(res.cells)
    report.datasets = tuple(names)
    report.skipped = tuple(skipped)
    log.info(
        "evaluated %d grid cells over %d datasets (%d skipped)", report.cells_evaluated, len(names), len(skipped)
    )
    if len(names) >= 2 and len(cfg.learners) >= 2:
        report.rank_report = build_rank_report(cfg.learners, names, report.accuracy_matrix())
    return report
