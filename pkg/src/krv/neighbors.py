"""Nearest-neighbor rules: k-NN, w-NN, ker-NN and k-RV.

All four share one voting routine.  Neighbors are ranked by distance with a
stable sort, so equal distances keep training order.  The vote goes to the
most frequent class among the k nearest.  On a tie, the class of the single
nearest neighbor wins if it is among the tied classes; otherwise the lowest
tied class id wins.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import Dataset
from .kernels import KernelSpec, design_matrix
from .sbl import SblConfig, SblModel, train_ovr_path

# upper bound on Q * N * D elements materialized per distance block
_BLOCK = 2_000_000


def distances(Z, X, weights=None) -> np.ndarray:
    """Weighted Euclidean distances ``sqrt(sum_i w_i (x_i - z_i)^2)``, shape (Q, N)."""
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if Z.shape[1] != X.shape[1]:
        raise ValueError(f"dimension mismatch: query has {Z.shape[1]}, training rows {X.shape[1]}")
    if weights is not None:
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (X.shape[1],):
            raise ValueError(f"expected {X.shape[1]} weights, got {weights.shape}")
    out = np.empty((Z.shape[0], X.shape[0]))
    step = max(1, _BLOCK // max(1, X.shape[0] * X.shape[1]))
    for lo in range(0, Z.shape[0], step):
        diff = Z[lo : lo + step, None, :] - X[None, :, :]
        sq = diff * diff
        if weights is not None:
            sq *= weights
        out[lo : lo + step] = np.sqrt(sq.sum(axis=2))
    return out


def vote_sweep(dist: np.ndarray, labels, k_values: Sequence[int], n_classes: int) -> np.ndarray:
    """Majority-vote predictions for every k in ``k_values`` at once.

    Returns an array of shape (len(k_values), Q).
    """
    dist = np.atleast_2d(dist)
    labels = np.asarray(labels, dtype=np.int64)
    k_values = [int(k) for k in k_values]
    n = dist.shape[1]
    if min(k_values) < 1 or max(k_values) > n:
        raise ValueError(f"k must be in [1, {n}], got {k_values}")
    kmax = max(k_values)
    order = np.argsort(dist, axis=1, kind="stable")[:, :kmax]
    nn_labels = labels[order]
    counts = np.cumsum(nn_labels[:, :, None] == np.arange(n_classes), axis=1)
    rows = np.arange(dist.shape[0])
    nearest = nn_labels[:, 0]
    out = np.empty((len(k_values), dist.shape[0]), dtype=np.int64)
    for i, k in enumerate(k_values):
        c = counts[:, k - 1, :]
        tied = c == c.max(axis=1, keepdims=True)
        out[i] = np.where(tied[rows, nearest], nearest, np.argmax(tied, axis=1))
    return out


def _vote(dist, labels, k, n_classes):
    return vote_sweep(dist, labels, [k], n_classes)[0]


def _unwrap(pred, z):
    return int(pred[0]) if np.ndim(z) == 1 else pred


def knn_predict(train: Dataset, z, k: int):
    """k-NN with plain Euclidean distance; ``z`` may be one query or a matrix."""
    if k > train.n_instances:
        raise ValueError(f"k={k} exceeds the {train.n_instances} training instances")
    pred = _vote(distances(z, train.instances), train.labels, k, train.n_classes)
    return _unwrap(pred, z)


def wnn_predict(train: Dataset, z, weights, k: int):
    """k-NN with per-attribute weights scaling the squared differences."""
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (train.n_features,):
        raise ValueError(f"expected {train.n_features} weights, got {weights.shape}")
    if np.any(weights < 0):
        raise ValueError("attribute weights must be non-negative")
    if k > train.n_instances:
        raise ValueError(f"k={k} exceeds the {train.n_instances} training instances")
    pred = _vote(distances(z, train.instances, weights), train.labels, k, train.n_classes)
    return _unwrap(pred, z)


def inverse_variance_weights(X, labels) -> np.ndarray:
    """w-NN attribute weights: inverse of the pooled within-class variance.

    Attributes that separate classes well (small spread inside each class)
    get large weights.  Zero-variance attributes get weight 0.
    """
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels)
    resid = X.copy()
    for c in np.unique(labels):
        members = labels == c
        resid[members] -= X[members].mean(axis=0)
    var = (resid**2).mean(axis=0)
    out = np.zeros(X.shape[1])
    nz = var > 1e-12
    out[nz] = 1.0 / var[nz]
    return out


def kernn_predict(train: Dataset, z, spec: KernelSpec, k: int):
    """k-NN over kernel-expanded rows (bias plus one kernel per training anchor)."""
    if k > train.n_instances:
        raise ValueError(f"k={k} exceeds the {train.n_instances} training instances")
    H = design_matrix(spec, train.instances, train.instances).values
    Hz = design_matrix(spec, z, train.instances).values
    pred = _vote(distances(Hz, H), train.labels, k, train.n_classes)
    return _unwrap(pred, z)


@dataclass(frozen=True)
class KrvModel:
    """k-RV classifier: sparsified kernel features with relevance weights.

    ``retained_dims`` index the columns of the full design matrix (0 is the
    bias), ``sparse_weights`` are the surviving SBL weights for those columns.
    """

    kernel: KernelSpec
    anchors: np.ndarray
    retained_dims: np.ndarray
    sparse_weights: np.ndarray
    train_features: np.ndarray
    train_labels: np.ndarray
    k: int
    n_classes: int

    def __post_init__(self):
        if self.retained_dims.size < 1 or self.retained_dims.shape != self.sparse_weights.shape:
            raise ValueError("need at least one retained dimension with one weight each")
        if self.train_features.shape != (self.train_labels.size, self.retained_dims.size):
            raise ValueError("train_features must be N x |retained_dims|")

    @property
    def metric_weights(self) -> np.ndarray:
        return np.abs(self.sparse_weights)

    @property
    def rv_count(self) -> int:
        return int(np.count_nonzero(self.retained_dims > 0))

    def expand(self, Z) -> np.ndarray:
        """Sparsified kernel features of queries ``Z``."""
        return design_matrix(self.kernel, Z, self.anchors).values[:, self.retained_dims]


def merge_sparse(models: Sequence[SblModel]) -> tuple[np.ndarray, np.ndarray]:
    """Union of retained dims over one-vs-rest runs; each dim keeps its largest-|w| weight."""
    dims = np.unique(np.concatenate([m.active for m in models]))
    weights = np.zeros(dims.size)
    for m in models:
        pos = np.searchsorted(dims, m.active)
        bigger = np.abs(m.weights) > np.abs(weights[pos])
        weights[pos[bigger]] = m.weights[bigger]
    return dims, weights


def krv_from_sbl(
    models: Sequence[SblModel],
    H_train: np.ndarray,
    anchors,
    labels,
    spec: KernelSpec,
    k: int,
    n_classes: int,
) -> KrvModel:
    dims, weights = merge_sparse(models)
    return KrvModel(
        kernel=spec,
        anchors=np.asarray(anchors, dtype=float),
        retained_dims=dims,
        sparse_weights=weights,
        train_features=np.ascontiguousarray(H_train[:, dims]),
        train_labels=np.asarray(labels, dtype=np.int64),
        k=int(k),
        n_classes=int(n_classes),
    )


def krv_train(train: Dataset, spec: KernelSpec, k: int, cfg: SblConfig = SblConfig()) -> KrvModel:
    """Expand, sparsify with Bernoulli SBL (one-vs-rest for C > 2), keep the relevance space."""
    if k > train.n_instances:
        raise ValueError(f"k={k} exceeds the {train.n_instances} training instances")
    H = design_matrix(spec, train.instances, train.instances).values
    models = train_ovr_path(H, train.labels, train.n_classes, "bernoulli", cfg, [cfg.delta_alpha])
    return krv_from_sbl(models[cfg.delta_alpha], H, train.instances, train.labels, spec, k, train.n_classes)


def krv_distances(model: KrvModel, Z) -> np.ndarray:
    return distances(model.expand(np.atleast_2d(Z)), model.train_features, model.metric_weights)


def krv_predict(model: KrvModel, z):
    """Relevance-weighted distance in the sparsified kernel space, then majority vote."""
    z_arr = np.asarray(z, dtype=float)
    if z_arr.shape[-1] != model.anchors.shape[1]:
        raise ValueError(f"query has {z_arr.shape[-1]} attributes, model expects {model.anchors.shape[1]}")
    pred = _vote(krv_distances(model, z_arr), model.train_labels, model.k, model.n_classes)
    return _unwrap(pred, z)


def sparsity_accounting(model: KrvModel, train_size: int) -> tuple[int, float]:
    """(number of relevance vectors excluding the bias, fraction of training rows kept)."""
    rv = model.rv_count
    return rv, rv / train_size
