"""Sparse Bayesian learning (relevance vector machine) core.

Posterior modes come from Laplace/IRLS (Bernoulli likelihood) or the closed
form (Gaussian likelihood).  Hyperparameters follow the MacKay fixed-point
update ``alpha_i <- (1 - alpha_i * Sigma_ii) / w_i**2``, and bases whose
alpha reaches ``prune_threshold`` are removed.  Training stops once the
largest change in a surviving alpha drops to ``delta_alpha`` or below.  A
larger ``delta_alpha`` therefore stops earlier and keeps more relevance
vectors.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.linalg import LinAlgError
from scipy.special import expit

from . import _sbl_kernels as _k
from .kernels import DesignMatrix, KernelSpec, design_matrix

log = logging.getLogger(__name__)

LIKELIHOODS = ("bernoulli", "gaussian")
GAMMA_WARN = -1e-8


class SblWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class SblConfig:
    delta_alpha: float = 0.1
    alpha_init: float = 1.0
    prune_threshold: float = 1e12
    max_outer_iters: int = 500
    irls_tol: float = 1e-6
    irls_max_iters: int = 25
    jitter: float = 1e-10

    def __post_init__(self):
        if not self.delta_alpha > 0:
            raise ValueError("delta_alpha must be positive")
        if not self.alpha_init > 0:
            raise ValueError("alpha_init must be positive")
        if not self.prune_threshold > self.alpha_init:
            raise ValueError("prune_threshold must exceed alpha_init")
        if self.max_outer_iters < 0 or self.irls_max_iters < 1:
            raise ValueError("iteration caps must be non-negative (outer) / positive (IRLS)")
        if not self.irls_tol > 0 or self.jitter < 0:
            raise ValueError("irls_tol must be positive and jitter non-negative")


class IterationRecord(NamedTuple):
    delta: float
    n_active: int
    gamma_min: float
    gamma_max: float
    jitter: float


@dataclass(frozen=True)
class SblModel:
    """Trained sparse Bayesian model over the retained bases ``active``."""

    active: np.ndarray
    weights: np.ndarray
    alphas: np.ndarray
    covariance: np.ndarray
    likelihood: str
    n_basis: int
    noise_var: float | None = None
    history: tuple[IterationRecord, ...] = ()
    converged: bool = True

    @property
    def n_active(self) -> int:
        return int(self.active.size)

    def restrict(self, phi_full) -> np.ndarray:
        """Select the active columns of full design rows."""
        phi_full = np.atleast_2d(np.asarray(phi_full, dtype=float))
        if phi_full.shape[1] != self.n_basis:
            raise ValueError(f"expected {self.n_basis} design columns, got {phi_full.shape[1]}")
        return phi_full[:, self.active]


class PosteriorMode(NamedTuple):
    weights: np.ndarray
    covariance: np.ndarray
    converged: bool
    n_iter: int
    jitter: float


def sigmoid(x):
    """Logistic function, stable for large |x|."""
    out = expit(x)
    return float(out) if np.ndim(out) == 0 else out


def _check_status(status: int):
    if status == _k.NOT_PD:
        raise LinAlgError("posterior precision is not positive definite even with jitter")
    if status == _k.NON_FINITE:
        raise FloatingPointError("non-finite intermediate in posterior computation")


def posterior_mode(H, t, alphas, cfg: SblConfig = SblConfig(), w0=None) -> PosteriorMode:
    """Laplace mode and covariance of the Bernoulli posterior over weights.

    Newton/IRLS iterations with step halving, stopped when no weight moves by
    more than ``cfg.irls_tol``.  The covariance is ``(H' B H + A)^-1`` with
    ``B = diag(s (1 - s))`` evaluated at the returned mode.  When
    ``cfg.irls_max_iters`` is exhausted the last iterate is returned with
    ``converged=False``.
    """
    H = np.ascontiguousarray(H, dtype=float)
    t = np.ascontiguousarray(t, dtype=float)
    alphas = np.ascontiguousarray(alphas, dtype=float)
    if H.ndim != 2 or H.shape[1] != alphas.size or H.shape[0] != t.size:
        raise ValueError("H, t and alphas are not aligned")
    w = np.zeros(alphas.size) if w0 is None else np.array(w0, dtype=float)
    w, sigma, converged, n_iter, jitter, status = _k.irls(
        H, t, alphas, w, cfg.irls_tol, cfg.irls_max_iters, cfg.jitter
    )
    _check_status(status)
    if not converged:
        warnings.warn(f"IRLS did not converge in {n_iter} iterations", SblWarning, stacklevel=2)
    return PosteriorMode(w, sigma, bool(converged), int(n_iter), float(jitter))


def update_alpha(alpha_i: float, w_hat_i: float, sigma_ii: float, prune_threshold: float = 1e12) -> float:
    """MacKay re-estimate ``(1 - alpha_i Sigma_ii) / w_i^2``.

    Returns ``prune_threshold`` when the basis carries no weight (``w = 0`` or a
    non-positive well-determinedness factor).
    """
    gamma = 1.0 - alpha_i * sigma_ii
    if gamma < GAMMA_WARN:
        warnings.warn(f"gamma = {gamma:.3g} outside [0, 1]", SblWarning, stacklevel=2)
    if w_hat_i == 0.0 or gamma <= 0.0:
        return float(prune_threshold)
    return float(min(gamma / w_hat_i**2, prune_threshold))


def delta_alpha(prev, curr, active_mask=None, prune_threshold: float = 1e12) -> float:
    """Largest |curr - prev| over bases still below ``prune_threshold`` in both."""
    prev = np.asarray(prev, dtype=float)
    curr = np.asarray(curr, dtype=float)
    if prev.shape != curr.shape:
        raise ValueError(f"length mismatch: {prev.shape} vs {curr.shape}")
    mask = (prev < prune_threshold) & (curr < prune_threshold)
    if active_mask is not None:
        mask &= np.asarray(active_mask, dtype=bool)
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(curr[mask] - prev[mask])))


def _as_matrix(H) -> np.ndarray:
    values = H.values if isinstance(H, DesignMatrix) else H
    values = np.ascontiguousarray(values, dtype=float)
    if values.ndim != 2:
        raise ValueError("design matrix must be 2-D")
    if not np.all(np.isfinite(values)):
        raise ValueError("design matrix contains non-finite values")
    return values


def train_path(
    H,
    t,
    likelihood: str = "bernoulli",
    cfg: SblConfig = SblConfig(),
    thresholds: Sequence[float] | None = None,
) -> dict[float, SblModel]:
    """Train once and snapshot the model at every stopping threshold.

    The alpha trajectory does not depend on ``delta_alpha``.  The model that
    ``train`` would return for threshold ``d`` is the state right after the
    first outer iteration whose change is ``<= d``.  One run with the smallest
    threshold therefore yields all of them.
    """
    if likelihood not in LIKELIHOODS:
        raise ValueError(f"unknown likelihood {likelihood!r}")
    H = _as_matrix(H)
    t = np.ascontiguousarray(t, dtype=float).ravel()
    N, M = H.shape
    if t.size != N:
        raise ValueError(f"{N} design rows but {t.size} targets")
    if not np.all(np.isfinite(t)):
        raise ValueError("non-finite targets")
    if likelihood == "bernoulli":
        if not np.all((t == 0.0) | (t == 1.0)):
            raise ValueError("bernoulli targets must be 0/1")
        if t.min() == t.max():
            raise ValueError("degenerate targets: every instance has the same label")
    order = sorted({float(d) for d in (thresholds or [cfg.delta_alpha])}, reverse=True)
    if order[-1] <= 0:
        raise ValueError("stopping thresholds must be positive")

    gaussian = likelihood == "gaussian"
    noise_init = max(0.1 * float(np.var(t)), 1e-6) if gaussian else 0.0
    (status, n_bad, hist, s_active, s_w, s_alpha, s_sigma, s_noise, s_hist, s_conv) = _k.sbl_path(
        H,
        t,
        gaussian,
        cfg.alpha_init,
        cfg.prune_threshold,
        cfg.max_outer_iters,
        cfg.irls_tol,
        cfg.irls_max_iters,
        cfg.jitter,
        noise_init,
        np.array(order),
    )
    _check_status(status)
    if n_bad:
        warnings.warn(f"{n_bad} gamma values below {GAMMA_WARN}", SblWarning, stacklevel=2)
    records = tuple(
        IterationRecord(float(r[0]), int(r[1]), float(r[2]), float(r[3]), float(r[4])) for r in hist
    )
    out = {}
    for j, d in enumerate(order):
        if not s_conv[j]:
            log.debug("SBL stopped at max_outer_iters=%d before delta_alpha=%g", cfg.max_outer_iters, d)
        out[d] = SblModel(
            active=s_active[j],
            weights=s_w[j],
            alphas=s_alpha[j],
            covariance=s_sigma[j],
            likelihood=likelihood,
            n_basis=M,
            noise_var=float(s_noise[j]) if gaussian else None,
            history=records[: s_hist[j]],
            converged=bool(s_conv[j]),
        )
    return out


def train(H, t, likelihood: str = "bernoulli", cfg: SblConfig = SblConfig()) -> SblModel:
    """Sparse Bayesian training stopped at ``cfg.delta_alpha``."""
    return train_path(H, t, likelihood, cfg, [cfg.delta_alpha])[cfg.delta_alpha]


def predict(model: SblModel, phi) -> tuple[np.ndarray, np.ndarray]:
    """Score and decision for design rows already restricted to ``model.active``.

    Bernoulli: ``score = sigmoid(w . phi)``, class 1 iff score >= 0.5.
    Gaussian: ``score = w . phi``, the decision is the score itself.
    """
    phi = np.asarray(phi, dtype=float)
    single = phi.ndim == 1
    phi = np.atleast_2d(phi)
    if phi.shape[1] != model.n_active:
        raise ValueError(f"expected {model.n_active} active columns, got {phi.shape[1]}")
    y = phi @ model.weights
    if model.likelihood == "bernoulli":
        score = expit(y)
        decision = (score >= 0.5).astype(np.int64)
    else:
        score = y
        decision = y
    if single:
        return score[0], decision[0]
    return score, decision


# ------------------------------------------------------------ one-vs-rest


def ovr_targets(labels, n_classes: int) -> list[np.ndarray]:
    """Binary target vectors: one for C = 2 (class 1 vs 0), else one per class."""
    labels = np.asarray(labels)
    if n_classes == 2:
        return [(labels == 1).astype(float)]
    return [(labels == c).astype(float) for c in range(n_classes)]


def ovr_decide(scores: np.ndarray, n_classes: int) -> np.ndarray:
    """Class ids from one-vs-rest scores of shape (Q, n_models).

    Binary: class 1 iff score >= 0.5. Multi-class: argmax, ties to the lowest id.
    """
    scores = np.atleast_2d(scores)
    if n_classes == 2:
        return (scores[:, 0] >= 0.5).astype(np.int64)
    return np.argmax(scores, axis=1).astype(np.int64)


def _constant_model(n_basis: int, likelihood: str, value: float) -> SblModel:
    # bias-only stand-in for a class with no positive (or no negative) rows
    if likelihood == "bernoulli":
        w = 50.0 if value == 1.0 else -50.0
    else:
        w = float(value)
    return SblModel(
        active=np.array([0]),
        weights=np.array([w]),
        alphas=np.array([1.0]),
        covariance=np.array([[1.0]]),
        likelihood=likelihood,
        n_basis=n_basis,
        noise_var=1.0 if likelihood == "gaussian" else None,
    )


def train_ovr_path(
    H, labels, n_classes: int, likelihood: str, cfg: SblConfig, thresholds: Sequence[float]
) -> dict[float, list[SblModel]]:
    """One-vs-rest :func:`train_path` on a shared design matrix.

    A class with no members among the training rows gets a bias-only model
    that never predicts it.
    """
    H = _as_matrix(H)
    targets = ovr_targets(labels, n_classes)
    paths = [
        train_path(H, t, likelihood, cfg, thresholds) if t.min() != t.max() else None for t in targets
    ]
    out: dict[float, list[SblModel]] = {}
    for d in thresholds:
        d = float(d)
        out[d] = [
            path[d] if path is not None else _constant_model(H.shape[1], likelihood, t[0])
            for path, t in zip(paths, targets)
        ]
    return out


@dataclass(frozen=True)
class SblClassifier:
    """One-vs-rest RVM classifier over a kernel expansion against ``anchors``."""

    spec: KernelSpec
    anchors: np.ndarray
    models: tuple[SblModel, ...]
    n_classes: int
    likelihood: str = "bernoulli"

    def scores(self, X) -> np.ndarray:
        H = design_matrix(self.spec, X, self.anchors).values
        return np.column_stack([predict(m, H[:, m.active])[0] for m in self.models])

    def predict(self, X) -> np.ndarray:
        return ovr_decide(self.scores(X), self.n_classes)

    @property
    def relevance_vectors(self) -> np.ndarray:
        """Union of retained non-bias bases, as anchor indices."""
        idx = np.unique(np.concatenate([m.active for m in self.models]))
        return idx[idx > 0] - 1


def train_classifier(
    X, labels, n_classes: int, spec: KernelSpec, likelihood: str = "bernoulli", cfg: SblConfig = SblConfig()
) -> SblClassifier:
    X = np.asarray(X, dtype=float)
    H = design_matrix(spec, X, X)
    models = train_ovr_path(H, labels, n_classes, likelihood, cfg, [cfg.delta_alpha])[cfg.delta_alpha]
    return SblClassifier(spec=spec, anchors=X, models=tuple(models), n_classes=n_classes, likelihood=likelihood)
