"""Versioned JSON model files for trained k-RV and RVM classifiers.

Floats are written with ``repr`` precision, so every array round-trips
bit for bit and a reloaded model reproduces its scores exactly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import MinMaxScaler, Scaler
from .kernels import KernelSpec
from .neighbors import KrvModel, krv_distances, krv_predict
from .sbl import SblClassifier, SblModel

FORMAT = "krv-model"
VERSION = 1


@dataclass(frozen=True)
class StoredModel:
    """A classifier plus what is needed to apply it to raw input rows."""

    model: KrvModel | SblClassifier
    scaler: Scaler | MinMaxScaler
    classes: tuple[str, ...]
    schema: tuple = ()

    @property
    def kind(self) -> str:
        return "krv" if isinstance(self.model, KrvModel) else "rvm"

    def predict(self, X_raw) -> np.ndarray:
        """Class ids for raw (unstandardized) attribute rows."""
        Z = self.scaler.transform(np.atleast_2d(np.asarray(X_raw, dtype=float)))
        if self.kind == "krv":
            return np.asarray(krv_predict(self.model, Z))
        return self.model.predict(Z)

    def scores(self, X_raw) -> np.ndarray:
        """Per-class scores (RVM) or neighbor distances to every stored row (k-RV)."""
        Z = self.scaler.transform(np.atleast_2d(np.asarray(X_raw, dtype=float)))
        if self.kind == "krv":
            return krv_distances(self.model, Z)
        return self.model.scores(Z)


def _arr(a) -> list:
    return np.asarray(a).tolist()


def _sbl_to_dict(m: SblModel) -> dict:
    return {
        "active": _arr(m.active),
        "weights": _arr(m.weights),
        "alphas": _arr(m.alphas),
        "noise_var": m.noise_var,
        "n_basis": m.n_basis,
        "converged": m.converged,
    }


def _sbl_from_dict(d: dict, likelihood: str) -> SblModel:
    active = np.array(d["active"], dtype=np.int64)
    return SblModel(
        active=active,
        weights=np.array(d["weights"], dtype=float),
        alphas=np.array(d["alphas"], dtype=float),
        covariance=np.empty((0, 0)),
        likelihood=likelihood,
        n_basis=int(d["n_basis"]),
        noise_var=d["noise_var"],
        converged=bool(d["converged"]),
    )


def _scaler_to_dict(s) -> dict:
    if isinstance(s, MinMaxScaler):
        return {"kind": "minmax", "low": _arr(s.low), "span": _arr(s.span)}
    return {"kind": "standard", "mean": _arr(s.mean), "std": _arr(s.std)}


def _scaler_from_dict(d: dict):
    if d["kind"] == "minmax":
        return MinMaxScaler(low=np.array(d["low"], dtype=float), span=np.array(d["span"], dtype=float))
    if d["kind"] == "standard":
        return Scaler(mean=np.array(d["mean"], dtype=float), std=np.array(d["std"], dtype=float))
    raise ValueError(f"unknown scaler kind {d['kind']!r}")


def to_dict(stored: StoredModel) -> dict:
    m = stored.model
    out = {
        "format": FORMAT,
        "version": VERSION,
        "kind": stored.kind,
        "classes": list(stored.classes),
        "schema": [list(e[:2]) + ([list(e[2])] if len(e) > 2 else []) for e in stored.schema],
        "scaler": _scaler_to_dict(stored.scaler),
    }
    if isinstance(m, KrvModel):
        out.update(
            likelihood="bernoulli",
            kernel=m.kernel.to_dict(),
            anchors=_arr(m.anchors),
            retained_dims=_arr(m.retained_dims),
            sparse_weights=_arr(m.sparse_weights),
            train_features=_arr(m.train_features),
            train_labels=_arr(m.train_labels),
            k=m.k,
            n_classes=m.n_classes,
        )
    else:
        out.update(
            likelihood=m.likelihood,
            kernel=m.spec.to_dict(),
            anchors=_arr(m.anchors),
            n_classes=m.n_classes,
            models=[_sbl_to_dict(s) for s in m.models],
        )
    return out


def from_dict(d: dict) -> StoredModel:
    if d.get("format") != FORMAT:
        raise ValueError(f"not a {FORMAT} file")
    if d.get("version") != VERSION:
        raise ValueError(f"unsupported model version {d.get('version')!r}; expected {VERSION}")
    spec = KernelSpec.from_dict(d["kernel"])
    anchors = np.array(d["anchors"], dtype=float)
    if d["kind"] == "krv":
        model = KrvModel(
            kernel=spec,
            anchors=anchors,
            retained_dims=np.array(d["retained_dims"], dtype=np.int64),
            sparse_weights=np.array(d["sparse_weights"], dtype=float),
            train_features=np.array(d["train_features"], dtype=float).reshape(len(d["train_labels"]), -1),
            train_labels=np.array(d["train_labels"], dtype=np.int64),
            k=int(d["k"]),
            n_classes=int(d["n_classes"]),
        )
    elif d["kind"] == "rvm":
        model = SblClassifier(
            spec=spec,
            anchors=anchors,
            models=tuple(_sbl_from_dict(s, d["likelihood"]) for s in d["models"]),
            n_classes=int(d["n_classes"]),
            likelihood=d["likelihood"],
        )
    else:
        raise ValueError(f"unknown model kind {d['kind']!r}")
    scaler = _scaler_from_dict(d["scaler"])
    schema = tuple(tuple(e[:2]) + ((tuple(e[2]),) if len(e) > 2 else ()) for e in d.get("schema", []))
    return StoredModel(model=model, scaler=scaler, classes=tuple(d["classes"]), schema=schema)


def save_model(stored: StoredModel, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(to_dict(stored), indent=1) + "\n", encoding="utf-8")
    return path


def load_model(path: str | Path) -> StoredModel:
    path = Path(path)
    try:
        d = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path} is not a model file: {exc}") from exc
    return from_dict(d)
