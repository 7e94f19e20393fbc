"""Dataset ingestion, attribute encoding, standardization and stratified folds."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

ATTRIBUTE_KINDS = ("real", "integer", "nominal")
MISSING_TOKENS = {"", "?", "na", "nan", "null"}


class DataError(ValueError):
    """Raised when a dataset file cannot be turned into a valid Dataset."""


@dataclass(frozen=True)
class Dataset:
    """Numeric instance matrix with integer class labels.

    ``classes[i]`` is the original label text of class id ``i`` (first-appearance
    order in the source file).
    """

    instances: np.ndarray
    labels: np.ndarray
    attribute_kinds: tuple[str, ...]
    name: str = "dataset"
    classes: tuple[str, ...] = ()
    feature_names: tuple[str, ...] = ()
    schema: tuple = ()

    def __post_init__(self):
        X = np.ascontiguousarray(self.instances, dtype=float)
        y = np.asarray(self.labels, dtype=np.int64)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DataError("instances must be a non-empty N x D matrix")
        if y.shape != (X.shape[0],):
            raise DataError("labels must have one entry per instance")
        if not np.all(np.isfinite(X)):
            raise DataError("instances contain non-finite values")
        if len(self.attribute_kinds) != X.shape[1]:
            raise DataError("attribute_kinds must have one entry per column")
        if any(kind not in ATTRIBUTE_KINDS for kind in self.attribute_kinds):
            raise DataError(f"unknown attribute kind in {self.attribute_kinds}")
        n_classes = int(y.max()) + 1 if y.size else 0
        if y.min() < 0 or n_classes < 2:
            raise DataError("need labels in {0..C-1} with C >= 2")
        if np.any(np.bincount(y, minlength=n_classes) == 0):
            raise DataError("every class id in {0..C-1} needs at least one instance")
        classes = tuple(self.classes) or tuple(str(c) for c in range(n_classes))
        if len(classes) != n_classes:
            raise DataError("classes must name every class id")
        names = tuple(self.feature_names) or tuple(f"a{j + 1}" for j in range(X.shape[1]))
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "instances", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "attribute_kinds", tuple(self.attribute_kinds))
        object.__setattr__(self, "classes", classes)
        object.__setattr__(self, "feature_names", names)

    @property
    def n_instances(self) -> int:
        return self.instances.shape[0]

    @property
    def n_features(self) -> int:
        return self.instances.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def subset(self, index) -> "Dataset":
        """Rows ``index`` as a new Dataset that keeps the full class table."""
        index = np.asarray(index)
        return _SubsetDataset(
            instances=self.instances[index],
            labels=self.labels[index],
            attribute_kinds=self.attribute_kinds,
            name=self.name,
            classes=self.classes,
            feature_names=self.feature_names,
            schema=self.schema,
        )

    def with_instances(self, instances) -> "Dataset":
        return _SubsetDataset(
            instances=instances,
            labels=self.labels,
            attribute_kinds=self.attribute_kinds,
            name=self.name,
            classes=self.classes,
            feature_names=self.feature_names,
            schema=self.schema,
        )


@dataclass(frozen=True)
class _SubsetDataset(Dataset):
    # Training folds of a small dataset may miss a class entirely; the class
    # table of the parent is kept, so only the label range is validated.
    def __post_init__(self):
        X = np.ascontiguousarray(self.instances, dtype=float)
        y = np.asarray(self.labels, dtype=np.int64)
        if X.ndim != 2 or y.shape != (X.shape[0],):
            raise DataError("instances/labels shape mismatch")
        if y.size and (y.min() < 0 or y.max() >= len(self.classes)):
            raise DataError("label outside the class table")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "instances", X)
        object.__setattr__(self, "labels", y)


@dataclass(frozen=True)
class Scaler:
    """Per-column mean/std record produced by :func:`standardize`."""

    mean: np.ndarray
    std: np.ndarray

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        scale = np.where(self.std > 0, self.std, 1.0)
        out = (X - self.mean) / scale
        out[:, self.std <= 0] = 0.0
        return out

    @classmethod
    def fit(cls, X) -> "Scaler":
        X = np.asarray(X, dtype=float)
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        # relative guard: a column whose spread is pure round-off is constant
        tiny = 1e-12 * np.maximum(1.0, np.abs(mean))
        std = np.where(std > tiny, std, 0.0)
        return cls(mean=mean, std=std)


@dataclass(frozen=True)
class MinMaxScaler:
    """Per-column affine map of the fitted range onto [0, 1]."""

    low: np.ndarray
    span: np.ndarray

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        scale = np.where(self.span > 0, self.span, 1.0)
        out = (X - self.low) / scale
        out[:, self.span <= 0] = 0.0
        return out

    @classmethod
    def fit(cls, X) -> "MinMaxScaler":
        X = np.asarray(X, dtype=float)
        low = X.min(axis=0)
        span = X.max(axis=0) - low
        tiny = 1e-12 * np.maximum(1.0, np.abs(low))
        return cls(low=low, span=np.where(span > tiny, span, 0.0))


SCALINGS = {"standard": Scaler, "minmax": MinMaxScaler}


def fit_scaler(X, kind: str = "standard") -> Scaler | MinMaxScaler:
    """Fit the named column transform (``standard`` or ``minmax``) on ``X``."""
    if kind not in SCALINGS:
        raise ValueError(f"unknown scaling {kind!r}; expected one of {tuple(SCALINGS)}")
    return SCALINGS[kind].fit(X)


def standardize(d: Dataset) -> tuple[Dataset, Scaler]:
    """Zero-mean, unit-variance columns; constant columns become all zero."""
    scaler = Scaler.fit(d.instances)
    return d.with_instances(scaler.transform(d.instances)), scaler


@dataclass(frozen=True)
class FoldPlan:
    n_folds: int
    assignments: np.ndarray
    seed: int

    def split(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        """(train indices, test indices) for ``fold``."""
        if not 0 <= fold < self.n_folds:
            raise IndexError(f"fold {fold} out of range")
        test = self.assignments == fold
        return np.flatnonzero(~test), np.flatnonzero(test)

    def __iter__(self):
        for fold in range(self.n_folds):
            yield self.split(fold)


def stratified_kfold(d: Dataset | np.ndarray, n_folds: int, seed: int = 0) -> FoldPlan:
    """Stratified fold assignment, deterministic for a fixed ``seed``.

    Each class is shuffled and dealt round-robin; the dealing position carries
    over from one class to the next so total fold sizes also stay balanced.
    """
    labels = np.asarray(d.labels if isinstance(d, Dataset) else d)
    n = labels.shape[0]
    if n_folds < 2 or n_folds > n:
        raise ValueError(f"n_folds must be in [2, {n}], got {n_folds}")
    rng = np.random.default_rng(seed)
    assignments = np.empty(n, dtype=np.int64)
    offset = 0
    for cls in np.unique(labels):
        members = rng.permutation(np.flatnonzero(labels == cls))
        assignments[members] = (offset + np.arange(members.size)) % n_folds
        offset += members.size
    assignments.setflags(write=False)
    return FoldPlan(n_folds=n_folds, assignments=assignments, seed=seed)


# --------------------------------------------------------------------- CSV


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _is_integer(text: str) -> bool:
    try:
        int(text)
    except ValueError:
        return False
    return True


def _detect_header(rows: list[list[str]]) -> bool:
    first, rest = rows[0], rows[1:]
    if not rest:
        return not any(_is_number(cell) for cell in first)
    for j, cell in enumerate(first):
        if not _is_number(cell) and all(_is_number(r[j]) for r in rest):
            return True
    if all(not _is_number(cell) for cell in first):
        # all-nominal file: treat as header when no first-row value recurs below
        return all(all(r[j] != cell for r in rest) for j, cell in enumerate(first))
    return False


def load_csv(
    path: str | Path,
    label_column: int | str = -1,
    header: bool | None = None,
    nominal: Sequence[int | str] = (),
    name: str | None = None,
) -> Dataset:
    """Read a comma-separated file into a :class:`Dataset`.

    Parameters
    ----------
    path : str or Path
        UTF-8 CSV file.
    label_column : int or str
        Column index (negative allowed) or header name holding the class.
    header : bool, optional
        Force header handling; auto-detected when ``None``.
    nominal : sequence of int or str
        Columns to one-hot encode even if their values look numeric. Columns
        whose values are all non-numeric are nominal automatically.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [[cell.strip() for cell in row] for row in csv.reader(fh) if any(c.strip() for c in row)]
    if not rows:
        raise DataError("no instances")
    width = len(rows[0])
    for lineno, row in enumerate(rows, start=1):
        if len(row) != width:
            raise DataError(f"ragged row {lineno}: expected {width} columns, got {len(row)}")
    if width < 2:
        raise DataError("need at least one attribute column and a label column")

    has_header = _detect_header(rows) if header is None else header
    names = rows[0] if has_header else [f"a{j + 1}" for j in range(width)]
    body = rows[1:] if has_header else rows
    if not body:
        raise DataError("no instances")

    def resolve(col: int | str) -> int:
        if isinstance(col, str):
            if col not in names:
                raise DataError(f"unknown column {col!r}")
            return names.index(col)
        if not -width <= col < width:
            raise DataError(f"column index {col} out of range")
        return col % width

    label_idx = resolve(label_column)
    forced_nominal = {resolve(c) for c in nominal}

    raw_labels = [r[label_idx] for r in body]
    class_names = list(dict.fromkeys(raw_labels))
    if len(class_names) < 2:
        raise DataError("single-class file: need at least 2 distinct labels")
    label_ids = {c: i for i, c in enumerate(class_names)}
    labels = np.array([label_ids[c] for c in raw_labels], dtype=np.int64)

    schema: list[tuple] = []
    for j in range(width):
        if j == label_idx:
            schema.append(("label", names[j]))
            continue
        values = [r[j] for r in body]
        for lineno, v in enumerate(values, start=2 if has_header else 1):
            if v.lower() in MISSING_TOKENS:
                raise DataError(f"missing value in column {names[j]!r} (row {lineno})")
        numeric = [_is_number(v) for v in values]
        if j in forced_nominal or not any(numeric):
            schema.append(("nominal", names[j], tuple(dict.fromkeys(values))))
        elif all(_is_integer(v) for v in values):
            schema.append(("integer", names[j]))
        else:
            schema.append(("real", names[j]))
    X, kinds, feature_names = _encode(body, schema, offset=2 if has_header else 1)
    if not np.all(np.isfinite(X)):
        raise DataError("non-finite value after encoding")
    return Dataset(
        instances=X,
        labels=labels,
        attribute_kinds=tuple(kinds),
        name=name or path.stem,
        classes=tuple(class_names),
        feature_names=tuple(feature_names),
        schema=tuple(schema),
    )


def _encode(body: list[list[str]], schema: Sequence[tuple], offset: int = 1):
    """Encode raw rows column by column; the label column is skipped."""
    columns: list[np.ndarray] = []
    kinds: list[str] = []
    feature_names: list[str] = []
    for j, entry in enumerate(schema):
        kind, name = entry[0], entry[1]
        if kind == "label":
            continue
        values = [r[j] for r in body]
        for lineno, v in enumerate(values, start=offset):
            if v.lower() in MISSING_TOKENS:
                raise DataError(f"missing value in column {name!r} (row {lineno})")
        if kind == "nominal":
            levels = entry[2]
            unknown = sorted(set(values) - set(levels))
            if unknown:
                raise DataError(f"unknown level {unknown[0]!r} in nominal column {name!r}")
            for level in levels:
                columns.append(np.array([v == level for v in values], dtype=float))
                kinds.append("nominal")
                feature_names.append(f"{name}={level}")
            continue
        bad = [v for v in values if not _is_number(v)]
        if bad:
            raise DataError(f"non-numeric value {bad[0]!r} in numeric column {name!r}")
        columns.append(np.array([float(v) for v in values]))
        kinds.append(kind)
        feature_names.append(name)
    return np.column_stack(columns), kinds, feature_names


def encode_csv(path: str | Path, schema: Sequence[tuple], header: bool | None = None):
    """Encode a CSV with the column layout recorded by :func:`load_csv`.

    The file may include the label column or omit it.  Returns the instance
    matrix and the raw label strings (``None`` when the column is absent).
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [[cell.strip() for cell in row] for row in csv.reader(fh) if any(c.strip() for c in row)]
    if not rows:
        raise DataError("no instances")
    schema = [tuple(e) for e in schema]
    label_pos = next(j for j, e in enumerate(schema) if e[0] == "label")
    width = len(rows[0])
    for lineno, row in enumerate(rows, start=1):
        if len(row) != width:
            raise DataError(f"ragged row {lineno}: expected {width} columns, got {len(row)}")
    if width == len(schema):
        layout = schema
    elif width == len(schema) - 1:
        layout = schema[:label_pos] + schema[label_pos + 1 :]
    else:
        raise DataError(f"expected {len(schema)} columns (or {len(schema) - 1} without labels), got {width}")
    has_header = _detect_header(rows) if header is None else header
    body = rows[1:] if has_header else rows
    if not body:
        raise DataError("no instances")
    X, _, _ = _encode(body, layout, offset=2 if has_header else 1)
    labels = [r[label_pos] for r in body] if width == len(schema) else None
    return X, labels
