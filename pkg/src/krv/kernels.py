"""Kernel functions and the kernel design matrix used for feature expansion."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

FAMILIES = ("gaussian", "polynomial")

# Gaussian values below this are flushed to zero.  They sit far under the
# resolution of any sum that also contains the bias column, and subnormal
# arithmetic downstream is an order of magnitude slower.
FLUSH = 1e-150


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus its single parameter.

    ``width`` is the Gaussian sigma, ``order`` the polynomial degree; the field
    that does not belong to ``family`` must be left as ``None``.
    """

    family: str
    width: float | None = None
    order: int | None = None

    def __post_init__(self):
        if self.family == "gaussian":
            if self.width is None or not self.width > 0 or not np.isfinite(self.width):
                raise ValueError(f"gaussian kernel needs width > 0, got {self.width}")
            if self.order is not None:
                raise ValueError("gaussian kernel takes no order")
            object.__setattr__(self, "width", float(self.width))
        elif self.family == "polynomial":
            if self.order is None or int(self.order) != self.order or self.order < 1:
                raise ValueError(f"polynomial kernel needs integer order >= 1, got {self.order}")
            if self.width is not None:
                raise ValueError("polynomial kernel takes no width")
            object.__setattr__(self, "order", int(self.order))
        else:
            raise ValueError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")

    @classmethod
    def gaussian(cls, width: float) -> "KernelSpec":
        return cls("gaussian", width=width)

    @classmethod
    def polynomial(cls, order: int = 2) -> "KernelSpec":
        return cls("polynomial", order=order)

    @property
    def parameter(self) -> float:
        return self.width if self.family == "gaussian" else self.order

    def to_dict(self) -> dict:
        return {"family": self.family, "width": self.width, "order": self.order}

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSpec":
        return cls(d["family"], width=d.get("width"), order=d.get("order"))


@dataclass(frozen=True)
class DesignMatrix:
    """Kernel expansion of ``rows`` against ``anchors``.

    ``values[:, 0]`` is the bias basis; ``values[:, j + 1]`` holds the kernel
    against ``anchors[j]``.
    """

    values: np.ndarray
    anchors: np.ndarray
    spec: KernelSpec

    has_bias = True

    @property
    def n_basis(self) -> int:
        return self.values.shape[1]


def kernel_eval(spec: KernelSpec, u, v) -> float:
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape[0]} vs {v.shape[0]}")
    if spec.family == "gaussian":
        diff = u - v
        value = float(np.exp(-np.dot(diff, diff) / (2.0 * spec.width**2)))
        return value if value >= FLUSH else 0.0
    return float((np.dot(u, v) + 1.0) ** spec.order)


def gram(spec: KernelSpec, A, B) -> np.ndarray:
    """Kernel matrix ``K[i, j] = k(A[i], B[j])``.

    Every entry is computed independently of the other rows/columns, so any
    sub-block equals the Gram matrix of the corresponding subsets exactly.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    if spec.family == "gaussian":
        K = np.exp(-cdist(A, B, "sqeuclidean") / (2.0 * spec.width**2))
        K[K < FLUSH] = 0.0
        return K
    # einsum without BLAS keeps per-entry summation order shape-independent
    return (np.einsum("id,jd->ij", A, B) + 1.0) ** spec.order


def design_matrix(spec: KernelSpec, rows, anchors) -> DesignMatrix:
    anchors = np.atleast_2d(np.asarray(anchors, dtype=float))
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if anchors.shape[0] == 0:
        raise ValueError("empty anchor set")
    K = gram(spec, rows, anchors)
    values = np.empty((rows.shape[0], anchors.shape[0] + 1))
    values[:, 0] = 1.0
    values[:, 1:] = K
    if not np.all(np.isfinite(values)):
        raise FloatingPointError("non-finite kernel values; check the kernel parameter")
    return DesignMatrix(values=values, anchors=anchors, spec=spec)
