"""Kernel evaluation, Gram matrices, and feature-space centering.

The Gaussian kernel is parameterized as k(x, x') = exp(-||x - x'||^2 / (2 sigma^2))
with sigma defaulting to the median pairwise distance of the sample.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .errors import DegenerateSampleError, ValidationError


def as_sample(x) -> np.ndarray:
    """Validate and coerce a sample matrix (n observations x d features)."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValidationError("sample must be a 2-D array of shape (n, d)")
    n, d = x.shape
    if n < 2 or d < 1:
        raise ValidationError(f"sample needs n >= 2 rows and d >= 1 columns, got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValidationError("sample contains missing or non-finite values")
    return x


def as_weights(w, n: int) -> np.ndarray:
    """Validate centering weights: length n, nonnegative, summing to 1."""
    w = np.asarray(w, dtype=float)
    if w.shape != (n,):
        raise ValidationError(f"weight vector has length {w.size}, expected {n}")
    if np.any(w < 0):
        raise ValidationError("centering weights must be nonnegative")
    if abs(float(w.sum()) - 1.0) > 1e-12:
        raise ValidationError("centering weights must sum to 1")
    return w


def uniform_weights(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus bandwidth (Gaussian only; None = median heuristic)."""

    family: str = "gaussian"
    bandwidth: float | None = None

    def __post_init__(self):
        if self.family not in ("gaussian", "linear"):
            raise ValidationError(f"unknown kernel family: {self.family!r}")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ValidationError("kernel bandwidth must be positive")


@dataclass(frozen=True)
class GramMatrix:
    """Dense symmetric kernel matrix with its centering state.

    centering is one of "raw", "uniform", or "weighted"; weights holds the
    centering weight vector for the weighted case.
    """

    values: np.ndarray
    centering: str = "raw"
    weights: np.ndarray | None = None

    def __post_init__(self):
        v = self.values
        if not isinstance(v, np.ndarray) or v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValidationError("Gram matrix must be a square 2-D array")
        if not np.all(np.isfinite(v)):
            raise ValidationError("Gram matrix contains non-finite entries")
        if v.size:
            scale = max(1.0, float(np.max(np.abs(v))))
            if float(np.max(np.abs(v - v.T))) > 1e-12 * scale:
                raise ValidationError("Gram matrix is not symmetric")
        if self.centering not in ("raw", "uniform", "weighted"):
            raise ValidationError(f"unknown centering state: {self.centering!r}")

    @property
    def n(self) -> int:
        return self.values.shape[0]


def squared_distances(x: np.ndarray, y: np.ndarray | None = None) -> np.ndarray:
    """Pairwise squared Euclidean distances, clipped at 0."""
    xx = np.sum(x * x, axis=1)[:, None]
    if y is None:
        d2 = xx + xx.T - 2.0 * (x @ x.T)
        np.maximum(d2, 0.0, out=d2)
        np.fill_diagonal(d2, 0.0)
    else:
        yy = np.sum(y * y, axis=1)[None, :]
        d2 = xx + yy - 2.0 * (x @ y.T)
        np.maximum(d2, 0.0, out=d2)
    return d2


def median_bandwidth(x) -> float:
    """Median of the n(n-1)/2 pairwise Euclidean distances between rows."""
    x = as_sample(x)
    d = pdist(x)
    med = float(np.median(d))
    if med <= 0.0:
        raise DegenerateSampleError("degenerate sample: zero median distance")
    return med


def gram(x, spec: KernelSpec) -> GramMatrix:
    """Raw Gram matrix of a sample under the given kernel."""
    x = as_sample(x)
    if spec.family == "linear":
        k = x @ x.T
    else:
        sigma = spec.bandwidth if spec.bandwidth is not None else median_bandwidth(x)
        k = np.exp(squared_distances(x) / (-2.0 * sigma * sigma))
        np.fill_diagonal(k, 1.0)
    k = (k + k.T) / 2.0
    return GramMatrix(k, "raw")


def cross_gram(x_test, x_train, spec: KernelSpec) -> np.ndarray:
    """T x n matrix of kernel evaluations between test and training points."""
    x_test = np.asarray(x_test, dtype=float)
    if x_test.ndim == 1:
        x_test = x_test[:, None]
    x_train = as_sample(x_train)
    if x_test.shape[1] != x_train.shape[1]:
        raise ValidationError("test and training points have different dimensions")
    if not np.all(np.isfinite(x_test)):
        raise ValidationError("test points contain non-finite values")
    if spec.family == "linear":
        return x_test @ x_train.T
    sigma = spec.bandwidth if spec.bandwidth is not None else median_bandwidth(x_train)
    return np.exp(squared_distances(x_test, x_train) / (-2.0 * sigma * sigma))


def _require_raw(g: GramMatrix):
    if g.centering != "raw":
        raise ValidationError("centering requires a raw Gram matrix")


def center_uniform(g: GramMatrix) -> GramMatrix:
    """Doubly centered Gram matrix C K C with C = I - (1/n) 1 1^T."""
    _require_raw(g)
    k = g.values
    rm = k.mean(axis=1, keepdims=True)
    c = k - rm - rm.T + k.mean()
    c = (c + c.T) / 2.0
    return GramMatrix(c, "uniform")


def center_weighted(g: GramMatrix, w) -> GramMatrix:
    """Weighted centering (I - 1 w^T) K (I - 1 w^T)^T.

    The result annihilates w: centered @ w == 0 up to rounding.
    """
    _require_raw(g)
    w = as_weights(w, g.n)
    c = centered_values(g.values, w)
    return GramMatrix(c, "weighted", w)


def centered_values(k: np.ndarray, w: np.ndarray) -> np.ndarray:
    """center_weighted on a plain array, without validation (internal hot path)."""
    kw = k @ w
    wkw = float(w @ kw)
    c = k - kw[:, None] - kw[None, :] + wkw
    return (c + c.T) / 2.0


def center_test(k_test, g_train: GramMatrix, w) -> np.ndarray:
    """Center a T x n test/train cross-Gram against the weighted training mean."""
    _require_raw(g_train)
    w = as_weights(w, g_train.n)
    kt = np.asarray(k_test, dtype=float)
    if kt.ndim != 2 or kt.shape[1] != g_train.n:
        raise ValidationError(
            f"cross-Gram has shape {kt.shape}, expected (T, {g_train.n})"
        )
    kw = g_train.values @ w
    wkw = float(w @ kw)
    return kt - kw[None, :] - (kt @ w)[:, None] + wkw
