"""Robust loss functions and KIRWLS estimation of observation weights.

The reweighting factor is phi(t) = zeta'(t)/t, so quadratic loss gives
uniform weights and the whole robust pipeline degenerates to the classical
one. Huber and Hampel tuning constants left unset are resolved from
percentiles of the first-iteration residuals (50th for Huber; 70th, 85th
and 95th for Hampel).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .kernels import GramMatrix, centered_values, uniform_weights

HUBER_PERCENTILE = 50.0
HAMPEL_PERCENTILES = (70.0, 85.0, 95.0)


@dataclass(frozen=True)
class LossSpec:
    """A robust loss: kind in {quadratic, huber, hampel} plus tuning constants.

    An empty constants tuple means "resolve from first-iteration residuals".
    """

    kind: str
    constants: tuple = ()

    def __post_init__(self):
        if self.kind not in ("quadratic", "huber", "hampel"):
            raise ValidationError(f"unknown loss kind: {self.kind!r}")
        c = self.constants
        if self.kind == "quadratic" and c:
            raise ValidationError("quadratic loss takes no constants")
        if c:
            if self.kind == "huber":
                if len(c) != 1 or not c[0] > 0:
                    raise ValidationError("huber loss needs a single constant c > 0")
            elif self.kind == "hampel":
                if len(c) != 3 or not (0 < c[0] <= c[1] < c[2]):
                    raise ValidationError("hampel loss needs 0 < c1 <= c2 < c3")

    @classmethod
    def quadratic(cls) -> "LossSpec":
        return cls("quadratic")

    @classmethod
    def huber(cls, c: float | None = None) -> "LossSpec":
        return cls("huber", () if c is None else (float(c),))

    @classmethod
    def hampel(cls, c1=None, c2=None, c3=None) -> "LossSpec":
        if c1 is None and c2 is None and c3 is None:
            return cls("hampel")
        return cls("hampel", (float(c1), float(c2), float(c3)))

    @property
    def resolved(self) -> bool:
        return self.kind == "quadratic" or bool(self.constants)


def resolve_constants(loss: LossSpec, residuals: np.ndarray) -> LossSpec:
    """Fill unset tuning constants from residual percentiles."""
    if loss.resolved:
        return loss
    r = np.asarray(residuals, dtype=float)
    if loss.kind == "huber":
        c = float(np.percentile(r, HUBER_PERCENTILE))
        return LossSpec("huber", (max(c, 1e-12),))
    c1, c2, c3 = (float(np.percentile(r, q)) for q in HAMPEL_PERCENTILES)
    c1 = max(c1, 1e-12)
    c2 = max(c2, c1)
    if c3 <= c2:
        c3 = c2 * (1.0 + 1e-9) + 1e-12
    return LossSpec("hampel", (c1, c2, c3))


def _require_resolved(loss: LossSpec):
    if not loss.resolved:
        raise ValidationError("loss constants are unresolved; supply them or run KIRWLS")


def loss_value(loss: LossSpec, t):
    """Piecewise loss zeta(t), continuous and nondecreasing on [0, inf)."""
    _require_resolved(loss)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValidationError("loss argument must be nonnegative")
    if loss.kind == "quadratic":
        out = t * t / 2.0
    elif loss.kind == "huber":
        (c,) = loss.constants
        out = np.where(t <= c, t * t / 2.0, c * t - c * c / 2.0)
    else:
        c1, c2, c3 = loss.constants
        tail = c1 * (c2 + c3 - c1) / 2.0
        out = np.select(
            [t < c1, t < c2, t < c3],
            [
                t * t / 2.0,
                c1 * t - c1 * c1 / 2.0,
                tail - c1 * (c3 - t) ** 2 / (2.0 * (c3 - c2)),
            ],
            default=tail,
        )
    return float(out) if out.ndim == 0 else out


def loss_weight(loss: LossSpec, t):
    """Reweighting factor phi(t) = zeta'(t)/t, with the limit 1 at t = 0."""
    _require_resolved(loss)
    t = np.asarray(t, dtype=float)
    if loss.kind == "quadratic":
        out = np.ones_like(t)
    elif loss.kind == "huber":
        (c,) = loss.constants
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(t <= c, 1.0, c / t)
    else:
        c1, c2, c3 = loss.constants
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.select(
                [t < c1, t < c2, t < c3],
                [
                    np.ones_like(t),
                    c1 / t,
                    c1 * (c3 - t) / (t * (c3 - c2)),
                ],
                default=np.zeros_like(t),
            )
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class KirwlsConfig:
    loss: LossSpec
    max_iter: int = 100
    tol: float = 1e-8

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValidationError("max_iter must be >= 1")
        if not self.tol > 0:
            raise ValidationError("tol must be positive")


@dataclass(frozen=True)
class RobustWeights:
    """KIRWLS output: weights, iteration diagnostics, final residual norms."""

    w: np.ndarray
    iterations_used: int
    converged: bool
    residuals: np.ndarray
    loss: LossSpec


def _kirwls(residual_fn, n: int, cfg: KirwlsConfig) -> RobustWeights:
    w = uniform_weights(n)
    r = residual_fn(w)
    loss = resolve_constants(cfg.loss, r)
    converged = False
    iterations = 0
    for _ in range(cfg.max_iter):
        iterations += 1
        phi = loss_weight(loss, r)
        total = float(phi.sum())
        if total <= 0.0:
            raise NumericalError("all observations down-weighted to zero")
        w_new = phi / total
        delta = float(np.max(np.abs(w_new - w))) / float(np.max(np.abs(w)))
        w = w_new
        if delta < cfg.tol:
            converged = True
            break
        r = residual_fn(w)
    r = residual_fn(w)
    return RobustWeights(w=w, iterations_used=iterations, converged=converged,
                         residuals=r, loss=loss)


def robust_mean_weights(g: GramMatrix, cfg: KirwlsConfig) -> RobustWeights:
    """Weights of the robust kernel mean element.

    Residuals are RKHS distances of each point to the current weighted mean,
    via the kernel trick r_i^2 = K_ii - 2 (Kw)_i + w^T K w.
    """
    if g.centering != "raw":
        raise ValidationError("robust estimation requires a raw Gram matrix")
    k = g.values
    diag = np.diag(k).copy()

    def residuals(w):
        kw = k @ w
        r2 = diag - 2.0 * kw + float(w @ kw)
        return np.sqrt(np.clip(r2, 0.0, None))

    return _kirwls(residuals, g.n, cfg)


def robust_cco_weights(gx: GramMatrix, gy: GramMatrix, cfg: KirwlsConfig) -> RobustWeights:
    """Weights of the robust kernel cross-covariance operator.

    Each iteration re-centers both Gram matrices with the current weights and
    measures, per observation, the tensor-norm distance of its centered
    feature product to the weighted average of all such products.
    """
    if gx.centering != "raw" or gy.centering != "raw":
        raise ValidationError("robust estimation requires raw Gram matrices")
    if gx.n != gy.n:
        raise ValidationError("the two views have different sample sizes")
    return _cco_weights(gx.values, gy.values, cfg)


def _cco_weights(kx: np.ndarray, ky: np.ndarray, cfg: KirwlsConfig) -> RobustWeights:
    def residuals(w):
        p = centered_values(kx, w) * centered_values(ky, w)
        pw = p @ w
        s2 = np.diag(p) - 2.0 * pw + float(w @ pw)
        return np.sqrt(np.clip(s2, 0.0, None))

    return _kirwls(residuals, kx.shape[0], cfg)
