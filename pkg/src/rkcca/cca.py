"""Classical and robust kernel CCA as a regularized eigenproblem in Gram space.

With centered Gram matrices M_X, M_Y, weight matrix W = diag(w) and
regularizer kappa, the coefficient-space problem

    [0, M_X W M_Y; M_Y W M_X, 0] a = rho [M_X W M_X + kappa M_X, 0;
                                          0, M_Y W M_Y + kappa M_Y] a

is solved through the symmetric reduction B = L_X^{-1} (M_X W M_Y) L_Y^{-T},
where L L^T are Cholesky factors of the regularized variance blocks: the
singular values of B are the generalized eigenvalues rho, and the singular
vectors map back to coefficients via a = L^{-T} u. Reported canonical
correlations are the weighted correlations of the resulting canonical
variates (identical to the eigenvalues up to the O(kappa) regularization
wedge), clipped below 1 so Fisher's transform stays finite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla
from scipy.linalg import blas
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .errors import NumericalError, ValidationError
from .kernels import GramMatrix, centered_values, uniform_weights
from .robust import KirwlsConfig, LossSpec, _cco_weights

RHO_CLIP = 1.0 - 1e-12

# Dense SVD below this size; Lanczos on the implicit normal operator above.
_DENSE_N_MAX = 256
_JITTER_SCALE = 1e-10
_VAR_FLOOR = 1e-24


@dataclass(frozen=True)
class KccaConfig:
    """Solver configuration: regularizer, component count, weighting mode."""

    kappa: float = 1e-5
    n_components: int = 1
    mode: str = "classical"
    kirwls: KirwlsConfig | None = None

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValidationError("kappa must be positive")
        if self.n_components < 1:
            raise ValidationError("n_components must be >= 1")
        if self.mode not in ("classical", "robust"):
            raise ValidationError(f"unknown weights mode: {self.mode!r}")
        if self.mode == "robust" and self.kirwls is None:
            object.__setattr__(self, "kirwls", KirwlsConfig(loss=LossSpec.hampel()))


@dataclass(frozen=True)
class KccaModel:
    """Fitted canonical correlations, coefficients, and standardized variates.

    rho is sorted descending and clipped into [0, 1 - 1e-12]. Variate rows
    have weighted mean 0 and weighted variance 1 under `weights` (all-zero
    rows mark degenerate components).
    """

    rho: np.ndarray
    coef_x: np.ndarray
    coef_y: np.ndarray
    variates_x: np.ndarray
    variates_y: np.ndarray
    weights: np.ndarray
    kappa: float

    @property
    def n(self) -> int:
        return self.weights.shape[0]


def first_kcc(model: KccaModel) -> float:
    """Leading canonical correlation of a fitted model."""
    return float(model.rho[0])


def fit(gx: GramMatrix, gy: GramMatrix, cfg: KccaConfig) -> KccaModel:
    """Fit kernel CCA on two raw Gram matrices."""
    if gx.centering != "raw" or gy.centering != "raw":
        raise ValidationError("fit requires raw Gram matrices")
    if gx.n != gy.n:
        raise ValidationError("the two views have different sample sizes")
    return fit_values(gx.values, gy.values, cfg)


def fit_values(kx: np.ndarray, ky: np.ndarray, cfg: KccaConfig) -> KccaModel:
    """fit() on plain symmetric arrays, skipping Gram validation (hot path)."""
    if cfg.mode == "robust":
        w = _cco_weights(kx, ky, cfg.kirwls).w
    else:
        w = uniform_weights(kx.shape[0])
    return _fit_centered(kx, ky, w, cfg)


def _fit_centered(kx: np.ndarray, ky: np.ndarray, w: np.ndarray, cfg: KccaConfig) -> KccaModel:
    n = kx.shape[0]
    k = cfg.n_components
    if k > n:
        raise NumericalError(f"n_components={k} exceeds sample size {n}")
    mx = centered_values(kx, w)
    my = centered_values(ky, w)
    sqrt_w = np.sqrt(w)
    lx = _chol_block(mx, sqrt_w, cfg.kappa)
    ly = _chol_block(my, sqrt_w, cfg.kappa)
    if lx is None or ly is None:
        return _zero_model(n, k, w, cfg.kappa)

    # half-transformed views: B = (L_X^{-1} M_X) W (L_Y^{-1} M_Y)^T = Gx W Gy^T
    gx = sla.solve_triangular(lx, mx, lower=True, check_finite=False)
    gy = sla.solve_triangular(ly, my, lower=True, check_finite=False)

    if n <= _DENSE_N_MAX or 3 * k >= n:
        u, s, vt = sla.svd((gx * w) @ gy.T, check_finite=False)
        sig, us, vs = s[:k], u[:, :k], vt[:k].T
    else:
        sig, us, vs = _top_triplets(gx, gy, w, k)

    ax = sla.solve_triangular(lx, us, trans=1, lower=True, check_finite=False)
    ay = sla.solve_triangular(ly, vs, trans=1, lower=True, check_finite=False)
    fx = gx.T @ us  # variates M a = (L^{-1} M)^T u
    fy = gy.T @ vs

    rho = np.empty(k)
    for j in range(k):
        fxj = _standardize(fx[:, j], w)
        fyj = _standardize(fy[:, j], w)
        corr = float(w @ (fxj * fyj))
        if corr < 0.0:
            ay[:, j] = -ay[:, j]
            fyj = -fyj
            corr = -corr
        # deterministic sign: largest-magnitude X-variate entry positive,
        # flipping the pair jointly to keep the correlation nonnegative
        i = int(np.argmax(np.abs(fxj)))
        if fxj[i] < 0.0:
            ax[:, j] = -ax[:, j]
            ay[:, j] = -ay[:, j]
            fxj = -fxj
            fyj = -fyj
        fx[:, j] = fxj
        fy[:, j] = fyj
        rho[j] = min(corr, RHO_CLIP)

    order = np.argsort(-rho, kind="stable")
    return KccaModel(
        rho=rho[order],
        coef_x=ax[:, order].T.copy(),
        coef_y=ay[:, order].T.copy(),
        variates_x=fx[:, order].T.copy(),
        variates_y=fy[:, order].T.copy(),
        weights=w,
        kappa=cfg.kappa,
    )


def _standardize(f: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Weighted mean 0, weighted variance 1; all-zero if degenerate."""
    d = f - float(w @ f)
    var = float(w @ (d * d))
    if var <= _VAR_FLOOR:
        return np.zeros_like(f)
    return d / np.sqrt(var)


def _chol_block(m: np.ndarray, sqrt_w: np.ndarray, kappa: float) -> np.ndarray | None:
    """Cholesky factor of M W M + kappa M, with deterministic jitter fallback.

    Only the lower triangle is assembled (dsyrk); cholesky(lower=True) never
    reads the upper part. Returns None for an (effectively) zero block, which
    callers treat as a degenerate view with zero canonical correlation.
    """
    n = m.shape[0]
    r = blas.dsyrk(1.0, m * sqrt_w, lower=1)
    r += kappa * m
    tr = float(np.trace(r))
    if not tr > 0.0:
        return None
    try:
        return sla.cholesky(r, lower=True, check_finite=False)
    except sla.LinAlgError:
        pass
    r[np.diag_indices(n)] += _JITTER_SCALE * tr / n
    try:
        return sla.cholesky(r, lower=True, check_finite=False)
    except sla.LinAlgError:
        raise NumericalError(
            "regularized covariance block is singular even after jitter"
        ) from None


def _top_triplets(gx, gy, w, k):
    """Leading singular triplets of B = Gx W Gy^T.

    Lanczos on the symmetric operator B B^T with a fixed start vector, so
    results are deterministic; falls back to the dense path on breakdown.
    """
    n = gx.shape[0]

    def normal_mat(x):
        t = w * (gx.T @ x)
        t = w * (gy.T @ (gy @ t))
        return gx @ t

    op = LinearOperator((n, n), matvec=normal_mat, dtype=float)
    v0 = np.full(n, 1.0 / np.sqrt(n))
    try:
        vals, vecs = eigsh(op, k=k, which="LA", v0=v0, tol=1e-10, maxiter=50 * n)
    except (ArpackNoConvergence, RuntimeError):
        u, s, vt = sla.svd((gx * w) @ gy.T, check_finite=False)
        return s[:k], u[:, :k], vt[:k].T

    order = np.argsort(vals)[::-1]
    vals = np.clip(vals[order], 0.0, None)
    us = vecs[:, order]
    sig = np.sqrt(vals)
    vs = np.zeros((n, k))
    for j in range(k):
        if sig[j] > 1e-150:
            vs[:, j] = gy @ (w * (gx.T @ us[:, j])) / sig[j]
    return sig, us, vs


def _zero_model(n: int, k: int, w: np.ndarray, kappa: float) -> KccaModel:
    z = np.zeros((k, n))
    return KccaModel(
        rho=np.zeros(k),
        coef_x=z.copy(),
        coef_y=z.copy(),
        variates_x=z.copy(),
        variates_y=z.copy(),
        weights=w,
        kappa=kappa,
    )
