"""Gaussian-process regression baseline with a UCB selection rule.

A standard unit-variance squared-exponential GP: fit factorizes
``K + noise_std^2 I`` once (O(t^3)), predictions are triangular solves. The
selection rule maximizes ``mean + sqrt(beta_t) * std`` over a finite
candidate grid, with the confidence schedule
``beta_t = 2 log(|grid| t^2 pi^2 / (6 delta))``.

Hyperparameters are fixed by the config; there is no marginal-likelihood
optimization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.spatial.distance import cdist

from .kernels import KernelSpec, kernel_row
from .posterior import Dataset

__all__ = [
    "GpConfig",
    "GpPosterior",
    "gp_fit",
    "gp_predict",
    "gp_predict_batch",
    "beta_t",
    "ucb_select",
]

# predictive variances this far below zero indicate a broken factorization
# rather than roundoff
_VAR_FLOOR = -1e-10


@dataclass(frozen=True)
class GpConfig:
    """GP noise level, kernel length scale, UCB confidence delta, and the
    finite candidate set the acquisition argmax is taken over."""

    noise_std: float
    length_scale: float
    delta: float
    candidate_grid: np.ndarray

    def __post_init__(self) -> None:
        if not (self.noise_std > 0.0):
            raise ValueError(f"noise_std must be positive, got {self.noise_std}")
        if not (self.length_scale > 0.0):
            raise ValueError(f"length_scale must be positive, got {self.length_scale}")
        if not (0.0 < self.delta < 1.0):
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        grid = np.asarray(self.candidate_grid, dtype=float)
        if grid.ndim == 1:
            grid = grid[:, None]
        if grid.size == 0:
            raise ValueError("candidate_grid must be nonempty")
        object.__setattr__(self, "candidate_grid", grid)


class _Diagnostics:
    """Mutable counters shared by all predictions of one posterior."""

    __slots__ = ("negative_variance_clamps",)

    def __init__(self) -> None:
        self.negative_variance_clamps = 0


@dataclass(frozen=True)
class GpPosterior:
    """Training data plus the Cholesky factor of ``K + noise_std^2 I`` and
    the precomputed solve against the targets. ``chol`` is None for the
    prior (no data): predictive mean 0 and variance 1 everywhere."""

    x_train: np.ndarray
    y_train: np.ndarray
    chol: np.ndarray | None
    alpha: np.ndarray
    kernel: KernelSpec
    noise_std: float
    diagnostics: _Diagnostics = field(default_factory=_Diagnostics, compare=False)


def _gram(x: np.ndarray, length_scale: float) -> np.ndarray:
    return np.exp(-0.5 * cdist(x, x, "sqeuclidean") / (length_scale**2))


def gp_fit(config: GpConfig, dataset: Dataset) -> GpPosterior:
    """Fit the GP to a dataset; O(t^3) in the number of observations.

    A failed factorization is retried once with 1e-9 jitter on the diagonal
    before giving up.
    """
    kernel = KernelSpec("gaussian", config.length_scale)
    x, y = dataset.points, dataset.values
    t = len(dataset)
    if t == 0:
        return GpPosterior(x, y, None, np.zeros(0), kernel, config.noise_std)
    cov = _gram(x, config.length_scale) + config.noise_std**2 * np.eye(t)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        try:
            chol = np.linalg.cholesky(cov + 1e-9 * np.eye(t))
        except np.linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError(
                f"covariance factorization failed for t={t}, "
                f"noise_std={config.noise_std}, length_scale={config.length_scale}, "
                "even after 1e-9 jitter"
            ) from exc
    alpha = cho_solve((chol, True), y)
    return GpPosterior(x, y, chol, alpha, kernel, config.noise_std)


def _clamp_variance(var: np.ndarray, diagnostics: _Diagnostics) -> np.ndarray:
    negative = var < 0.0
    if not negative.any():
        return var
    worst = float(var.min())
    if worst <= _VAR_FLOOR:
        raise FloatingPointError(
            f"predictive variance {worst} is below the roundoff floor {_VAR_FLOOR}"
        )
    diagnostics.negative_variance_clamps += int(negative.sum())
    return np.where(negative, 0.0, var)


def gp_predict_batch(gp: GpPosterior, xs) -> tuple[np.ndarray, np.ndarray]:
    """Predictive means and variances at the rows of ``xs``."""
    pts = np.asarray(xs, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if gp.chol is None:
        return np.zeros(pts.shape[0]), np.ones(pts.shape[0])
    cross = np.exp(
        -0.5 * cdist(gp.x_train, pts, "sqeuclidean") / (gp.kernel.width**2)
    )
    means = cross.T @ gp.alpha
    v = solve_triangular(gp.chol, cross, lower=True)
    variances = _clamp_variance(1.0 - np.einsum("ij,ij->j", v, v), gp.diagnostics)
    return means, variances


def gp_predict(gp: GpPosterior, x) -> tuple[float, float]:
    """Predictive mean and variance at a single point."""
    px = np.atleast_1d(np.asarray(x, dtype=float))
    if gp.chol is None:
        return 0.0, 1.0
    if px.shape != (gp.x_train.shape[1],):
        raise ValueError(
            f"dimension mismatch: expected {gp.x_train.shape[1]}, got {px.shape}"
        )
    k = kernel_row(gp.kernel, gp.x_train, px)
    mean = float(k @ gp.alpha)
    v = solve_triangular(gp.chol, k, lower=True)
    var = _clamp_variance(np.atleast_1d(1.0 - float(v @ v)), gp.diagnostics)
    return mean, float(var[0])


def beta_t(config: GpConfig, t: int) -> float:
    """Confidence multiplier ``2 log(|grid| t^2 pi^2 / (6 delta))``."""
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    m = config.candidate_grid.shape[0]
    return 2.0 * math.log(m * t * t * math.pi**2 / (6.0 * config.delta))


def ucb_select(gp: GpPosterior, config: GpConfig, t: int) -> np.ndarray:
    """Candidate maximizing ``mean + sqrt(beta_t) * std``.

    Ties break toward the lowest grid index, so selection is deterministic.
    """
    means, variances = gp_predict_batch(gp, config.candidate_grid)
    scores = means + math.sqrt(beta_t(config, t)) * np.sqrt(variances)
    return config.candidate_grid[int(np.argmax(scores))].copy()
