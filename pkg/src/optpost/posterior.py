"""Posterior over the location of a noisy function's maximizer.

The model keeps a direct (unnormalized) density over the maximizing argument
instead of a distribution over functions. Its log-density at a query point
``x`` factorizes into two pieces:

* a kernel-regressor estimate of the mean function,
  ``h(x) = (sum_i K(x_i, x) y_i + K0(x) y0(x)) / (sum_i K(x_i, x) + K0(x))``,
  where ``(K0, y0)`` act as one prior pseudo-observation, and
* a precision ``alpha = rho * (xi + n_eff)`` where ``n_eff`` is the effective
  number of distinct test locations maintained by :mod:`optpost.kernels`.

``log_density(x) = alpha * h(x)``. The normalizer is intractable and never
computed; all consumers only need relative comparisons (MCMC acceptance
ratios, grid normalization).

States are immutable; :func:`update` returns a new state with the Gramian
statistics advanced incrementally, so appending an observation costs O(t)
and a density evaluation costs O(t).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .kernels import (
    GramianStats,
    KernelSpec,
    effective_locations,
    gramian_update,
    kernel_row,
)

__all__ = [
    "PriorSpec",
    "Dataset",
    "PosteriorState",
    "constant",
    "log_gaussian",
    "quadratic_bowl",
    "prior_from_config",
    "empty_state",
    "state_from_data",
    "mean_estimate",
    "precision",
    "log_density",
    "update",
    "density_grid",
    "state_to_json",
    "state_from_json",
]


# ---------------------------------------------------------------------------
# Prior functions
# ---------------------------------------------------------------------------

def constant(value: float) -> Callable[[np.ndarray], float]:
    """Constant prior function, e.g. ``K0(x) = 1``."""
    v = float(value)
    return lambda x: v


def log_gaussian(mean, variance: float) -> Callable[[np.ndarray], float]:
    """Log of an (unnormalized) Gaussian bump: ``-||x - mean||^2 / (2 variance)``.

    ``mean`` may be a scalar (broadcast across coordinates) or a vector.
    """
    if variance <= 0:
        raise ValueError("variance must be positive")
    mu = np.asarray(mean, dtype=float)
    inv = 0.5 / float(variance)

    def y0(x: np.ndarray) -> float:
        d = np.asarray(x, dtype=float) - mu
        return -inv * float(d @ d)

    return y0


def quadratic_bowl(center, scale: float) -> Callable[[np.ndarray], float]:
    """Downward quadratic ``-scale * ||x - center||^2`` peaking at ``center``."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    c = np.asarray(center, dtype=float)
    s = float(scale)

    def y0(x: np.ndarray) -> float:
        d = np.asarray(x, dtype=float) - c
        return -s * float(d @ d)

    return y0


_FN_KINDS = ("constant", "log_gaussian", "quadratic")


def _fn_from_config(cfg: dict) -> Callable[[np.ndarray], float]:
    kind = cfg.get("kind")
    if kind == "constant":
        return constant(cfg["value"])
    if kind == "log_gaussian":
        return log_gaussian(cfg["mean"], cfg["variance"])
    if kind == "quadratic":
        return quadratic_bowl(cfg["center"], cfg["scale"])
    raise ValueError(f"unknown prior function kind {kind!r}; known: {_FN_KINDS}")


@dataclass(frozen=True)
class PriorSpec:
    """Prior parameters: pseudo-location count, per-location precision, and
    the prior precision/mean-estimate functions.

    ``k0`` must be strictly positive everywhere; it guards the regressor
    denominator against kernel underflow far from the data. ``config`` holds
    the declarative form when the spec was built from one (required for JSON
    serialization), and is ignored for equality.
    """

    xi: float
    rho: float
    k0: Callable[[np.ndarray], float]
    y0: Callable[[np.ndarray], float]
    config: dict | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not (self.xi > 0.0 and np.isfinite(self.xi)):
            raise ValueError(f"xi must be a positive real, got {self.xi}")
        if not (self.rho > 0.0 and np.isfinite(self.rho)):
            raise ValueError(f"rho must be a positive real, got {self.rho}")


def prior_from_config(cfg: dict) -> PriorSpec:
    """Build a :class:`PriorSpec` from its JSON form.

    Example::

        {"xi": 1.0, "rho": 0.2,
         "k0": {"kind": "constant", "value": 1.0},
         "y0": {"kind": "log_gaussian", "mean": 1.5, "variance": 5.0}}
    """
    return PriorSpec(
        xi=float(cfg["xi"]),
        rho=float(cfg["rho"]),
        k0=_fn_from_config(cfg["k0"]),
        y0=_fn_from_config(cfg["y0"]),
        config={
            "xi": float(cfg["xi"]),
            "rho": float(cfg["rho"]),
            "k0": dict(cfg["k0"]),
            "y0": dict(cfg["y0"]),
        },
    )


# ---------------------------------------------------------------------------
# Dataset and state
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Dataset:
    """Ordered observations: an (t, d) array of points and t values."""

    points: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if pts.ndim != 2:
            raise ValueError(f"points must be a (t, d) array, got shape {pts.shape}")
        if vals.ndim != 1 or vals.shape[0] != pts.shape[0]:
            raise ValueError(
                f"values must be a length-{pts.shape[0]} vector, got shape {vals.shape}"
            )
        if pts.shape[1] < 1:
            raise ValueError("dimension must be positive")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)

    @classmethod
    def empty(cls, dimension: int) -> "Dataset":
        return cls(np.zeros((0, int(dimension))), np.zeros(0))

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def append(self, x, y: float) -> "Dataset":
        px = np.atleast_1d(np.asarray(x, dtype=float))
        if px.shape != (self.dimension,):
            raise ValueError(
                f"dimension mismatch: expected {self.dimension}, got {px.shape}"
            )
        return Dataset(
            np.vstack([self.points, px[None, :]]),
            np.append(self.values, float(y)),
        )


@dataclass(frozen=True)
class PosteriorState:
    """Dataset plus cached Gramian statistics, prior and kernel."""

    dataset: Dataset
    gramian: GramianStats
    prior: PriorSpec
    kernel: KernelSpec

    @property
    def dimension(self) -> int:
        return self.dataset.dimension


def empty_state(dimension: int, prior: PriorSpec, kernel: KernelSpec) -> PosteriorState:
    """The prior-only state over a ``dimension``-dimensional domain."""
    return PosteriorState(Dataset.empty(dimension), GramianStats.empty(), prior, kernel)


def state_from_data(points, values, prior: PriorSpec, kernel: KernelSpec) -> PosteriorState:
    """Fold a batch of observations into a state via sequential updates."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    vals = np.asarray(values, dtype=float)
    if pts.shape[0] != vals.shape[0]:
        raise ValueError("points and values must have equal length")
    state = empty_state(pts.shape[1] if pts.size else 1, prior, kernel)
    for x, y in zip(pts, vals):
        state = update(state, x, y)
    return state


# ---------------------------------------------------------------------------
# Core operations
# ---------------------------------------------------------------------------

def mean_estimate(state: PosteriorState, x_star) -> float:
    """Kernel-regressor estimate of the mean function at ``x_star``.

    With no data this is exactly ``y0(x_star)``.
    """
    px = np.atleast_1d(np.asarray(x_star, dtype=float))
    if px.shape != (state.dimension,):
        raise ValueError(
            f"dimension mismatch: expected {state.dimension}, got {px.shape}"
        )
    if len(state.dataset) == 0:
        return float(state.prior.y0(px))
    k = kernel_row(state.kernel, state.dataset.points, px)
    k0 = float(state.prior.k0(px))
    num = float(k @ state.dataset.values) + k0 * float(state.prior.y0(px))
    den = float(k.sum()) + k0
    return num / den


def precision(state: PosteriorState) -> float:
    """Certainty multiplier ``rho * (xi + effective locations)``."""
    return state.prior.rho * (state.prior.xi + effective_locations(state.gramian))


def log_density(state: PosteriorState, x_star) -> float:
    """Unnormalized log-posterior of the maximizer location at ``x_star``.

    Values are comparable across calls on the same state; the normalizing
    constant is never computed.
    """
    return precision(state) * mean_estimate(state, x_star)


def update(state: PosteriorState, x, y: float) -> PosteriorState:
    """State for the dataset extended by ``(x, y)``; O(t) time."""
    gram = gramian_update(state.gramian, state.dataset.points, state.kernel, x)
    return PosteriorState(state.dataset.append(x, y), gram, state.prior, state.kernel)


def density_grid(state: PosteriorState, grid) -> np.ndarray:
    """Normalized posterior weights over a finite grid of points.

    Returns ``exp(log_density - max)`` rescaled to sum to 1, a discrete
    stand-in for the continuous normalized density. Stable for any spread of
    log-densities thanks to the max subtraction.
    """
    pts = np.asarray(grid, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.size == 0:
        raise ValueError("grid must be nonempty")
    logs = np.array([log_density(state, p) for p in pts])
    w = np.exp(logs - logs.max())
    return w / w.sum()


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def state_to_json(state: PosteriorState) -> str:
    """Serialize a state (points, values, config) for session persistence.

    Requires a prior built from a declarative config (see
    :func:`prior_from_config`); priors wrapping arbitrary callables cannot be
    round-tripped.
    """
    if state.prior.config is None:
        raise ValueError(
            "state is not serializable: prior was not built from a config"
        )
    payload = {
        "dimension": state.dimension,
        "points": state.dataset.points.tolist(),
        "values": state.dataset.values.tolist(),
        "kernel": {"family": state.kernel.family, "width": state.kernel.width},
        "prior": state.prior.config,
    }
    return json.dumps(payload, sort_keys=True)


def state_from_json(text: str) -> PosteriorState:
    """Rebuild a state saved by :func:`state_to_json`.

    The Gramian statistics are reconstructed by replaying the updates, so a
    loaded state is consistent by construction.
    """
    payload = json.loads(text)
    prior = prior_from_config(payload["prior"])
    kernel = KernelSpec(**payload["kernel"])
    points = np.asarray(payload["points"], dtype=float).reshape(
        -1, int(payload["dimension"])
    )
    values = np.asarray(payload["values"], dtype=float)
    if points.shape[0] == 0:
        return empty_state(int(payload["dimension"]), prior, kernel)
    return state_from_data(points, values, prior, kernel)
