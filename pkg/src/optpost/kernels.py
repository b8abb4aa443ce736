"""Kernel functions and Gramian-derived statistics.

The central quantity here is the *effective number of distinct locations* of
a dataset: ``t * trace(G) / sum(G)`` where ``G`` is the Gramian matrix of
pairwise kernel evaluations. Nearby inputs produce large off-diagonal
entries, which shrinks the ratio; well-separated inputs drive it toward
``t``. The statistics needed for this ratio (trace and total sum) are
maintained incrementally in O(t) per new point, so no Gramian is ever
materialized.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "KernelSpec",
    "GramianStats",
    "kernel_eval",
    "kernel_row",
    "gramian_update",
    "effective_locations",
]


def _gaussian(sq_dist: np.ndarray | float, width: float) -> np.ndarray | float:
    return np.exp(-0.5 * sq_dist / (width * width))


# family name -> function of (squared distance, width); new families must be
# isotropic (depend on the inputs only through their distance), unit-diagonal
# is not assumed anywhere except in the Gaussian-specific tests.
_FAMILIES: dict[str, Callable] = {"gaussian": _gaussian}


@dataclass(frozen=True)
class KernelSpec:
    """An isotropic kernel: family name plus width (same units as the domain)."""

    family: str = "gaussian"
    width: float = 1.0

    def __post_init__(self) -> None:
        if self.family not in _FAMILIES:
            raise ValueError(
                f"unknown kernel family {self.family!r}; known: {sorted(_FAMILIES)}"
            )
        if not (self.width > 0.0 and np.isfinite(self.width)):
            raise ValueError(f"kernel width must be a positive real, got {self.width}")


@dataclass(frozen=True)
class GramianStats:
    """Running sums over the Gramian matrix of a dataset.

    ``trace_sum`` is ``sum_i K(x_i, x_i)``, ``total_sum`` is
    ``sum_i sum_j K(x_i, x_j)`` and ``count`` is the number of points. These
    three numbers are all that is needed to compute the effective number of
    distinct locations.
    """

    trace_sum: float = 0.0
    total_sum: float = 0.0
    count: int = 0

    def __post_init__(self) -> None:
        if self.count < 0:
            raise ValueError("count must be nonnegative")
        if self.count >= 1 and not (self.total_sum >= self.trace_sum > 0.0):
            raise ValueError(
                f"inconsistent Gramian sums: trace={self.trace_sum}, "
                f"total={self.total_sum}, count={self.count}"
            )

    @classmethod
    def empty(cls) -> "GramianStats":
        return cls(0.0, 0.0, 0)


def _as_point(x: np.ndarray | list | tuple | float) -> np.ndarray:
    p = np.atleast_1d(np.asarray(x, dtype=float))
    if p.ndim != 1:
        raise ValueError(f"a point must be a 1-d vector, got shape {p.shape}")
    return p


def kernel_eval(spec: KernelSpec, a, b) -> float:
    """Evaluate ``K(a, b)`` for two points of equal dimension.

    For the Gaussian family this is ``exp(-||a - b||^2 / (2 width^2))``:
    symmetric, in (0, 1], and exactly 1 iff ``a == b``.
    """
    pa, pb = _as_point(a), _as_point(b)
    if pa.shape != pb.shape:
        raise ValueError(f"dimension mismatch: {pa.shape[0]} vs {pb.shape[0]}")
    diff = pa - pb
    return float(_FAMILIES[spec.family](float(diff @ diff), spec.width))


def kernel_row(spec: KernelSpec, points: np.ndarray, x) -> np.ndarray:
    """Vector of ``K(points[i], x)`` for a (t, d) array of points."""
    px = _as_point(x)
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        return np.zeros(0)
    if pts.ndim != 2 or pts.shape[1] != px.shape[0]:
        raise ValueError(
            f"points must have shape (t, {px.shape[0]}), got {pts.shape}"
        )
    diff = pts - px
    return _FAMILIES[spec.family](np.einsum("ij,ij->i", diff, diff), spec.width)


def gramian_update(
    stats: GramianStats, points: np.ndarray, spec: KernelSpec, new_x
) -> GramianStats:
    """Gramian statistics for ``points + [new_x]`` in O(t) time.

    ``points`` must be the (t, d) array the incoming ``stats`` were built
    from; consistency is the caller's responsibility (tests spot-check it by
    full recomputation).
    """
    px = _as_point(new_x)
    self_k = kernel_eval(spec, px, px)
    if stats.count == 0:
        return GramianStats(self_k, self_k, 1)
    cross = kernel_row(spec, points, px)
    return GramianStats(
        trace_sum=stats.trace_sum + self_k,
        total_sum=stats.total_sum + self_k + 2.0 * float(cross.sum()),
        count=stats.count + 1,
    )


def effective_locations(stats: GramianStats) -> float:
    """Effective number of distinct locations, ``count * trace / total``.

    Lies in (0, count]; equals 1 when all points coincide and approaches
    ``count`` as the points separate. An empty dataset contributes no
    locations, so the result is defined as 0 there (the posterior then
    reduces to its prior).
    """
    if stats.count == 0:
        return 0.0
    return stats.count * stats.trace_sum / stats.total_sum
