"""Random-walk Metropolis–Hastings on the maximizer posterior.

Proposals are isotropic Gaussian steps; the proposal is symmetric, so a move
is accepted with probability ``min(1, exp(delta))`` where ``delta`` is the
log-density difference. Because the Gramian statistics of a state are fixed
between observations, each proposal costs one O(t) mean-estimate evaluation.

Randomness contract: every chain consumes exactly one explicit
``numpy.random.Generator`` (PCG64 by default, see :func:`make_rng`); there is
no global state. Per step the stream is consumed as: ``d`` standard normals
for the proposal, then one uniform for the accept decision (skipped when the
proposal's log-density is non-finite, which is an automatic rejection).
:func:`run_chain` follows the identical step rule, so a long run is
bit-for-bit the composition of :func:`mh_step` calls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .kernels import kernel_row
from .posterior import PosteriorState, log_density, precision

__all__ = [
    "MhConfig",
    "ChainState",
    "make_rng",
    "chain_start",
    "mh_step",
    "mh_sample",
    "run_chain",
]


@dataclass(frozen=True)
class MhConfig:
    """Proposal variance per coordinate, steps per emitted sample, and the
    default seed used when no generator is supplied."""

    step_variance: float
    burn_in_steps: int = 120
    seed: int = 0

    def __post_init__(self) -> None:
        if not (self.step_variance > 0.0 and np.isfinite(self.step_variance)):
            raise ValueError(
                f"step_variance must be a positive real, got {self.step_variance}"
            )
        if self.burn_in_steps < 0:
            raise ValueError("burn_in_steps must be nonnegative")


@dataclass(frozen=True)
class ChainState:
    """Current point, its cached log-density, and move counters."""

    current: np.ndarray
    current_log_density: float
    accepted: int = 0
    proposed: int = 0
    nonfinite: int = 0


def make_rng(config: MhConfig) -> np.random.Generator:
    """Fresh PCG64 generator from the config seed."""
    return np.random.Generator(np.random.PCG64(config.seed))


def chain_start(posterior: PosteriorState, start) -> ChainState:
    """Chain positioned at ``start`` with its log-density cached."""
    x = np.atleast_1d(np.asarray(start, dtype=float))
    logd = log_density(posterior, x)
    if math.isnan(logd):
        raise ValueError(f"log-density at the start point is NaN: {x}")
    return ChainState(x, logd)


def _density_closure(posterior: PosteriorState) -> Callable[[np.ndarray], float]:
    """Log-density as a fast closure over the state's fixed pieces.

    Performs the same floating-point operations as
    :func:`optpost.posterior.log_density`, so results agree bit-for-bit; the
    closure only hoists attribute lookups out of hot loops.
    """
    alpha = precision(posterior)
    k0f = posterior.prior.k0
    y0f = posterior.prior.y0
    kernel = posterior.kernel
    points = posterior.dataset.points
    values = posterior.dataset.values
    if len(posterior.dataset) == 0:
        return lambda px: alpha * float(y0f(px))

    def logd(px: np.ndarray) -> float:
        k = kernel_row(kernel, points, px)
        k0 = float(k0f(px))
        num = float(k @ values) + k0 * float(y0f(px))
        den = float(k.sum()) + k0
        return alpha * (num / den)

    return logd


def _advance(
    current: np.ndarray,
    current_logd: float,
    logd: Callable[[np.ndarray], float],
    step_std: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, float, bool, bool]:
    """One proposal; returns (point, log-density, accepted, nonfinite)."""
    proposal = current + step_std * rng.standard_normal(current.shape[0])
    prop_logd = logd(proposal)
    if not math.isfinite(prop_logd):
        # invalid proposal: reject without consuming a uniform
        return current, current_logd, False, True
    delta = prop_logd - current_logd
    u = rng.random()
    if delta >= 0.0 or u < math.exp(delta):
        return proposal, prop_logd, True, False
    return current, current_logd, False, False


def mh_step(
    chain: ChainState,
    posterior: PosteriorState,
    config: MhConfig,
    rng: np.random.Generator,
) -> ChainState:
    """Advance the chain by one proposal."""
    if chain.current.shape != (posterior.dimension,):
        raise ValueError(
            f"dimension mismatch: chain is {chain.current.shape[0]}-d, "
            f"posterior is {posterior.dimension}-d"
        )
    point, logd, accepted, nonfinite = _advance(
        chain.current,
        chain.current_log_density,
        _density_closure(posterior),
        math.sqrt(config.step_variance),
        rng,
    )
    return ChainState(
        current=point,
        current_log_density=logd,
        accepted=chain.accepted + accepted,
        proposed=chain.proposed + 1,
        nonfinite=chain.nonfinite + nonfinite,
    )


def mh_sample(
    posterior: PosteriorState,
    start,
    config: MhConfig,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Run ``burn_in_steps`` proposals from ``start`` and return the endpoint.

    This is the per-test-location recipe of the Thompson-sampling optimizer:
    the returned point is one (approximate) draw from the posterior. With
    ``burn_in_steps == 0`` the start point is returned unchanged.
    """
    if rng is None:
        rng = make_rng(config)
    chain = chain_start(posterior, start)
    if config.burn_in_steps == 0:
        return chain.current
    samples, _ = run_chain(posterior, chain, config.burn_in_steps, config, rng)
    return samples[-1]


def run_chain(
    posterior: PosteriorState,
    start,
    num_steps: int,
    config: MhConfig,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, ChainState]:
    """Run ``num_steps`` proposals, recording the point after every step.

    ``start`` may be a point or an existing :class:`ChainState`. Returns the
    (num_steps, d) array of visited points (row i is the state after step
    i+1, duplicates included on rejection) together with the final chain
    state. Equivalent to ``num_steps`` calls of :func:`mh_step` on the same
    generator.
    """
    if rng is None:
        rng = make_rng(config)
    chain = start if isinstance(start, ChainState) else chain_start(posterior, start)
    logd_fn = _density_closure(posterior)
    step_std = math.sqrt(config.step_variance)
    current, current_logd = chain.current, chain.current_log_density
    accepted = nonfinite = 0
    out = np.empty((num_steps, current.shape[0]))
    for i in range(num_steps):
        current, current_logd, acc, nonf = _advance(
            current, current_logd, logd_fn, step_std, rng
        )
        accepted += acc
        nonfinite += nonf
        out[i] = current
    final = ChainState(
        current=current,
        current_log_density=current_logd,
        accepted=chain.accepted + accepted,
        proposed=chain.proposed + num_steps,
        nonfinite=chain.nonfinite + nonfinite,
    )
    return out, final
