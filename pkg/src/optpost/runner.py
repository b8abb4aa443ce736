"""Optimization loops, experiment orchestration, metrics, and persistence.

Three optimizers share one harness:

* ``argmax_thompson`` -- sample the next test point from the maximizer
  posterior with a Metropolis–Hastings chain, observe, update the state.
  The chain warm-starts from the previously emitted test location;
  ``restart_chain`` restarts it from the configured start point instead.
* ``gp_ucb`` -- refit the GP on all data each step and take the UCB argmax
  over the candidate grid.
* ``random_search`` -- uniform draws over a box; a sanity floor, not a
  method under study.

Each of the ``runs`` independent repetitions uses seed ``base_seed + k``
feeding one PCG64 generator that serves both proposal and observation noise,
so (config, base_seed) fully determines every output byte. Wall-clock
timings are kept in memory only and never written to files.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .gp import GpConfig, gp_fit, ucb_select
from .kernels import KernelSpec
from .objectives import Objective, mean_value, objective_from_config, observe, optimum
from .posterior import (
    Dataset,
    PosteriorState,
    PriorSpec,
    empty_state,
    prior_from_config,
    update,
)
from .sampler import MhConfig, mh_sample
from .svgplot import Series, write_line_plot

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "RunTrace",
    "Summary",
    "StepRecord",
    "thompson_step",
    "run_experiment",
    "run_compare",
    "aggregate",
    "emit_outputs",
    "experiment_from_config",
    "compare_defaults",
    "ripples50_config",
    "trace_from_csv",
    "steps_to_fraction",
]

_OPTIMIZERS = ("argmax_thompson", "gp_ucb", "random_search")


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    objective: Objective
    optimizer: str
    steps: int
    runs: int
    base_seed: int
    out_dir: Path | None = None
    prior: PriorSpec | None = None
    kernel: KernelSpec | None = None
    mh: MhConfig | None = None
    mh_start: np.ndarray | None = None
    restart_chain: bool = False
    gp: GpConfig | None = None
    search_box: tuple[np.ndarray, np.ndarray] | None = None
    raw: dict | None = None

    def __post_init__(self) -> None:
        if self.optimizer not in _OPTIMIZERS:
            raise ConfigError(
                f"unknown optimizer {self.optimizer!r}; known: {_OPTIMIZERS}"
            )
        if self.steps < 1 or self.runs < 1:
            raise ConfigError("steps and runs must both be >= 1")
        if self.optimizer == "argmax_thompson":
            missing = [
                name
                for name, val in (
                    ("model.prior", self.prior),
                    ("model.kernel", self.kernel),
                    ("model.mh", self.mh),
                    ("model.mh.start", self.mh_start),
                )
                if val is None
            ]
            if missing:
                raise ConfigError(f"argmax_thompson requires {', '.join(missing)}")
        if self.optimizer == "gp_ucb" and self.gp is None:
            raise ConfigError("gp_ucb requires a gp block")
        if self.optimizer == "random_search" and self.search_box is None:
            raise ConfigError("random_search requires a search_box block")


@dataclass(frozen=True)
class StepRecord:
    """Test point and observation from one optimizer step."""

    point: np.ndarray
    value: float


@dataclass(frozen=True)
class RunTrace:
    """Per-step history of one run (arrays indexed by step-1)."""

    points: np.ndarray  # (steps, d)
    values: np.ndarray  # y_t
    avg_values: np.ndarray  # running mean of y_1..y_t
    regrets: np.ndarray  # f(x*) - f(x_t), noiseless
    cum_regrets: np.ndarray
    step_seconds: np.ndarray  # wall clock; in-memory only, never serialized

    def __len__(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class Summary:
    """Across-run per-step mean and population standard deviation."""

    mean_avg_value: np.ndarray
    std_avg_value: np.ndarray
    mean_regret: np.ndarray
    std_regret: np.ndarray

    def __len__(self) -> int:
        return self.mean_avg_value.shape[0]


# ---------------------------------------------------------------------------
# Optimization loops
# ---------------------------------------------------------------------------

def thompson_step(
    posterior: PosteriorState,
    objective: Objective,
    mh: MhConfig,
    rng: np.random.Generator,
    start,
) -> tuple[PosteriorState, StepRecord]:
    """One Thompson-sampling step: draw a test point from the posterior via
    MH started at ``start``, observe, and fold the pair into the state."""
    x = mh_sample(posterior, start, mh, rng)
    y = observe(objective, x, rng)
    return update(posterior, x, y), StepRecord(x, y)


def _finish_trace(
    objective: Objective, points: list[np.ndarray], values: list[float], secs: list[float]
) -> RunTrace:
    pts = np.asarray(points)
    vals = np.asarray(values)
    steps = np.arange(1, vals.shape[0] + 1)
    _, best = optimum(objective)
    regrets = np.array([best - mean_value(objective, p) for p in pts])
    return RunTrace(
        points=pts,
        values=vals,
        avg_values=np.cumsum(vals) / steps,
        regrets=regrets,
        cum_regrets=np.cumsum(regrets),
        step_seconds=np.asarray(secs),
    )


def _run_one(config: ExperimentConfig, seed: int) -> RunTrace:
    rng = np.random.Generator(np.random.PCG64(seed))
    obj = config.objective
    points: list[np.ndarray] = []
    values: list[float] = []
    secs: list[float] = []

    if config.optimizer == "argmax_thompson":
        posterior = empty_state(obj.dimension, config.prior, config.kernel)
        chain_at = config.mh_start
        for _ in range(config.steps):
            t0 = time.perf_counter()
            start = config.mh_start if config.restart_chain else chain_at
            posterior, rec = thompson_step(posterior, obj, config.mh, rng, start)
            chain_at = rec.point
            points.append(rec.point)
            values.append(rec.value)
            secs.append(time.perf_counter() - t0)
    elif config.optimizer == "gp_ucb":
        data = Dataset.empty(obj.dimension)
        for t in range(1, config.steps + 1):
            t0 = time.perf_counter()
            gp = gp_fit(config.gp, data)
            x = ucb_select(gp, config.gp, t)
            y = observe(obj, x, rng)
            data = data.append(x, y)
            points.append(x)
            values.append(y)
            secs.append(time.perf_counter() - t0)
    else:  # random_search
        lo, hi = config.search_box
        for _ in range(config.steps):
            t0 = time.perf_counter()
            x = rng.uniform(lo, hi)
            y = observe(obj, x, rng)
            points.append(x)
            values.append(y)
            secs.append(time.perf_counter() - t0)

    return _finish_trace(obj, points, values, secs)


def run_experiment(config: ExperimentConfig) -> list[RunTrace]:
    """Execute ``runs`` independent runs with seeds ``base_seed + k``.

    Writes outputs to ``config.out_dir`` when set. If a run fails, the
    completed runs' outputs are still written before the error propagates.
    """
    traces: list[RunTrace] = []
    try:
        for k in range(config.runs):
            traces.append(_run_one(config, config.base_seed + k))
    except Exception:
        if config.out_dir is not None and traces:
            try:
                emit_outputs(traces, aggregate(traces), config, config.out_dir)
            except Exception:
                pass  # the original failure is the one worth reporting
        raise
    if config.out_dir is not None:
        emit_outputs(traces, aggregate(traces), config, config.out_dir)
    return traces


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def aggregate(traces: list[RunTrace]) -> Summary:
    """Per-step mean and population std (ddof=0) across equal-length runs."""
    if not traces:
        empty = np.zeros(0)
        return Summary(empty, empty, empty, empty)
    length = len(traces[0])
    if any(len(t) != length for t in traces):
        raise ValueError("traces must have equal length")
    avg = np.stack([t.avg_values for t in traces])
    reg = np.stack([t.regrets for t in traces])
    return Summary(
        mean_avg_value=avg.mean(axis=0),
        std_avg_value=avg.std(axis=0),
        mean_regret=reg.mean(axis=0),
        std_regret=reg.std(axis=0),
    )


def steps_to_fraction(curve: np.ndarray, fraction: float = 0.8) -> int:
    """First 1-based step at which ``curve`` reaches ``fraction`` of its
    final value (final value assumed positive)."""
    target = fraction * curve[-1]
    return int(np.argmax(curve >= target)) + 1


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def _fmt(v: float) -> str:
    return repr(float(v))


def _write_run_csv(path: Path, trace: RunTrace) -> None:
    d = trace.points.shape[1]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["step", *[f"x{i}" for i in range(d)], "y", "avg_y", "regret", "cum_regret"]
        )
        for i in range(len(trace)):
            writer.writerow(
                [
                    i + 1,
                    *[_fmt(v) for v in trace.points[i]],
                    _fmt(trace.values[i]),
                    _fmt(trace.avg_values[i]),
                    _fmt(trace.regrets[i]),
                    _fmt(trace.cum_regrets[i]),
                ]
            )


def trace_from_csv(path) -> RunTrace:
    """Read back a per-run CSV written by :func:`emit_outputs`.

    Timings are not serialized, so ``step_seconds`` comes back as zeros.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    d = sum(1 for name in header if name.startswith("x"))
    pts = np.array([[float(v) for v in row[1 : 1 + d]] for row in body])
    cols = np.array([[float(v) for v in row[1 + d :]] for row in body])
    if body:
        y, avg_y, regret, cum = cols.T
    else:
        pts = np.zeros((0, d))
        y = avg_y = regret = cum = np.zeros(0)
    return RunTrace(pts, y, avg_y, regret, cum, np.zeros(len(y)))


def _write_summary_csv(path: Path, summary: Summary) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["step", "mean_avg_y", "std_avg_y", "mean_regret", "std_regret"]
        )
        for i in range(len(summary)):
            writer.writerow(
                [
                    i + 1,
                    _fmt(summary.mean_avg_value[i]),
                    _fmt(summary.std_avg_value[i]),
                    _fmt(summary.mean_regret[i]),
                    _fmt(summary.std_regret[i]),
                ]
            )


def emit_outputs(
    traces: list[RunTrace],
    summary: Summary,
    config: ExperimentConfig,
    out_dir,
) -> list[Path]:
    """Write per-run CSVs, the summary CSV, a config echo, and SVG plots.

    Returns the written paths. Plots are skipped when there is nothing to
    draw (empty trace list).
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    written: list[Path] = []
    for k, trace in enumerate(traces):
        path = out / f"run_{k:03d}.csv"
        _write_run_csv(path, trace)
        written.append(path)
    path = out / "summary.csv"
    _write_summary_csv(path, summary)
    written.append(path)
    path = out / "config.json"
    payload = config.raw if config.raw is not None else {"optimizer": config.optimizer}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(path)
    if len(summary):
        steps = np.arange(1, len(summary) + 1)
        path = out / "value.svg"
        write_line_plot(
            path,
            steps,
            [Series("time-averaged value", summary.mean_avg_value, summary.std_avg_value)],
            title=f"{config.optimizer}: time-averaged observation value",
            xlabel="step",
            ylabel="avg y",
        )
        written.append(path)
        path = out / "regret.svg"
        write_line_plot(
            path,
            steps,
            [Series("regret", summary.mean_regret, summary.std_regret)],
            title=f"{config.optimizer}: instantaneous regret",
            xlabel="step",
            ylabel="regret",
        )
        written.append(path)
    return written


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------

def _kernel_from_config(cfg: dict) -> KernelSpec:
    cfg = dict(cfg)
    family = cfg.pop("family", "gaussian")
    if "width" in cfg and "variance" in cfg:
        raise ConfigError("kernel config takes width or variance, not both")
    if "variance" in cfg:
        width = float(np.sqrt(float(cfg.pop("variance"))))
    elif "width" in cfg:
        width = float(cfg.pop("width"))
    else:
        raise ConfigError("kernel config requires width or variance")
    if cfg:
        raise ConfigError(f"unknown kernel config keys: {sorted(cfg)}")
    return KernelSpec(family, width)


def _broadcast(value, dimension: int, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.shape == (1,) and dimension > 1:
        arr = np.full(dimension, arr[0])
    if arr.shape != (dimension,):
        raise ConfigError(f"{name} must be a scalar or length-{dimension} list")
    return arr


def _mh_from_config(cfg: dict, dimension: int) -> tuple[MhConfig, np.ndarray, bool]:
    try:
        mh = MhConfig(
            step_variance=float(cfg["step_variance"]),
            burn_in_steps=int(cfg.get("burn_in_steps", 120)),
            seed=int(cfg.get("seed", 0)),
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"invalid mh config: {exc}") from exc
    if "start" not in cfg:
        raise ConfigError("mh config requires a start point")
    start = _broadcast(cfg["start"], dimension, "mh.start")
    return mh, start, bool(cfg.get("restart_chain", False))


def _gp_from_config(cfg: dict, dimension: int) -> GpConfig:
    grid_cfg = cfg.get("grid")
    if grid_cfg is None:
        raise ConfigError("gp config requires a grid")
    if isinstance(grid_cfg, dict):
        if dimension != 1:
            raise ConfigError(
                "grid min/max/points shorthand is one-dimensional; pass an "
                "explicit list of points instead"
            )
        grid = np.linspace(
            float(grid_cfg["min"]), float(grid_cfg["max"]), int(grid_cfg["points"])
        )[:, None]
    else:
        grid = np.asarray(grid_cfg, dtype=float)
        if grid.ndim == 1:
            grid = grid[:, None]
        if grid.ndim != 2 or grid.shape[1] != dimension:
            raise ConfigError(f"grid points must have dimension {dimension}")
    try:
        return GpConfig(
            noise_std=float(cfg.get("noise_std", 0.3)),
            length_scale=float(cfg.get("length_scale", 0.3)),
            delta=float(cfg.get("delta", 0.5)),
            candidate_grid=grid,
        )
    except ValueError as exc:
        raise ConfigError(f"invalid gp config: {exc}") from exc


def experiment_from_config(
    cfg: dict,
    optimizer: str | None = None,
    seed: int | None = None,
    out_dir=None,
    restart_chain: bool | None = None,
) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from a JSON-style dict.

    The keyword arguments override the corresponding config entries (they
    back the CLI flags).
    """
    try:
        obj = objective_from_config(cfg["objective"])
    except KeyError as exc:
        raise ConfigError("config requires an objective block") from exc
    except ValueError as exc:
        raise ConfigError(f"invalid objective: {exc}") from exc

    chosen = optimizer if optimizer is not None else cfg.get("optimizer")
    if chosen is None:
        raise ConfigError("config requires an optimizer")

    prior = kernel = mh = None
    mh_start = None
    restart = False
    model_cfg = cfg.get("model", {})
    if chosen == "argmax_thompson":
        try:
            if "prior" not in model_cfg or "kernel" not in model_cfg:
                raise ConfigError("model config requires prior and kernel blocks")
            prior = prior_from_config(model_cfg["prior"])
            kernel = _kernel_from_config(model_cfg["kernel"])
            if "mh" not in model_cfg:
                raise ConfigError("model config requires an mh block")
            mh, mh_start, restart = _mh_from_config(model_cfg["mh"], obj.dimension)
        except (KeyError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"invalid model config: {exc}") from exc
    if restart_chain is not None:
        restart = restart_chain

    gp = None
    if chosen == "gp_ucb":
        if "gp" not in cfg:
            raise ConfigError("gp_ucb requires a gp block")
        gp = _gp_from_config(cfg["gp"], obj.dimension)

    box = None
    if chosen == "random_search":
        if "search_box" not in cfg:
            raise ConfigError("random_search requires a search_box block")
        box_cfg = cfg["search_box"]
        lo = _broadcast(box_cfg["min"], obj.dimension, "search_box.min")
        hi = _broadcast(box_cfg["max"], obj.dimension, "search_box.max")
        if not (lo < hi).all():
            raise ConfigError("search_box requires min < max per coordinate")
        box = (lo, hi)

    base_seed = int(seed if seed is not None else cfg.get("base_seed", 0))
    out = out_dir if out_dir is not None else cfg.get("out")
    raw = dict(cfg)
    raw["optimizer"] = chosen
    raw["base_seed"] = base_seed
    try:
        return ExperimentConfig(
            objective=obj,
            optimizer=chosen,
            steps=int(cfg.get("steps", 1)),
            runs=int(cfg.get("runs", 1)),
            base_seed=base_seed,
            out_dir=Path(out) if out is not None else None,
            prior=prior,
            kernel=kernel,
            mh=mh,
            mh_start=mh_start,
            restart_chain=restart,
            gp=gp,
            search_box=box,
            raw=raw,
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Canned configurations
# ---------------------------------------------------------------------------

def compare_defaults() -> dict:
    """Default head-to-head setup: the 1-d trigonometric objective with unit
    noise variance, the posterior sampler with kernel variance 0.05 and
    rho=0.3, and the GP baseline with noise_std=0.3, length_scale=0.3,
    delta=0.5 on a 1000-point grid over [-1, 3].

    The sampler's chain parameters (step variance, 120 steps per sample,
    start at the prior mean 1.5) are this artifact's defaults; see README.
    """
    return {
        "objective": {"family": "trig1d", "noise_variance": 1.0},
        "steps": 200,
        "runs": 10,
        "base_seed": 0,
        "model": {
            "kernel": {"family": "gaussian", "variance": 0.05},
            "prior": {
                "xi": 1.0,
                "rho": 0.3,
                "k0": {"kind": "constant", "value": 1.0},
                "y0": {"kind": "log_gaussian", "mean": 1.5, "variance": 5.0},
            },
            "mh": {"step_variance": 0.25, "burn_in_steps": 120, "start": 1.5},
        },
        "gp": {
            "noise_std": 0.3,
            "length_scale": 0.3,
            "delta": 0.5,
            "grid": {"min": -1.0, "max": 3.0, "points": 1000},
        },
    }


def ripples50_config(steps: int = 1000, runs: int = 1, base_seed: int = 0) -> dict:
    """The canned 50-dimensional Noisy Ripples experiment: chain started at
    [20, ..., 20] running 120 steps of variance 0.07 per sample, kernel
    width 2, rho=1.5, constant prior precision 1, quadratic prior mean
    estimate peaking at [-5, ..., -5], goal at the origin, noise variance
    0.1."""
    return {
        "objective": {
            "family": "noisy_ripples",
            "dimension": 50,
            "mu": 0.0,
            "noise_variance": 0.1,
        },
        "optimizer": "argmax_thompson",
        "steps": steps,
        "runs": runs,
        "base_seed": base_seed,
        "model": {
            "kernel": {"family": "gaussian", "width": 2.0},
            "prior": {
                "xi": 1.0,
                "rho": 1.5,
                "k0": {"kind": "constant", "value": 1.0},
                "y0": {"kind": "quadratic", "center": -5.0, "scale": 0.002},
            },
            "mh": {"step_variance": 0.07, "burn_in_steps": 120, "start": 20.0},
        },
    }


def _merge(base: dict, override: dict) -> dict:
    merged = dict(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], val)
        else:
            merged[key] = val
    return merged


@dataclass(frozen=True)
class CompareResult:
    thompson_traces: list[RunTrace]
    thompson_summary: Summary
    gp_traces: list[RunTrace]
    gp_summary: Summary


def run_compare(cfg: dict, seed: int | None = None, out_dir=None) -> CompareResult:
    """Run the posterior sampler and GP-UCB on the same objective and seeds.

    Missing config entries fall back to :func:`compare_defaults`. When
    ``out_dir`` is set, each method's standard outputs land in a
    subdirectory, plus a joint summary CSV and overlay plot.
    """
    merged = _merge(compare_defaults(), cfg)
    out = Path(out_dir) if out_dir is not None else None
    cfg_thompson = experiment_from_config(
        merged,
        optimizer="argmax_thompson",
        seed=seed,
        out_dir=(out / "argmax_thompson") if out else None,
    )
    cfg_gp = experiment_from_config(
        merged,
        optimizer="gp_ucb",
        seed=seed,
        out_dir=(out / "gp_ucb") if out else None,
    )
    traces_t = run_experiment(cfg_thompson)
    traces_g = run_experiment(cfg_gp)
    summary_t = aggregate(traces_t)
    summary_g = aggregate(traces_g)
    if out is not None:
        with open(out / "compare_summary.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(
                [
                    "step",
                    "thompson_mean_avg_y",
                    "thompson_std_avg_y",
                    "gp_ucb_mean_avg_y",
                    "gp_ucb_std_avg_y",
                ]
            )
            for i in range(len(summary_t)):
                writer.writerow(
                    [
                        i + 1,
                        _fmt(summary_t.mean_avg_value[i]),
                        _fmt(summary_t.std_avg_value[i]),
                        _fmt(summary_g.mean_avg_value[i]),
                        _fmt(summary_g.std_avg_value[i]),
                    ]
                )
        steps = np.arange(1, len(summary_t) + 1)
        write_line_plot(
            out / "compare.svg",
            steps,
            [
                Series("argmax_thompson", summary_t.mean_avg_value, summary_t.std_avg_value),
                Series("gp_ucb", summary_g.mean_avg_value, summary_g.std_avg_value),
            ],
            title="time-averaged observation value, mean over runs",
            xlabel="step",
            ylabel="avg y",
        )
    return CompareResult(traces_t, summary_t, traces_g, summary_g)
