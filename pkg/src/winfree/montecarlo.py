"""Seeded Monte Carlo estimators for the probabilities bounded in closed form.

Every sample k draws its own RNG stream from (seed, k), so estimates are
bit-identical regardless of worker count or scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import integrate, model
from .errors import ConfigurationError, DomainError, IntegrationFailure
from .integrate import SolverOptions
from .model import InteractionSpec, SystemConfig


@dataclass(frozen=True)
class McConfig:
    samples: int
    seed: int
    workers: int = 1

    def __post_init__(self):
        if self.samples < 1:
            raise ConfigurationError("samples must be >= 1")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class EstimateCI:
    estimate: float
    std_error: float
    count: int


def _estimate(successes: int, count: int) -> EstimateCI:
    est = successes / count
    return EstimateCI(
        estimate=est, std_error=math.sqrt(est * (1.0 - est) / count), count=count
    )


def _draw(seed: int, k: int, n: int) -> np.ndarray:
    return np.random.default_rng((seed, k)).uniform(-np.pi, np.pi, n)


def sample_uniform_initial(n: int, mc: McConfig) -> np.ndarray:
    """Deterministic uniform draws on [-pi, pi)^n, one row per sample."""
    if n < 1:
        raise DomainError("n must be >= 1")
    out = np.empty((mc.samples, n))
    for k in range(mc.samples):
        out[k] = _draw(mc.seed, k, n)
    return out


def _chunks(total: int, workers: int) -> list[tuple[int, int]]:
    size = max(1, -(-total // workers))
    return [(a, min(a + size, total)) for a in range(0, total, size)]


def _run_chunk(fn, args, chunk):
    return [fn(*args, k) for k in range(chunk[0], chunk[1])]


def _map_samples(fn, args, mc: McConfig) -> list[bool]:
    if mc.workers == 1:
        return [fn(*args, k) for k in range(mc.samples)]
    results: list[Optional[list[bool]]] = []
    chunks = _chunks(mc.samples, mc.workers)
    with ProcessPoolExecutor(max_workers=mc.workers) as pool:
        futures = [pool.submit(_run_chunk, fn, args, ch) for ch in chunks]
        results = [f.result() for f in futures]
    merged: list[bool] = []
    for part in results:
        merged.extend(part)
    return merged


def _cdf_sample(spec: InteractionSpec, n: int, t_level: float, seed: int, k: int) -> bool:
    return model.order_parameter(spec, _draw(seed, k, n)) <= t_level


def empirical_order_param_cdf(n: int, t_level: float, mc: McConfig) -> EstimateCI:
    """Fraction of uniform initial states with R0 <= t_level (sinusoidal)."""
    if not 0.0 < t_level <= 2.0:
        raise DomainError("t_level must lie in (0, 2]")
    spec = model.sinusoidal()
    hits = _map_samples(_cdf_sample, (spec, n, t_level, mc.seed), mc)
    return _estimate(sum(hits), mc.samples)


def _death_sample(
    config: SystemConfig,
    spec: InteractionSpec,
    opts: SolverOptions,
    r_floor: float,
    window_start: float,
    seed: int,
    k: int,
) -> bool:
    theta0 = _draw(seed, k, config.n)
    try:
        traj = integrate.simulate(config, spec, theta0, opts)
    except IntegrationFailure:
        return False
    flags = integrate.detect_death(traj, window_start)
    return bool(np.all(flags)) and float(traj.r_series[-1]) >= r_floor


def empirical_death_probability(
    config: SystemConfig,
    spec: InteractionSpec,
    opts: SolverOptions,
    mc: McConfig,
    r_floor: float = 0.0,
    window_start: float = 0.0,
) -> EstimateCI:
    """Fraction of seeded uniform initial data exhibiting all-oscillator death.

    A sample counts when every unwrapped phase stays within a 2*pi band over
    the window and the final order parameter clears r_floor.  Integration
    failures count as non-death (conservative).
    """
    hits = _map_samples(
        _death_sample, (config, spec, opts, r_floor, window_start, mc.seed), mc
    )
    return _estimate(sum(hits), mc.samples)


def _escape_sample(
    config: SystemConfig,
    spec: InteractionSpec,
    opts: SolverOptions,
    delta: float,
    seed: int,
    k: int,
) -> bool:
    theta0 = _draw(seed, k, config.n)
    level = 1.0 - delta

    def reached(t, theta):
        return float(np.mean(model.influence(spec, theta))) >= level

    try:
        traj = integrate.simulate(config, spec, theta0, opts, stop_condition=reached)
    except IntegrationFailure:
        return False
    return bool(np.all(traj.r_series < level)) and traj.times[-1] >= opts.horizon - 1e-9


def estimate_escape_measure(
    config: SystemConfig,
    spec: InteractionSpec,
    delta: float,
    t_horizon: float,
    opts: SolverOptions,
    mc: McConfig,
) -> EstimateCI:
    """Fraction of samples with R(t) < 1-delta at every sample time in [0, T].

    The continuous-time event is approximated at the solver output stride.
    """
    if not 0.0 < delta < 1.0:
        raise DomainError("delta must lie in (0, 1)")
    if config.n < 2:
        raise DomainError("requires N >= 2")
    if config.kappa <= 0:
        raise DomainError("requires kappa > 0")
    run_opts = replace(opts, horizon=t_horizon, sample_stride=min(opts.sample_stride, t_horizon))
    hits = _map_samples(_escape_sample, (config, spec, run_opts, delta, mc.seed), mc)
    return _estimate(sum(hits), mc.samples)


def result_json_dict(kind: str, params: dict, est: EstimateCI, bound: Optional[float]) -> dict:
    """Serializable record comparing an estimate against its closed-form bound."""
    dominated = None if bound is None else bool(est.estimate <= bound + 3.0 * est.std_error)
    return {
        "kind": kind,
        "params": params,
        "estimate": est.estimate,
        "std_error": est.std_error,
        "bound": bound,
        "dominated": dominated,
    }
