"""Monte-Carlo engine: validates the closed-form model and produces velocity sweeps.

Trials are split into fixed-size blocks and every block draws from its own
stream, seeded from ``(seed, block_index)``.  Aggregation only sums integer
counters, so output is bit-identical for any worker count.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .analytic import (
    HandoverTiming,
    ProbabilityTargets,
    Thresholds,
    compute_thresholds,
    prob_failure,
    prob_unnecessary,
)
from .csvio import write_csv
from .geometry import (
    CellRadiusModel,
    TraversalGeometry,
    chord_lengths,
    sample_radii,
    sample_thetas,
)

BLOCK_SIZE = 1 << 16

SWEEP_HEADER = [
    "velocity_mps", "n_threshold_s", "m_threshold_s", "pu_analytic", "pu_empirical",
    "se_pu", "pf_analytic", "pf_empirical", "se_pf",
]


class RadiusMode(str, enum.Enum):
    FIXED = "fixed"
    RESAMPLED = "resampled"


class VelocityMode(str, enum.Enum):
    GRID = "grid"
    SAMPLED = "sampled"


@dataclass(frozen=True)
class SimConfig:
    radius_model: CellRadiusModel
    timing: HandoverTiming
    targets: ProbabilityTargets
    velocity_grid: tuple[float, ...] = (5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    iterations: int = 1_000_000
    seed: int = 0
    v_min: float = 5.0
    v_max: float = 30.0
    radius_mode: RadiusMode = RadiusMode.RESAMPLED
    velocity_mode: VelocityMode = VelocityMode.GRID

    def __post_init__(self):
        object.__setattr__(self, "velocity_grid", tuple(float(v) for v in self.velocity_grid))
        object.__setattr__(self, "radius_mode", RadiusMode(self.radius_mode))
        object.__setattr__(self, "velocity_mode", VelocityMode(self.velocity_mode))
        if self.iterations < 1:
            raise ValueError(f"iterations must be at least 1, got {self.iterations}")
        if any(not v > 0 for v in self.velocity_grid):
            raise ValueError(f"velocity grid values must be positive, got {self.velocity_grid}")
        if not 0 < self.v_min <= self.v_max:
            raise ValueError(f"need 0 < v_min <= v_max, got [{self.v_min}, {self.v_max}]")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass(frozen=True)
class TrialOutcome:
    geometry: TraversalGeometry
    velocity: float
    dwell: float
    initiated: bool
    unnecessary: bool
    failed: bool


@dataclass(frozen=True)
class SweepPoint:
    velocity: float
    n_threshold: float
    m_threshold: float
    p_u_analytic: float
    p_f_analytic: float
    p_u_empirical: float
    p_f_empirical: float
    se_pu: float
    se_pf: float
    trials: int = 0
    # failures counted among initiated trials (T <= tau_a and T > max(N, M))
    p_f_initiated: float = 0.0
    counts: dict = field(default_factory=dict, compare=True)

    def csv_row(self) -> list[float]:
        return [
            self.velocity, self.n_threshold, self.m_threshold, self.p_u_analytic,
            self.p_u_empirical, self.se_pu, self.p_f_analytic, self.p_f_empirical, self.se_pf,
        ]


def block_rng(seed: int, block_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block_index,))))


def empirical_expectation(g: Callable, model: CellRadiusModel, n: int,
                          rng: np.random.Generator) -> float:
    """Sample mean of ``g(R)`` over ``n`` truncated-Gaussian radius draws."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    radii = sample_radii(model, n, rng)
    try:
        vals = np.asarray(g(radii), dtype=float)
    except TypeError:
        vals = None
    if vals is None or vals.shape != radii.shape:
        vals = np.fromiter((g(r) for r in radii), dtype=float, count=n)
    return float(vals.mean())


def sample_dwell_times(r1: float, r2: float, v: float, n: int,
                       rng: np.random.Generator) -> np.ndarray:
    """Dwell times for fixed radii with the traverse angle drawn by inverse CDF."""
    return chord_lengths(r1, r2, sample_thetas(n, rng)) / v


def _trial_radii(config: SimConfig, n: int, rng: np.random.Generator):
    if config.radius_mode is RadiusMode.FIXED:
        mu = config.radius_model.mu_r
        return np.full(n, mu), np.full(n, mu)
    return sample_radii(config.radius_model, n, rng), sample_radii(config.radius_model, n, rng)


def run_trial(config: SimConfig, v: float, thresholds: Thresholds,
              rng: np.random.Generator) -> TrialOutcome:
    """Simulate one crossing with independent uniform entry and exit angles on [0, pi]."""
    if not v > 0:
        raise ValueError(f"velocity must be positive, got {v}")
    theta_a, theta_d = rng.uniform(0.0, math.pi, 2)
    theta = abs(theta_d - theta_a)
    r1, r2 = (float(r[0]) for r in _trial_radii(config, 1, rng))
    dwell = float(chord_lengths(r1, r2, theta)) / v
    initiated = dwell > thresholds.effective
    return TrialOutcome(
        geometry=TraversalGeometry(r1, r2, float(theta)),
        velocity=v,
        dwell=dwell,
        initiated=initiated,
        unnecessary=initiated and dwell <= config.timing.tau_t,
        failed=dwell <= config.timing.tau_a,
    )


def sample_trials(config: SimConfig, v: float, n: int,
                  rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Vectorised trial draws: angles, radii, speeds and dwell times."""
    theta = np.abs(rng.uniform(0.0, math.pi, n) - rng.uniform(0.0, math.pi, n))
    r1, r2 = _trial_radii(config, n, rng)
    if config.velocity_mode is VelocityMode.SAMPLED:
        speed = rng.uniform(config.v_min, config.v_max, n)
    else:
        speed = np.full(n, float(v))
    dwell = chord_lengths(r1, r2, theta) / speed
    return {"theta": theta, "r1": r1, "r2": r2, "speed": speed, "dwell": dwell}


def _simulate_block(config: SimConfig, v: float, thresholds: Thresholds,
                    block_index: int, n: int) -> np.ndarray:
    dwell = sample_trials(config, v, n, block_rng(config.seed, block_index))["dwell"]
    tau_a, tau_t = config.timing.tau_a, config.timing.tau_t
    initiated = dwell > thresholds.effective
    short_a = dwell <= tau_a
    return np.array([
        n,
        np.count_nonzero(initiated),
        np.count_nonzero(initiated & (dwell <= tau_t)),
        np.count_nonzero(initiated & short_a),
        np.count_nonzero(short_a & (dwell > thresholds.m_threshold)),
        np.count_nonzero(short_a),
    ], dtype=np.int64)


def simulate_counts(config: SimConfig, v: float, thresholds: Thresholds,
                    workers: int | None = None) -> dict[str, int]:
    """Run ``config.iterations`` trials in deterministic blocks and total the counters."""
    n_blocks, rem = divmod(config.iterations, BLOCK_SIZE)
    sizes = [BLOCK_SIZE] * n_blocks + ([rem] if rem else [])
    workers = workers or os.cpu_count() or 1

    def job(i):
        return _simulate_block(config, v, thresholds, i, sizes[i])

    if workers == 1 or len(sizes) == 1:
        parts = [job(i) for i in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(len(sizes))))
    total = np.sum(parts, axis=0)
    keys = ("trials", "initiated", "unnecessary", "failed_initiated", "failed", "short_a")
    return {k: int(x) for k, x in zip(keys, total)}


def _binomial(k: int, n: int) -> tuple[float, float]:
    p = k / n
    return p, math.sqrt(p * (1.0 - p) / n)


def design_thresholds(config: SimConfig, v: float) -> Thresholds:
    """Thresholds from the closed-form model with both radii at the mean radius."""
    mu = config.radius_model.mu_r
    return compute_thresholds(config.targets, config.timing, mu, mu, v)


def _analytic(config: SimConfig, v: float, thr: Thresholds) -> tuple[float, float]:
    mu = config.radius_model.mu_r
    timing = config.timing

    def pu(s):
        return prob_unnecessary(min(thr.effective, timing.tau_t), timing, mu, mu, s)

    def pf(s):
        return prob_failure(min(thr.m_threshold, timing.tau_a), timing, mu, mu, s)

    if config.velocity_mode is VelocityMode.SAMPLED and config.v_max > config.v_min:
        width = config.v_max - config.v_min
        return tuple(
            integrate.quad(f, config.v_min, config.v_max, limit=200)[0] / width for f in (pu, pf)
        )
    return pu(v), pf(v)


def estimate_point(config: SimConfig, v: float, thresholds: Thresholds | None = None,
                   workers: int | None = None) -> SweepPoint:
    """Empirical and closed-form P_u, P_f at speed ``v``.

    Without explicit ``thresholds`` they are designed at ``v`` itself.  In
    sampled-velocity mode each trial draws its own speed and the analytic
    values are averaged over ``[v_min, v_max]``.
    """
    if not v > 0:
        raise ValueError(f"velocity must be positive, got {v}")
    thr = thresholds if thresholds is not None else design_thresholds(config, v)
    c = simulate_counts(config, v, thr, workers)
    n = c["trials"]
    p_u, se_pu = _binomial(c["unnecessary"], n)
    p_f, se_pf = _binomial(c["failed"], n)
    pu_a, pf_a = _analytic(config, v, thr)
    velocity = v
    if config.velocity_mode is VelocityMode.SAMPLED:
        velocity = 0.5 * (config.v_min + config.v_max)
    return SweepPoint(
        velocity=velocity,
        n_threshold=thr.n_threshold,
        m_threshold=thr.m_threshold,
        p_u_analytic=pu_a,
        p_f_analytic=pf_a,
        p_u_empirical=p_u,
        p_f_empirical=p_f,
        se_pu=se_pu,
        se_pf=se_pf,
        trials=n,
        p_f_initiated=c["failed_initiated"] / n,
        counts=c,
    )


def sweep_velocity(config: SimConfig, workers: int | None = None) -> list[SweepPoint]:
    """Hold thresholds at the first grid velocity and evaluate every grid velocity.

    Sampled-velocity mode yields a single aggregate point.
    """
    if not config.velocity_grid:
        raise ValueError("velocity grid must not be empty")
    v0 = config.velocity_grid[0]
    thr = design_thresholds(config, v0)
    if config.velocity_mode is VelocityMode.SAMPLED:
        return [estimate_point(config, v0, thr, workers)]
    return [estimate_point(config, v, thr, workers) for v in sorted(config.velocity_grid)]


def ks_statistic(samples: Sequence[float], cdf: Callable) -> float:
    """Kolmogorov-Smirnov distance between sorted ``samples`` and ``cdf``."""
    x = np.asarray(samples, dtype=float)
    n = x.size
    if n == 0:
        raise ValueError("ks_statistic needs at least one sample")
    if np.any(np.diff(x) < 0):
        raise ValueError("samples must be sorted ascending")
    f = np.asarray(cdf(x), dtype=float)
    if f.shape != x.shape:
        f = np.fromiter((cdf(xi) for xi in x), dtype=float, count=n)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def write_sweep_csv(path: str | Path, points: Sequence[SweepPoint]) -> None:
    write_csv(path, SWEEP_HEADER, [p.csv_row() for p in points])
