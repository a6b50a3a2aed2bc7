"""Time thresholds of earlier circular-cell models, for side-by-side comparison."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

from .analytic import Thresholds
from .csvio import write_csv
from .errors import DomainError, ModelError
from .montecarlo import SimConfig, _binomial, design_thresholds, simulate_counts

MODELS = ("proposed", "yan", "hussain")
COMPARE_HEADER = ["velocity_mps", "model", "threshold_s", "pu_empirical", "se_pu"]


@dataclass(frozen=True)
class BaselineParams:
    """Deterministic circular cell of radius ``radius`` crossed at ``velocity``."""

    radius: float
    velocity: float
    tau: float
    p_target: float

    def __post_init__(self):
        if not (self.radius > 0 and self.velocity > 0 and self.tau > 0):
            raise ValueError("radius, velocity and tau must be positive")
        if not 0 <= self.p_target <= 1:
            raise ValueError(f"p_target must lie in [0, 1], got {self.p_target}")

    @property
    def ratio(self) -> float:
        return self.velocity * self.tau / (2.0 * self.radius)


def yan_threshold(p: BaselineParams, literal: bool = False) -> float:
    """``(2R/v) sin(arcsin(v tau / 2R) - pi P / 2)``, clamped at zero.

    ``literal=True`` moves the offset inside the arcsin,
    ``(2R/v) sin(arcsin(v tau / 2R - pi P / 2))``.
    """
    x = p.ratio
    if x > 1:
        raise DomainError(f"v*tau/(2R) = {x:.6g} exceeds 1; no real threshold", param="velocity")
    scale = 2.0 * p.radius / p.velocity
    if literal:
        arg = x - 0.5 * math.pi * p.p_target
        if arg < -1:
            return 0.0
        return max(scale * math.sin(math.asin(arg)), 0.0)
    return max(scale * math.sin(math.asin(x) - 0.5 * math.pi * p.p_target), 0.0)


def hussain_threshold(p: BaselineParams) -> float:
    vt = p.velocity * p.tau
    if vt >= 2.0 * p.radius:
        raise DomainError(f"v*tau = {vt:.6g} must be below 2R = {2 * p.radius:.6g}", param="velocity")
    k = math.tan(math.atan(vt / math.sqrt(4.0 * p.radius**2 - vt * vt)) - p.p_target * math.pi / 2)
    if k <= 0:
        return 0.0
    return 2.0 * p.radius * k / (p.velocity * math.sqrt(1.0 + k * k))


@dataclass(frozen=True)
class ComparisonRow:
    velocity: float
    model: str
    threshold: float | None
    pu_empirical: float | None
    se_pu: float | None
    error: str | None = None

    def csv_row(self) -> list:
        return [self.velocity, self.model, self.threshold, self.pu_empirical, self.se_pu]


def compare_models(config: SimConfig, workers: int | None = None) -> list[ComparisonRow]:
    """Threshold and empirical P_u of each model at every grid velocity.

    Every model is simulated on the same random streams, so rows within one
    velocity differ only through their thresholds.  Model errors become rows
    with empty values.
    """
    tau = config.timing.tau_t
    p = config.targets.p_u_target
    cfg = replace(config, velocity_mode="grid")
    rows = []
    for v in sorted(config.velocity_grid):
        for model in MODELS:
            try:
                if model == "proposed":
                    thr = design_thresholds(cfg, v)
                    value = thr.n_threshold
                else:
                    bp = BaselineParams(config.radius_model.mu_r, v, tau, p)
                    value = yan_threshold(bp) if model == "yan" else hussain_threshold(bp)
                    thr = Thresholds(value, 0.0)
            except ModelError as exc:
                rows.append(ComparisonRow(v, model, None, None, None, str(exc)))
                continue
            c = simulate_counts(cfg, v, thr, workers)
            pu, se = _binomial(c["unnecessary"], c["trials"])
            rows.append(ComparisonRow(v, model, value, pu, se))
    return rows


def write_comparison_csv(path: str | Path, rows: Sequence[ComparisonRow]) -> None:
    write_csv(path, COMPARE_HEADER, [r.csv_row() for r in rows])
