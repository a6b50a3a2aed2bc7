"""Log-distance path loss with Gaussian shadowing: coverage contours and RSS traces."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.stats import norm

from .csvio import write_csv
from .errors import NoContourError


@dataclass(frozen=True)
class PathLossModel:
    """Link budget parameters.  Defaults are generic indoor WLAN values, not measured data."""

    pl_d0: float = 40.0
    d0: float = 1.0
    beta: float = 3.5
    sigma_sh: float = 6.0
    tx_power: float = 20.0
    sensitivity: float = -90.0

    def __post_init__(self):
        if not self.d0 > 0:
            raise ValueError(f"d0 must be positive, got {self.d0}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if not self.sigma_sh >= 0:
            raise ValueError(f"sigma_sh must be non-negative, got {self.sigma_sh}")


def _check_distance(model: PathLossModel, d) -> np.ndarray:
    arr = np.asarray(d, dtype=float)
    if np.any(arr < model.d0):
        raise ValueError(f"distance must be at least d0={model.d0} m")
    return arr


def mean_rss(model: PathLossModel, d):
    """Median received power in dBm at distance ``d``."""
    arr = _check_distance(model, d)
    rss = model.tx_power - (model.pl_d0 + 10.0 * model.beta * np.log10(arr / model.d0))
    return float(rss) if rss.ndim == 0 else rss


def coverage_probability(model: PathLossModel, d):
    """P(mean RSS + shadowing >= sensitivity) at distance ``d``."""
    margin = np.asarray(mean_rss(model, d)) - model.sensitivity
    if model.sigma_sh == 0:
        p = np.where(margin >= 0, 1.0, 0.0)
    else:
        p = norm.cdf(margin / model.sigma_sh)
    return float(p) if p.ndim == 0 else p


def contour_radius(model: PathLossModel, p: float) -> float:
    """Distance at which the coverage probability equals ``p``."""
    if not 0 < p < 1:
        raise ValueError(f"coverage probability must lie in (0, 1), got {p}")
    if model.sigma_sh == 0 and p != 0.5:
        raise ValueError("without shadowing only the p = 0.5 contour is defined")
    target_rss = model.sensitivity + model.sigma_sh * norm.ppf(p)
    exponent = (model.tx_power - model.pl_d0 - target_rss) / (10.0 * model.beta)
    d = model.d0 * 10.0**exponent
    if d < model.d0:
        raise NoContourError(
            f"the {p:g} contour lies at {d:.6g} m, inside the reference distance d0={model.d0} m",
            param="p",
        )
    return float(d)


def rss_trace_along_contour(model: PathLossModel, p: float, n_points: int,
                            rng: np.random.Generator) -> list[tuple[float, float]]:
    """Shadowed RSS samples at evenly spaced angles on the ``p`` contour."""
    if n_points < 1:
        raise ValueError(f"n_points must be at least 1, got {n_points}")
    d = contour_radius(model, p)
    base = mean_rss(model, d)
    shadow = rng.normal(0.0, 1.0, n_points) * model.sigma_sh
    angles = 2.0 * math.pi * np.arange(n_points) / n_points
    return [(float(a), float(base + s)) for a, s in zip(angles, shadow)]


def write_trace_csv(path: str | Path, trace: Sequence[tuple[float, float]]) -> None:
    write_csv(path, ["angle_rad", "rss_dbm"], trace)


def write_contour_csv(path: str | Path, contours: Sequence[tuple[float, float]]) -> None:
    write_csv(path, ["p", "contour_radius_m"], contours)
