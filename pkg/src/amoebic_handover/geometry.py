"""Stochastic cell geometry: radii, traverse angles, chords and their inverse."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .csvio import write_csv
from .errors import OutOfSupportError

# Slack allowed on the arccos argument before a time counts as off-support.
ARCCOS_TOL = 1e-9


@dataclass(frozen=True)
class CellRadiusModel:
    """Gaussian cell radius, truncated to positive values when sampled."""

    mu_r: float
    sigma_r: float

    def __post_init__(self):
        if not self.mu_r > 0:
            raise ValueError(f"mu_r must be positive, got {self.mu_r}")
        if not self.sigma_r >= 0:
            raise ValueError(f"sigma_r must be non-negative, got {self.sigma_r}")
        if self.mu_r - 4 * self.sigma_r <= 0:
            raise ValueError(
                f"mu_r - 4*sigma_r must stay positive "
                f"(mu_r={self.mu_r}, sigma_r={self.sigma_r})"
            )


@dataclass(frozen=True)
class TraversalGeometry:
    """One crossing of the cell: entry radius, exit radius and the angle between them."""

    r1: float
    r2: float
    theta: float

    def __post_init__(self):
        if not (self.r1 > 0 and self.r2 > 0):
            raise ValueError(f"radii must be positive, got r1={self.r1}, r2={self.r2}")
        if not 0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")


@dataclass(frozen=True)
class TimeSupport:
    t_min: float
    t_max: float

    def __post_init__(self):
        if not 0 <= self.t_min <= self.t_max:
            raise ValueError(f"invalid time support [{self.t_min}, {self.t_max}]")


def sample_radii(model: CellRadiusModel, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``size`` radii from the positive-truncated Gaussian by rejection."""
    if model.sigma_r == 0:
        return np.full(size, float(model.mu_r))
    out = rng.normal(model.mu_r, model.sigma_r, size)
    bad = out <= 0
    while bad.any():
        out[bad] = rng.normal(model.mu_r, model.sigma_r, int(bad.sum()))
        bad = out <= 0
    return out


def sample_radius(model: CellRadiusModel, rng: np.random.Generator) -> float:
    return float(sample_radii(model, 1, rng)[0])


def theta_from_uniform(u):
    """Inverse of the traverse-angle CDF, ``pi * (1 - sqrt(1 - u))``."""
    return math.pi * (1.0 - np.sqrt(1.0 - np.asarray(u, dtype=float)))


def sample_thetas(size: int, rng: np.random.Generator) -> np.ndarray:
    return theta_from_uniform(rng.random(size))


def sample_theta(rng: np.random.Generator) -> float:
    """Draw a traverse angle with density ``2 (pi - theta) / pi**2`` on [0, pi]."""
    return float(theta_from_uniform(rng.random()))


def chord_length(g: TraversalGeometry) -> float:
    """Straight-line distance between the entry and exit points (law of cosines).

    Evaluated as ``sqrt((r1 - r2)**2 + 4 r1 r2 sin(theta/2)**2)``, which is the
    same quantity without the cancellation near ``theta = 0``.
    """
    return float(chord_lengths(g.r1, g.r2, g.theta))


def chord_lengths(r1, r2, theta):
    """Vectorised chord length for arrays of radii and angles."""
    s = np.sin(np.asarray(theta, dtype=float) / 2.0)
    return np.sqrt((r1 - r2) ** 2 + 4.0 * r1 * r2 * s * s)


def traversal_time(D: float, v: float) -> float:
    if not v > 0:
        raise ValueError(f"velocity must be positive, got {v}")
    if D < 0:
        raise ValueError(f"chord length must be non-negative, got {D}")
    return D / v


def time_support(r1: float, r2: float, v: float) -> TimeSupport:
    if not v > 0:
        raise ValueError(f"velocity must be positive, got {v}")
    if not (r1 > 0 and r2 > 0):
        raise ValueError(f"radii must be positive, got r1={r1}, r2={r2}")
    return TimeSupport(abs(r1 - r2) / v, (r1 + r2) / v)


def cos_argument(r1, r2, v, t):
    """Raw arccos argument ``(r1^2 + r2^2 - t^2 v^2) / (2 r1 r2)``."""
    tv = np.asarray(t, dtype=float) * v
    return (r1 * r1 + r2 * r2 - tv * tv) / (2.0 * r1 * r2)


def angle_at_time(r1, r2, v, t):
    """Traverse angle whose chord takes time ``t``, clamped onto [0, pi].

    Times below the support map to 0 and times above it map to pi.  Uses the
    half-angle form ``2 atan2(sqrt(d^2 - (r1-r2)^2), sqrt((r1+r2)^2 - d^2))``
    with ``d = v t``, which equals ``arccos`` of the cosine-rule argument but
    stays accurate at both ends of the support.
    """
    d = np.asarray(t, dtype=float) * v
    lo = abs(r1 - r2)
    hi = r1 + r2
    below = np.maximum((d - lo) * (d + lo), 0.0)
    above = np.maximum((hi - d) * (hi + d), 0.0)
    return 2.0 * np.arctan2(np.sqrt(below), np.sqrt(above))


def theta_from_time(r1: float, r2: float, v: float, t: float) -> float:
    """Invert the chord-time map: the angle at which the crossing lasts ``t`` seconds.

    Raises OutOfSupportError when ``t`` lies outside ``[|r1-r2|/v, (r1+r2)/v]``
    by more than the clamping tolerance on the arccos argument.
    """
    if not (r1 > 0 and r2 > 0 and v > 0):
        raise ValueError("r1, r2 and v must be positive")
    c = float(cos_argument(r1, r2, v, t))
    if c > 1.0 + ARCCOS_TOL or c < -1.0 - ARCCOS_TOL:
        sup = time_support(r1, r2, v)
        raise OutOfSupportError(
            f"t={t} outside time support [{sup.t_min}, {sup.t_max}] "
            f"(arccos argument {c})"
        )
    return float(angle_at_time(r1, r2, v, t))


def generate_boundary(
    model: CellRadiusModel,
    n_points: int,
    smoothing: int,
    rng: np.random.Generator,
) -> list[tuple[float, float]]:
    """Sample an irregular closed cell boundary as ``(angle, radius)`` pairs.

    Radii are independent truncated-Gaussian draws at evenly spaced angles,
    then averaged over a circular window of ``smoothing`` points (0 or 1
    leaves them untouched).
    """
    if n_points < 8:
        raise ValueError(f"n_points must be at least 8, got {n_points}")
    if not 0 <= smoothing < n_points:
        raise ValueError(f"smoothing must lie in [0, n_points), got {smoothing}")
    radii = sample_radii(model, n_points, rng)
    if smoothing > 1:
        offset = (smoothing - 1) // 2
        shifted = [np.roll(radii, offset - k) for k in range(smoothing)]
        radii = np.mean(shifted, axis=0)
    angles = 2.0 * math.pi * np.arange(n_points) / n_points
    return [(float(a), float(r)) for a, r in zip(angles, radii)]


def write_boundary_csv(path: str | Path, boundary: list[tuple[float, float]]) -> None:
    write_csv(path, ["angle_rad", "radius_m"], boundary)

