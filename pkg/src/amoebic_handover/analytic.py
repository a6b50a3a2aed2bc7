"""Closed-form dwell-time model: distributions, handover probabilities and thresholds."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import UnachievableError
from .geometry import angle_at_time, chord_lengths, time_support

PI2 = math.pi * math.pi


@dataclass(frozen=True)
class HandoverTiming:
    """Handover latencies into (``tau_a``) and out of (``tau_d``) the WLAN cell, seconds."""

    tau_a: float
    tau_d: float

    def __post_init__(self):
        if not (self.tau_a > 0 and self.tau_d > 0):
            raise ValueError(
                f"handover latencies must be positive (tau_a={self.tau_a}, tau_d={self.tau_d})"
            )

    @property
    def tau_t(self) -> float:
        return self.tau_a + self.tau_d


@dataclass(frozen=True)
class ProbabilityTargets:
    p_u_target: float
    p_f_target: float

    def __post_init__(self):
        for name in ("p_u_target", "p_f_target"):
            p = getattr(self, name)
            if not 0 <= p <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")


@dataclass(frozen=True)
class Thresholds:
    """Minimum predicted dwell times (seconds) guarding unnecessary handover and failure."""

    n_threshold: float
    m_threshold: float

    def __post_init__(self):
        if not (self.n_threshold >= 0 and self.m_threshold >= 0):
            raise ValueError(
                f"thresholds must be non-negative (N={self.n_threshold}, M={self.m_threshold})"
            )

    @property
    def effective(self) -> float:
        return max(self.n_threshold, self.m_threshold)


class Decision(enum.Enum):
    INITIATE = "initiate"
    REJECT = "reject"


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def theta_pdf(theta):
    """Density of the traverse angle, ``2 (pi - theta) / pi^2`` on [0, pi]."""
    th = np.asarray(theta, dtype=float)
    inside = (th >= 0) & (th <= math.pi)
    return _out(np.where(inside, 2.0 * (math.pi - th) / PI2, 0.0))


def theta_cdf(theta):
    th = np.clip(np.asarray(theta, dtype=float), 0.0, math.pi)
    return _out((2.0 * math.pi - th) * th / PI2)


def traversal_time_pdf(t, r1: float, r2: float, v: float):
    """Density of the dwell time for fixed entry/exit radii and speed.

    Zero outside the open support ``(|r1 - r2| / v, (r1 + r2) / v)``.  The
    square root of ``4 r1^2 r2^2 - (r1^2 + r2^2 - t^2 v^2)^2`` is factored
    into its two support-edge terms to avoid cancellation.
    """
    time_support(r1, r2, v)
    tt = np.asarray(t, dtype=float)
    d = tt * v
    lo = abs(r1 - r2)
    hi = r1 + r2
    inside = (d > lo) & (d < hi)
    below = np.where(inside, (d - lo) * (d + lo), 1.0)
    above = np.where(inside, (hi - d) * (hi + d), 1.0)
    theta = 2.0 * np.arctan2(np.sqrt(below), np.sqrt(above))
    dens = 4.0 * v * v * tt * (math.pi - theta) / (PI2 * np.sqrt(below * above))
    return _out(np.where(inside, dens, 0.0))


def traversal_time_cdf(t, r1: float, r2: float, v: float):
    """P(T <= t): the angle CDF composed with the time-to-angle map."""
    time_support(r1, r2, v)
    return theta_cdf(angle_at_time(r1, r2, v, t))


def _interval_prob(lower: float, upper: float, r1: float, r2: float, v: float) -> float:
    p = traversal_time_cdf(upper, r1, r2, v) - traversal_time_cdf(lower, r1, r2, v)
    return min(max(p, 0.0), 1.0)


def prob_unnecessary(n: float, timing: HandoverTiming, r1: float, r2: float, v: float) -> float:
    """Probability that a handover admitted by threshold ``n`` lasts no longer than ``tau_t``."""
    if not 0 <= n <= timing.tau_t:
        raise ValueError(f"threshold N={n} must lie in [0, tau_t={timing.tau_t}]")
    return _interval_prob(n, timing.tau_t, r1, r2, v)


def prob_failure(m: float, timing: HandoverTiming, r1: float, r2: float, v: float) -> float:
    """Probability that a handover admitted by threshold ``m`` lasts no longer than ``tau_a``."""
    if not 0 <= m <= timing.tau_a:
        raise ValueError(f"threshold M={m} must lie in [0, tau_a={timing.tau_a}]")
    return _interval_prob(m, timing.tau_a, r1, r2, v)


def _invert(p: float, tau: float, r1: float, r2: float, v: float, label: str,
            z: float | None = None) -> float:
    """Smallest time ``x`` with ``P(x < T <= tau) = p``.

    Solves ``F(z) - F(y) = p`` for the lower angle ``y`` via the minus root
    ``y = pi - sqrt((pi - z)^2 + pi^2 p)`` and maps ``y`` back to a time.
    """
    sup = time_support(r1, r2, v)
    exact_ref = z is None
    if exact_ref:
        z = float(angle_at_time(r1, r2, v, tau))
    available = theta_cdf(z)
    if p > available:
        raise UnachievableError(
            f"{label} target {p} exceeds the probability mass {available:.6g} "
            f"available below tau={tau} s at v={v} m/s",
            param=f"{label}_target",
        )
    if p == 0 and exact_ref and sup.t_min <= tau <= sup.t_max:
        return float(tau)
    y = math.pi - math.sqrt((math.pi - z) ** 2 + PI2 * p)
    y = min(max(y, 0.0), z)
    x = float(chord_lengths(r1, r2, y)) / v
    return min(x, tau) if exact_ref else x


def threshold_n(targets: ProbabilityTargets, timing: HandoverTiming,
                r1: float, r2: float, v: float) -> float:
    """Time threshold N that holds the unnecessary-handover probability at its target."""
    return _invert(targets.p_u_target, timing.tau_t, r1, r2, v, "p_u")


def threshold_m(targets: ProbabilityTargets, timing: HandoverTiming,
                r1: float, r2: float, v: float, literal_z: bool = False) -> float:
    """Time threshold M that holds the handover-failure probability at its target.

    By default the reference angle comes from ``tau_a``.  ``literal_z=True``
    reuses the ``tau_t`` angle instead; the resulting M no longer reproduces
    the failure target through ``prob_failure``.
    """
    if literal_z:
        z = float(angle_at_time(r1, r2, v, timing.tau_t))
        return _invert(targets.p_f_target, timing.tau_a, r1, r2, v, "p_f", z=z)
    return _invert(targets.p_f_target, timing.tau_a, r1, r2, v, "p_f")


def compute_thresholds(targets: ProbabilityTargets, timing: HandoverTiming,
                       r1: float, r2: float, v: float) -> Thresholds:
    return Thresholds(
        threshold_n(targets, timing, r1, r2, v),
        threshold_m(targets, timing, r1, r2, v),
    )


def decide_handover(predicted_dwell: float, thresholds: Thresholds) -> Decision:
    if predicted_dwell < 0:
        raise ValueError(f"predicted dwell time must be non-negative, got {predicted_dwell}")
    if predicted_dwell > thresholds.effective:
        return Decision.INITIATE
    return Decision.REJECT
