"""Dwell-time based vertical handover necessity estimation for irregular WLAN cells."""

from .analytic import (
    Decision,
    HandoverTiming,
    ProbabilityTargets,
    Thresholds,
    decide_handover,
    prob_failure,
    prob_unnecessary,
    theta_cdf,
    theta_pdf,
    threshold_m,
    threshold_n,
    traversal_time_cdf,
    traversal_time_pdf,
)
from .errors import (
    DomainError,
    ModelError,
    NoContourError,
    OutOfSupportError,
    UnachievableError,
)
from .geometry import (
    CellRadiusModel,
    TimeSupport,
    TraversalGeometry,
    chord_length,
    generate_boundary,
    sample_radius,
    sample_theta,
    theta_from_time,
    time_support,
    traversal_time,
)

__version__ = "0.1.0"
