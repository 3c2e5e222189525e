"""Distance, SNR and outage statistics for users dropped uniformly in elliptical footprints."""

__version__ = "0.1.0"

from .distance_stats import (
    DistanceModel,
    ModelValidityWarning,
    Scenario,
    euclidean_cdf,
    euclidean_cdf_fast,
    euclidean_pdf,
    polar_boundary_angle,
    radial_cdf,
    radial_pdf,
)
from .geometry import (
    EllipseFootprint,
    GeometryError,
    TiltedScenario,
    VerticalScenario,
    area_ratio_vs_circle,
    equivalent_vertical_altitude,
    footprint_from_tilt,
    footprint_vertical,
    support_bounds,
)
from .snr_outage import (
    DEFAULTS,
    FadingChannel,
    OutageQuery,
    conditional_snr_cdf,
    outage_probability,
    outage_sweep,
    regularized_lower_gamma,
    snr_cdf,
    snr_pdf,
    upper_incomplete_gamma,
)

__all__ = [name for name in dir() if not name.startswith("_")]
