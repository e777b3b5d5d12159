"""Two-slit interference with which-way markers and an Afshar-type wire test."""

__version__ = "0.1.0"

from .quantum import (  # noqa: E402
    DualityReport,
    IntensityProfile,
    MarkerOverlap,
    MarkerState,
    SlitAmplitudePair,
    analytic_visibility,
    distinguishability,
    duality_report,
    intensity_no_marker,
    intensity_with_marker,
    marker_overlap,
    visibility,
)
from .experiment import (  # noqa: E402
    AfsharReport,
    ApparatusConfig,
    Scenario,
    ScenarioResult,
    dark_fringe_positions,
    detector_windows,
    gamma_sweep,
    run_afshar,
    run_scenario,
)
