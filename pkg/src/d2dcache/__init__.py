"""Coverage of cache-enabled D2D networks under user mobility.

Analytical evaluation (nested adaptive quadrature), a Monte Carlo replay
of the same protocol, and the large-mobility closed form.
"""

from .coverage import (
    CoverageEstimate,
    CoverageTolerances,
    MobilityQuery,
    asymptotic_estimate,
    coverage_file2_asymptotic,
    coverage_file2_total,
    db_to_linear,
    linear_to_db,
    sweep,
)
from .distributions import NetworkParams, Subcase
from .simulator import SimulationConfig, estimate_coverage

__all__ = [
    "CoverageEstimate", "CoverageTolerances", "MobilityQuery", "NetworkParams",
    "SimulationConfig", "Subcase", "asymptotic_estimate", "coverage_file2_asymptotic",
    "coverage_file2_total", "db_to_linear", "estimate_coverage", "linear_to_db", "sweep",
]
__version__ = "0.1.0"
