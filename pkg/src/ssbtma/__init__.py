"""Design, evaluation and optimization of single-sideband time-modulated arrays."""

from .errors import (ConfigError, DegenerateDesign, InvalidArgument, MetricsUndefined,
                     TmaError, UnsupportedSteering)
from .geometry import (ArrayGeometry, ArrayKind, CarrierConfig, coupling_kernel, linear_uniform,
                       pair_distance)
from .modulation import (BeamMode, BeamTask, Branch, ElementSchedule, ExcitationWeights,
                         ModulationSchedule, branch_coefficient, joint_harmonic_coefficient,
                         overlap_tau, overlap_tau_prime, solve_steering)
from .optimizer import DeConfig, DeResult, cost, de_optimize, reconfigure
from .oracle import OracleConfig, verify
from .pattern import (PatternMetrics, PatternSamples, chebyshev_taper, harmonic_pattern,
                      pattern_metrics)
from .power import (PowerReport, TmaDesign, power_report, steered_design, total_power,
                    useful_power_minus3, useful_power_plus1)

__version__ = "0.1.0"

__all__ = [
    "ArrayGeometry", "ArrayKind", "BeamMode", "BeamTask", "Branch", "CarrierConfig", "ConfigError",
    "DeConfig", "DeResult", "DegenerateDesign", "ElementSchedule", "ExcitationWeights",
    "InvalidArgument", "MetricsUndefined", "ModulationSchedule", "OracleConfig", "PatternMetrics",
    "PatternSamples", "PowerReport", "TmaDesign", "TmaError", "UnsupportedSteering",
    "branch_coefficient", "chebyshev_taper", "cost", "coupling_kernel", "de_optimize",
    "harmonic_pattern", "joint_harmonic_coefficient", "linear_uniform", "overlap_tau",
    "overlap_tau_prime", "pair_distance", "pattern_metrics", "power_report", "reconfigure",
    "solve_steering", "steered_design", "total_power", "useful_power_minus3", "useful_power_plus1",
    "verify",
]
