"""Learning with Gaussian-complexity fixed points under heavy tails.

Median-of-means building blocks, generic chaining with Monte-Carlo
complexities, crude and fine risk oracles, and the home-match tournament.
"""
__version__ = "0.1.0"

from ._accel import backend_name
from .chaining import (AdmissibleSequence, ComplexityReport, build_admissible_sequence,
                       complexity_report, entropy_bounds, gamma2, gaussian_sup_mc,
                       rademacher_phi, solve_fixed_point)
from .errors import ArtifactError
from .function_class import (CovarianceStructure, DistanceOracle, FunctionClass, LocalizedSet,
                             difference_class, greedy_packing, l2_distance, localize)
from .mean_estimators import EstimatorSpec, median_of_means, psi_delta, trimmed_mean
from .risk_oracles import (CrudeOracleOutput, FineOracleState, OracleConstants, crude_oracle,
                           fine_oracle, mixture_estimator, multiplier_estimator, noise_estimate,
                           product_estimator)
from .tournament import TournamentOutcome, learn, play_matches, select_winner

__all__ = [
    "AdmissibleSequence", "ArtifactError", "ComplexityReport", "CovarianceStructure",
    "CrudeOracleOutput", "DistanceOracle", "EstimatorSpec", "FineOracleState", "FunctionClass",
    "LocalizedSet", "OracleConstants", "TournamentOutcome", "backend_name",
    "build_admissible_sequence", "complexity_report", "crude_oracle", "difference_class",
    "entropy_bounds", "fine_oracle", "gamma2", "gaussian_sup_mc", "greedy_packing", "l2_distance",
    "learn", "localize", "median_of_means", "mixture_estimator", "multiplier_estimator",
    "noise_estimate", "play_matches", "product_estimator", "psi_delta", "rademacher_phi",
    "select_winner", "solve_fixed_point", "trimmed_mean",
]
