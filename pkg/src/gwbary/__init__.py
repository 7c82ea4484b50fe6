"""Generalized (unbalanced) Wasserstein distances and barycenters on finite supports."""
from .barycenter import (BarycenterProblem, BarycenterSolution, CertificateError,
                         InfeasibleDual, consistency_harness, dual_objective,
                         extract_bary_duals, lipschitz_check, mass_range_at_optimum,
                         s_bar, s_transform, solve_barycenter, tighten_dual)
from .distance import GWDistanceResult, balanced_wasserstein, check_metric_axioms, gw_distance
from .duality import (NEG_INFINITY, DualPotentials, certify_gap, dual_certificate,
                      extract_potentials, refine_potentials, truncate_I)
from .kernels import BACKEND
from .measure import (CostMatrix, DiscreteMeasure, GroundMetric, GWParams, ValidationError,
                      build_cost_matrix, normalize_measure)
from .oracle import GridSpec, oracle_barycenter, oracle_ec
from .simplex import LpSolution, solve_dense_lp
from .transport import TransportPlan, solve_submarginal_transport

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BarycenterProblem", "BarycenterSolution", "CertificateError", "CostMatrix",
    "DiscreteMeasure", "DualPotentials", "GWDistanceResult", "GWParams", "GridSpec",
    "GroundMetric", "InfeasibleDual", "LpSolution", "NEG_INFINITY", "TransportPlan",
    "ValidationError", "balanced_wasserstein", "build_cost_matrix", "certify_gap",
    "check_metric_axioms", "consistency_harness", "dual_certificate", "dual_objective",
    "extract_bary_duals", "extract_potentials", "gw_distance", "lipschitz_check",
    "mass_range_at_optimum", "normalize_measure", "oracle_barycenter", "oracle_ec",
    "refine_potentials", "s_bar", "s_transform", "solve_barycenter", "solve_dense_lp",
    "solve_submarginal_transport", "tighten_dual", "truncate_I",
]
