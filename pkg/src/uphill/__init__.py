"""Boundary-driven two-species reaction-diffusion exclusion processes.

Construct rate tables realising a prescribed linear reaction-diffusion mean
structure, simulate them exactly, solve the stationary equations in closed
form, classify uphill behaviour, and verify self-duality.
"""

__version__ = "0.1.0"

from .analytic import (BoundaryDensities, StationarySolution, UphillVerdict,
                       classify_uphill, integrate, ode_rhs, stationary_continuum,
                       stationary_discrete, weak_coupling_solution)
from .coefficients import (CoefficientSet, MeanState, SiteCoefficientSet,
                           check_closure, check_matching,
                           extract_edge_coefficients, extract_site_coefficients,
                           mean_rhs)
from .duality import (DualityReport, apply_edge_operator, check_self_duality,
                      duality_value, from_triplet, to_triplet)
from .model import (Configuration, EdgeRateMatrix, Graph, ProcessModel,
                    SiteRateMatrix, apply_edge_event, apply_site_event,
                    check_generator_matrix, mutation_map, pair_index)
from .rates import (REFERENCE_PARAMS, InvalidParametersError, MacroParams,
                    ValidityVerdict, assemble_xi_system, build_boundary,
                    build_bulk, build_model, closed_form_y, load_params,
                    solve_y, triple_sums, validate)
from .simulate import (SimConfig, SimStats, fick_current, initial_configuration,
                       run, run_ensemble, total_current)

__all__ = [
    "BoundaryDensities", "StationarySolution", "UphillVerdict",
    "classify_uphill", "integrate", "ode_rhs", "stationary_continuum",
    "stationary_discrete", "weak_coupling_solution",
    "CoefficientSet", "MeanState", "SiteCoefficientSet", "check_closure",
    "check_matching", "extract_edge_coefficients", "extract_site_coefficients",
    "mean_rhs",
    "DualityReport", "apply_edge_operator", "check_self_duality",
    "duality_value", "from_triplet", "to_triplet",
    "Configuration", "EdgeRateMatrix", "Graph", "ProcessModel",
    "SiteRateMatrix", "apply_edge_event", "apply_site_event",
    "check_generator_matrix", "mutation_map", "pair_index",
    "REFERENCE_PARAMS", "InvalidParametersError", "MacroParams",
    "ValidityVerdict", "assemble_xi_system", "build_boundary", "build_bulk",
    "build_model", "closed_form_y", "load_params", "solve_y", "triple_sums",
    "validate",
    "SimConfig", "SimStats", "fick_current", "initial_configuration", "run",
    "run_ensemble", "total_current",
]
