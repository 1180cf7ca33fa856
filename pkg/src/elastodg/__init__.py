"""Interior-penalty DG solver for the 2D elastic Helmholtz equations."""

from .params import ETA, ProblemParams
from .mesh import EdgeInfo, Mesh, build_uniform, geometry, jump_sign
from .quadrature import QuadRule, segment_rule, triangle_rule
from .exact import (FieldSample, Solution, boundary_g, exact_fields, exact_u,
                    linear_solution, manufactured, self_check, source_f)
from .spaces import (DgField, DgSpace, FemSpace, element_gradient,
                     element_stress, eval_field, fem_to_dg, interpolate,
                     jump_and_average_traces)
from .assembly import (DgSystem, apply_form, assemble_dg,
                       assemble_elliptic_projection, assemble_fem,
                       consistency_residual, dump_matrix)
from .solver import SolveReport, SolverError, solve
from .norms import (NormReport, error_vs_exact, exact_norms,
                    impedance_pairing, interface_flux_pairing, norms_of,
                    relative_errors)
from .experiments import (CSV_HEADER, ExperimentConfig, ExperimentRecord,
                          fit_slope, resolve_rule, run_compare,
                          run_convergence, run_pollution, run_single,
                          run_stability, run_study, write_csv)

__all__ = [
    "ETA", "ProblemParams",
    "EdgeInfo", "Mesh", "build_uniform", "geometry", "jump_sign",
    "QuadRule", "segment_rule", "triangle_rule",
    "FieldSample", "Solution", "boundary_g", "exact_fields", "exact_u",
    "linear_solution", "manufactured", "self_check", "source_f",
    "DgField", "DgSpace", "FemSpace", "element_gradient", "element_stress",
    "eval_field", "fem_to_dg", "interpolate", "jump_and_average_traces",
    "DgSystem", "apply_form", "assemble_dg", "assemble_elliptic_projection",
    "assemble_fem", "consistency_residual", "dump_matrix",
    "SolveReport", "SolverError", "solve",
    "NormReport", "error_vs_exact", "exact_norms", "impedance_pairing",
    "interface_flux_pairing", "norms_of", "relative_errors",
    "CSV_HEADER", "ExperimentConfig", "ExperimentRecord", "fit_slope",
    "resolve_rule", "run_compare", "run_convergence", "run_pollution",
    "run_single", "run_stability", "run_study", "write_csv",
]

__version__ = "0.1.0"
