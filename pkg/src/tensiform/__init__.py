"""Form-finding engine for prestressed structures.

Covers the original force density method (linear solve over prescribed
force densities) and its extension to stationary problems of generalized
element functionals with strut-length constraints, for cable nets,
tensegrities, and triangulated membranes.
"""

from .model import (CABLE, STRUT, ElementFunctional, LinearMember, Model, ModelError,
                    Node, PlainArea, PowerArea, PowerLength, SpringLength, TriElement,
                    build_dof_map, validate)
from .geometry import (DegenerateGeometry, member_length, member_length_gradient,
                       triangle_area, triangle_area_gradient)
from .functionals import (GeneralizedForces, element_energy, element_force,
                          total_energy, total_gradient)
from .linear_fdm import (NullSpaceReport, SingularSystem, assemble_D,
                         build_branch_node_matrix, null_space_analysis, solve_linear_fdm)
from .optimizer import (ConvergedState, GivenInit, RandomInit, SolveOptions, StepControl,
                        minimize_constrained, project_strut_lengths, random_initialization,
                        recover_multipliers)
from .analysis import (compare_functionals, equilibrium_residual,
                       extended_force_densities, virtual_work_check)
from .fileio import (export_obj, export_report_csv, load_model, model_from_dict,
                     model_to_dict, save_model)
from . import fixtures

__version__ = "0.1.0"

__all__ = [
    "CABLE", "STRUT", "ElementFunctional", "LinearMember", "Model", "ModelError",
    "Node", "PlainArea", "PowerArea", "PowerLength", "SpringLength", "TriElement",
    "build_dof_map", "validate",
    "DegenerateGeometry", "member_length", "member_length_gradient",
    "triangle_area", "triangle_area_gradient",
    "GeneralizedForces", "element_energy", "element_force", "total_energy",
    "total_gradient",
    "NullSpaceReport", "SingularSystem", "assemble_D", "build_branch_node_matrix",
    "null_space_analysis", "solve_linear_fdm",
    "ConvergedState", "GivenInit", "RandomInit", "SolveOptions", "StepControl",
    "minimize_constrained", "project_strut_lengths", "random_initialization",
    "recover_multipliers",
    "compare_functionals", "equilibrium_residual", "extended_force_densities",
    "virtual_work_check",
    "export_obj", "export_report_csv", "load_model", "model_from_dict",
    "model_to_dict", "save_model",
    "fixtures",
]
