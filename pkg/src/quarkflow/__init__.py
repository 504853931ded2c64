"""Optimal decomposition of stencil update formulas into atomic stages."""

from .catalog import load_example, manufactured
from .decompose import Decomposition, decompose, emit_stage_kernels, render_dot, sharing_report
from .errors import QuarkflowError
from .flow import build_network, extract_assignment, optimality_violations, solve_mcnf
from .frontend import gen_euler3d_rk4, gen_heat1d_midpoint, gen_heat3d_midpoint, parse, trace
from .graph import ComputationalGraph, make_graph, swept_depth, topological_order, validate
from .model import build_model, check_feasible, objective_value
from .pipeline import run
from .verify import atomic_labels, brute_force_optimum, random_graph, verify

__all__ = [
    "ComputationalGraph", "Decomposition", "QuarkflowError", "atomic_labels",
    "brute_force_optimum", "build_model", "build_network", "check_feasible", "decompose",
    "emit_stage_kernels", "extract_assignment", "gen_euler3d_rk4", "gen_heat1d_midpoint",
    "gen_heat3d_midpoint", "load_example", "make_graph", "manufactured", "objective_value",
    "optimality_violations", "parse", "random_graph", "render_dot", "run", "sharing_report",
    "solve_mcnf", "swept_depth", "topological_order", "trace", "validate", "verify",
]
