"""Flows D_t u + alpha(u) = h as null-minimization of the BEN functional."""

from benflow.flow.functional import (
    BenAssembly,
    assemble_ben,
    assemble_ben_integrated,
    energy_telescoping,
    weighted_dt_identity_check,
)
from benflow.flow.minimize import (
    SmoothingLevel,
    SolveOptions,
    SolveReport,
    TimeSteppingPreconditioner,
    minimize_ben,
    smoothing_study,
)
from benflow.flow.operators import (
    ConvectionDiffusion,
    DiffusionOperator,
    EnthalpyPivot,
    FlowOperator,
    LinearDiffusion,
    Linearization,
    SemimonotoneDiffusion,
)
from benflow.flow.oracle import implicit_euler_solve
from benflow.flow.problem import BenProblem, Weight, make_problem, time_weights
from benflow.flow.trajectory import (
    Trajectory,
    discrete_dt,
    discrete_dt_all,
    l2_distance,
    l2_norm,
    trajectory_rows,
)

__all__ = [
    "BenAssembly",
    "BenProblem",
    "ConvectionDiffusion",
    "DiffusionOperator",
    "EnthalpyPivot",
    "FlowOperator",
    "LinearDiffusion",
    "Linearization",
    "SemimonotoneDiffusion",
    "SmoothingLevel",
    "SolveOptions",
    "SolveReport",
    "TimeSteppingPreconditioner",
    "Trajectory",
    "Weight",
    "assemble_ben",
    "assemble_ben_integrated",
    "discrete_dt",
    "discrete_dt_all",
    "energy_telescoping",
    "implicit_euler_solve",
    "l2_distance",
    "l2_norm",
    "make_problem",
    "minimize_ben",
    "smoothing_study",
    "time_weights",
    "trajectory_rows",
    "weighted_dt_identity_check",
]
