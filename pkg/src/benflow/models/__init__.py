"""Concrete 1D parabolic models: nonlinear diffusion, Stefan, diffusion-convection."""

from benflow.models.builders import (
    build_convection_problem,
    build_diffusion_problem,
    build_stefan_problem,
    diffusion_operator,
    enthalpy_balance,
    stefan_fields,
    stefan_graph,
)
from benflow.models.convection import ConvectionField, convection_form, convection_matrix
from benflow.models.laws import DiffusionLaw, kirchhoff_transform

__all__ = [
    "ConvectionField",
    "DiffusionLaw",
    "build_convection_problem",
    "build_diffusion_problem",
    "build_stefan_problem",
    "convection_form",
    "convection_matrix",
    "diffusion_operator",
    "enthalpy_balance",
    "kirchhoff_transform",
    "stefan_fields",
    "stefan_graph",
]
