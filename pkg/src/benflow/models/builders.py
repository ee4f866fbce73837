"""Builders wiring the 1D parabolic models into BenProblem instances."""

from __future__ import annotations

import logging
from collections.abc import Callable
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike

from benflow.convex.graphs import MonotoneGraph, plateau_graph
from benflow.flow.operators import (
    ConvectionDiffusion,
    DiffusionOperator,
    EnthalpyPivot,
    FlowOperator,
    LinearDiffusion,
    SemimonotoneDiffusion,
)
from benflow.flow.problem import BenProblem, SourceLike, Weight, make_problem
from benflow.flow.trajectory import FloatArray, Trajectory
from benflow.models.convection import ConvectionField, convection_matrix
from benflow.models.laws import DiffusionLaw, kirchhoff_transform
from benflow.spaces import DiscreteSpace

logger = logging.getLogger(__name__)

Formulation = Literal["semimonotone", "kirchhoff"]
InitialLike = ArrayLike | Callable[[FloatArray], ArrayLike]


def diffusion_operator(
    law: DiffusionLaw | MonotoneGraph, formulation: Formulation = "semimonotone"
) -> FlowOperator:
    """Flow operator of -d/dx(k(u) du/dx), or of -d^2/dx^2 theta(u) for a graph."""
    if isinstance(law, MonotoneGraph):
        return EnthalpyPivot(law)
    law.check_coercive()
    if formulation == "kirchhoff":
        return EnthalpyPivot(kirchhoff_transform(law))
    if formulation != "semimonotone":
        raise ValueError(f"unknown formulation {formulation!r}")
    if law.is_constant:
        return LinearDiffusion(law.k0)
    return SemimonotoneDiffusion(law.family())


def build_diffusion_problem(
    space: DiscreteSpace,
    law: DiffusionLaw | MonotoneGraph,
    u0: InitialLike,
    h: SourceLike = None,
    T: float = 0.1,
    K: int = 32,
    weight: Weight = "lebesgue",
    formulation: Formulation = "semimonotone",
    name: str | None = None,
) -> BenProblem:
    """Nonlinear diffusion D_t u - d/dx(k(u) du/dx) = h with zero Dirichlet data.

    Args:
        space: Spatial grid.
        law: Conductivity law, or a monotone graph used directly as theta.
        u0: Initial datum, as nodal values or a function of x.
        h: Source term: None, nodal values, (K+1, M) array, or function of (t, x).
        T: Final time.
        K: Number of time steps.
        weight: Time weight of the functional.
        formulation: "semimonotone" freezes k at the state; "kirchhoff" poses
            the same equation in the enthalpy variable through theta.
        name: Label used in logs and reports.

    Returns:
        The assembled BenProblem. A constant law gives the linear heat problem.
    """
    operator = diffusion_operator(law, formulation)
    label = name or law.name or "diffusion"
    logger.info(f"Building diffusion problem {label} with operator {operator.name}")
    return make_problem(space, operator, u0, h, T, K, weight, label)


def stefan_graph(latent_heat: float = 1.0, eps: float = 1e-3) -> MonotoneGraph:
    """Temperature as a function of enthalpy, plateau on [0, L], plus eps*identity."""
    graph = plateau_graph(latent_heat)
    return graph.regularized(eps) if eps > 0 else graph


def build_stefan_problem(
    space: DiscreteSpace,
    latent_heat: float = 1.0,
    eps: float = 1e-3,
    u0: InitialLike | None = None,
    h: SourceLike = None,
    T: float = 0.1,
    K: int = 32,
    weight: Weight = "lebesgue",
) -> BenProblem:
    """Two-phase Stefan problem in the enthalpy variable; eps = 0 keeps the exact plateau."""
    if u0 is None:

        def u0(x: FloatArray) -> FloatArray:
            return 0.5 * latent_heat + 0.6 * np.sin(np.pi * x)  # type: ignore[no-any-return]

    graph = stefan_graph(latent_heat, eps)
    return build_diffusion_problem(
        space, graph, u0, h, T, K, weight, name=f"stefan(L={latent_heat:g},eps={eps:g})"
    )


def build_convection_problem(
    space: DiscreteSpace,
    law: DiffusionLaw,
    field: ConvectionField,
    u0: InitialLike,
    h: SourceLike = None,
    T: float = 0.1,
    K: int = 32,
    weight: Weight = "lebesgue",
    name: str | None = None,
) -> BenProblem:
    """Diffusion plus transport b du/dx by a non-expanding velocity field."""
    base = diffusion_operator(law)
    assert isinstance(base, DiffusionOperator)
    operator = ConvectionDiffusion(base, convection_matrix(field))
    label = name or f"{law.name}+{field.name}"
    logger.info(f"Building convection problem {label}")
    return make_problem(space, operator, u0, h, T, K, weight, label)


def enthalpy_balance(problem: BenProblem, traj: Trajectory) -> FloatArray:
    """Per-step mass balance of an enthalpy problem.

    dx*sum(u^k - u^{k-1}) + dt*(theta(u^k_1) + theta(u^k_M))/dx - dt*dx*sum(h^k),
    where the middle term is the flux through the Dirichlet boundary.
    """
    if not isinstance(problem.operator, EnthalpyPivot):
        raise ValueError(f"{problem.name} is not posed in the enthalpy variable")
    dx, dt = problem.space.dx, problem.dt
    theta = problem.operator.graph.selection(traj.steps[1:])
    change = dx * np.sum(np.diff(traj.steps, axis=0), axis=-1)
    flux = dt * (theta[:, 0] + theta[:, -1]) / dx
    source = dt * dx * np.sum(problem.h[1:], axis=-1)
    return change + flux - source  # type: ignore[no-any-return]


def stefan_fields(traj: Trajectory, graph: MonotoneGraph) -> tuple[FloatArray, FloatArray]:
    """(enthalpy, temperature) arrays of shape (K+1, M)."""
    return np.array(traj.steps), graph.selection(traj.steps)
