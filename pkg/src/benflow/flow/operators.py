"""Operators alpha of the flow D_t u + alpha(u) = h.

Each operator supplies the grid representative whose gap drives the BEN
functional, the implicit-Euler resolvent v + dt*alpha(v) = b, and a
linearization (Jacobian of alpha and inverse metric of the gap) used to
precondition the minimizer.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from benflow.config import settings
from benflow.convex.functions import GraphPotential, Quadratic
from benflow.convex.graphs import MonotoneGraph
from benflow.errors import ConvergenceError, ImproperFunctionError
from benflow.representation.base import Representative, shift_by_linear
from benflow.representation.grid import (
    ConductivityFamily,
    EllipticRepresentative,
    PivotRepresentative,
)
from benflow.representation.scalar import FenchelRepresentative
from benflow.spaces import DiscreteSpace, TridiagonalOperator, stiffness_operator

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

MIN_CURVATURE = 1e-3


@dataclass(frozen=True)
class Linearization:
    """Jacobian of alpha and the inverse gap metric at one time level."""

    jacobian: TridiagonalOperator
    metric_inverse: Callable[[FloatArray], FloatArray]


class FlowOperator(ABC):
    """Interface shared by all flow operators."""

    name: str = "operator"
    semimonotone: bool = False
    linear: bool = False

    @abstractmethod
    def representative(self, space: DiscreteSpace) -> Representative:
        """Grid representative of alpha."""

    @abstractmethod
    def resolvent(
        self, space: DiscreteSpace, b: FloatArray, dt: float, guess: FloatArray | None = None
    ) -> FloatArray:
        """Solve v + dt*alpha(v) = b."""

    @abstractmethod
    def linearization(self, space: DiscreteSpace, z: FloatArray) -> Linearization:
        """Local model of alpha and of the representative gap around z."""

    @abstractmethod
    def apply(self, space: DiscreteSpace, v: FloatArray) -> FloatArray:
        """alpha(v) for a single-valued operator."""

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


# =============================================================================
# Diffusion in the H pivot
# =============================================================================


class DiffusionOperator(FlowOperator):
    """alpha(v) = A(z)v (+ Bv) with z = v for semi-monotone laws."""

    @abstractmethod
    def stiffness(self, space: DiscreteSpace, z: FloatArray | None) -> TridiagonalOperator:
        """A(z) = D^T diag(k(z)) D."""

    def matrix(self, space: DiscreteSpace, z: FloatArray | None) -> TridiagonalOperator:
        return self.stiffness(space, z)

    def apply(self, space: DiscreteSpace, v: FloatArray) -> FloatArray:
        return self.matrix(space, v).apply(v)

    def resolvent(
        self, space: DiscreteSpace, b: FloatArray, dt: float, guess: FloatArray | None = None
    ) -> FloatArray:
        if not self.semimonotone:
            return self.matrix(space, None).shifted(1.0 / dt).solve(b / dt)
        damping = settings.picard_damping
        z = np.array(b if guess is None else guess, dtype=float)
        for it in range(1, settings.inner_max_iter + 1):
            v = self.matrix(space, z).shifted(1.0 / dt).solve(b / dt)
            delta = v - z
            if np.max(np.abs(delta)) <= settings.inner_tol * (1.0 + np.max(np.abs(v))):
                logger.debug(f"{self.name}: Picard step converged in {it} iterations")
                return v  # type: ignore[no-any-return]
            z = z + damping * delta
        raise ConvergenceError(
            f"{self.name}: Picard step did not converge in {settings.inner_max_iter} iterations",
            iterations=settings.inner_max_iter,
        )

    def linearization(self, space: DiscreteSpace, z: FloatArray) -> Linearization:
        stiff = self.stiffness(space, z)
        return Linearization(jacobian=self.matrix(space, z), metric_inverse=stiff.apply)


class LinearDiffusion(DiffusionOperator):
    """alpha(v) = -d/dx(k dv/dx) with constant k > 0, the subdifferential of k|v'|^2/2."""

    linear = True

    def __init__(self, conductivity: float = 1.0):
        if not conductivity > 0:
            raise ImproperFunctionError(f"conductivity must be positive, got {conductivity}")
        self.conductivity = float(conductivity)
        self.name = f"heat(k={self.conductivity:g})"

    def _cells(self, space: DiscreteSpace) -> FloatArray:
        return np.full(space.M + 1, self.conductivity)

    def stiffness(self, space: DiscreteSpace, z: FloatArray | None) -> TridiagonalOperator:
        return stiffness_operator(space, self._cells(space))

    def representative(self, space: DiscreteSpace) -> Representative:
        g = FenchelRepresentative(Quadratic(1.0))
        return EllipticRepresentative(space, g, conductivity=self._cells(space))


class SemimonotoneDiffusion(DiffusionOperator):
    """alpha(v) = beta(v, v), beta(z, v) = -d/dx(k(z) dv/dx)."""

    semimonotone = True

    def __init__(self, family: ConductivityFamily):
        self.family = family
        self.name = f"quasilinear({family.name})"

    def stiffness(self, space: DiscreteSpace, z: FloatArray | None) -> TridiagonalOperator:
        if z is None:
            raise ValueError("a semi-monotone stiffness needs the frozen argument z")
        return self.family.operator(space, z)

    def representative(self, space: DiscreteSpace) -> Representative:
        return EllipticRepresentative(space, FenchelRepresentative(Quadratic(1.0)), family=self.family)


class ConvectionDiffusion(DiffusionOperator):
    """A diffusion operator plus a monotone linear transport term B."""

    def __init__(self, base: DiffusionOperator, convection: TridiagonalOperator):
        self.base = base
        self.convection = convection
        self.semimonotone = base.semimonotone
        self.linear = base.linear
        self.name = f"{base.name}+convection"

    def stiffness(self, space: DiscreteSpace, z: FloatArray | None) -> TridiagonalOperator:
        return self.base.stiffness(space, z)

    def matrix(self, space: DiscreteSpace, z: FloatArray | None) -> TridiagonalOperator:
        return self.base.matrix(space, z) + self.convection

    def representative(self, space: DiscreteSpace) -> Representative:
        return shift_by_linear(self.base.representative(space), self.convection)


# =============================================================================
# Enthalpy formulation in the Lambda pivot
# =============================================================================


class EnthalpyPivot(FlowOperator):
    """alpha(u) = -d^2/dx^2 theta(u) for a single-valued monotone law theta.

    The representative is the Lambda-pivot Fenchel function of the primitive of
    theta; implicit steps minimize the strictly convex energy
    <Lambda(u - b), u - b>/(2 dt) + sum Theta(u) by damped Newton.
    """

    def __init__(self, graph: MonotoneGraph):
        if not graph.is_maximal or not graph.single_valued:
            raise ImproperFunctionError(
                f"enthalpy law {graph.name!r} must be a maximal graph without vertical pieces"
            )
        self.graph = graph
        self.potential = GraphPotential(graph)
        self.name = f"enthalpy({graph.name})"

    def representative(self, space: DiscreteSpace) -> Representative:
        return PivotRepresentative(space, self.potential)

    def apply(self, space: DiscreteSpace, v: FloatArray) -> FloatArray:
        return space.laplacian.apply(self.graph.selection(v))

    def _energy(self, space: DiscreteSpace, u: FloatArray, b: FloatArray, dt: float) -> float:
        d = u - b
        quad = float(d @ space.laplacian.solve(d)) / (2.0 * dt)
        return space.dx * (quad + float(np.sum(self.potential(u))))

    def resolvent(
        self, space: DiscreteSpace, b: FloatArray, dt: float, guess: FloatArray | None = None
    ) -> FloatArray:
        lap = space.laplacian
        u = np.array(b if guess is None else guess, dtype=float)
        scale = 1.0 + float(np.max(np.abs(b)))
        for it in range(1, settings.inner_max_iter + 1):
            residual = (u - b) / dt + lap.apply(self.graph.selection(u))
            if np.max(np.abs(residual)) * dt <= settings.inner_tol * scale:
                logger.debug(f"{self.name}: Newton step converged in {it - 1} iterations")
                return u
            jac = lap.scale_columns(self.graph.slope(u)).shifted(1.0 / dt)
            delta = jac.solve(-residual)
            e0 = self._energy(space, u, b, dt)
            descent = space.dx * float(lap.solve(residual) @ delta)
            s = 1.0
            while s > 1e-10:
                trial = u + s * delta
                if self._energy(space, trial, b, dt) <= e0 + 1e-4 * s * descent + 1e-14 * (
                    1.0 + abs(e0)
                ):
                    break
                s *= 0.5
            u = u + s * delta
        raise ConvergenceError(
            f"{self.name}: Newton step did not converge in {settings.inner_max_iter} iterations",
            iterations=settings.inner_max_iter,
        )

    def linearization(self, space: DiscreteSpace, z: FloatArray) -> Linearization:
        lap = space.laplacian
        c = np.maximum(self.graph.slope(z), MIN_CURVATURE)

        def metric_inverse(y: FloatArray) -> FloatArray:
            return lap.apply(c * lap.apply(y))

        return Linearization(jacobian=lap.scale_columns(c), metric_inverse=metric_inverse)
