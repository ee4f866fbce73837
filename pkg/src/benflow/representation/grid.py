"""Representatives on the grid carrier (v, v*) in V x V'.

EllipticRepresentative lifts a scalar representative g of a monotone law
gamma to the operator v -> -d/dx(k gamma(dv/dx)) through the weighted lifting
Lambda_z = A(z)^-1, A(z) = D^T diag(k(z)) D. PivotRepresentative represents
r = -d^2/dx^2 theta(v) in the Lambda-induced pairing <Lambda r, v>.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from benflow.convex.functions import MoreauEnvelope, ScalarConvex
from benflow.errors import RepresentationError
from benflow.representation.base import FloatArray, Provenance, Representative
from benflow.spaces import (
    DiscreteSpace,
    TridiagonalOperator,
    gradient,
    gradient_adjoint,
    stiffness_operator,
)


@dataclass(frozen=True)
class ConductivityFamily:
    """Grid family beta(z, .) = -d/dx(k(z) d/dx .) with k evaluated on cell midpoints."""

    conductivity: Callable[[FloatArray], FloatArray]
    name: str = "k"

    def cells(self, space: DiscreteSpace, z: ArrayLike) -> FloatArray:
        """k((z_c + z_{c+1})/2) on the M+1 cells, with the zero boundary values."""
        z = np.asarray(z, dtype=float)
        pad = [(0, 0)] * (z.ndim - 1) + [(1, 1)]
        padded = np.pad(z, pad)
        k = np.asarray(self.conductivity(0.5 * (padded[..., :-1] + padded[..., 1:])), dtype=float)
        if np.any(k <= 0):
            raise RepresentationError(f"conductivity {self.name} is not positive on the grid")
        return k

    def operator(self, space: DiscreteSpace, z: ArrayLike) -> TridiagonalOperator:
        return stiffness_operator(space, self.cells(space, z))


class EllipticRepresentative(Representative):
    """dx * sum over cells of g(sqrt(k) Dv, sqrt(k) D Lambda_z v*)."""

    provenance: Provenance = "elliptic"

    def __init__(
        self,
        space: DiscreteSpace,
        g: Representative,
        family: ConductivityFamily | None = None,
        conductivity: ArrayLike | None = None,
    ):
        if g.carrier != "scalar":
            raise RepresentationError("the integrand g must be a scalar representative")
        if family is not None and conductivity is not None:
            raise RepresentationError("pass either a conductivity family or fixed conductivity")
        self.space = space
        self.g = g
        self.family = family
        k = np.ones(space.M + 1) if conductivity is None else np.asarray(conductivity, float)
        if k.shape != (space.M + 1,) or np.any(k <= 0):
            raise RepresentationError(f"need {space.M + 1} positive cell conductivities")
        self.k = k
        self.operator = stiffness_operator(space, k)
        self.convex = g.convex and family is None

    def _cells(self, v: FloatArray) -> FloatArray:
        if self.family is None:
            return np.broadcast_to(self.k, v.shape[:-1] + (self.space.M + 1,))  # type: ignore[union-attr]
        return self.family.cells(self.space, v)  # type: ignore[arg-type]

    def _lift(self, vstar: FloatArray, k: FloatArray) -> FloatArray:
        if self.family is None:
            return self.operator.solve(vstar)
        out = np.empty_like(vstar)
        for idx in np.ndindex(vstar.shape[:-1]):
            out[idx] = stiffness_operator(self.space, k[idx]).solve(vstar[idx])  # type: ignore[arg-type]
        return out

    def _evaluate(self, v: FloatArray, vstar: FloatArray) -> FloatArray:
        v, vstar = np.broadcast_arrays(v, vstar)
        k = self._cells(v)
        root = np.sqrt(k)
        a = root * gradient(self.space, v)  # type: ignore[arg-type]
        b = root * gradient(self.space, self._lift(vstar, k))  # type: ignore[arg-type]
        return self.space.dx * np.sum(self.g._evaluate(a, b), axis=-1)  # type: ignore[union-attr,no-any-return]

    @property
    def differentiable(self) -> bool:
        return self.family is None and self.g.differentiable

    def gap_gradient(self, v: FloatArray, vstar: FloatArray) -> tuple[FloatArray, FloatArray]:
        if not self.differentiable:
            return super().gap_gradient(v, vstar)
        space = self.space
        assert space is not None
        root = np.sqrt(self.k)
        eta = self.operator.solve(vstar)
        a = root * gradient(space, v)
        b = root * gradient(space, eta)
        ga, gb = self.g.gap_gradient(a, b)
        dv = space.dx * gradient_adjoint(space, root * (ga + b)) - space.dx * vstar
        ds = space.dx * self.operator.solve(gradient_adjoint(space, root * (gb + a))) - space.dx * v
        return dv, ds

    def frozen(self, z: ArrayLike) -> Representative:
        if self.family is None:
            return self
        assert self.space is not None
        return EllipticRepresentative(
            self.space, self.g, conductivity=self.family.cells(self.space, z)
        )

    def smoothed(self, eps: float) -> Representative:
        g = self.g.smoothed(eps)
        if g is self.g:
            return self
        assert self.space is not None
        if self.family is not None:
            return EllipticRepresentative(self.space, g, family=self.family)
        return EllipticRepresentative(self.space, g, conductivity=self.k)


class PivotRepresentative(Representative):
    """dx * sum of Theta(v_i) + Theta*((Lambda r)_i), paired through <Lambda r, v>.

    Its gap vanishes exactly when Lambda r lies in theta(v) at every node, that
    is r = -d^2/dx^2 theta(v) on the grid.
    """

    provenance: Provenance = "pivot"

    def __init__(self, space: DiscreteSpace, potential: ScalarConvex):
        self.space = space
        self.potential = potential
        self.potential_star = potential.conjugate()

    def _lift(self, r: FloatArray) -> FloatArray:
        assert self.space is not None
        return self.space.laplacian.solve(r)

    def _evaluate(self, v: FloatArray, vstar: FloatArray) -> FloatArray:
        eta = self._lift(vstar)
        total = self.potential(v) + self.potential_star(eta)
        return self.space.dx * np.sum(total, axis=-1)  # type: ignore[union-attr,no-any-return]

    def _pairing(self, v: FloatArray, vstar: FloatArray) -> FloatArray:
        return self.space.dx * np.sum(self._lift(vstar) * v, axis=-1)  # type: ignore[union-attr,no-any-return]

    @property
    def differentiable(self) -> bool:
        return self.potential.is_smooth and self.potential_star.is_smooth

    def gap_gradient(self, v: FloatArray, vstar: FloatArray) -> tuple[FloatArray, FloatArray]:
        if not self.differentiable:
            return super().gap_gradient(v, vstar)
        dx = self.space.dx  # type: ignore[union-attr]
        eta = self._lift(vstar)
        dv = dx * (self.potential.derivative(v) - eta)
        ds = dx * self._lift(self.potential_star.derivative(eta) - v)
        return dv, ds

    def smoothed(self, eps: float) -> Representative:
        if self.differentiable:
            return self
        assert self.space is not None
        return PivotRepresentative(self.space, MoreauEnvelope(self.potential.regularized(eps), eps))


def elliptic_representative(
    space: DiscreteSpace,
    g: Representative,
    z_dependent: ConductivityFamily | None = None,
) -> Representative:
    return EllipticRepresentative(space, g, family=z_dependent)


def pivot_representative(space: DiscreteSpace, potential: ScalarConvex) -> Representative:
    return PivotRepresentative(space, potential)
