"""Representatives on the scalar carrier (v, v*) in R x R."""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from benflow.config import settings
from benflow.convex.functions import MoreauEnvelope, ScalarConvex
from benflow.convex.graphs import MonotoneGraph, linear_graph
from benflow.errors import CoercivityError, FamilyUndefinedError, RepresentationError
from benflow.representation.base import FloatArray, Provenance, Representative, Topology

logger = logging.getLogger(__name__)

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ParamMonotoneFamily:
    """z -> beta(z, .), a maximal monotone graph for every admissible z."""

    beta: Callable[[float], MonotoneGraph]
    modulus: str = ""
    domain: tuple[float, float] = (-float("inf"), float("inf"))
    name: str = "family"

    def __call__(self, z: float) -> MonotoneGraph:
        lo, hi = self.domain
        if not lo <= z <= hi:
            raise FamilyUndefinedError(f"{self.name} is undefined at z={z} (domain [{lo}, {hi}])")
        return self.beta(float(z))


def multiplier_family(m: Callable[[float], float], name: str = "multiplier") -> ParamMonotoneFamily:
    """beta(z, .) = multiplication by m(z) >= 0."""
    return ParamMonotoneFamily(
        beta=lambda z: linear_graph(m(z)),
        modulus="continuous in z whenever m is",
        name=name,
    )


class FitzpatrickRepresentative(Representative):
    provenance: Provenance = "fitzpatrick"

    def __init__(self, graph: MonotoneGraph):
        self.graph = graph

    def _evaluate(self, v: FloatArray, vstar: FloatArray) -> FloatArray:
        return self.graph.fitzpatrick(v, vstar)


class FenchelRepresentative(Representative):
    """phi(v) + phi*(v*), the canonical representative of the subdifferential."""

    provenance: Provenance = "fenchel"

    def __init__(self, phi: ScalarConvex):
        self.phi = phi
        self.phi_star = phi.conjugate()

    def _evaluate(self, v: FloatArray, vstar: FloatArray) -> FloatArray:
        return self.phi(v) + self.phi_star(vstar)  # type: ignore[no-any-return]

    @property
    def differentiable(self) -> bool:
        return self.phi.is_smooth and self.phi_star.is_smooth

    def gap_gradient(self, v: FloatArray, vstar: FloatArray) -> tuple[FloatArray, FloatArray]:
        if not self.differentiable:
            return super().gap_gradient(v, vstar)
        return self.phi.derivative(v) - vstar, self.phi_star.derivative(vstar) - v

    def smoothed(self, eps: float) -> Representative:
        if self.differentiable:
            return self
        return FenchelRepresentative(MoreauEnvelope(self.phi.regularized(eps), eps))


class FbRepresentative(Representative):
    """b*(a v^2 + v*^2 / a): the Fenchel function of v -> a*v when b = 1/2."""

    provenance: Provenance = "fb_family"

    def __init__(self, a: float, b: float):
        if not a > 0:
            raise RepresentationError(f"need a > 0, got {a}")
        if b < 0.5:
            raise RepresentationError(f"F_b with b={b} < 1/2 represents no operator")
        self.a = float(a)
        self.b = float(b)

    def _evaluate(self, v: FloatArray, vstar: FloatArray) -> FloatArray:
        return self.b * (self.a * v * v + vstar * vstar / self.a)

    @property
    def differentiable(self) -> bool:
        return True

    def gap_gradient(self, v: FloatArray, vstar: FloatArray) -> tuple[FloatArray, FloatArray]:
        return 2.0 * self.b * self.a * v - vstar, 2.0 * self.b * vstar / self.a - v


class InfConvolution(Representative):
    """inf over z* of g1(v, v* - z*) + g2(v, z*), representing alpha1 + alpha2.

    The infimum is searched on ``zgrid`` and refined by golden section in the
    bracket around the best grid node. A minimizer on the grid boundary means
    the search window does not see the coercive growth and is an error.
    """

    provenance: Provenance = "infconv"

    def __init__(self, g1: Representative, g2: Representative, zgrid: ArrayLike | None = None):
        if g1.carrier != "scalar" or g2.carrier != "scalar":
            raise RepresentationError("inf-convolution is implemented for scalar carriers")
        if zgrid is None:
            bound = settings.zstar_bound
            zgrid = np.linspace(-bound, bound, settings.zstar_points)
        self.zgrid = np.asarray(zgrid, dtype=float)
        if self.zgrid.ndim != 1 or self.zgrid.size < 3 or np.any(np.diff(self.zgrid) <= 0):
            raise RepresentationError("z* grid must be increasing with at least 3 nodes")
        self.g1 = g1
        self.g2 = g2
        self.convex = g1.convex and g2.convex

    def _objective(self, v: FloatArray, vstar: FloatArray, z: FloatArray) -> FloatArray:
        return self.g1._evaluate(v, vstar - z) + self.g2._evaluate(v, z)

    def _evaluate(self, v: FloatArray, vstar: FloatArray) -> FloatArray:
        v, vstar = np.broadcast_arrays(v, vstar)
        zg = self.zgrid
        table = self._objective(v[..., None], vstar[..., None], zg)
        i = np.argmin(table, axis=-1)
        best = np.take_along_axis(table, i[..., None], axis=-1)[..., 0]
        on_edge = ((i == 0) | (i == zg.size - 1)) & np.isfinite(best)
        if np.any(on_edge):
            raise CoercivityError(
                f"inf-convolution minimum on the z* grid boundary [{zg[0]:g}, {zg[-1]:g}]"
            )
        a = zg[np.maximum(i - 1, 0)]
        b = zg[np.minimum(i + 1, zg.size - 1)]
        c = b - _GOLDEN * (b - a)
        d = a + _GOLDEN * (b - a)
        fc = self._objective(v, vstar, c)
        fd = self._objective(v, vstar, d)
        for _ in range(40):
            left = fc <= fd
            b = np.where(left, d, b)
            a = np.where(left, a, c)
            c_new = b - _GOLDEN * (b - a)
            d_new = a + _GOLDEN * (b - a)
            c, d = np.where(left, c_new, d), np.where(left, c, d_new)
            fc_new = self._objective(v, vstar, c)
            fd_new = self._objective(v, vstar, d)
            fc, fd = np.where(left, fc_new, fd), np.where(left, fc, fd_new)
        return np.minimum(best, np.minimum(fc, fd))


class SemimonoRepresentative(Representative):
    """(v, v*) -> Fitzpatrick function of beta(v, .) at (v, v*); not convex."""

    provenance: Provenance = "semimono"
    convex = False
    topology: Topology = "intermediate"

    def __init__(self, family: ParamMonotoneFamily):
        self.family = family

    def _evaluate(self, v: FloatArray, vstar: FloatArray) -> FloatArray:
        v, vstar = np.broadcast_arrays(v, vstar)
        out = np.empty(v.shape)
        for z in np.unique(v):
            mask = v == z
            out[mask] = self.family(float(z)).fitzpatrick(z, vstar[mask])
        return out

    def frozen(self, z: ArrayLike) -> Representative:
        return FitzpatrickRepresentative(self.family(float(np.asarray(z))))


# =============================================================================
# Constructors
# =============================================================================


def fitzpatrick_eval(graph: MonotoneGraph, v: float, vstar: float) -> float:
    """sup over (w, z) in the graph of v*w - z(w - v); +inf on an unbounded tail."""
    result = graph.fitzpatrick_sup(v, vstar)
    if result.unbounded is not None:
        logger.debug(f"Fitzpatrick sup of {graph.name} unbounded along the {result.unbounded} tail")
    return result.value


def fitzpatrick_representative(graph: MonotoneGraph) -> Representative:
    return FitzpatrickRepresentative(graph)


def fenchel_representative(phi: ScalarConvex) -> Representative:
    return FenchelRepresentative(phi)


def fb_family(a_coeff: float, b: float) -> Representative:
    return FbRepresentative(a_coeff, b)


def inf_convolution(
    g1: Representative, g2: Representative, zstar_grid: ArrayLike | None = None
) -> Representative:
    return InfConvolution(g1, g2, zstar_grid)


def semimono_representative(family: ParamMonotoneFamily) -> Representative:
    return SemimonoRepresentative(family)
