"""Diffusion laws k(u) and their Kirchhoff transforms."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import cumulative_trapezoid

from benflow.config import settings
from benflow.convex.graphs import MonotoneGraph, linear_graph
from benflow.errors import CoercivityError, ImproperFunctionError
from benflow.representation.grid import ConductivityFamily

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]
LawKind = Literal["constant", "affine", "quadratic", "grid"]


@dataclass(frozen=True, eq=False)
class DiffusionLaw:
    """Conductivity k(s) evaluated at s clipped to the working range.

    constant: k = k0; affine: k = k0 + a*s; quadratic: k = k0 + a*s^2;
    grid: piecewise-linear through (nodes, values).
    """

    kind: LawKind = "constant"
    a: float = 0.0
    k0: float = 1.0
    nodes: tuple[float, ...] = ()
    values: tuple[float, ...] = ()
    working_range: tuple[float, float] = (-5.0, 5.0)
    name: str = field(default="")

    def __post_init__(self) -> None:
        lo, hi = self.working_range
        if not lo < hi:
            raise ImproperFunctionError(f"working range must satisfy lo < hi, got {self.working_range}")
        if self.kind == "grid":
            xs = np.asarray(self.nodes, dtype=float)
            if xs.size < 2 or xs.shape != np.shape(self.values) or np.any(np.diff(xs) <= 0):
                raise ImproperFunctionError("a grid law needs at least two increasing nodes with values")
        elif self.kind not in ("constant", "affine", "quadratic"):
            raise ImproperFunctionError(f"unknown diffusion law {self.kind!r}")
        if not self.name:
            object.__setattr__(self, "name", self._default_name())

    def _default_name(self) -> str:
        if self.kind == "constant":
            return f"k={self.k0:g}"
        if self.kind == "affine":
            return f"k={self.k0:g}{self.a:+g}u"
        if self.kind == "quadratic":
            return f"k={self.k0:g}{self.a:+g}u^2"
        return f"k=grid[{len(self.nodes)}]"

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant" or (self.kind != "grid" and self.a == 0.0)

    def _raw(self, s: FloatArray) -> FloatArray:
        if self.kind == "constant":
            return np.full(s.shape, self.k0)
        if self.kind == "affine":
            return self.k0 + self.a * s  # type: ignore[no-any-return]
        if self.kind == "quadratic":
            return self.k0 + self.a * s * s  # type: ignore[no-any-return]
        return np.interp(s, self.nodes, self.values)  # type: ignore[no-any-return]

    def __call__(self, s: ArrayLike) -> FloatArray:
        lo, hi = self.working_range
        return self._raw(np.clip(np.asarray(s, dtype=float), lo, hi))

    @cached_property
    def bounds(self) -> tuple[float, float]:
        """(k_min, k_max) over the working range."""
        lo, hi = self.working_range
        candidates = [lo, hi]
        if lo < 0 < hi:
            candidates.append(0.0)
        candidates.extend(x for x in self.nodes if lo < x < hi)
        k = self(np.array(candidates))
        return float(k.min()), float(k.max())

    def check_coercive(self) -> None:
        k_min, _ = self.bounds
        if not k_min > 0:
            raise CoercivityError(
                f"diffusion law {self.name} reaches k_min = {k_min:g} <= 0 on {self.working_range}"
            )

    def family(self) -> ConductivityFamily:
        """The frozen-argument conductivity family z -> k(z) used on the grid."""
        self.check_coercive()
        return ConductivityFamily(self.__call__, self.name)

    @cached_property
    def _grid_cumulative(self) -> FloatArray:
        return cumulative_trapezoid(self.values, self.nodes, initial=0.0)  # type: ignore[no-any-return]

    def _antiderivative(self, s: FloatArray) -> FloatArray:
        """Some antiderivative of the unclipped law, valid inside the working range."""
        if self.kind == "constant":
            return self.k0 * s
        if self.kind == "affine":
            return self.k0 * s + 0.5 * self.a * s * s  # type: ignore[no-any-return]
        if self.kind == "quadratic":
            return self.k0 * s + self.a * s**3 / 3.0  # type: ignore[no-any-return]
        xs = np.asarray(self.nodes, dtype=float)
        ks = np.asarray(self.values, dtype=float)
        c = np.clip(s, xs[0], xs[-1])
        j = np.clip(np.searchsorted(xs, c, side="right") - 1, 0, xs.size - 2)
        d = c - xs[j]
        h = xs[j + 1] - xs[j]
        inner = self._grid_cumulative[j] + ks[j] * d + (ks[j + 1] - ks[j]) * d * d / (2.0 * h)
        return inner + np.interp(c, xs, ks) * (s - c)  # type: ignore[no-any-return]

    def primitive(self, s: ArrayLike) -> FloatArray:
        """theta(s) = integral of k from 0 to s."""
        lo, hi = self.working_range
        s = np.asarray(s, dtype=float)
        c = np.clip(s, lo, hi)
        zero = np.clip(0.0, lo, hi)
        base = self._antiderivative(c) + self(c) * (s - c)
        origin = self._antiderivative(np.asarray(zero)) + self(np.asarray(zero)) * (0.0 - zero)
        return base - origin  # type: ignore[no-any-return]


def kirchhoff_transform(law: DiffusionLaw, nodes: int | None = None) -> MonotoneGraph:
    """Graph of theta(v) = integral of k from 0 to v.

    Args:
        law: A coercive diffusion law.
        nodes: Breakpoints of the piecewise-linear graph used when k is not
            constant or affine. Defaults to ``settings.kirchhoff_nodes``.

    Returns:
        A strictly increasing maximal monotone graph. Constant and affine laws
        are represented exactly (a quadratic segment between linear tails).
    """
    law.check_coercive()
    lo, hi = law.working_range
    k_lo, k_hi = (float(k) for k in law(np.array([lo, hi])))
    name = f"kirchhoff({law.name})"
    if law.is_constant:
        return linear_graph(law.k0, name)
    if law.kind == "affine":
        pts = np.column_stack([[lo, hi], law.primitive(np.array([lo, hi]))])
        return MonotoneGraph(pts, np.array([0.5 * law.a]), k_lo, k_hi, name)
    n = nodes or settings.kirchhoff_nodes
    ws = np.linspace(lo, hi, n)
    if lo < 0 < hi:
        ws = np.union1d(ws, [0.0])
    pts = np.column_stack([ws, law.primitive(ws)])
    logger.debug(f"Kirchhoff graph of {law.name} on {ws.size} nodes over [{lo:g}, {hi:g}]")
    return MonotoneGraph(pts, np.zeros(ws.size - 1), k_lo, k_hi, name)
