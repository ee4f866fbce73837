"""Scalar convex functions with conjugates and proximal maps.

Every variant evaluates elementwise on arrays, returns +inf outside its domain,
and knows its own conjugate in closed form, except GridSampled whose conjugate
comes from the linear-time Legendre transform of its samples.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections.abc import Sequence
from typing import overload

import numpy as np
from numpy.typing import ArrayLike, NDArray

from benflow.convex.graphs import MonotoneGraph, linear_graph, sign_graph
from benflow.errors import ImproperFunctionError

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

_INF = float("inf")


class ScalarConvex(ABC):
    """A proper, closed, convex function of one real variable."""

    name: str = "convex"

    @abstractmethod
    def _value(self, v: FloatArray) -> FloatArray: ...

    @abstractmethod
    def _prox(self, tau: float, w: FloatArray) -> FloatArray: ...

    @abstractmethod
    def conjugate(self) -> ScalarConvex:
        """Return the Legendre-Fenchel conjugate."""

    @property
    def domain(self) -> tuple[float, float]:
        """Closure of the effective domain."""
        return -_INF, _INF

    @property
    def is_smooth(self) -> bool:
        return False

    def _derivative(self, v: FloatArray) -> FloatArray:
        raise ImproperFunctionError(f"{self.name} is not differentiable")

    def subdifferential(self) -> MonotoneGraph | None:
        """The subdifferential as a MonotoneGraph, when it is piecewise linear or quadratic."""
        return None

    def regularized(self, eps: float) -> ScalarConvex:
        """Return phi + eps*v^2/2."""
        return QuadraticPerturbation(self, eps)

    @overload
    def __call__(self, v: float) -> float: ...
    @overload
    def __call__(self, v: FloatArray) -> FloatArray: ...

    def __call__(self, v: ArrayLike) -> FloatArray | float:
        arr = np.asarray(v, dtype=float)
        out = self._value(arr)
        return float(out) if arr.ndim == 0 else out

    @overload
    def prox(self, tau: float, w: float) -> float: ...
    @overload
    def prox(self, tau: float, w: FloatArray) -> FloatArray: ...

    def prox(self, tau: float, w: ArrayLike) -> FloatArray | float:
        """argmin_v phi(v) + (v - w)^2 / (2 tau)."""
        if not tau > 0:
            raise ValueError(f"prox step must be positive, got {tau}")
        arr = np.asarray(w, dtype=float)
        out = self._prox(tau, arr)
        return float(out) if arr.ndim == 0 else out

    @overload
    def derivative(self, v: float) -> float: ...
    @overload
    def derivative(self, v: FloatArray) -> FloatArray: ...

    def derivative(self, v: ArrayLike) -> FloatArray | float:
        arr = np.asarray(v, dtype=float)
        out = self._derivative(arr)
        return float(out) if arr.ndim == 0 else out

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


# =============================================================================
# Closed-form variants
# =============================================================================


class Quadratic(ScalarConvex):
    """a*v^2/2 with a > 0."""

    def __init__(self, a: float = 1.0):
        if not a > 0:
            raise ImproperFunctionError(f"Quadratic needs a > 0, got {a}")
        self.a = float(a)
        self.name = f"quadratic({self.a:g})"

    @property
    def is_smooth(self) -> bool:
        return True

    def _value(self, v: FloatArray) -> FloatArray:
        return 0.5 * self.a * v * v

    def _derivative(self, v: FloatArray) -> FloatArray:
        return self.a * v

    def _prox(self, tau: float, w: FloatArray) -> FloatArray:
        return w / (1.0 + self.a * tau)

    def conjugate(self) -> ScalarConvex:
        return Quadratic(1.0 / self.a)

    def subdifferential(self) -> MonotoneGraph:
        return linear_graph(self.a)

    def regularized(self, eps: float) -> ScalarConvex:
        return Quadratic(self.a + eps)


class PowerP(ScalarConvex):
    """|v|^p / p with p > 1."""

    def __init__(self, p: float):
        if not p > 1:
            raise ImproperFunctionError(f"PowerP needs p > 1, got {p}")
        self.p = float(p)
        self.name = f"power({self.p:g})"

    @property
    def is_smooth(self) -> bool:
        return True

    def _value(self, v: FloatArray) -> FloatArray:
        return np.abs(v) ** self.p / self.p  # type: ignore[no-any-return]

    def _derivative(self, v: FloatArray) -> FloatArray:
        return np.sign(v) * np.abs(v) ** (self.p - 1.0)  # type: ignore[no-any-return]

    def _prox(self, tau: float, w: FloatArray) -> FloatArray:
        # r + tau*r^(p-1) = |w| is increasing in r on [0, |w|]
        target = np.abs(w)
        lo = np.zeros_like(target)
        hi = target.copy()
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            below = mid + tau * mid ** (self.p - 1.0) <= target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return np.sign(w) * 0.5 * (lo + hi)  # type: ignore[no-any-return]

    def conjugate(self) -> ScalarConvex:
        return PowerP(self.p / (self.p - 1.0))


class Abs(ScalarConvex):
    """|v|."""

    name = "abs"

    def _value(self, v: FloatArray) -> FloatArray:
        return np.abs(v)

    def _prox(self, tau: float, w: FloatArray) -> FloatArray:
        return np.sign(w) * np.maximum(np.abs(w) - tau, 0.0)  # type: ignore[no-any-return]

    def conjugate(self) -> ScalarConvex:
        return IndicatorInterval(-1.0, 1.0)

    def subdifferential(self) -> MonotoneGraph:
        return sign_graph()


class IndicatorInterval(ScalarConvex):
    """0 on [lo, hi], +inf elsewhere."""

    def __init__(self, lo: float, hi: float):
        if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
            raise ImproperFunctionError(f"need finite lo <= hi, got [{lo}, {hi}]")
        self.lo = float(lo)
        self.hi = float(hi)
        self.name = f"indicator[{self.lo:g},{self.hi:g}]"

    @property
    def domain(self) -> tuple[float, float]:
        return self.lo, self.hi

    def _value(self, v: FloatArray) -> FloatArray:
        return np.where((v >= self.lo) & (v <= self.hi), 0.0, _INF)

    def _prox(self, tau: float, w: FloatArray) -> FloatArray:
        return np.clip(w, self.lo, self.hi)

    def conjugate(self) -> ScalarConvex:
        if self.lo == -1.0 and self.hi == 1.0:
            return Abs()
        return PiecewiseLinear(knots=(0.0,), slopes=(self.lo, self.hi))

    def subdifferential(self) -> MonotoneGraph:
        pts = np.array([[self.lo, 0.0], [self.hi, 0.0]])
        return MonotoneGraph(pts, np.zeros(1), _INF, _INF, f"normal-cone{self.name}")


# =============================================================================
# Graph potentials
# =============================================================================


class GraphPotential(ScalarConvex):
    """Primitive of a maximal monotone graph, or (dual=True) its conjugate.

    The primal value is offset + integral of the graph selection from ``anchor``.
    The dual value at s is s*w - primal(w) for any w with s in graph(w).
    """

    def __init__(
        self,
        graph: MonotoneGraph,
        dual: bool = False,
        anchor: float | None = None,
        offset: float = 0.0,
    ):
        if not graph.is_maximal:
            raise ImproperFunctionError(f"graph {graph.name!r} is not maximal monotone")
        self.graph = graph
        self.dual = dual
        lo, hi = graph.domain
        self.anchor = float(np.clip(0.0, lo, hi)) if anchor is None else float(anchor)
        self.offset = float(offset)
        self._anchor_primitive = float(graph.primitive(self.anchor))
        self.name = f"{'dual ' if dual else ''}potential({graph.name})"

    @property
    def domain(self) -> tuple[float, float]:
        return self.graph.range if self.dual else self.graph.domain

    @property
    def is_smooth(self) -> bool:
        return self.graph.strictly_increasing if self.dual else self.graph.single_valued

    def _primal(self, w: FloatArray) -> FloatArray:
        return self.offset + self.graph.primitive(w) - self._anchor_primitive

    def _value(self, v: FloatArray) -> FloatArray:
        if not self.dual:
            return self._primal(v)
        w = self.graph.inverse_selection(v)
        finite = np.isfinite(w)
        safe = np.where(finite, w, self.anchor)
        return np.where(finite, v * safe - self._primal(safe), _INF)

    def _derivative(self, v: FloatArray) -> FloatArray:
        if not self.is_smooth:
            return super()._derivative(v)
        return self.graph.inverse_selection(v) if self.dual else self.graph.selection(v)

    def _prox(self, tau: float, w: FloatArray) -> FloatArray:
        if not self.dual:
            return self.graph.resolvent(tau, w)
        return w - tau * self.graph.resolvent(1.0 / tau, w / tau)  # type: ignore[no-any-return]

    def conjugate(self) -> ScalarConvex:
        return GraphPotential(self.graph, not self.dual, self.anchor, self.offset)

    def subdifferential(self) -> MonotoneGraph | None:
        if not self.dual:
            return self.graph
        try:
            return self.graph.inverse()
        except ImproperFunctionError:
            return None

    def regularized(self, eps: float) -> ScalarConvex:
        if self.dual:
            return QuadraticPerturbation(self, eps)
        return GraphPotential(
            self.graph.regularized(eps),
            anchor=self.anchor,
            offset=self.offset + 0.5 * eps * self.anchor**2,
        )


class PiecewiseLinear(GraphPotential):
    """Convex piecewise-linear function from its breakpoints and slopes.

    ``slopes`` has one more entry than ``knots``; ``value_at_zero`` fixes the
    additive constant.
    """

    def __init__(
        self,
        knots: Sequence[float],
        slopes: Sequence[float],
        value_at_zero: float = 0.0,
    ):
        knots_a = np.asarray(knots, dtype=float)
        slopes_a = np.asarray(slopes, dtype=float)
        if slopes_a.shape != (knots_a.size + 1,):
            raise ImproperFunctionError("need exactly one more slope than knots")
        if np.any(np.diff(knots_a) <= 0) or np.any(np.diff(slopes_a) < 0):
            raise ImproperFunctionError("knots must increase and slopes must not decrease")
        if knots_a.size == 0:
            pts = np.array([[0.0, slopes_a[0]]])
        else:
            pts = np.column_stack([np.repeat(knots_a, 2), np.repeat(slopes_a, 2)[1:-1]])
        graph = MonotoneGraph(pts, np.zeros(pts.shape[0] - 1), 0.0, 0.0, "steps")
        super().__init__(graph, anchor=0.0, offset=value_at_zero)
        self.knots = tuple(float(k) for k in knots_a)
        self.slopes = tuple(float(s) for s in slopes_a)
        self.name = f"piecewise-linear(knots={list(self.knots)}, slopes={list(self.slopes)})"


class GridSampled(ScalarConvex):
    """Linear interpolant of convex samples; +inf outside the finite samples.

    ``truncated`` marks a conjugate produced from samples: it is exact only on
    the slope range the samples cover and is not extrapolated beyond it.
    """

    def __init__(self, xs: ArrayLike, values: ArrayLike, truncated: bool = False):
        xs_a = np.asarray(xs, dtype=float)
        vals = np.asarray(values, dtype=float)
        if xs_a.ndim != 1 or xs_a.shape != vals.shape:
            raise ImproperFunctionError("xs and values must be 1D arrays of equal length")
        if np.any(np.diff(xs_a) <= 0):
            raise ImproperFunctionError("sample points must be strictly increasing")
        finite = np.isfinite(vals)
        if np.any(np.isnan(vals)) or np.any(vals == -_INF):
            raise ImproperFunctionError("sampled values must be real or +inf")
        if not np.any(finite):
            raise ImproperFunctionError("sampled function is +inf everywhere (improper)")
        idx = np.flatnonzero(finite)
        if idx[-1] - idx[0] + 1 != idx.size:
            raise ImproperFunctionError("finite samples must form one contiguous block")
        self.xs = xs_a[idx]
        self.values = vals[idx]
        slopes = np.diff(self.values) / np.diff(self.xs)
        scale = 1.0 + (np.max(np.abs(slopes)) if slopes.size else 0.0)
        if np.any(np.diff(slopes) < -1e-12 * scale):
            raise ImproperFunctionError("sampled function is not convex")
        self.slopes = np.maximum.accumulate(slopes) if slopes.size else slopes
        self.truncated = truncated
        self.name = f"sampled[{self.xs[0]:g},{self.xs[-1]:g}]"

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.xs[0]), float(self.xs[-1])

    def _value(self, v: FloatArray) -> FloatArray:
        inside = (v >= self.xs[0]) & (v <= self.xs[-1])
        return np.where(inside, np.interp(v, self.xs, self.values), _INF)

    def subdifferential(self) -> MonotoneGraph:
        if self.xs.size == 1:
            pts = np.array([[self.xs[0], 0.0]])
        else:
            w = np.repeat(self.xs, 2)[1:-1]
            z = np.repeat(self.slopes, 2)
            pts = np.column_stack([w, z])
        return MonotoneGraph(pts, np.zeros(pts.shape[0] - 1), _INF, _INF, self.name)

    def _prox(self, tau: float, w: FloatArray) -> FloatArray:
        return self.subdifferential().resolvent(tau, w)

    def conjugate(self) -> ScalarConvex:
        if self.xs.size == 1:
            return PiecewiseLinear(knots=(), slopes=(float(self.xs[0]),),
                                   value_at_zero=-float(self.values[0]))
        # Linear-time Legendre transform: on the slope of edge j the sup sits at x_j.
        cs, first = np.unique(self.slopes, return_index=True)
        fstar = cs * self.xs[first] - self.values[first]
        logger.warning(
            f"Conjugate of {self.name} is truncated to slopes [{cs[0]:.6g}, {cs[-1]:.6g}]"
        )
        return GridSampled(cs, fstar, truncated=True)


# =============================================================================
# Smoothing
# =============================================================================


class MoreauEnvelope(ScalarConvex):
    """min_w phi(w) + (v - w)^2 / (2 eps)."""

    def __init__(self, base: ScalarConvex, eps: float):
        if not eps > 0:
            raise ValueError(f"smoothing parameter must be positive, got {eps}")
        self.base = base
        self.eps = float(eps)
        self.name = f"moreau({base.name}, {self.eps:g})"

    @property
    def is_smooth(self) -> bool:
        return True

    def _value(self, v: FloatArray) -> FloatArray:
        p = self.base.prox(self.eps, v)
        return self.base(p) + (v - p) ** 2 / (2.0 * self.eps)

    def _derivative(self, v: FloatArray) -> FloatArray:
        return (v - self.base.prox(self.eps, v)) / self.eps

    def _prox(self, tau: float, w: FloatArray) -> FloatArray:
        inner = self.base.prox(tau + self.eps, w)
        return w + tau / (tau + self.eps) * (inner - w)

    def conjugate(self) -> ScalarConvex:
        return QuadraticPerturbation(self.base.conjugate(), self.eps)


class QuadraticPerturbation(ScalarConvex):
    """phi(v) + eps*v^2/2."""

    def __init__(self, base: ScalarConvex, eps: float):
        if not eps > 0:
            raise ValueError(f"perturbation must be positive, got {eps}")
        self.base = base
        self.eps = float(eps)
        self.name = f"{base.name}+{self.eps:g}q"

    @property
    def domain(self) -> tuple[float, float]:
        return self.base.domain

    @property
    def is_smooth(self) -> bool:
        return self.base.is_smooth

    def _value(self, v: FloatArray) -> FloatArray:
        return self.base(v) + 0.5 * self.eps * v * v

    def _derivative(self, v: FloatArray) -> FloatArray:
        return self.base.derivative(v) + self.eps * v

    def _prox(self, tau: float, w: FloatArray) -> FloatArray:
        shrink = 1.0 + tau * self.eps
        return self.base.prox(tau / shrink, w / shrink)

    def conjugate(self) -> ScalarConvex:
        return MoreauEnvelope(self.base.conjugate(), self.eps)

    def regularized(self, eps: float) -> ScalarConvex:
        return QuadraticPerturbation(self.base, self.eps + eps)


# =============================================================================
# Functional API
# =============================================================================


def conjugate(phi: ScalarConvex) -> ScalarConvex:
    return phi.conjugate()


def fenchel_gap(phi: ScalarConvex, v: ArrayLike, vstar: ArrayLike) -> FloatArray | float:
    """phi(v) + phi*(v*) - v*v; nonnegative, zero exactly when v* is in the subdifferential."""
    v_a = np.asarray(v, dtype=float)
    vs_a = np.asarray(vstar, dtype=float)
    out = phi(v_a) + phi.conjugate()(vs_a) - v_a * vs_a
    return float(out) if np.ndim(out) == 0 else out


def in_subdifferential(phi: ScalarConvex, v: float, vstar: float, tol: float = 1e-9) -> bool:
    return bool(fenchel_gap(phi, v, vstar) <= tol)


def prox(phi: ScalarConvex, tau: float, w: ArrayLike) -> FloatArray | float:
    return phi.prox(tau, np.asarray(w, dtype=float))


def moreau_smooth(phi: ScalarConvex, eps: float) -> ScalarConvex:
    return MoreauEnvelope(phi, eps)
