"""Representative functions: the common interface.

A representative f of an operator alpha satisfies f(v, v*) >= <v*, v> with
equality exactly on the graph of alpha. Scalar representatives act
elementwise on broadcast arrays; grid representatives act on the last axis of
(..., M) arrays and return one value per leading index.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from benflow.errors import RepresentationError
from benflow.spaces import DiscreteSpace, TridiagonalOperator

FloatArray = NDArray[np.float64]
Carrier = Literal["scalar", "grid"]
# intended topology of the carrier; all of them coincide on a grid
Topology = Literal["weak", "intermediate", "strong"]
Provenance = Literal[
    "fitzpatrick", "fenchel", "fb_family", "shifted", "infconv", "semimono", "elliptic", "pivot"
]


def _finish(out: FloatArray) -> FloatArray | float:
    return float(out) if np.ndim(out) == 0 else out


class Representative(ABC):
    """Evaluatable f(v, v*) with gap and membership queries."""

    provenance: Provenance
    convex: bool = True
    topology: Topology = "weak"
    space: DiscreteSpace | None = None

    @property
    def carrier(self) -> Carrier:
        return "scalar" if self.space is None else "grid"

    @abstractmethod
    def _evaluate(self, v: FloatArray, vstar: FloatArray) -> FloatArray: ...

    def _pairing(self, v: FloatArray, vstar: FloatArray) -> FloatArray:
        if self.space is None:
            return v * vstar
        return self.space.dx * np.sum(v * vstar, axis=-1)  # type: ignore[no-any-return]

    def _arrays(self, v: ArrayLike, vstar: ArrayLike) -> tuple[FloatArray, FloatArray]:
        va = np.asarray(v, dtype=float)
        vsa = np.asarray(vstar, dtype=float)
        if self.space is not None:
            for arr in (va, vsa):
                if arr.ndim == 0 or arr.shape[-1] != self.space.M:
                    raise RepresentationError(
                        f"grid representative needs trailing dimension {self.space.M}, "
                        f"got {arr.shape}"
                    )
        return va, vsa

    def evaluate(self, v: ArrayLike, vstar: ArrayLike) -> FloatArray | float:
        return _finish(self._evaluate(*self._arrays(v, vstar)))

    def pairing(self, v: ArrayLike, vstar: ArrayLike) -> FloatArray | float:
        return _finish(self._pairing(*self._arrays(v, vstar)))

    def _gap(self, v: FloatArray, vstar: FloatArray) -> FloatArray:
        return self._evaluate(v, vstar) - self._pairing(v, vstar)

    def gap(self, v: ArrayLike, vstar: ArrayLike) -> FloatArray | float:
        """f(v, v*) - <v*, v>; +inf where f is infinite."""
        return _finish(self._gap(*self._arrays(v, vstar)))

    def contains(self, v: ArrayLike, vstar: ArrayLike, tol: float = 1e-9) -> bool:
        """Membership of (v, v*) in the represented graph, through the gap."""
        return bool(np.all(np.asarray(self.gap(v, vstar)) <= tol))

    @property
    def differentiable(self) -> bool:
        return False

    def gap_gradient(self, v: FloatArray, vstar: FloatArray) -> tuple[FloatArray, FloatArray]:
        """Partial derivatives of the gap with respect to the raw entries of v and v*."""
        raise RepresentationError(f"{type(self).__name__} has no gap gradient")

    def frozen(self, z: ArrayLike) -> Representative:
        """Representative of beta(z, .) for a semi-monotone family; self otherwise."""
        return self

    def smoothed(self, eps: float) -> Representative:
        """A differentiable approximation, or self when none is needed."""
        return self

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.provenance} {self.carrier}>"


class ShiftedRepresentative(Representative):
    """g(v, v*) = f(v, v* - Lv) + <Lv, v>, representing alpha + L.

    The gap of g at (v, v*) is the gap of f at (v, v* - Lv), so convexity and
    differentiability carry over from f. L is a nonnegative scalar on a scalar
    carrier or a tridiagonal operator on a grid carrier.
    """

    provenance: Provenance = "shifted"

    def __init__(self, base: Representative, linear: float | TridiagonalOperator):
        if base.provenance == "pivot":
            raise RepresentationError("shifts need the H pairing; pivot representatives differ")
        if isinstance(linear, TridiagonalOperator):
            if base.space is None or linear.size != base.space.M:
                raise RepresentationError("grid shift needs a grid representative of equal size")
        elif not linear >= 0:
            raise RepresentationError(f"scalar shift must be nonnegative, got {linear}")
        self.base = base
        self.linear = linear
        self.space = base.space
        self.convex = base.convex

    def _apply(self, v: FloatArray) -> FloatArray:
        if isinstance(self.linear, TridiagonalOperator):
            return self.linear.apply(v)
        return self.linear * v

    def _apply_transpose(self, g: FloatArray) -> FloatArray:
        if isinstance(self.linear, TridiagonalOperator):
            return self.linear.transpose().apply(g)
        return self.linear * g

    def _gap(self, v: FloatArray, vstar: FloatArray) -> FloatArray:
        return self.base._gap(v, vstar - self._apply(v))

    def _evaluate(self, v: FloatArray, vstar: FloatArray) -> FloatArray:
        return self._gap(v, vstar) + self._pairing(v, vstar)

    @property
    def differentiable(self) -> bool:
        return self.base.differentiable

    def gap_gradient(self, v: FloatArray, vstar: FloatArray) -> tuple[FloatArray, FloatArray]:
        gv, gs = self.base.gap_gradient(v, vstar - self._apply(v))
        return gv - self._apply_transpose(gs), gs

    def frozen(self, z: ArrayLike) -> Representative:
        inner = self.base.frozen(z)
        return self if inner is self.base else ShiftedRepresentative(inner, self.linear)

    def smoothed(self, eps: float) -> Representative:
        inner = self.base.smoothed(eps)
        return self if inner is self.base else ShiftedRepresentative(inner, self.linear)


def shift_by_linear(
    f: Representative, linear: float | TridiagonalOperator
) -> Representative:
    """Representative of alpha + L from a representative of alpha."""
    if not isinstance(linear, TridiagonalOperator) and linear == 0:
        return f
    return ShiftedRepresentative(f, linear)
