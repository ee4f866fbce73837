"""BenProblem: one flow instance D_t u + alpha(u) = h, u(0) = u0 on (0, T)."""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike

from benflow.errors import DimensionMismatchError, RepresentationError
from benflow.flow.operators import FlowOperator
from benflow.flow.trajectory import FloatArray, Trajectory
from benflow.representation.base import Representative
from benflow.spaces import DiscreteSpace

logger = logging.getLogger(__name__)

Weight = Literal["lebesgue", "linear_decay"]

SourceLike = ArrayLike | Callable[[float, FloatArray], ArrayLike] | None


def time_weights(weight: Weight, T: float, K: int) -> FloatArray:
    """Per-step weights: 1, or T - t at the step midpoints for dmu = (T - t)dt."""
    if weight == "lebesgue":
        return np.ones(K)
    if weight == "linear_decay":
        dt = T / K
        return T - (np.arange(1, K + 1) - 0.5) * dt  # type: ignore[no-any-return]
    raise ValueError(f"unknown weight {weight!r}")


@dataclass(frozen=True, eq=False)
class BenProblem:
    """Data of a discrete flow problem and its representative."""

    space: DiscreteSpace
    operator: FlowOperator
    u0: FloatArray
    h: FloatArray
    T: float
    K: int
    weight: Weight = "lebesgue"
    name: str = field(default="problem")

    def __post_init__(self) -> None:
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if self.K < 1:
            raise ValueError(f"K must be at least 1, got {self.K}")
        time_weights(self.weight, self.T, self.K)
        u0 = np.array(self.u0, dtype=float)
        h = np.array(self.h, dtype=float)
        if u0.shape != (self.space.M,):
            raise DimensionMismatchError(f"u0 needs shape ({self.space.M},), got {u0.shape}")
        if h.shape != (self.K + 1, self.space.M):
            raise DimensionMismatchError(
                f"h needs shape ({self.K + 1}, {self.space.M}), got {h.shape}"
            )
        u0.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "u0", u0)
        object.__setattr__(self, "h", h)
        self._certify()

    def _certify(self, trials: int = 4) -> None:
        """Spot-check gap >= 0 of the representative at random grid pairs."""
        rng = np.random.default_rng(0)
        rep = self.representative
        v = rng.standard_normal((trials, self.space.M))
        vs = rng.standard_normal((trials, self.space.M))
        gaps = np.atleast_1d(np.asarray(rep.gap(v, vs), dtype=float))
        scale = 1.0 + np.abs(np.atleast_1d(np.asarray(rep.pairing(v, vs), dtype=float)))
        if np.any(gaps < -1e-9 * scale):
            raise RepresentationError(
                f"representative of {self.operator.name} has negative gap {gaps.min():.3e}"
            )

    @property
    def dt(self) -> float:
        return self.T / self.K

    @cached_property
    def representative(self) -> Representative:
        return self.operator.representative(self.space)

    @cached_property
    def weights(self) -> FloatArray:
        return time_weights(self.weight, self.T, self.K)

    def initial_trajectory(self) -> Trajectory:
        """The candidate constant in time, v^k = u0."""
        return Trajectory.constant(self.space, self.T, self.K, self.u0)

    def with_weight(self, weight: Weight) -> BenProblem:
        return BenProblem(self.space, self.operator, self.u0, self.h, self.T, self.K, weight,
                          self.name)


def make_problem(
    space: DiscreteSpace,
    operator: FlowOperator,
    u0: ArrayLike | Callable[[FloatArray], ArrayLike],
    h: SourceLike = None,
    T: float = 0.1,
    K: int = 32,
    weight: Weight = "lebesgue",
    name: str = "problem",
) -> BenProblem:
    """Build a BenProblem from arrays or functions of x and (t, x)."""
    u0_values = space.sample(u0).values if callable(u0) else np.asarray(u0, dtype=float)
    if h is None:
        h_values = np.zeros((K + 1, space.M))
    elif callable(h):
        h_values = Trajectory.from_function(space, T, K, h).steps
    else:
        arr = np.asarray(h, dtype=float)
        h_values = np.tile(arr, (K + 1, 1)) if arr.shape == (space.M,) else arr
    logger.debug(f"Built problem {name}: M={space.M}, K={K}, T={T}, weight={weight}")
    return BenProblem(space, operator, u0_values, h_values, float(T), int(K), weight, name)
