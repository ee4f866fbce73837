"""Time-discrete trajectories v^0..v^K on a DiscreteSpace."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from benflow.errors import DimensionMismatchError
from benflow.spaces import DiscreteSpace, GridFunction

FloatArray = NDArray[np.float64]


@dataclass(frozen=True, eq=False)
class Trajectory:
    """K+1 grid functions at t_k = k*dt, dt = T/K."""

    space: DiscreteSpace
    T: float
    steps: FloatArray

    def __post_init__(self) -> None:
        steps = np.array(self.steps, dtype=float)
        if steps.ndim != 2 or steps.shape[0] < 2 or steps.shape[1] != self.space.M:
            raise DimensionMismatchError(
                f"trajectory needs shape (K+1, {self.space.M}) with K >= 1, got {steps.shape}"
            )
        if not self.T > 0:
            raise ValueError(f"final time must be positive, got {self.T}")
        steps.setflags(write=False)
        object.__setattr__(self, "steps", steps)

    @property
    def K(self) -> int:
        return int(self.steps.shape[0] - 1)

    @property
    def dt(self) -> float:
        return self.T / self.K

    @property
    def times(self) -> FloatArray:
        return np.arange(self.K + 1, dtype=float) * self.dt

    def step(self, k: int) -> GridFunction:
        return GridFunction(self.space, self.steps[k])

    def with_steps(self, steps: ArrayLike) -> Trajectory:
        return Trajectory(self.space, self.T, np.asarray(steps, dtype=float))

    @classmethod
    def constant(cls, space: DiscreteSpace, T: float, K: int, u0: ArrayLike) -> Trajectory:
        u0 = np.asarray(u0, dtype=float)
        return cls(space, T, np.tile(u0, (K + 1, 1)))

    @classmethod
    def from_function(
        cls,
        space: DiscreteSpace,
        T: float,
        K: int,
        fn: Callable[[float, FloatArray], ArrayLike],
    ) -> Trajectory:
        """Sample fn(t, x) at every time level and interior node."""
        times = np.arange(K + 1, dtype=float) * (T / K)
        rows = [np.broadcast_to(np.asarray(fn(t, space.nodes), float), (space.M,)) for t in times]
        return cls(space, T, np.vstack(rows))


def discrete_dt(traj: Trajectory, k: int) -> GridFunction:
    """Backward difference (v^k - v^{k-1}) / dt for 1 <= k <= K."""
    if not 1 <= k <= traj.K:
        raise IndexError(f"step index {k} outside 1..{traj.K}")
    return GridFunction(traj.space, (traj.steps[k] - traj.steps[k - 1]) / traj.dt)


def discrete_dt_all(traj: Trajectory) -> FloatArray:
    """All backward differences as a (K, M) array."""
    return np.diff(traj.steps, axis=0) / traj.dt  # type: ignore[no-any-return]


def l2_norm(traj: Trajectory) -> float:
    """Discrete L^2(Q) norm over the steps 1..K."""
    return float(np.sqrt(traj.dt * traj.space.dx * np.sum(traj.steps[1:] ** 2)))


def l2_distance(a: Trajectory, b: Trajectory) -> float:
    if a.steps.shape != b.steps.shape:
        raise DimensionMismatchError(f"trajectory shapes differ: {a.steps.shape} vs {b.steps.shape}")
    return float(np.sqrt(a.dt * a.space.dx * np.sum((a.steps[1:] - b.steps[1:]) ** 2)))


def trajectory_rows(traj: Trajectory) -> list[dict[str, float]]:
    """Rows (t, x, u) for every time level and interior node."""
    x = traj.space.nodes
    return [
        {"t": float(t), "x": float(xi), "u": float(u)}
        for t, row in zip(traj.times, traj.steps, strict=True)
        for xi, u in zip(x, row, strict=True)
    ]
