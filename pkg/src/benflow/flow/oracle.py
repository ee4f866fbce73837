"""Implicit-Euler reference solver."""

from __future__ import annotations

import logging

import numpy as np

from benflow.flow.problem import BenProblem
from benflow.flow.trajectory import Trajectory

logger = logging.getLogger(__name__)


def implicit_euler_solve(problem: BenProblem) -> Trajectory:
    """Solve (v^k - v^{k-1})/dt + alpha(v^k) = h^k step by step from v^0 = u0."""
    space, op, dt = problem.space, problem.operator, problem.dt
    steps = np.empty((problem.K + 1, space.M))
    steps[0] = problem.u0
    for k in range(1, problem.K + 1):
        b = steps[k - 1] + dt * problem.h[k]
        steps[k] = op.resolvent(space, b, dt, guess=steps[k - 1])
    logger.debug(f"{problem.name}: implicit Euler finished {problem.K} steps")
    return Trajectory(space, problem.T, steps)
