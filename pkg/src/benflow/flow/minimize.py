"""Null-minimization of the BEN functional.

Accelerated descent with function-value restart and Armijo backtracking, run
in the metric of a time-stepping preconditioner. Linearizing every step gap
around the current point gives a Hessian R^T D R where R is block bidiagonal
in time (diagonal blocks A_k + I/dt, subdiagonal -I/dt) and D_k = w_k dt dx G_k
holds the gap metric of step k. Applying its inverse costs one backward and
one forward sweep of tridiagonal solves. For linear operators it is the exact
Hessian, so a single step reaches the null minimum.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Any, Literal

import numpy as np

from benflow.config import settings
from benflow.errors import ConvergenceError
from benflow.flow.functional import (
    StepRepresentatives,
    assemble_ben,
    ben_value,
    ben_value_and_gradient,
)
from benflow.flow.oracle import implicit_euler_solve
from benflow.flow.operators import Linearization
from benflow.flow.problem import BenProblem
from benflow.flow.trajectory import FloatArray, Trajectory, l2_distance, l2_norm
from benflow.representation.base import Representative
from benflow.spaces import TridiagonalOperator

logger = logging.getLogger(__name__)

PreconditionerKind = Literal["time_stepping", "none"]


@dataclass
class SolveOptions:
    """Tolerances and switches of minimize_ben; defaults come from settings."""

    tol_null: float | None = None
    tol_grad: float = field(default_factory=lambda: settings.tol_grad)
    max_iter: int = field(default_factory=lambda: settings.max_iter)
    smoothing_eps: float = field(default_factory=lambda: settings.smoothing_eps)
    armijo_factor: float = field(default_factory=lambda: settings.armijo_factor)
    preconditioner: PreconditionerKind = "time_stepping"
    momentum: bool = True
    picard_damping: float = field(default_factory=lambda: settings.picard_damping)
    picard_max_outer: int = field(default_factory=lambda: settings.picard_max_outer)
    picard_tol: float = field(default_factory=lambda: settings.picard_tol)
    oracle: bool = True
    timings: bool = False


@dataclass
class SolveReport:
    """Outcome of minimize_ben."""

    minimizer: Trajectory
    value: float
    per_step_gaps: FloatArray
    oracle_distance: float | None
    iterations: int
    converged: bool
    wall_time_ms: float | None = None
    oracle_norm: float | None = None
    outer_iterations: int = 0
    tol_null: float = 0.0
    smoothed: bool = False
    message: str = ""

    @property
    def relative_oracle_distance(self) -> float | None:
        if self.oracle_distance is None or not self.oracle_norm:
            return self.oracle_distance
        return self.oracle_distance / self.oracle_norm

    def to_dict(self) -> dict[str, Any]:
        return {
            "value": self.value,
            "per_step_gaps": [float(g) for g in self.per_step_gaps],
            "oracle_distance": self.oracle_distance,
            "iterations": self.iterations,
            "wall_time_ms": self.wall_time_ms,
            "converged": self.converged,
        }


class TimeSteppingPreconditioner:
    """Inverse of the block-bidiagonal Gauss-Newton model of the functional."""

    def __init__(self, problem: BenProblem, points: FloatArray):
        space, op = problem.space, problem.operator
        self.dt = problem.dt
        self.scale = problem.weights * problem.dt * space.dx
        if op.linear:
            lin = op.linearization(space, points[0])
            lins: list[Linearization] = [lin] * problem.K
        else:
            lins = [op.linearization(space, points[k]) for k in range(problem.K)]
        self.blocks: list[TridiagonalOperator] = [lin.jacobian.shifted(1.0 / self.dt) for lin in lins]
        self.metrics = [lin.metric_inverse for lin in lins]

    def apply(self, g: FloatArray) -> FloatArray:
        K = len(self.blocks)
        y = np.empty_like(g)
        carry = np.zeros(g.shape[1])
        for k in reversed(range(K)):
            y[k] = self.blocks[k].transpose().solve(g[k] + carry)
            carry = y[k] / self.dt
        z = np.array([self.metrics[k](y[k]) / self.scale[k] for k in range(K)])
        x = np.empty_like(g)
        carry = np.zeros(g.shape[1])
        for k in range(K):
            x[k] = self.blocks[k].solve(z[k] + carry)
            carry = x[k] / self.dt
        return x


@dataclass
class _Descent:
    unknowns: FloatArray
    value: float
    iterations: int
    reached_tol: bool
    stationary: bool


def _descend(
    problem: BenProblem,
    reps: StepRepresentatives,
    start: FloatArray,
    opts: SolveOptions,
    tol: float,
    linearize_at: FloatArray | None = None,
) -> _Descent:
    x = start.copy()
    fx = ben_value(problem, x, reps)
    y = x.copy()
    t = 1.0
    step = 1.0
    fixed_precond = None
    if opts.preconditioner == "time_stepping" and (
        problem.operator.linear or linearize_at is not None
    ):
        fixed_precond = TimeSteppingPreconditioner(
            problem, x if linearize_at is None else linearize_at
        )
    it = 0
    while it < opts.max_iter:
        if fx <= tol:
            return _Descent(x, fx, it, True, False)
        fy, g = ben_value_and_gradient(problem, y, reps)
        if not math.isfinite(fy):
            if t == 1.0:
                break
            y, t = x.copy(), 1.0
            continue
        if opts.preconditioner == "time_stepping":
            precond = fixed_precond or TimeSteppingPreconditioner(problem, y)
            d = precond.apply(g)
            step = 1.0
        else:
            d = g
            step = min(1.0, 2.0 * step)
        gd = float(np.sum(g * d))
        if gd <= opts.tol_grad**2:
            if fy < fx:
                x, fx = y, fy
            return _Descent(x, fx, it, fx <= tol, True)
        fn = math.inf
        xn = y
        while step > 1e-14:
            xn = y - step * d
            fn = ben_value(problem, xn, reps)
            if fn <= fy - 1e-4 * step * gd:
                break
            step *= opts.armijo_factor
        it += 1
        if not fn <= fy - 1e-4 * step * gd:
            if t > 1.0:
                y, t = x.copy(), 1.0
                continue
            logger.debug(f"{problem.name}: line search stalled at value {fx:.3e}")
            return _Descent(x, fx, it, fx <= tol, True)
        if opts.momentum and fn > fx:
            y, t = x.copy(), 1.0
            continue
        if opts.momentum:
            t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            y = xn + ((t - 1.0) / t_next) * (xn - x)
            t = t_next
        else:
            y = xn
        x, fx = xn, fn
        logger.debug(f"{problem.name}: iteration {it} value {fx:.6e} step {step:g}")
    return _Descent(x, fx, it, fx <= tol, False)


def _descent_reps(reps: StepRepresentatives, eps: float) -> tuple[StepRepresentatives, bool]:
    """Replace non-differentiable representatives by their smoothed versions."""
    if isinstance(reps, Representative):
        return (reps, False) if reps.differentiable else (reps.smoothed(eps), True)
    smoothed = [rep if rep.differentiable else rep.smoothed(eps) for rep in reps]
    return smoothed, any(a is not b for a, b in zip(smoothed, reps, strict=True))


def default_tol_null(problem: BenProblem) -> float:
    """tol_null_base * (1 + |u0|_H^2)."""
    norm2 = problem.space.dx * float(problem.u0 @ problem.u0)
    return settings.tol_null_base * (1.0 + norm2)


def minimize_ben(
    problem: BenProblem,
    init: Trajectory | None = None,
    opts: SolveOptions | None = None,
) -> SolveReport:
    """Minimize assemble_ben over trajectories with v^0 = u0."""
    opts = opts or SolveOptions()
    init = init or problem.initial_trajectory()
    if not np.array_equal(init.steps[0], problem.u0):
        raise ValueError("initial guess violates the initial condition v^0 = u0")
    tol = opts.tol_null if opts.tol_null is not None else default_tol_null(problem)
    started = time.perf_counter()
    logger.info(f"Solving {problem.name} ({problem.operator.name}, M={problem.space.M}, "
                f"K={problem.K}, weight={problem.weight})")

    rep = problem.representative
    unknowns = np.array(init.steps[1:])
    outer = 0
    smoothed = False
    stationary = False
    if problem.operator.semimonotone:
        frozen_at = unknowns.copy()
        iterations = 0
        value = ben_value(problem, unknowns, rep)
        for outer in range(1, opts.picard_max_outer + 1):
            if value <= tol:
                break
            reps, smoothed = _descent_reps([rep.frozen(z) for z in frozen_at], opts.smoothing_eps)
            inner = _descend(problem, reps, unknowns, opts, 1e-3 * tol, linearize_at=frozen_at)
            iterations += inner.iterations
            unknowns = inner.unknowns
            change = np.linalg.norm(unknowns - frozen_at) / (1.0 + np.linalg.norm(frozen_at))
            value = ben_value(problem, unknowns, rep)
            logger.debug(f"{problem.name}: Picard {outer} change {change:.3e} value {value:.3e}")
            if change <= opts.picard_tol:
                break
            frozen_at = frozen_at + opts.picard_damping * (unknowns - frozen_at)
    else:
        reps, smoothed = _descent_reps(rep, opts.smoothing_eps)
        descent = _descend(problem, reps, unknowns, opts, tol)
        unknowns, iterations, stationary = descent.unknowns, descent.iterations, descent.stationary

    traj = init.with_steps(np.vstack([problem.u0[None, :], unknowns]))
    assembly = assemble_ben(problem, traj)
    converged = assembly.value <= tol or (stationary and smoothed)
    message = "null minimum reached" if assembly.value <= tol else "tolerance not reached"
    if smoothed:
        message += f" (descent on representatives smoothed with eps={opts.smoothing_eps:g})"

    oracle_distance = oracle_norm = None
    if opts.oracle:
        try:
            oracle = implicit_euler_solve(problem)
            oracle_distance = l2_distance(traj, oracle)
            oracle_norm = l2_norm(oracle)
        except ConvergenceError as e:
            logger.warning(f"{problem.name}: implicit-Euler oracle failed: {e}")

    elapsed = (time.perf_counter() - started) * 1e3
    report = SolveReport(
        minimizer=traj,
        value=assembly.value,
        per_step_gaps=assembly.per_step_gaps,
        oracle_distance=oracle_distance,
        iterations=iterations,
        converged=converged,
        wall_time_ms=elapsed if opts.timings else None,
        oracle_norm=oracle_norm,
        outer_iterations=outer,
        tol_null=tol,
        smoothed=smoothed,
        message=message,
    )
    if converged:
        logger.info(f"{problem.name}: value {assembly.value:.3e} after {iterations} iterations")
    else:
        logger.warning(
            f"{problem.name}: not converged, value {assembly.value:.3e} > {tol:.3e} "
            f"after {iterations} iterations"
        )
    return report


@dataclass(frozen=True)
class SmoothingLevel:
    eps: float
    value: float
    oracle_distance: float | None
    iterations: int


def smoothing_study(
    problem: BenProblem,
    eps0: float | None = None,
    levels: int = 4,
    opts: SolveOptions | None = None,
) -> list[SmoothingLevel]:
    """Repeat minimize_ben while halving the smoothing parameter."""
    base = opts or SolveOptions()
    eps = settings.smoothing_eps if eps0 is None else eps0
    out = []
    for _ in range(levels):
        report = minimize_ben(problem, opts=replace(base, smoothing_eps=eps))
        out.append(SmoothingLevel(eps, report.value, report.oracle_distance, report.iterations))
        logger.info(f"{problem.name}: smoothing eps={eps:g} value {report.value:.3e}")
        eps *= 0.5
    return out
