"""The discrete BEN functional and its time-weighted identity.

For a candidate v^0..v^K with v^0 = u0, step k contributes the gap of the
representative at (v^k, r_k), r_k = h^k - (v^k - v^{k-1})/dt, weighted by
w_k*dt. Right-endpoint evaluation makes each summand an exact Fenchel or
Fitzpatrick gap, so the implicit-Euler trajectory is a zero of the sum.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from benflow.errors import DimensionMismatchError, RepresentationError
from benflow.flow.problem import BenProblem, Weight, time_weights
from benflow.flow.trajectory import FloatArray, Trajectory, discrete_dt_all
from benflow.representation.base import Representative
from benflow.spaces import DiscreteSpace

logger = logging.getLogger(__name__)

StepRepresentatives = Representative | Sequence[Representative]


@dataclass(frozen=True)
class BenAssembly:
    """Value of the functional and its per-step gaps; infinite_step is 1-based."""

    value: float
    per_step_gaps: FloatArray
    infinite_step: int | None = None


def residuals(problem: BenProblem, steps: FloatArray) -> FloatArray:
    """r_k = h^k - (v^k - v^{k-1})/dt for k = 1..K, from the full (K+1, M) array."""
    return problem.h[1:] - np.diff(steps, axis=0) / problem.dt  # type: ignore[no-any-return]


def step_gaps(reps: StepRepresentatives, v: FloatArray, r: FloatArray) -> FloatArray:
    """Gap of each step's representative at (v[k], r[k])."""
    if isinstance(reps, Representative):
        return np.atleast_1d(np.asarray(reps.gap(v, r), dtype=float))
    return np.array([float(rep.gap(v[k], r[k])) for k, rep in enumerate(reps)])


def step_gap_gradients(
    reps: StepRepresentatives, v: FloatArray, r: FloatArray
) -> tuple[FloatArray, FloatArray]:
    if isinstance(reps, Representative):
        return reps.gap_gradient(v, r)
    parts = [rep.gap_gradient(v[k], r[k]) for k, rep in enumerate(reps)]
    return np.array([p[0] for p in parts]), np.array([p[1] for p in parts])


def _check_candidate(problem: BenProblem, traj: Trajectory) -> None:
    if traj.steps.shape != (problem.K + 1, problem.space.M):
        raise DimensionMismatchError(
            f"candidate shape {traj.steps.shape} does not match problem "
            f"({problem.K + 1}, {problem.space.M})"
        )
    if not np.array_equal(traj.steps[0], problem.u0):
        raise ValueError("candidate violates the initial condition v^0 = u0")


def assemble_ben(
    problem: BenProblem, traj: Trajectory, reps: StepRepresentatives | None = None
) -> BenAssembly:
    """sum_k w_k dt gap_k; +inf with the first offending step when a gap is infinite."""
    _check_candidate(problem, traj)
    reps = problem.representative if reps is None else reps
    r = residuals(problem, traj.steps)
    gaps = step_gaps(reps, traj.steps[1:], r)
    infinite = np.flatnonzero(~np.isfinite(gaps))
    if infinite.size:
        step = int(infinite[0]) + 1
        logger.debug(f"{problem.name}: representative infinite at step {step}")
        return BenAssembly(float("inf"), gaps, step)
    value = float(np.sum(problem.weights * problem.dt * gaps))
    return BenAssembly(value, gaps)


def ben_value_and_gradient(
    problem: BenProblem, unknowns: FloatArray, reps: StepRepresentatives
) -> tuple[float, FloatArray]:
    """Functional value and gradient with respect to v^1..v^K (v^0 = u0 is eliminated)."""
    dt = problem.dt
    steps = np.vstack([problem.u0[None, :], unknowns])
    r = residuals(problem, steps)
    gaps = step_gaps(reps, unknowns, r)
    c = problem.weights * dt
    value = float(np.sum(c * gaps))
    if not np.isfinite(value):
        return float("inf"), np.zeros_like(unknowns)
    gv, gr = step_gap_gradients(reps, unknowns, r)
    grad = c[:, None] * (gv - gr / dt)
    grad[:-1] += c[1:, None] * gr[1:] / dt
    return value, grad


def ben_value(problem: BenProblem, unknowns: FloatArray, reps: StepRepresentatives) -> float:
    steps = np.vstack([problem.u0[None, :], unknowns])
    gaps = step_gaps(reps, unknowns, residuals(problem, steps))
    value = float(np.sum(problem.weights * problem.dt * gaps))
    return value if np.isfinite(value) else float("inf")


# =============================================================================
# Weighted time-derivative identity
# =============================================================================


def weighted_dt_identity_check(
    space: DiscreteSpace,
    traj: Trajectory,
    T: float | None = None,
    weight: Weight = "linear_decay",
) -> tuple[float, float]:
    """Both sides of the integration-by-parts identity for <D_t v, v>.

    linear_decay: sum w_k dt <D_t v^k, v^k> against 1/2 sum dt |v^k|^2 - T/2 |v^0|^2.
    lebesgue: sum dt <D_t v^k, v^k> against 1/2 |v^K|^2 - 1/2 |v^0|^2.
    The two sides agree up to O(dt) for smooth trajectories.
    """
    if traj.space.M != space.M:
        raise DimensionMismatchError(f"trajectory lives on M={traj.space.M}, expected {space.M}")
    T = traj.T if T is None else T
    dt = T / traj.K
    w = time_weights(weight, T, traj.K)
    dv = discrete_dt_all(traj)
    pair = space.dx * np.sum(dv * traj.steps[1:], axis=-1)
    lhs = float(np.sum(w * dt * pair))
    sq = space.dx * np.sum(traj.steps**2, axis=-1)
    if weight == "linear_decay":
        rhs = 0.5 * float(np.sum(dt * sq[1:])) - 0.5 * T * float(sq[0])
    else:
        rhs = 0.5 * float(sq[-1]) - 0.5 * float(sq[0])
    return lhs, rhs


def energy_telescoping(traj: Trajectory) -> tuple[float, float]:
    """sum dt <D_t v^k, v^k> and its exact value 1/2|v^K|^2 - 1/2|v^0|^2 + 1/2 sum |v^k - v^{k-1}|^2."""
    dx = traj.space.dx
    dv = discrete_dt_all(traj)
    lhs = float(traj.dt * dx * np.sum(dv * traj.steps[1:]))
    sq = dx * np.sum(traj.steps**2, axis=-1)
    jumps = dx * np.sum(np.diff(traj.steps, axis=0) ** 2)
    return lhs, 0.5 * float(sq[-1] - sq[0]) + 0.5 * float(jumps)


def assemble_ben_integrated(problem: BenProblem, traj: Trajectory) -> float:
    """sum w_k dt [f(v^k, r_k) - <h^k, v^k>] plus the right side of the weighted identity.

    Equals assemble_ben(...).value + rhs - lhs for representatives using the H
    pairing.
    """
    rep = problem.representative
    if rep.provenance == "pivot":
        raise RepresentationError("the integrated form needs the H pairing")
    _check_candidate(problem, traj)
    r = residuals(problem, traj.steps)
    values = np.atleast_1d(np.asarray(rep.evaluate(traj.steps[1:], r), dtype=float))
    hv = problem.space.dx * np.sum(problem.h[1:] * traj.steps[1:], axis=-1)
    c = problem.weights * problem.dt
    _, rhs = weighted_dt_identity_check(problem.space, traj, problem.T, problem.weight)
    return float(np.sum(c * (values - hv))) + rhs
