"""Structural stability experiments over sequences of perturbed diffusion problems.

Every member n of an OperatorSequence is solved by minimize_ben, as is the
declared limit problem. The experiment then checks that the solutions stay
bounded, that their distance to the limit solution shrinks, that the limit
solution solves the limit problem, and that the pairs (u_n, h_n - D_t u_n)
converge in the nonlinear weak topology.
"""

from __future__ import annotations

import asyncio
import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from benflow.config import settings
from benflow.errors import CoercivityError, StabilityAborted
from benflow.flow.functional import residuals
from benflow.flow.minimize import SolveOptions, SolveReport, default_tol_null, minimize_ben
from benflow.flow.problem import BenProblem, SourceLike, Weight
from benflow.flow.trajectory import FloatArray, l2_distance, l2_norm
from benflow.models.builders import build_diffusion_problem
from benflow.models.laws import DiffusionLaw
from benflow.spaces import DiscreteSpace
from benflow.stability.diagnostics import PairingDiagnostic, pairing_convergence_diagnostic

logger = logging.getLogger(__name__)

DEFAULT_NS = (4, 8, 16, 32)
FIXED_POINT_TOL = 1e-8
BOUND_FACTOR = 10.0


@dataclass(frozen=True)
class SequenceMember:
    n: int
    law: DiffusionLaw
    u0: FloatArray
    h: SourceLike = None


@dataclass(frozen=True, eq=False)
class OperatorSequence:
    """Perturbed laws and data indexed by n, with the declared limit."""

    space: DiscreteSpace
    members: tuple[SequenceMember, ...]
    limit: SequenceMember
    T: float = 0.1
    K: int = 32
    weight: Weight = "lebesgue"
    name: str = "sequence"

    def __post_init__(self) -> None:
        ns = [m.n for m in self.members]
        if not ns or any(b <= a for a, b in zip(ns, ns[1:], strict=False)):
            raise ValueError(f"sequence indices must be increasing, got {ns}")
        k_min, _ = self.bounds
        if not k_min > 0:
            raise CoercivityError(f"sequence {self.name} is not equi-coercive: k_min = {k_min:g}")

    @property
    def ns(self) -> list[int]:
        return [m.n for m in self.members]

    @property
    def bounds(self) -> tuple[float, float]:
        """Shared (k_min, k_max) over the members and the limit."""
        laws = [m.law for m in self.members] + [self.limit.law]
        return min(law.bounds[0] for law in laws), max(law.bounds[1] for law in laws)

    def problem(self, member: SequenceMember) -> BenProblem:
        return build_diffusion_problem(
            self.space, member.law, member.u0, member.h, self.T, self.K, self.weight,
            name=f"{self.name}[n={member.n}]" if member is not self.limit else f"{self.name}[limit]",
        )


@dataclass
class MemberResult:
    n: int
    error: float
    ben_value: float
    pairing_gap: float
    norm: float
    oracle_distance: float | None
    iterations: int
    converged: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "error": self.error,
            "ben_value": self.ben_value,
            "pairing_gap": self.pairing_gap,
            "norm": self.norm,
            "oracle_distance": self.oracle_distance,
            "iterations": self.iterations,
            "converged": self.converged,
        }


@dataclass
class StabilityReport:
    """Per-n errors and verdicts of a stability experiment."""

    name: str
    members: list[MemberResult] = field(default_factory=list)
    limit_value: float = float("nan")
    limit_tol: float = 0.0
    limit_norm: float = float("nan")
    bounded: bool = False
    errors_decrease: bool = False
    limit_solves: bool = False
    pairing: PairingDiagnostic | None = None
    aborted: bool = False
    message: str = ""

    @property
    def errors(self) -> list[float]:
        return [m.error for m in self.members]

    @property
    def passed(self) -> bool:
        pi_ok = self.pairing is not None and self.pairing.pi_convergent
        return (
            not self.aborted and self.bounded and self.errors_decrease
            and self.limit_solves and pi_ok
        )

    def rows(self) -> list[dict[str, float]]:
        return [
            {"n": m.n, "error": m.error, "ben_value": m.ben_value, "pairing_gap": m.pairing_gap}
            for m in self.members
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "members": [m.to_dict() for m in self.members],
            "errors": self.errors,
            "limit_value": self.limit_value,
            "limit_tol": self.limit_tol,
            "limit_norm": self.limit_norm,
            "bounded": self.bounded,
            "errors_decrease": self.errors_decrease,
            "limit_solves": self.limit_solves,
            "pairing": None if self.pairing is None else self.pairing.to_dict(),
            "aborted": self.aborted,
            "passed": self.passed,
            "message": self.message,
        }


# =============================================================================
# Sequence constructors
# =============================================================================


def _sine(x: FloatArray) -> FloatArray:
    return np.sin(np.pi * x)  # type: ignore[no-any-return]


def _initial(space: DiscreteSpace, u0: ArrayLike | Callable[[FloatArray], ArrayLike]) -> FloatArray:
    return space.sample(u0).values if callable(u0) else np.asarray(u0, dtype=float)


def conductivity_sequence(
    space: DiscreteSpace,
    ns: Sequence[int] = DEFAULT_NS,
    a: float = 1.0,
    u0: ArrayLike | Callable[[FloatArray], ArrayLike] = _sine,
    T: float = 0.1,
    K: int = 32,
    weight: Weight = "lebesgue",
) -> OperatorSequence:
    """k_n(s) = 1 + a*s^2*n/(n+1) converging to 1 + a*s^2."""
    u = _initial(space, u0)
    members = tuple(
        SequenceMember(n, DiffusionLaw("quadratic", a=a * n / (n + 1)), u) for n in ns
    )
    limit = SequenceMember(0, DiffusionLaw("quadratic", a=a), u)
    return OperatorSequence(space, members, limit, T, K, weight, "conductivity")


def constant_sequence(
    space: DiscreteSpace,
    law: DiffusionLaw | None = None,
    ns: Sequence[int] = DEFAULT_NS,
    u0: ArrayLike | Callable[[FloatArray], ArrayLike] = _sine,
    T: float = 0.1,
    K: int = 32,
    weight: Weight = "lebesgue",
) -> OperatorSequence:
    """The same law and data for every n."""
    law = law or DiffusionLaw()
    u = _initial(space, u0)
    members = tuple(SequenceMember(n, law, u) for n in ns)
    return OperatorSequence(space, members, SequenceMember(0, law, u), T, K, weight, "constant")


def data_sequence(
    space: DiscreteSpace,
    law: DiffusionLaw | None = None,
    ns: Sequence[int] = DEFAULT_NS,
    u0: ArrayLike | Callable[[FloatArray], ArrayLike] = _sine,
    amplitude: float = 1.0,
    T: float = 0.1,
    K: int = 32,
    weight: Weight = "lebesgue",
) -> OperatorSequence:
    """u0_n = u0 + (amplitude/n) sin(2 pi x) with a fixed law."""
    law = law or DiffusionLaw()
    u = _initial(space, u0)
    bump = np.sin(2.0 * np.pi * space.nodes)
    members = tuple(SequenceMember(n, law, u + (amplitude / n) * bump) for n in ns)
    return OperatorSequence(space, members, SequenceMember(0, law, u), T, K, weight, "data")


# =============================================================================
# Running
# =============================================================================


def _residual(problem: BenProblem, report: SolveReport) -> FloatArray:
    return residuals(problem, report.minimizer.steps)


async def run_stability_experiment_async(
    seq: OperatorSequence,
    opts: SolveOptions | None = None,
    jobs: int | None = None,
) -> StabilityReport:
    """Solve every member and the limit concurrently, then assemble the verdicts.

    Raises:
        StabilityAborted: If a solve does not converge; the exception carries
            the report of the members that did.
    """
    opts = opts or SolveOptions()
    limit_problem = seq.problem(seq.limit)
    problems = [seq.problem(m) for m in seq.members]
    semaphore = asyncio.Semaphore(jobs or settings.get_jobs())

    async def solve(problem: BenProblem) -> SolveReport:
        async with semaphore:
            logger.info(f"Solving {problem.name}")
            return await asyncio.to_thread(minimize_ben, problem, None, opts)

    logger.info(f"Stability experiment {seq.name}: n={seq.ns}, jobs={jobs or settings.get_jobs()}")
    limit_report, *reports = await asyncio.gather(
        solve(limit_problem), *(solve(p) for p in problems)
    )

    report = StabilityReport(name=seq.name)
    report.limit_tol = default_tol_null(limit_problem)
    report.limit_value = limit_report.value
    report.limit_norm = l2_norm(limit_report.minimizer)
    r_limit = _residual(limit_problem, limit_report)

    failed = []
    pairs_v, pairs_r = [], []
    for member, problem, solved in zip(seq.members, problems, reports, strict=True):
        if not solved.converged:
            failed.append(member.n)
            continue
        r = _residual(problem, solved)
        u = solved.minimizer.steps[1:]
        pairs_v.append(u)
        pairs_r.append(r)
        pairing = problem.dt * problem.space.dx * float(np.sum(r * u))
        limit_pairing = limit_problem.dt * limit_problem.space.dx * float(
            np.sum(r_limit * limit_report.minimizer.steps[1:])
        )
        report.members.append(
            MemberResult(
                n=member.n,
                error=l2_distance(solved.minimizer, limit_report.minimizer),
                ben_value=solved.value,
                pairing_gap=abs(pairing - limit_pairing),
                norm=l2_norm(solved.minimizer),
                oracle_distance=solved.oracle_distance,
                iterations=solved.iterations,
                converged=solved.converged,
            )
        )

    if failed or not limit_report.converged:
        report.aborted = True
        which = [*failed, "limit"] if not limit_report.converged else failed
        report.message = f"non-converged solves for n={which}"
        logger.warning(f"Stability experiment {seq.name} aborted: {report.message}")
        raise StabilityAborted(report.message, report)

    errors = report.errors
    norms = [m.norm for m in report.members]
    report.bounded = bool(np.all(np.isfinite(norms))) and max(norms) <= BOUND_FACTOR * (
        1.0 + report.limit_norm
    )
    report.errors_decrease = errors[-1] < errors[0] or max(errors) <= FIXED_POINT_TOL
    report.limit_solves = report.limit_value <= report.limit_tol
    report.pairing = pairing_convergence_diagnostic(
        seq.space, pairs_v, pairs_r, limit_report.minimizer.steps[1:], r_limit,
        dt=limit_problem.dt,
    )
    report.message = "passed" if report.passed else "verdicts failed"
    log = logger.info if report.passed else logger.warning
    log(f"Stability experiment {seq.name}: errors {[f'{e:.3e}' for e in errors]}, {report.message}")
    return report


def run_stability_experiment(
    seq: OperatorSequence,
    opts: SolveOptions | None = None,
    jobs: int | None = None,
) -> StabilityReport:
    """Synchronous wrapper around run_stability_experiment_async."""
    return asyncio.run(run_stability_experiment_async(seq, opts, jobs))
