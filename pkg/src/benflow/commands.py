"""Runners behind ``benflow run``: one function per configured command.

Each runner turns a validated RunConfig into a CommandResult holding the JSON
report, the CSV tables, and the exit code. ``execute`` writes them to disk.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from benflow import __version__
from benflow.config import settings
from benflow.convex.functions import (
    Abs,
    GraphPotential,
    IndicatorInterval,
    PowerP,
    Quadratic,
    ScalarConvex,
    conjugate,
    fenchel_gap,
)
from benflow.convex.graphs import (
    MonotoneGraph,
    identity_graph,
    linear_graph,
    plateau_graph,
    sign_graph,
)
from benflow.errors import (
    BenflowError,
    CoercivityError,
    ConfigError,
    ImproperFunctionError,
    NonConvergentFamilyError,
    RepresentationError,
    StabilityAborted,
)
from benflow.flow.minimize import SolveOptions, minimize_ben
from benflow.flow.problem import BenProblem
from benflow.flow.trajectory import FloatArray, trajectory_rows
from benflow.models.builders import (
    build_convection_problem,
    build_diffusion_problem,
    build_stefan_problem,
    stefan_fields,
    stefan_graph,
)
from benflow.models.convection import ConvectionField
from benflow.models.laws import DiffusionLaw, kirchhoff_transform
from benflow.reports import emit_report, validate_solve_report, write_csv
from benflow.representation.base import Representative
from benflow.representation.certify import certify_representative, dump_rows
from benflow.representation.scalar import (
    fb_family,
    fenchel_representative,
    fitzpatrick_representative,
)
from benflow.schema import RunConfig
from benflow.spaces import DiscreteSpace
from benflow.stability.experiment import (
    OperatorSequence,
    StabilityReport,
    conductivity_sequence,
    constant_sequence,
    data_sequence,
    run_stability_experiment,
)
from benflow.stability.gamma import estimate_limit_integrand

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3
EXIT_IO = 4
EXIT_UNKNOWN_COMMAND = 5

GAMMA_TOL = 1e-6


@dataclass
class Table:
    rows: list[dict[str, Any]]
    columns: tuple[str, ...]


@dataclass
class CommandResult:
    """Report, tables and verdict of one command."""

    command: str
    report: dict[str, Any]
    tables: dict[str, Table] = field(default_factory=dict)
    summary: dict[str, Any] = field(default_factory=dict)
    ok: bool = True
    exit_code: int = EXIT_OK
    message: str = ""


def _header(cfg: RunConfig) -> dict[str, Any]:
    return {
        "benflow_version": __version__,
        "command": cfg.command,
        "schema_version": cfg.schema_version,
        "seed": cfg.seed,
    }


def solve_options(cfg: RunConfig) -> SolveOptions:
    """SolveOptions from the [solver] section; unset fields keep the settings defaults."""
    s = cfg.solver
    overrides = {
        k: v
        for k, v in {
            "tol_grad": s.tol_grad,
            "max_iter": s.max_iter,
            "smoothing_eps": s.smoothing_eps,
        }.items()
        if v is not None
    }
    return SolveOptions(
        tol_null=s.tol_null,
        preconditioner=s.preconditioner,
        momentum=s.momentum,
        oracle=s.oracle,
        timings=cfg.output.timings,
        **overrides,
    )


# =============================================================================
# conjugate
# =============================================================================


def build_function(cfg: RunConfig) -> ScalarConvex:
    f = cfg.function
    if f.kind == "quadratic":
        return Quadratic(f.a)
    if f.kind == "power":
        return PowerP(f.p)
    if f.kind == "abs":
        return Abs()
    return IndicatorInterval(f.lo, f.hi)


def _max_deviation(a: FloatArray, b: FloatArray) -> float:
    if np.any(np.isfinite(a) != np.isfinite(b)):
        return float("inf")
    both = np.isfinite(a)
    return float(np.max(np.abs(a[both] - b[both]), initial=0.0))


def run_conjugate(cfg: RunConfig) -> CommandResult:
    f = cfg.function
    phi = build_function(cfg)
    phistar = conjugate(phi)
    s = np.linspace(-f.box, f.box, f.samples)
    values = np.asarray(phi(s), dtype=float)
    dual = np.asarray(phistar(s), dtype=float)
    biconjugate_error = _max_deviation(np.asarray(conjugate(phistar)(s), dtype=float), values)

    rng = np.random.default_rng(cfg.seed)
    v = rng.uniform(-f.box, f.box, f.samples)
    vs = rng.uniform(-f.box, f.box, f.samples)
    min_gap = float(np.min(fenchel_gap(phi, v, vs)))

    ok = biconjugate_error <= 1e-8 and min_gap >= -1e-9
    report = {
        **_header(cfg),
        "function": phi.name,
        "conjugate": phistar.name,
        "samples": f.samples,
        "biconjugate_error": biconjugate_error,
        "fenchel_young_min_gap": min_gap,
        "passed": ok,
    }
    rows = [
        {"s": float(a), "phi": float(b), "phistar": float(c)}
        for a, b, c in zip(s, values, dual, strict=True)
    ]
    return CommandResult(
        "conjugate",
        report,
        {"conjugate.csv": Table(rows, ("s", "phi", "phistar"))},
        {"function": phi.name, "conjugate": phistar.name,
         "biconjugate error": biconjugate_error, "min Fenchel-Young gap": min_gap},
        ok,
    )


# =============================================================================
# represent
# =============================================================================


def build_graph(cfg: RunConfig) -> MonotoneGraph:
    r = cfg.represent
    if r.graph == "identity":
        return identity_graph()
    if r.graph == "sign":
        return sign_graph()
    if r.graph == "linear":
        return linear_graph(r.slope)
    if r.graph == "plateau":
        return plateau_graph(r.width, r.slope)
    return kirchhoff_transform(r.law.build())


def run_represent(cfg: RunConfig) -> CommandResult:
    r = cfg.represent
    graph = build_graph(cfg)
    fenchel = fenchel_representative(GraphPotential(graph))
    rep: Representative = fitzpatrick_representative(graph) if r.kind == "fitzpatrick" else fenchel
    cert = certify_representative(
        rep, graph, compare_with=fenchel if r.kind == "fitzpatrick" else None,
        box=r.box, points=r.points,
    )

    random_min_gap = None
    if r.random_samples:
        rng = np.random.default_rng(cfg.seed)
        v = rng.uniform(-r.box, r.box, r.random_samples)
        vs = rng.uniform(-r.box, r.box, r.random_samples)
        random_min_gap = float(np.min(rep.gap(v, vs)))

    ok = cert.passed and (random_min_gap is None or random_min_gap >= -1e-9)
    report = {
        **_header(cfg),
        "graph": graph.name,
        "kind": r.kind,
        "certification": cert.to_dict(),
        "random_samples": r.random_samples,
        "random_min_gap": random_min_gap,
        "passed": ok,
    }
    return CommandResult(
        "represent",
        report,
        {"represent.csv": Table(dump_rows(rep, r.box, r.points), ("v", "vstar", "f", "gap"))},
        {"graph": graph.name, "kind": r.kind, "min gap": cert.min_gap,
         "max gap on graph": cert.graph_max_gap, "passed": ok},
        ok,
    )


# =============================================================================
# solve
# =============================================================================


def _initial(cfg: RunConfig) -> Callable[[FloatArray], FloatArray] | None:
    m = cfg.model
    if m.initial == "stefan":
        return None
    if m.initial == "zero":
        return np.zeros_like
    amplitude = m.amplitude

    def u0(x: FloatArray) -> FloatArray:
        return amplitude * np.sin(np.pi * x)  # type: ignore[no-any-return]

    return u0


def _velocity(cfg: RunConfig, space: DiscreteSpace) -> ConvectionField:
    scale = cfg.model.velocity_scale
    if cfg.model.velocity == "constant":
        return ConvectionField.constant(space, scale)
    return ConvectionField.from_function(space, lambda x: -scale * (x - 0.5), name="compressive")


def build_problem(cfg: RunConfig) -> BenProblem:
    """The BenProblem described by the [space], [time] and [model] sections."""
    m = cfg.model
    space = DiscreteSpace(cfg.space.M)
    T, K, weight = cfg.time.T, cfg.time.K, cfg.time.weight
    h = None if m.source == 0.0 else np.full(space.M, m.source)
    u0 = _initial(cfg)
    try:
        if m.kind == "stefan":
            return build_stefan_problem(space, m.latent_heat, m.eps, u0, h, T, K, weight)
        if u0 is None:
            raise ConfigError(f"initial = 'stefan' needs model kind 'stefan', got {m.kind!r}")
        if m.kind == "heat":
            law = DiffusionLaw(k0=m.law.k0, name="heat")
            return build_diffusion_problem(space, law, u0, h, T, K, weight)
        law = m.law.build()
        if m.kind == "quasilinear":
            return build_diffusion_problem(space, law, u0, h, T, K, weight)
        if m.kind == "kirchhoff":
            return build_diffusion_problem(space, law, u0, h, T, K, weight, "kirchhoff")
        return build_convection_problem(space, law, _velocity(cfg, space), u0, h, T, K, weight)
    except ConfigError:
        raise
    except (BenflowError, ValueError) as e:
        raise ConfigError(f"cannot build {m.kind} problem: {e}") from e


def run_solve(cfg: RunConfig) -> CommandResult:
    problem = build_problem(cfg)
    solved = minimize_ben(problem, opts=solve_options(cfg))
    report = validate_solve_report(solved.to_dict())

    tables: dict[str, Table] = {}
    if cfg.output.trajectory_csv:
        tables["trajectory.csv"] = Table(trajectory_rows(solved.minimizer), ("t", "x", "u"))
    if cfg.model.kind == "stefan":
        enthalpy, temperature = stefan_fields(
            solved.minimizer, stefan_graph(cfg.model.latent_heat, cfg.model.eps)
        )
        x = problem.space.nodes
        tables["fields.csv"] = Table(
            [
                {"t": float(t), "x": float(xi), "enthalpy": float(e), "temperature": float(th)}
                for t, e_row, th_row in zip(solved.minimizer.times, enthalpy, temperature,
                                            strict=True)
                for xi, e, th in zip(x, e_row, th_row, strict=True)
            ],
            ("t", "x", "enthalpy", "temperature"),
        )
    return CommandResult(
        "solve",
        report,
        tables,
        {"problem": problem.name, "value": solved.value, "tolerance": solved.tol_null,
         "iterations": solved.iterations, "oracle distance": solved.oracle_distance,
         "converged": solved.converged},
        solved.converged,
        EXIT_OK if solved.converged else EXIT_NOT_CONVERGED,
        solved.message,
    )


# =============================================================================
# stability
# =============================================================================


def build_sequence(cfg: RunConfig) -> OperatorSequence:
    st = cfg.stability
    space = DiscreteSpace(cfg.space.M)
    T, K, weight = cfg.time.T, cfg.time.K, cfg.time.weight
    try:
        if st.sequence == "conductivity":
            return conductivity_sequence(space, st.ns, st.a, T=T, K=K, weight=weight)
        if st.sequence == "constant":
            return constant_sequence(space, st.law.build(), st.ns, T=T, K=K, weight=weight)
        return data_sequence(
            space, st.law.build(), st.ns, amplitude=st.amplitude, T=T, K=K, weight=weight
        )
    except (BenflowError, ValueError) as e:
        raise ConfigError(f"cannot build {st.sequence} sequence: {e}") from e


def _stability_result(cfg: RunConfig, report: StabilityReport, exit_code: int) -> CommandResult:
    return CommandResult(
        "stability",
        {**_header(cfg), **report.to_dict()},
        {"errors.csv": Table(report.rows(), ("n", "error", "ben_value", "pairing_gap"))},
        {"sequence": report.name, "errors": [f"{e:.3e}" for e in report.errors],
         "bounded": report.bounded, "errors decrease": report.errors_decrease,
         "limit solves": report.limit_solves, "passed": report.passed},
        report.passed,
        exit_code,
        report.message,
    )


def run_stability(cfg: RunConfig, jobs: int | None = None) -> CommandResult:
    seq = build_sequence(cfg)
    try:
        report = run_stability_experiment(seq, solve_options(cfg), jobs)
    except StabilityAborted as e:
        assert isinstance(e.report, StabilityReport)
        return _stability_result(cfg, e.report, EXIT_NOT_CONVERGED)
    return _stability_result(cfg, report, EXIT_OK)


# =============================================================================
# gamma
# =============================================================================


def build_family(cfg: RunConfig) -> tuple[list[Representative], Representative, str]:
    """Members phi_n and the expected limit of the configured family."""
    g = cfg.gamma
    if g.family == "fb":
        members = [fb_family(g.a, 0.5 + 1.0 / n) for n in g.ns]
        return members, fb_family(g.a, 0.5), f"F_1/2(a={g.a:g})"
    if g.family == "quadratic":
        members = [fenchel_representative(Quadratic(g.a * (1.0 + 1.0 / n))) for n in g.ns]
        return members, fenchel_representative(Quadratic(g.a)), f"fenchel(quadratic({g.a:g}))"
    member = fb_family(g.a, g.b)
    return [member] * len(g.ns), member, f"F_b(a={g.a:g},b={g.b:g})"


def run_gamma(cfg: RunConfig) -> CommandResult:
    g = cfg.gamma
    members, reference, label = build_family(cfg)
    try:
        limit = estimate_limit_integrand(members, g.ns, g.box, g.points, T=cfg.time.T)
    except NonConvergentFamilyError as e:
        logger.warning(f"Gamma estimation rejected the family: {e}")
        report = {**_header(cfg), "family": g.family, "passed": False, "message": str(e)}
        return CommandResult("gamma", report, ok=False, exit_code=EXIT_NOT_CONVERGED,
                             message=str(e))
    deviation = limit.deviation_from(reference)
    ok = deviation <= GAMMA_TOL and limit.min_gap >= -GAMMA_TOL
    report = {
        **_header(cfg),
        "family": g.family,
        "reference": label,
        "deviation": deviation,
        "limit": limit.to_dict(),
        "passed": ok,
    }
    return CommandResult(
        "gamma",
        report,
        {"limit.csv": Table(limit.rows(), ("v", "vstar", "value"))},
        {"family": g.family, "reference": label, "deviation": deviation,
         "min gap": limit.min_gap, "limit convex": limit.limit_convex, "passed": ok},
        ok,
    )


# =============================================================================
# Dispatch
# =============================================================================


def run_command(cfg: RunConfig, jobs: int | None = None) -> CommandResult:
    """Run the configured command without touching the filesystem."""
    logger.info(f"Running command {cfg.command} (seed={cfg.seed})")
    if cfg.command == "solve":
        return run_solve(cfg)
    if cfg.command == "stability":
        return run_stability(cfg, jobs)
    runner = {"conjugate": run_conjugate, "represent": run_represent, "gamma": run_gamma}
    try:
        return runner[cfg.command](cfg)
    except (ImproperFunctionError, RepresentationError, CoercivityError) as e:
        raise ConfigError(f"invalid {cfg.command} parameters: {e}") from e


def output_dir(cfg: RunConfig, out: Path | None = None) -> Path:
    return out or cfg.output.dir or settings.output_dir


def execute(cfg: RunConfig, out: Path | None = None, jobs: int | None = None) -> CommandResult:
    """Run the command and write report.json plus its CSV tables.

    Raises:
        ConfigError: If the configured model cannot be built.
        ReportError: If the output directory cannot be written.
    """
    result = run_command(cfg, jobs)
    target = output_dir(cfg, out)
    emit_report(result.report, target / "report.json")
    for name, table in result.tables.items():
        write_csv(table.rows, target / name, table.columns)
    logger.info(f"{cfg.command}: wrote {1 + len(result.tables)} files to {target}")
    return result
