"""Convergence diagnostics for sequences of pairs and of monotone graphs.

On a fixed grid every topology coincides, so weak convergence is measured as
a trend across the sequence: the first sine moments <v_n, sin(m pi x)> must
approach those of the limit. The nonlinear weak topology additionally asks
the pairings <v*_n, v_n> to converge.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from benflow.convex.graphs import MonotoneGraph, graph_membership
from benflow.errors import DimensionMismatchError
from benflow.spaces import DiscreteSpace, GridFunction

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

DEFAULT_MOMENTS = 10
DEFAULT_TOL = 1e-2


def trend_converges(errors: Sequence[float], scale: float = 0.0, tol: float = DEFAULT_TOL) -> bool:
    """A sequence of errors converges when its last entry is small or has shrunk fourfold."""
    if len(errors) == 0:
        return True
    first, last = float(errors[0]), float(errors[-1])
    if not np.isfinite(last):
        return False
    return last <= tol * (1.0 + scale) or last <= 0.25 * first


@dataclass
class ComponentTrend:
    """Per-member errors of one diagnostic component."""

    name: str
    errors: list[float]
    scale: float
    converges: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "errors": list(self.errors),
            "scale": self.scale,
            "converges": self.converges,
        }


@dataclass
class PairingDiagnostic:
    """Weak moments of v_n and v*_n plus convergence of the pairings."""

    moments_v: ComponentTrend
    moments_vstar: ComponentTrend
    pairing: ComponentTrend
    pairings: list[float] = field(default_factory=list)
    limit_pairing: float = 0.0

    @property
    def weakly_convergent(self) -> bool:
        return self.moments_v.converges and self.moments_vstar.converges

    @property
    def pi_convergent(self) -> bool:
        return self.weakly_convergent and self.pairing.converges

    def to_dict(self) -> dict[str, Any]:
        return {
            "moments_v": self.moments_v.to_dict(),
            "moments_vstar": self.moments_vstar.to_dict(),
            "pairing": self.pairing.to_dict(),
            "pairings": list(self.pairings),
            "limit_pairing": self.limit_pairing,
            "weakly_convergent": self.weakly_convergent,
            "pi_convergent": self.pi_convergent,
        }


def _values(space: DiscreteSpace, a: GridFunction | ArrayLike) -> FloatArray:
    arr = a.values if isinstance(a, GridFunction) else np.asarray(a, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] != space.M:
        raise DimensionMismatchError(f"expected trailing dimension {space.M}, got {arr.shape}")
    return arr


def sine_moments(space: DiscreteSpace, v: FloatArray, count: int, dt: float = 1.0) -> FloatArray:
    """<v, sin(m pi x)> for m = 1..count, summed over leading (time) axes with weight dt."""
    modes = np.sin(np.pi * np.outer(np.arange(1, count + 1), space.nodes))
    per_row = space.dx * (v.reshape(-1, space.M) @ modes.T)
    weight = dt if v.ndim > 1 else 1.0
    return weight * per_row.sum(axis=0)  # type: ignore[no-any-return]


def _pairing(space: DiscreteSpace, v: FloatArray, vstar: FloatArray, dt: float) -> float:
    weight = dt if v.ndim > 1 else 1.0
    return float(weight * space.dx * np.sum(v * vstar))


def pairing_convergence_diagnostic(
    space: DiscreteSpace,
    seq_v: Sequence[GridFunction | ArrayLike],
    seq_vstar: Sequence[GridFunction | ArrayLike],
    v: GridFunction | ArrayLike,
    vstar: GridFunction | ArrayLike,
    test_moments: int = DEFAULT_MOMENTS,
    tol: float = DEFAULT_TOL,
    dt: float = 1.0,
) -> PairingDiagnostic:
    """Diagnose (v_n, v*_n) -> (v, v*) in the nonlinear weak topology.

    Entries may be single grid functions or (K, M) space-time arrays; in the
    latter case moments and pairings integrate over time with step ``dt``.
    """
    if len(seq_v) != len(seq_vstar):
        raise DimensionMismatchError(
            f"sequences differ in length: {len(seq_v)} vs {len(seq_vstar)}"
        )
    lim_v, lim_s = _values(space, v), _values(space, vstar)
    mv = sine_moments(space, lim_v, test_moments, dt)
    ms = sine_moments(space, lim_s, test_moments, dt)
    limit_pairing = _pairing(space, lim_v, lim_s, dt)

    err_v, err_s, err_p, pairings = [], [], [], []
    for a, b in zip(seq_v, seq_vstar, strict=True):
        va, vb = _values(space, a), _values(space, b)
        if va.shape != lim_v.shape or vb.shape != lim_s.shape:
            raise DimensionMismatchError("sequence members and limit have different shapes")
        err_v.append(float(np.max(np.abs(sine_moments(space, va, test_moments, dt) - mv))))
        err_s.append(float(np.max(np.abs(sine_moments(space, vb, test_moments, dt) - ms))))
        p = _pairing(space, va, vb, dt)
        pairings.append(p)
        err_p.append(abs(p - limit_pairing))

    def trend(name: str, errors: list[float], scale: float) -> ComponentTrend:
        return ComponentTrend(name, errors, scale, trend_converges(errors, scale, tol))

    diag = PairingDiagnostic(
        moments_v=trend("moments_v", err_v, float(np.max(np.abs(mv)))),
        moments_vstar=trend("moments_vstar", err_s, float(np.max(np.abs(ms)))),
        pairing=trend("pairing", err_p, abs(limit_pairing)),
        pairings=pairings,
        limit_pairing=limit_pairing,
    )
    if diag.weakly_convergent and not diag.pi_convergent:
        logger.warning(
            f"weakly convergent sequence without pairing convergence: "
            f"pairing error {err_p[-1]:.3e}"
        )
    return diag


# =============================================================================
# Graph limits
# =============================================================================


@dataclass
class GraphLimitDiagnostic:
    """Kuratowski upper-limit check with a lim-inf report."""

    witness_in_graphs: list[bool]
    witness_errors: list[float]
    witness_converges: bool
    limit_point: tuple[float, float]
    limit_membership: bool | None
    liminf_distances: list[float]
    liminf_inclusion: bool
    flags: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.witness_in_graphs) and self.limit_membership is True

    def to_dict(self) -> dict[str, Any]:
        return {
            "witness_in_graphs": list(self.witness_in_graphs),
            "witness_errors": list(self.witness_errors),
            "witness_converges": self.witness_converges,
            "limit_point": list(self.limit_point),
            "limit_membership": self.limit_membership,
            "liminf_distances": list(self.liminf_distances),
            "liminf_inclusion": self.liminf_inclusion,
            "passed": self.passed,
            "flags": list(self.flags),
        }


def graph_limit_check(
    graphs: Sequence[MonotoneGraph],
    limit: MonotoneGraph,
    witnesses: Sequence[tuple[float, float]],
    declared: tuple[float, float],
    tol: float = 1e-9,
    box: float = 3.0,
) -> GraphLimitDiagnostic:
    """Check that convergent witnesses (v_n, v*_n) in graph_n land in the limit graph.

    The converse direction, every limit point being approached by the graphs,
    may fail for legitimate sequences; it is reported, never raised.
    """
    if len(graphs) != len(witnesses):
        raise DimensionMismatchError(
            f"need one witness per graph, got {len(witnesses)} for {len(graphs)}"
        )
    flags = []
    in_graphs = [graph_membership(g, w, z, tol) for g, (w, z) in zip(graphs, witnesses, strict=True)]
    for n, ok in enumerate(in_graphs):
        if not ok:
            flags.append(f"witness {n} is not on its graph")
    v, vs = declared
    errors = [float(np.hypot(w - v, z - vs)) for w, z in witnesses]
    converges = trend_converges(errors, float(np.hypot(v, vs)), tol=1e-6)
    membership = graph_membership(limit, v, vs, max(tol, 1e-9)) if converges else None
    if not converges:
        flags.append("witnesses do not converge to the declared limit")
    elif not membership:
        flags.append(f"limit point ({v:g}, {vs:g}) is not on the limit graph")

    pts = limit.sample(per_piece=21, box=box)
    distances = [float(np.max(g.distance(pts[:, 0], pts[:, 1]))) for g in graphs]
    liminf = trend_converges(distances, 0.0, tol=1e-6)
    if not liminf:
        flags.append("limit graph is not a lower limit of the sequence")
        logger.info(f"lim-inf inclusion fails for {limit.name}: distance {distances[-1]:.3e}")
    return GraphLimitDiagnostic(
        witness_in_graphs=in_graphs,
        witness_errors=errors,
        witness_converges=converges,
        limit_point=(float(v), float(vs)),
        limit_membership=membership,
        liminf_distances=distances,
        liminf_inclusion=liminf,
        flags=flags,
    )
