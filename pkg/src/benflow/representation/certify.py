"""Sampling checks of the representative conditions on a box."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from benflow.config import settings
from benflow.convex.graphs import MonotoneGraph
from benflow.errors import RepresentationError
from benflow.representation.base import FloatArray, Representative
from benflow.representation.scalar import ParamMonotoneFamily

logger = logging.getLogger(__name__)


@dataclass
class CertReport:
    """Outcome of certify_representative; failed checks are entries, not exceptions."""

    samples: int
    min_gap: float
    gap_ok: bool
    graph_samples: int = 0
    graph_max_gap: float | None = None
    graph_ok: bool | None = None
    minimality_excess: float | None = None
    minimality_ok: bool | None = None
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.gap_ok and self.graph_ok is not False and self.minimality_ok is not False

    def to_dict(self) -> dict[str, Any]:
        return {
            "samples": self.samples,
            "min_gap": self.min_gap,
            "gap_ok": self.gap_ok,
            "graph_samples": self.graph_samples,
            "graph_max_gap": self.graph_max_gap,
            "graph_ok": self.graph_ok,
            "minimality_excess": self.minimality_excess,
            "minimality_ok": self.minimality_ok,
            "passed": self.passed,
            "failures": list(self.failures),
        }


def sample_box(box: float, points: int) -> tuple[FloatArray, FloatArray]:
    """Meshgrid of (v, v*) over [-box, box]^2, flattened."""
    axis = np.linspace(-box, box, points)
    vv, ss = np.meshgrid(axis, axis, indexing="ij")
    return vv.ravel(), ss.ravel()


def graph_samples(
    reference: MonotoneGraph | ParamMonotoneFamily, box: float, points: int
) -> tuple[FloatArray, FloatArray]:
    """Points (w, z) on the graph of the represented operator inside the box."""
    if isinstance(reference, MonotoneGraph):
        pts = reference.sample(per_piece=max(points // 5, 3), box=box)
        return pts[:, 0], pts[:, 1]
    ws = np.linspace(-box, box, points)
    zs = np.array([reference(w).selection(w) for w in ws], dtype=float)
    keep = np.isfinite(zs) & (np.abs(zs) <= box)
    return ws[keep], zs[keep]


def certify_representative(
    f: Representative,
    reference: MonotoneGraph | ParamMonotoneFamily | None = None,
    compare_with: Representative | None = None,
    box: float | None = None,
    points: int | None = None,
    tol: float = 1e-9,
) -> CertReport:
    """Check gap >= -tol on the box, gap <= tol on the reference graph, and f <= compare_with."""
    if f.carrier != "scalar":
        raise RepresentationError("certification samples scalar representatives only")
    box = settings.sample_box if box is None else box
    points = settings.sample_points if points is None else points

    v, vs = sample_box(box, points)
    gaps = np.asarray(f.gap(v, vs), dtype=float)
    min_gap = float(np.min(gaps))
    report = CertReport(samples=v.size, min_gap=min_gap, gap_ok=min_gap >= -tol)
    if not report.gap_ok:
        report.failures.append(f"gap {min_gap:.3e} below -{tol:g} on the sample box")

    if reference is not None:
        w, z = graph_samples(reference, box, points)
        on_graph = np.asarray(f.gap(w, z), dtype=float)
        report.graph_samples = w.size
        report.graph_max_gap = float(np.max(on_graph)) if w.size else 0.0
        report.graph_ok = report.graph_max_gap <= tol
        if not report.graph_ok:
            worst = int(np.argmax(on_graph))
            report.failures.append(
                f"gap {report.graph_max_gap:.3e} at graph point ({w[worst]:g}, {z[worst]:g})"
            )

    if compare_with is not None:
        mine = np.asarray(f.evaluate(v, vs), dtype=float)
        theirs = np.asarray(compare_with.evaluate(v, vs), dtype=float)
        with np.errstate(invalid="ignore"):
            excess = np.where(np.isinf(mine) & np.isinf(theirs), 0.0, mine - theirs)
        report.minimality_excess = float(np.max(excess))
        report.minimality_ok = report.minimality_excess <= tol
        if not report.minimality_ok:
            report.failures.append(
                f"representative exceeds comparison by {report.minimality_excess:.3e}"
            )

    if report.passed:
        logger.debug(f"Certified {f!r} on {report.samples} samples")
    else:
        logger.warning(f"Certification of {f!r} failed: {'; '.join(report.failures)}")
    return report


def dump_rows(f: Representative, box: float | None = None,
              points: int | None = None) -> list[dict[str, float]]:
    """Rows (v, vstar, f, gap) over the sample box, for plotting."""
    box = settings.sample_box if box is None else box
    points = settings.sample_points if points is None else points
    v, vs = sample_box(box, points)
    values = np.asarray(f.evaluate(v, vs), dtype=float)
    gaps = np.asarray(f.gap(v, vs), dtype=float)
    return [
        {"v": float(a), "vstar": float(b), "f": float(c), "gap": float(d)}
        for a, b, c, d in zip(v, vs, values, gaps, strict=True)
    ]
