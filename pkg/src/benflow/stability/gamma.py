"""Tabulated estimation of the limit integrand of a family of representatives.

The pointwise limit over n is extrapolated to h = 1/n = 0 by a rational fit
through the last four members, then a lower semicontinuous pass closes
isolated +inf holes of the grid table. For pointwise, locally uniformly
convergent, equi-coercive families this is the Gamma-limit. Families whose
sup-norm differences do not shrink with h are rejected rather than given a
value the estimator cannot justify.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.interpolate import RegularGridInterpolator

from benflow.config import settings
from benflow.errors import NonConvergentFamilyError, RepresentationError
from benflow.representation.base import Representative

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

QUADRATURE_POINTS = 200
GROWTH = 1.5
RATIONAL_RTOL = 1e-8

WEIGHTS: dict[str, Callable[[FloatArray, float], FloatArray]] = {
    "one": lambda t, T: np.ones_like(t),
    "t": lambda t, T: t,
    "decay2": lambda t, T: (T - t) ** 2,
}


def _path(t: FloatArray) -> tuple[FloatArray, FloatArray]:
    return 1.0 - 2.0 * t, 1.0 + t


@dataclass
class LimitIntegrand:
    """Grid table of the estimated limit with its weighted path values."""

    axis: FloatArray
    table: FloatArray
    ns: list[int]
    min_gap: float
    members_convex: bool
    limit_convex: bool
    weighted_members: dict[str, list[float]] = field(default_factory=dict)
    weighted_limit: dict[str, float] = field(default_factory=dict)
    bound_violations: int = 0
    flags: list[str] = field(default_factory=list)

    def evaluate(self, v: ArrayLike, vstar: ArrayLike) -> FloatArray:
        """Bilinear interpolation of the table; points must lie inside the box."""
        interp = RegularGridInterpolator((self.axis, self.axis), self.table)
        v, vstar = np.broadcast_arrays(np.asarray(v, float), np.asarray(vstar, float))
        return interp(np.stack([v, vstar], axis=-1))  # type: ignore[no-any-return]

    def deviation_from(self, rep: Representative) -> float:
        """Largest finite deviation of the table from a reference representative."""
        vv, ss = np.meshgrid(self.axis, self.axis, indexing="ij")
        ref = np.asarray(rep.evaluate(vv, ss), dtype=float)
        both = np.isfinite(ref) & np.isfinite(self.table)
        if np.any(np.isfinite(ref) != np.isfinite(self.table)):
            return float("inf")
        return float(np.max(np.abs(ref[both] - self.table[both]), initial=0.0))

    def rows(self) -> list[dict[str, float]]:
        return [
            {"v": float(v), "vstar": float(s), "value": float(self.table[i, j])}
            for i, v in enumerate(self.axis)
            for j, s in enumerate(self.axis)
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            "ns": list(self.ns),
            "box": float(self.axis[-1]),
            "points": int(self.axis.size),
            "min_gap": self.min_gap,
            "members_convex": self.members_convex,
            "limit_convex": self.limit_convex,
            "weighted_members": {k: list(v) for k, v in self.weighted_members.items()},
            "weighted_limit": dict(self.weighted_limit),
            "bound_violations": self.bound_violations,
            "flags": list(self.flags),
        }


def midpoint_convex(table: FloatArray, tol: float = 1e-10) -> bool:
    """Second differences along both axes and both diagonals are >= -tol."""
    def ok(a: FloatArray, mid: FloatArray, b: FloatArray) -> bool:
        finite = np.isfinite(a) & np.isfinite(b)
        scale = 1.0 + np.abs(np.where(finite, mid, 0.0))
        # an infinite midpoint between finite ends violates convexity
        bad = finite & ~(np.isfinite(mid) & (a + b - 2.0 * mid >= -tol * scale))
        return not bool(np.any(bad))

    t = table
    return (
        ok(t[:-2, :], t[1:-1, :], t[2:, :])
        and ok(t[:, :-2], t[:, 1:-1], t[:, 2:])
        and ok(t[:-2, :-2], t[1:-1, 1:-1], t[2:, 2:])
        and ok(t[:-2, 2:], t[1:-1, 1:-1], t[2:, :-2])
    )


def _divided_weights(hs: FloatArray) -> tuple[FloatArray, FloatArray]:
    """Weights of the top divided difference and of Lagrange extrapolation to h = 0."""
    k = hs.size
    top = np.empty(k)
    at_zero = np.empty(k)
    for i in range(k):
        others = np.delete(hs, i)
        top[i] = 1.0 / np.prod(hs[i] - others)
        at_zero[i] = np.prod(-others / (hs[i] - others))
    return top, at_zero


def _extrapolate(tables: list[FloatArray], ns: Sequence[int]) -> FloatArray:
    """Extrapolate to h = 1/n = 0 through the last (up to) four tables.

    With k >= 3 tables each cell is fitted by P(h) / (1 + q h), deg P = k - 2,
    which is exact for members affine in h and for members like a(1+h)v^2/2 +
    v*^2/(2a(1+h)). q comes from the top divided differences of phi and h*phi;
    it is set to 0 (plain Lagrange extrapolation) where either is at rounding
    level or where 1 + q h would vanish on the sampled range.
    """
    k = min(4, len(tables))
    last = tables[-k:]
    finite = np.all([np.isfinite(t) for t in last], axis=0)
    if k == 1:
        return last[0].copy()
    hs = np.array([1.0 / n for n in ns[-k:]])
    phi = np.stack([np.where(finite, t, 0.0) for t in last])
    top, at_zero = _divided_weights(hs)
    lagrange = np.tensordot(at_zero, phi, axes=1)
    if k == 2:
        return np.where(finite, lagrange, last[-1])  # type: ignore[no-any-return]

    hphi = hs[:, None, None] * phi
    d_phi = np.tensordot(top, phi, axes=1)
    d_hphi = np.tensordot(top, hphi, axes=1)
    noise_phi = RATIONAL_RTOL * np.tensordot(np.abs(top), np.abs(phi), axes=1)
    noise_hphi = RATIONAL_RTOL * np.tensordot(np.abs(top), np.abs(hphi), axes=1)
    rational = (np.abs(d_phi) > noise_phi) & (np.abs(d_hphi) > noise_hphi)
    q = np.zeros_like(d_phi)
    np.divide(-d_phi, d_hphi, out=q, where=rational)
    q = np.where(1.0 + q * hs.max() > 0.0, q, 0.0)
    out = lagrange + q * np.tensordot(at_zero, hphi, axes=1)
    return np.where(finite, out, last[-1])  # type: ignore[no-any-return]


def _check_uniform_cauchy(tables: list[FloatArray], ns: Sequence[int]) -> None:
    """Reject families whose sup-norm difference rate grows along the tail.

    Rates are max |phi_{n_{i+1}} - phi_{n_i}| / (1/n_i - 1/n_{i+1}) over the
    cells finite in both tables. The approach need not be monotone cell by
    cell; the last rate must stay within GROWTH of the largest earlier one.
    """
    if len(tables) < 3:
        return
    rates: list[float] = []
    worst: list[tuple[Any, ...]] = []
    for n0, n1, a, b in zip(ns, ns[1:], tables, tables[1:], strict=False):
        both = np.isfinite(a) & np.isfinite(b)
        with np.errstate(invalid="ignore"):
            diff = np.where(both, np.abs(b - a), 0.0)
        rates.append(float(np.max(diff)) / (1.0 / n0 - 1.0 / n1))
        worst.append(np.unravel_index(int(np.argmax(diff)), diff.shape))
    scale = max(float(np.max(np.abs(t[np.isfinite(t)]), initial=0.0)) for t in tables)
    atol = 1e-12 * (1.0 + scale) / (1.0 / ns[-2] - 1.0 / ns[-1])
    earlier = max(rates[:-1])
    if rates[-1] > GROWTH * earlier + atol:
        i, j = worst[-1]
        raise NonConvergentFamilyError(
            f"family does not converge uniformly: difference rate {earlier:.3e} -> "
            f"{rates[-1]:.3e} between n={ns[-2]} and n={ns[-1]} at sample ({i}, {j})"
        )


def lsc_pass(table: FloatArray) -> FloatArray:
    """Close isolated +inf cells by the smaller of the two neighbour averages."""
    out = table.copy()
    holes = np.argwhere(np.isposinf(table))
    n0, n1 = table.shape
    for i, j in holes:
        if not (0 < i < n0 - 1 and 0 < j < n1 - 1):
            continue
        across = 0.5 * (table[i - 1, j] + table[i + 1, j])
        along = 0.5 * (table[i, j - 1] + table[i, j + 1])
        candidate = min(across, along)
        if np.isfinite(candidate):
            out[i, j] = candidate
    return out


def weighted_path_values(
    fn: Callable[[FloatArray, FloatArray], FloatArray], T: float = 1.0
) -> dict[str, float]:
    """Midpoint-rule values of int_0^T fn(v(t), v*(t)) xi(t) dt on the test path."""
    t = (np.arange(QUADRATURE_POINTS) + 0.5) * (T / QUADRATURE_POINTS)
    v, vs = _path(t / T)
    values = np.asarray(fn(v, vs), dtype=float)
    dt = T / QUADRATURE_POINTS
    return {name: float(dt * np.sum(values * xi(t, T))) for name, xi in WEIGHTS.items()}


def estimate_limit_integrand(
    phi_n: Sequence[Representative],
    ns: Sequence[int] | None = None,
    box: float | None = None,
    points: int | None = None,
    bounds: tuple[float, float, float] = (0.0, 10.0, 10.0),
    T: float = 1.0,
) -> LimitIntegrand:
    """Estimate the limit integrand of scalar representatives phi_n on [-box, box]^2.

    Args:
        phi_n: Scalar-carrier representatives, in order of increasing n.
        ns: Indices n of the members; defaults to 1..len(phi_n).
        box: Half-width of the sample square; defaults to ``settings.sample_box``.
        points: Samples per axis; defaults to ``settings.sample_points``.
        bounds: (C1, C2, C3) of the equi-boundedness condition
            C1*|w|^2 <= phi_n(w) <= C2*|w|^2 + C3. Violations are flagged.
        T: Length of the time interval of the weighted test functionals.

    Raises:
        NonConvergentFamilyError: If the family does not converge pointwise.
    """
    if not phi_n:
        raise RepresentationError("need at least one representative")
    if any(f.carrier != "scalar" for f in phi_n):
        raise RepresentationError("limit integrands are estimated on the scalar carrier")
    ns = list(range(1, len(phi_n) + 1)) if ns is None else [int(n) for n in ns]
    if len(ns) != len(phi_n) or any(b <= a for a, b in zip(ns, ns[1:], strict=False)):
        raise ValueError("ns must be increasing and match the family length")
    box = settings.sample_box if box is None else box
    points = settings.sample_points if points is None else points

    axis = np.linspace(-box, box, points)
    vv, ss = np.meshgrid(axis, axis, indexing="ij")
    tables = [np.asarray(f.evaluate(vv, ss), dtype=float) for f in phi_n]

    flags: list[str] = []
    c1, c2, c3 = bounds
    norm2 = vv * vv + ss * ss
    violations = 0
    for n, tab in zip(ns, tables, strict=True):
        bad = ~((tab >= c1 * norm2 - 1e-12) & (tab <= c2 * norm2 + c3))
        count = int(np.count_nonzero(bad))
        if count:
            violations += count
            i, j = np.argwhere(bad)[0]
            flags.append(
                f"equi-boundedness violated for n={n} at ({axis[i]:g}, {axis[j]:g})"
            )
    if violations:
        logger.warning(f"equi-boundedness violated at {violations} samples")

    _check_uniform_cauchy(tables, ns)
    table = lsc_pass(_extrapolate(tables, ns))

    pairing = vv * ss
    min_gap = float(np.min(table - pairing))
    if min_gap < -1e-6:
        flags.append(f"estimated limit has negative gap {min_gap:.3e}")
    members_convex = all(midpoint_convex(t) for t in tables)
    limit_convex = midpoint_convex(table)
    if members_convex and not limit_convex:
        flags.append("members are midpoint convex but the estimated limit is not")

    result = LimitIntegrand(
        axis=axis,
        table=table,
        ns=ns,
        min_gap=min_gap,
        members_convex=members_convex,
        limit_convex=limit_convex,
        bound_violations=violations,
        flags=flags,
    )
    members: dict[str, list[float]] = {name: [] for name in WEIGHTS}
    for f in phi_n:
        for name, value in weighted_path_values(lambda v, s, f=f: f.evaluate(v, s), T).items():
            members[name].append(value)
    result.weighted_members = members
    result.weighted_limit = weighted_path_values(result.evaluate, T)
    logger.info(f"Estimated limit integrand over n={ns}: min gap {min_gap:.3e}")
    return result
