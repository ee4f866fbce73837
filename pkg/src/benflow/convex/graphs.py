"""Piecewise monotone graphs in the plane.

A MonotoneGraph is a connected curve through ordered points (w_j, z_j), both
coordinates nondecreasing, extended by a ray at each end. Segment j joins point
j to point j+1; it is straight unless ``curvature[j]`` is nonzero, in which case

    z(w) = chord(w) + curvature[j] * (w - w_j) * (w - w_{j+1})

so quadratic constitutive laws are stored exactly. Tail slopes are dz/dw of the
end rays: 0 is horizontal, ``inf`` is vertical, ``None`` means the curve stops
(the graph is then monotone but not maximal).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from benflow.errors import ImproperFunctionError

FloatArray = NDArray[np.float64]
Direction = Literal["left", "right"]

_INF = float("inf")


@dataclass(frozen=True)
class FitzpatrickSup:
    """Value of the Fitzpatrick sup at one pair, with its maximizer."""

    value: float
    argmax: tuple[float, float] | None
    unbounded: Direction | None = None


@dataclass(frozen=True, eq=False)
class MonotoneGraph:
    """Monotone curve with explicit linear tails."""

    points: FloatArray
    curvature: FloatArray
    left_slope: float | None
    right_slope: float | None
    name: str = ""

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=float).reshape(-1, 2)
        if pts.shape[0] == 0:
            raise ImproperFunctionError("a graph needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise ImproperFunctionError("graph points must be finite")
        curv = np.zeros(pts.shape[0] - 1) if self.curvature is None else np.array(
            self.curvature, dtype=float
        )
        if curv.shape != (pts.shape[0] - 1,):
            raise ImproperFunctionError(
                f"need {pts.shape[0] - 1} curvature entries, got {curv.shape}"
            )
        dw = np.diff(pts[:, 0])
        dz = np.diff(pts[:, 1])
        if np.any(dw < 0) or np.any(dz < 0):
            raise ImproperFunctionError("graph points must be nondecreasing in w and z")
        if np.any((curv != 0) & (dw == 0)):
            raise ImproperFunctionError("vertical segments cannot be curved")
        with np.errstate(divide="ignore", invalid="ignore"):
            chord = np.where(dw > 0, dz / np.where(dw > 0, dw, 1.0), 0.0)
        if np.any(chord - curv * dw < -1e-12) or np.any(chord + curv * dw < -1e-12):
            raise ImproperFunctionError("curved segment is not monotone on its interval")
        for slope in (self.left_slope, self.right_slope):
            if slope is not None and not slope >= 0:
                raise ImproperFunctionError(f"tail slopes must lie in [0, inf], got {slope}")
        pts.setflags(write=False)
        curv.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "curvature", curv)

    # -------------------------------------------------------------------------
    # Geometry
    # -------------------------------------------------------------------------

    @property
    def w(self) -> FloatArray:
        return self.points[:, 0]

    @property
    def z(self) -> FloatArray:
        return self.points[:, 1]

    @property
    def is_maximal(self) -> bool:
        return self.left_slope is not None and self.right_slope is not None

    @cached_property
    def _coefficients(self) -> tuple[FloatArray, FloatArray, FloatArray]:
        """Global polynomial z = a + b*w + c*w^2 of every non-vertical segment."""
        w0, w1 = self.w[:-1], self.w[1:]
        dw = w1 - w0
        safe = np.where(dw > 0, dw, 1.0)
        s = np.where(dw > 0, (self.z[1:] - self.z[:-1]) / safe, 0.0)
        c = self.curvature
        a = self.z[:-1] - s * w0 + c * w0 * w1
        b = s - c * (w0 + w1)
        return a, b, c

    @cached_property
    def domain(self) -> tuple[float, float]:
        """Closed interval of w with a nonempty image."""
        lo = -_INF if self.left_slope is not None and self.left_slope < _INF else self.w[0]
        hi = _INF if self.right_slope is not None and self.right_slope < _INF else self.w[-1]
        return float(lo), float(hi)

    @cached_property
    def range(self) -> tuple[float, float]:
        """Closed interval of z reached by the graph."""
        lo = -_INF if self.left_slope is not None and self.left_slope > 0 else self.z[0]
        hi = _INF if self.right_slope is not None and self.right_slope > 0 else self.z[-1]
        return float(lo), float(hi)

    @property
    def single_valued(self) -> bool:
        """True when no vertical piece exists, so the graph is a function of w."""
        vertical_tail = self.left_slope == _INF or self.right_slope == _INF
        return bool(np.all(np.diff(self.w) > 0)) and not vertical_tail

    @property
    def strictly_increasing(self) -> bool:
        """True when the inverse graph is single valued."""
        flat_tail = self.left_slope == 0 or self.right_slope == 0
        return bool(np.all(np.diff(self.z) > 0)) and not flat_tail

    def _poly(self, j: NDArray[np.intp], w: FloatArray) -> FloatArray:
        a, b, c = self._coefficients
        return a[j] + b[j] * w + c[j] * w * w  # type: ignore[no-any-return]

    # -------------------------------------------------------------------------
    # Evaluation
    # -------------------------------------------------------------------------

    def selection(self, w: ArrayLike) -> FloatArray:
        """Lowest stored z with (w, z) on the graph; nan outside the domain."""
        w = np.asarray(w, dtype=float)
        out = np.full(w.shape, np.nan)
        ws, zs = self.w, self.z
        inside = (w >= ws[0]) & (w <= ws[-1])
        if np.any(inside):
            wi = w[inside]
            i = np.searchsorted(ws, wi, side="left")
            exact = ws[np.minimum(i, ws.size - 1)] == wi
            j = np.clip(i - 1, 0, max(ws.size - 2, 0))
            vals = np.where(exact, zs[np.minimum(i, ws.size - 1)], 0.0)
            if ws.size > 1:
                vals = np.where(exact, vals, self._poly(j, wi))
            out[inside] = vals
        left = w < ws[0]
        if self.left_slope is not None and self.left_slope < _INF:
            out[left] = zs[0] + self.left_slope * (w[left] - ws[0])
        right = w > ws[-1]
        if self.right_slope is not None and self.right_slope < _INF:
            out[right] = zs[-1] + self.right_slope * (w[right] - ws[-1])
        return out

    def slope(self, w: ArrayLike) -> FloatArray:
        """Derivative of the selection, taking the right-hand piece at breakpoints."""
        w = np.asarray(w, dtype=float)
        ws = self.w
        out = np.full(w.shape, np.nan)
        if ws.size > 1:
            inside = (w >= ws[0]) & (w < ws[-1])
            j = np.clip(np.searchsorted(ws, w[inside], side="right") - 1, 0, ws.size - 2)
            _, b, c = self._coefficients
            out[inside] = b[j] + 2.0 * c[j] * w[inside]
        left = w < ws[0]
        right = w >= ws[-1]
        out[left] = np.nan if self.left_slope is None else self.left_slope
        out[right] = np.nan if self.right_slope is None else self.right_slope
        return out

    def inverse_selection(self, s: ArrayLike) -> FloatArray:
        """Smallest stored w with s in the graph at w; nan outside the range."""
        s = np.asarray(s, dtype=float)
        ws, zs = self.w, self.z
        out = np.full(s.shape, np.nan)
        inside = (s >= zs[0]) & (s <= zs[-1])
        if np.any(inside):
            si = s[inside]
            i = np.searchsorted(zs, si, side="left")
            i_c = np.minimum(i, zs.size - 1)
            exact = zs[i_c] == si
            vals = np.where(exact, ws[i_c], np.nan)
            if ws.size > 1:
                j = np.clip(i - 1, 0, ws.size - 2)
                a, b, c = self._coefficients
                root = _segment_root(c[j], b[j], a[j] - si, ws[j], ws[j + 1])
                vertical = ws[j] == ws[j + 1]
                vals = np.where(exact, vals, np.where(vertical, ws[j + 1], root))
            out[inside] = vals
        below = s < zs[0]
        if self.left_slope is not None and self.left_slope > 0:
            step = 0.0 if self.left_slope == _INF else 1.0 / self.left_slope
            out[below] = ws[0] + (s[below] - zs[0]) * step
        above = s > zs[-1]
        if self.right_slope is not None and self.right_slope > 0:
            step = 0.0 if self.right_slope == _INF else 1.0 / self.right_slope
            out[above] = ws[-1] + (s[above] - zs[-1]) * step
        return out

    def resolvent(self, sigma: float, x: ArrayLike) -> FloatArray:
        """Solve w + sigma*z = x with (w, z) on the graph, i.e. (I + sigma*G)^-1 x."""
        x = np.asarray(x, dtype=float)
        ws, zs = self.w, self.z
        q = ws + sigma * zs
        out = np.empty(x.shape)
        inside = (x >= q[0]) & (x <= q[-1])
        if np.any(inside):
            xi = x[inside]
            i = np.searchsorted(q, xi, side="left")
            i_c = np.minimum(i, q.size - 1)
            exact = q[i_c] == xi
            vals = np.where(exact, ws[i_c], 0.0)
            if ws.size > 1:
                j = np.clip(i - 1, 0, ws.size - 2)
                a, b, c = self._coefficients
                root = _segment_root(sigma * c[j], 1.0 + sigma * b[j], sigma * a[j] - xi,
                                     ws[j], ws[j + 1])
                vals = np.where(exact, vals, root)
            out[inside] = vals
        below = x < q[0]
        m = self.left_slope
        if m is None or m == _INF:
            out[below] = ws[0]
        else:
            out[below] = ws[0] - (q[0] - x[below]) / (1.0 + sigma * m)
        above = x > q[-1]
        m = self.right_slope
        if m is None or m == _INF:
            out[above] = ws[-1]
        else:
            out[above] = ws[-1] + (x[above] - q[-1]) / (1.0 + sigma * m)
        return out

    @cached_property
    def _cumulative(self) -> FloatArray:
        """Integral of the selection from w_0 to each stored w_j."""
        if self.w.size == 1:
            return np.zeros(1)
        a, b, c = self._coefficients
        w0, w1 = self.w[:-1], self.w[1:]
        pieces = (
            a * (w1 - w0) + b * (w1**2 - w0**2) / 2.0 + c * (w1**3 - w0**3) / 3.0
        )
        return np.concatenate([[0.0], np.cumsum(pieces)])

    def primitive(self, w: ArrayLike) -> FloatArray:
        """Integral of the selection from w_0 to w; +inf outside the domain."""
        w = np.asarray(w, dtype=float)
        ws, zs = self.w, self.z
        lo, hi = self.domain
        out = np.full(w.shape, _INF)
        inside = (w >= ws[0]) & (w <= ws[-1])
        if np.any(inside):
            wi = w[inside]
            if ws.size == 1:
                out[inside] = 0.0
            else:
                j = np.clip(np.searchsorted(ws, wi, side="right") - 1, 0, ws.size - 2)
                a, b, c = self._coefficients
                w0 = ws[j]
                out[inside] = (
                    self._cumulative[j]
                    + a[j] * (wi - w0)
                    + b[j] * (wi**2 - w0**2) / 2.0
                    + c[j] * (wi**3 - w0**3) / 3.0
                )
        left = (w < ws[0]) & (w >= lo)
        if np.any(left):
            m = self.left_slope or 0.0
            d = ws[0] - w[left]
            out[left] = -(zs[0] * d - m * d * d / 2.0)
        right = (w > ws[-1]) & (w <= hi)
        if np.any(right):
            m = self.right_slope or 0.0
            d = w[right] - ws[-1]
            out[right] = self._cumulative[-1] + zs[-1] * d + m * d * d / 2.0
        return out

    # -------------------------------------------------------------------------
    # Fitzpatrick function
    # -------------------------------------------------------------------------

    def fitzpatrick(self, v: ArrayLike, vstar: ArrayLike) -> FloatArray:
        """sup over graph points (w, z) of vstar*w - z*(w - v), vectorized."""
        return self._fitzpatrick(v, vstar)[0]

    def fitzpatrick_sup(self, v: float, vstar: float) -> FitzpatrickSup:
        """Scalar Fitzpatrick sup with its maximizer or unbounded tail."""
        value, aw, az, direction = self._fitzpatrick(np.float64(v), np.float64(vstar))
        val = float(value)
        if np.isinf(val):
            return FitzpatrickSup(val, None, "left" if int(direction) < 0 else "right")
        return FitzpatrickSup(val, (float(aw), float(az)))

    def _fitzpatrick(
        self, v: ArrayLike, vstar: ArrayLike
    ) -> tuple[FloatArray, FloatArray, FloatArray, NDArray[np.int8]]:
        v, vs = np.broadcast_arrays(np.asarray(v, dtype=float), np.asarray(vstar, dtype=float))
        best = np.full(v.shape, -_INF)
        arg_w = np.full(v.shape, np.nan)
        arg_z = np.full(v.shape, np.nan)
        direction = np.zeros(v.shape, dtype=np.int8)

        def offer(val: ArrayLike, w: ArrayLike, z: ArrayLike) -> None:
            val = np.broadcast_to(np.asarray(val, dtype=float), v.shape)
            better = val > best
            best[better] = val[better]
            arg_w[better] = np.broadcast_to(w, v.shape)[better]
            arg_z[better] = np.broadcast_to(z, v.shape)[better]

        ws, zs = self.w, self.z
        for wj, zj in zip(ws, zs, strict=True):
            offer(vs * wj - zj * (wj - v), wj, zj)

        a, b, c = self._coefficients
        for j in range(ws.size - 1):
            lo, hi = ws[j], ws[j + 1]
            if hi == lo:
                continue
            for root in _critical_points(a[j], b[j], c[j], v, vs):
                wr = np.clip(root, lo, hi)
                zr = a[j] + b[j] * wr + c[j] * wr * wr
                offer(vs * wr - zr * (wr - v), wr, zr)

        for sign, m, w0, z0 in ((-1, self.left_slope, ws[0], zs[0]),
                                (1, self.right_slope, ws[-1], zs[-1])):
            if m is None:
                continue
            base = vs * w0 - z0 * (w0 - v)
            if m == _INF:
                rate = -sign * (w0 - v)
            elif m == 0:
                rate = sign * (vs - z0)
            else:
                coef = sign * ((vs - z0) - m * (w0 - v))
                t = np.maximum(coef / (2.0 * m), 0.0)
                offer(base + coef * t - m * t * t, w0 + sign * t, z0 + sign * m * t)
                continue
            unbounded = rate > 0
            best[unbounded] = _INF
            direction[unbounded] = sign
        return best, arg_w, arg_z, direction

    # -------------------------------------------------------------------------
    # Distance and membership
    # -------------------------------------------------------------------------

    def distance(self, w: ArrayLike, z: ArrayLike) -> FloatArray:
        """Euclidean distance from (w, z) to the curve."""
        w, z = np.broadcast_arrays(np.asarray(w, dtype=float), np.asarray(z, dtype=float))
        ws, zs = self.w, self.z
        best = np.hypot(w - ws[0], z - zs[0])
        a, b, c = self._coefficients
        for j in range(ws.size - 1):
            p0 = np.array([ws[j], zs[j]])
            p1 = np.array([ws[j + 1], zs[j + 1]])
            if c[j] == 0:
                best = np.minimum(best, _segment_distance(w, z, p0, p1))
                continue
            best = np.minimum(best, _curve_distance(w, z, a[j], b[j], c[j], ws[j], ws[j + 1]))
        for sign, m, w0, z0 in ((-1, self.left_slope, ws[0], zs[0]),
                                (1, self.right_slope, ws[-1], zs[-1])):
            if m is None:
                continue
            d = np.array([0.0, 1.0]) if m == _INF else np.array([1.0, m]) / np.hypot(1.0, m)
            d = sign * d
            t = np.maximum((w - w0) * d[0] + (z - z0) * d[1], 0.0)
            best = np.minimum(best, np.hypot(w - w0 - t * d[0], z - z0 - t * d[1]))
        return best  # type: ignore[no-any-return]

    def contains(self, w: ArrayLike, z: ArrayLike, tol: float = 1e-9) -> NDArray[np.bool_]:
        return self.distance(w, z) <= tol

    # -------------------------------------------------------------------------
    # Derived graphs
    # -------------------------------------------------------------------------

    def regularized(self, eps: float) -> MonotoneGraph:
        """Graph of G + eps*I."""
        pts = self.points.copy()
        pts[:, 1] = pts[:, 1] + eps * pts[:, 0]

        def shift(m: float | None) -> float | None:
            return None if m is None else m + eps

        return MonotoneGraph(pts, self.curvature, shift(self.left_slope),
                             shift(self.right_slope), f"{self.name}+{eps:g}I")

    def scaled(self, s: float) -> MonotoneGraph:
        """Graph of s*G for s > 0."""
        if not s > 0:
            raise ImproperFunctionError(f"scale must be positive, got {s}")
        pts = self.points.copy()
        pts[:, 1] *= s

        def scale(m: float | None) -> float | None:
            return None if m is None else m * s

        return MonotoneGraph(pts, self.curvature * s, scale(self.left_slope),
                             scale(self.right_slope), f"{s:g}*{self.name}")

    def inverse(self) -> MonotoneGraph:
        """Graph with w and z swapped; only straight pieces can be inverted exactly."""
        if np.any(self.curvature != 0):
            raise ImproperFunctionError("curved graphs have no piecewise-linear inverse")

        def flip(m: float | None) -> float | None:
            if m is None:
                return None
            if m == 0:
                return _INF
            return 0.0 if m == _INF else 1.0 / m

        return MonotoneGraph(self.points[:, ::-1], self.curvature, flip(self.left_slope),
                             flip(self.right_slope), f"inv({self.name})")

    def sample(self, per_piece: int = 21, box: float = 3.0) -> FloatArray:
        """Points along the curve inside the square [-box, box]^2."""
        ws, zs = self.w, self.z
        chunks = [self.points]
        t = np.linspace(0.0, 1.0, per_piece)
        a, b, c = self._coefficients
        for j in range(ws.size - 1):
            wt = ws[j] + t * (ws[j + 1] - ws[j])
            if ws[j] == ws[j + 1]:
                zt = zs[j] + t * (zs[j + 1] - zs[j])
            else:
                zt = a[j] + b[j] * wt + c[j] * wt * wt
            chunks.append(np.column_stack([wt, zt]))
        reach = 2.0 * box
        for sign, m, w0, z0 in ((-1, self.left_slope, ws[0], zs[0]),
                                (1, self.right_slope, ws[-1], zs[-1])):
            if m is None:
                continue
            d = np.array([0.0, 1.0]) if m == _INF else np.array([1.0, m]) / np.hypot(1.0, m)
            chunks.append(np.array([w0, z0]) + sign * np.outer(t * reach, d))
        pts = np.vstack(chunks)
        keep = np.all(np.abs(pts) <= box, axis=1)
        return pts[keep]  # type: ignore[no-any-return]


def _segment_root(a: ArrayLike, b: ArrayLike, c: ArrayLike, lo: ArrayLike,
                  hi: ArrayLike) -> FloatArray:
    """Root of a*w^2 + b*w + c in [lo, hi] for an increasing piece, clipped to it."""
    a, b, c, lo, hi = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (a, b, c, lo, hi)))
    with np.errstate(divide="ignore", invalid="ignore"):
        linear = np.where(b != 0, -c / np.where(b != 0, b, 1.0), lo)
        disc = np.sqrt(np.maximum(b * b - 4.0 * a * c, 0.0))
        q = -0.5 * (b + np.copysign(disc, b))
        r1 = np.where(a != 0, q / np.where(a != 0, a, 1.0), linear)
        r2 = np.where(q != 0, c / np.where(q != 0, q, 1.0), linear)
    d1 = np.abs(np.clip(r1, lo, hi) - r1)
    d2 = np.abs(np.clip(r2, lo, hi) - r2)
    root = np.where(a == 0, linear, np.where(d1 <= d2, r1, r2))
    return np.clip(root, lo, hi)  # type: ignore[no-any-return]


def _critical_points(a: float, b: float, c: float, v: FloatArray,
                     vs: FloatArray) -> list[FloatArray]:
    """Stationary points of vs*w - (a + b*w + c*w^2)*(w - v) in w."""
    qa = -3.0 * c
    qb = 2.0 * (c * v - b)
    qc = vs + b * v - a
    if c == 0:
        if b == 0:
            return []
        return [qc / (2.0 * b)]
    disc = qb * qb - 4.0 * qa * qc
    root = np.sqrt(np.maximum(disc, 0.0))
    return [(-qb + root) / (2.0 * qa), (-qb - root) / (2.0 * qa)]


def _segment_distance(w: FloatArray, z: FloatArray, p0: FloatArray, p1: FloatArray) -> FloatArray:
    d = p1 - p0
    length2 = float(d @ d)
    if length2 == 0:
        return np.hypot(w - p0[0], z - p0[1])  # type: ignore[no-any-return]
    t = np.clip(((w - p0[0]) * d[0] + (z - p0[1]) * d[1]) / length2, 0.0, 1.0)
    return np.hypot(w - p0[0] - t * d[0], z - p0[1] - t * d[1])  # type: ignore[no-any-return]


def _curve_distance(w: FloatArray, z: FloatArray, a: float, b: float, c: float,
                    lo: float, hi: float, nodes: int = 33, newton_steps: int = 8) -> FloatArray:
    """Distance to the arc z = a + b*t + c*t^2, t in [lo, hi].

    The foot point is bracketed on a grid of the arc and refined by Newton steps
    on the squared distance, kept inside the bracket.
    """
    grid = np.linspace(lo, hi, nodes)
    arc = a + b * grid + c * grid * grid
    d2 = (grid - w[..., None]) ** 2 + (arc - z[..., None]) ** 2
    k = np.argmin(d2, axis=-1)
    left = grid[np.maximum(k - 1, 0)]
    right = grid[np.minimum(k + 1, nodes - 1)]
    t = grid[k]
    for _ in range(newton_steps):
        zc = a + b * t + c * t * t
        slope = b + 2.0 * c * t
        grad = (t - w) + (zc - z) * slope
        curv = 1.0 + slope * slope + 2.0 * c * (zc - z)
        step = np.where(curv > 0, grad / np.where(curv > 0, curv, 1.0), 0.0)
        t = np.clip(t - step, left, right)
    refined = np.hypot(t - w, a + b * t + c * t * t - z)
    return np.minimum(refined, np.sqrt(np.min(d2, axis=-1)))  # type: ignore[no-any-return]


# =============================================================================
# Shipped graphs
# =============================================================================


def linear_graph(m: float, name: str = "") -> MonotoneGraph:
    """Graph of w -> m*w for m >= 0."""
    return MonotoneGraph(np.zeros((1, 2)), np.zeros(0), m, m, name or f"linear({m:g})")


def identity_graph() -> MonotoneGraph:
    return linear_graph(1.0, "identity")


def sign_graph() -> MonotoneGraph:
    """Subdifferential of |w|: a vertical segment at 0 with flat tails."""
    return MonotoneGraph(np.array([[0.0, -1.0], [0.0, 1.0]]), np.zeros(1), 0.0, 0.0, "sign")


def plateau_graph(width: float = 1.0, slope: float = 1.0) -> MonotoneGraph:
    """Stefan temperature law: slope*(u) for u <= 0, 0 on [0, width], slope*(u - width) beyond."""
    if width < 0:
        raise ImproperFunctionError(f"plateau width must be nonnegative, got {width}")
    pts = np.array([[0.0, 0.0], [width, 0.0]])
    return MonotoneGraph(pts, np.zeros(1), slope, slope, f"plateau({width:g})")


def point_graph(w: float, z: float) -> MonotoneGraph:
    """The one-point graph {(w, z)}, monotone but not maximal."""
    return MonotoneGraph(np.array([[w, z]]), np.zeros(0), None, None, f"point({w:g},{z:g})")


def graph_membership(graph: MonotoneGraph, w: float, z: float, tol: float = 1e-9) -> bool:
    """True iff (w, z) lies within distance tol of the graph."""
    return bool(graph.contains(w, z, tol))
