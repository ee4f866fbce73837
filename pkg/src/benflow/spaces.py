"""Discrete stand-ins for V = H^1_0(0,1), H = L^2(0,1) and V' = H^-1(0,1).

A DiscreteSpace is the uniform grid x_i = i*dx, i = 1..M, with dx = 1/(M+1) and
homogeneous Dirichlet values at x = 0 and x = 1. Elements of V' are stored as
nodal grid functions through the H-pairing <a, b> = dx * sum(a_i * b_i).

Everything here works on the last array axis, so a (K, M) array is treated as
K grid functions at once.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
from functools import cached_property
from typing import overload

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import solve_banded

from benflow.errors import DimensionMismatchError

FloatArray = NDArray[np.float64]


@dataclass(frozen=True)
class DiscreteSpace:
    """1D grid on (0, 1) with M interior nodes."""

    M: int

    def __post_init__(self) -> None:
        if not isinstance(self.M, int | np.integer) or self.M < 1:
            raise ValueError(f"M must be a positive integer, got {self.M!r}")

    @property
    def dx(self) -> float:
        return 1.0 / (self.M + 1)

    @cached_property
    def nodes(self) -> FloatArray:
        """Interior node coordinates x_1..x_M."""
        return np.arange(1, self.M + 1, dtype=float) * self.dx

    @cached_property
    def laplacian(self) -> TridiagonalOperator:
        """The 3-point stencil of -d^2/dx^2 with Dirichlet boundary."""
        return stiffness_operator(self, np.ones(self.M + 1))

    def grid(self, values: ArrayLike) -> GridFunction:
        return GridFunction(self, np.asarray(values, dtype=float))

    def zeros(self) -> GridFunction:
        return GridFunction(self, np.zeros(self.M))

    def sample(self, fn: Callable[[FloatArray], ArrayLike]) -> GridFunction:
        """Sample a function of x at the interior nodes."""
        return self.grid(np.broadcast_to(np.asarray(fn(self.nodes), dtype=float), (self.M,)))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Nodal values on a DiscreteSpace; boundary values are implied zero."""

    space: DiscreteSpace
    values: FloatArray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != (self.space.M,):
            raise DimensionMismatchError(
                f"grid function needs {self.space.M} values, got shape {values.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __array__(self, dtype: object = None, copy: object = None) -> FloatArray:
        return np.asarray(self.values, dtype=dtype)  # type: ignore[call-overload,no-any-return]

    def norm(self) -> float:
        """The H-norm sqrt(<v, v>)."""
        return float(np.sqrt(pairing_H(self.space, self, self)))


GridLike = GridFunction | FloatArray


def as_values(space: DiscreteSpace, a: GridLike) -> FloatArray:
    """Return the raw nodal array of ``a`` after checking it lives on ``space``."""
    if isinstance(a, GridFunction):
        if a.space.M != space.M:
            raise DimensionMismatchError(
                f"grid function lives on M={a.space.M}, expected M={space.M}"
            )
        return a.values
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] != space.M:
        raise DimensionMismatchError(f"expected trailing dimension {space.M}, got {arr.shape}")
    return arr


# =============================================================================
# Tridiagonal operators
# =============================================================================


@dataclass(frozen=True, eq=False)
class TridiagonalOperator:
    """A tridiagonal M x M matrix acting on nodal values.

    ``lower[j]`` sits at row j+1, column j; ``upper[j]`` at row j, column j+1.
    """

    diag: FloatArray
    lower: FloatArray
    upper: FloatArray
    symmetric: bool = field(default=False)

    @property
    def size(self) -> int:
        return int(self.diag.shape[0])

    @cached_property
    def banded(self) -> FloatArray:
        """Matrix in the (1, 1) band layout expected by ``solve_banded``."""
        ab = np.zeros((3, self.size))
        ab[0, 1:] = self.upper
        ab[1, :] = self.diag
        ab[2, :-1] = self.lower
        return ab

    def apply(self, x: FloatArray) -> FloatArray:
        y = self.diag * x
        y[..., :-1] += self.upper * x[..., 1:]
        y[..., 1:] += self.lower * x[..., :-1]
        return y

    def solve(self, b: FloatArray) -> FloatArray:
        b = np.asarray(b, dtype=float)
        if b.ndim == 1:
            return solve_banded((1, 1), self.banded, b)  # type: ignore[no-any-return]
        flat = b.reshape(-1, self.size).T
        out = solve_banded((1, 1), self.banded, flat)
        return out.T.reshape(b.shape)  # type: ignore[no-any-return]

    def transpose(self) -> TridiagonalOperator:
        if self.symmetric:
            return self
        return TridiagonalOperator(self.diag, self.upper, self.lower)

    def shifted(self, c: float) -> TridiagonalOperator:
        """Return A + c*I."""
        return TridiagonalOperator(self.diag + c, self.lower, self.upper, self.symmetric)

    def scaled(self, c: float) -> TridiagonalOperator:
        return TridiagonalOperator(c * self.diag, c * self.lower, c * self.upper, self.symmetric)

    def scale_columns(self, c: FloatArray) -> TridiagonalOperator:
        """Return A @ diag(c)."""
        return TridiagonalOperator(self.diag * c, self.lower * c[:-1], self.upper * c[1:])

    def __add__(self, other: TridiagonalOperator) -> TridiagonalOperator:
        return TridiagonalOperator(
            self.diag + other.diag,
            self.lower + other.lower,
            self.upper + other.upper,
            self.symmetric and other.symmetric,
        )

    def to_dense(self) -> FloatArray:
        return (
            np.diag(self.diag) + np.diag(self.upper, k=1) + np.diag(self.lower, k=-1)
        )


def stiffness_operator(space: DiscreteSpace, conductivity: FloatArray) -> TridiagonalOperator:
    """Assemble D^T diag(k) D for cell conductivities k of length M+1."""
    k = np.asarray(conductivity, dtype=float)
    if k.shape != (space.M + 1,):
        raise DimensionMismatchError(f"need {space.M + 1} cell values, got shape {k.shape}")
    inv_dx2 = 1.0 / space.dx**2
    off = -k[1:-1] * inv_dx2
    return TridiagonalOperator((k[:-1] + k[1:]) * inv_dx2, off, off.copy(), symmetric=True)


# =============================================================================
# Pairings, differences, norms
# =============================================================================


def pairing_H(space: DiscreteSpace, a: GridLike, b: GridLike) -> float:
    """Discrete L^2 pairing dx * sum(a_i * b_i)."""
    return float(space.dx * np.dot(as_values(space, a), as_values(space, b)))


def gradient(space: DiscreteSpace, v: GridLike) -> FloatArray:
    """Forward differences on the M+1 cells, using the zero boundary values."""
    values = as_values(space, v)
    pad = [(0, 0)] * (values.ndim - 1) + [(1, 1)]
    padded = np.pad(values, pad)
    return np.diff(padded, axis=-1) / space.dx  # type: ignore[no-any-return]


def gradient_adjoint(space: DiscreteSpace, w: FloatArray) -> FloatArray:
    """Transpose of ``gradient``: (D^T w)_i = (w_{i-1} - w_i) / dx."""
    w = np.asarray(w, dtype=float)
    if w.shape[-1] != space.M + 1:
        raise DimensionMismatchError(f"expected {space.M + 1} cell values, got {w.shape}")
    return (w[..., :-1] - w[..., 1:]) / space.dx  # type: ignore[no-any-return]


@overload
def laplacian_apply(space: DiscreteSpace, v: GridFunction) -> GridFunction: ...
@overload
def laplacian_apply(space: DiscreteSpace, v: FloatArray) -> FloatArray: ...


def laplacian_apply(space: DiscreteSpace, v: GridLike) -> GridLike:
    """(-v_{i-1} + 2 v_i - v_{i+1}) / dx^2 with zero boundary values."""
    out = space.laplacian.apply(as_values(space, v))
    return GridFunction(space, out) if isinstance(v, GridFunction) else out


@overload
def lambda_solve(space: DiscreteSpace, vstar: GridFunction) -> GridFunction: ...
@overload
def lambda_solve(space: DiscreteSpace, vstar: FloatArray) -> FloatArray: ...


def lambda_solve(space: DiscreteSpace, vstar: GridLike) -> GridLike:
    """Solve laplacian_apply(eta) = vstar; the grid operator Lambda."""
    out = space.laplacian.solve(as_values(space, vstar))
    return GridFunction(space, out) if isinstance(vstar, GridFunction) else out


def norm_V(space: DiscreteSpace, v: GridLike) -> float:
    """H^1_0 seminorm ||dv/dx||_H."""
    d = gradient(space, v)
    return float(np.sqrt(space.dx * np.sum(d * d)))


def norm_Vdual(space: DiscreteSpace, vstar: GridLike) -> float:
    """H^-1 norm computed as ||d(Lambda v*)/dx||_H."""
    return norm_V(space, lambda_solve(space, as_values(space, vstar)))
