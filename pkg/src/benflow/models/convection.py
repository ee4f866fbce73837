"""Transport by a velocity field in a non-expanding medium.

The velocity b is stored on all nodes x_0..x_{M+1}. The grid operator B is the
skew-symmetric centered part

    S_{i,i+1} = (b_i + b_{i+1}) / (4 dx) = -S_{i+1,i}

plus -1/2 diag(div b), with the forward divergence (b_{i+1} - b_i)/dx. Hence
<Bu, u> = -1/2 dx sum div_i u_i^2, which is nonnegative exactly when the
medium does not expand.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray

from benflow.errors import ConvectionFieldError, DimensionMismatchError
from benflow.spaces import DiscreteSpace, GridLike, TridiagonalOperator, as_values

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

DIVERGENCE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ConvectionField:
    """Nodal velocity with nonpositive discrete divergence."""

    space: DiscreteSpace
    velocity: FloatArray
    name: str = "b"

    def __post_init__(self) -> None:
        b = np.array(self.velocity, dtype=float)
        if b.shape != (self.space.M + 2,):
            raise DimensionMismatchError(
                f"velocity needs {self.space.M + 2} nodal values including the boundary, "
                f"got shape {b.shape}"
            )
        b.setflags(write=False)
        object.__setattr__(self, "velocity", b)
        worst = float(self.divergence.max())
        if worst > DIVERGENCE_TOL:
            raise ConvectionFieldError(
                f"field {self.name} expands the medium: discrete divergence reaches {worst:.3e}"
            )

    @classmethod
    def from_function(
        cls, space: DiscreteSpace, fn: Callable[[FloatArray], ArrayLike], name: str = "b"
    ) -> ConvectionField:
        x = np.arange(space.M + 2, dtype=float) * space.dx
        return cls(space, np.broadcast_to(np.asarray(fn(x), dtype=float), x.shape), name)

    @classmethod
    def constant(cls, space: DiscreteSpace, c: float) -> ConvectionField:
        return cls(space, np.full(space.M + 2, float(c)), f"b={c:g}")

    @cached_property
    def divergence(self) -> FloatArray:
        """Forward difference (b_{i+1} - b_i)/dx at the interior nodes."""
        b = self.velocity
        return (b[2:] - b[1:-1]) / self.space.dx  # type: ignore[no-any-return]


def convection_matrix(field: ConvectionField) -> TridiagonalOperator:
    b = field.velocity
    dx = field.space.dx
    upper = (b[1:-2] + b[2:-1]) / (4.0 * dx)
    return TridiagonalOperator(-0.5 * field.divergence, -upper, upper)


def convection_form(space: DiscreteSpace, field: ConvectionField, u: GridLike) -> float:
    """dx * sum (b du/dx)_i u_i with the skew-symmetric centered discretization."""
    if field.space.M != space.M:
        raise DimensionMismatchError(f"field lives on M={field.space.M}, expected {space.M}")
    values = as_values(space, u)
    return float(space.dx * values @ convection_matrix(field).apply(values))
