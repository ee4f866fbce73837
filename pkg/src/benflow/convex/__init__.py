"""Convex analysis kernel: scalar convex functions and monotone graphs."""

from benflow.convex.functions import (
    Abs,
    GraphPotential,
    GridSampled,
    IndicatorInterval,
    MoreauEnvelope,
    PiecewiseLinear,
    PowerP,
    Quadratic,
    QuadraticPerturbation,
    ScalarConvex,
    conjugate,
    fenchel_gap,
    in_subdifferential,
    moreau_smooth,
    prox,
)
from benflow.convex.graphs import (
    FitzpatrickSup,
    MonotoneGraph,
    graph_membership,
    identity_graph,
    linear_graph,
    plateau_graph,
    point_graph,
    sign_graph,
)

__all__ = [
    "Abs",
    "FitzpatrickSup",
    "GraphPotential",
    "GridSampled",
    "IndicatorInterval",
    "MonotoneGraph",
    "MoreauEnvelope",
    "PiecewiseLinear",
    "PowerP",
    "Quadratic",
    "QuadraticPerturbation",
    "ScalarConvex",
    "conjugate",
    "fenchel_gap",
    "graph_membership",
    "identity_graph",
    "in_subdifferential",
    "linear_graph",
    "moreau_smooth",
    "plateau_graph",
    "point_graph",
    "prox",
    "sign_graph",
]
