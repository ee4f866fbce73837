"""Structural stability and compactness experiments."""

from benflow.stability.diagnostics import (
    ComponentTrend,
    GraphLimitDiagnostic,
    PairingDiagnostic,
    graph_limit_check,
    pairing_convergence_diagnostic,
    sine_moments,
    trend_converges,
)
from benflow.stability.experiment import (
    MemberResult,
    OperatorSequence,
    SequenceMember,
    StabilityReport,
    conductivity_sequence,
    constant_sequence,
    data_sequence,
    run_stability_experiment,
    run_stability_experiment_async,
)
from benflow.stability.gamma import LimitIntegrand, estimate_limit_integrand, midpoint_convex

__all__ = [
    "ComponentTrend",
    "GraphLimitDiagnostic",
    "LimitIntegrand",
    "MemberResult",
    "OperatorSequence",
    "PairingDiagnostic",
    "SequenceMember",
    "StabilityReport",
    "conductivity_sequence",
    "constant_sequence",
    "data_sequence",
    "estimate_limit_integrand",
    "graph_limit_check",
    "midpoint_convex",
    "pairing_convergence_diagnostic",
    "run_stability_experiment",
    "run_stability_experiment_async",
    "sine_moments",
    "trend_converges",
]
