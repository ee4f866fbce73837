"""Tests for convergence diagnostics and structural stability experiments."""

import numpy as np
import pytest

from benflow.convex import identity_graph, linear_graph, plateau_graph, point_graph
from benflow.errors import CoercivityError, DimensionMismatchError, StabilityAborted
from benflow.flow import SolveOptions
from benflow.models import DiffusionLaw
from benflow.spaces import DiscreteSpace
from benflow.stability import (
    conductivity_sequence,
    constant_sequence,
    data_sequence,
    graph_limit_check,
    pairing_convergence_diagnostic,
    run_stability_experiment,
    run_stability_experiment_async,
    sine_moments,
    trend_converges,
)


class TestTrend:
    def test_small_last_entry(self):
        assert trend_converges([1.0, 1.0, 1e-3])

    def test_fourfold_shrink(self):
        assert trend_converges([1.0, 0.5, 0.25])

    def test_stalled(self):
        assert not trend_converges([1.0, 0.9, 0.8])

    def test_nonfinite(self):
        assert not trend_converges([1.0, float("inf")])

    def test_empty(self):
        assert trend_converges([])


class TestPairingDiagnostic:
    def test_constant_sequence(self, space31):
        v = np.sin(np.pi * space31.nodes)
        diag = pairing_convergence_diagnostic(space31, [v] * 4, [v] * 4, v, v)
        assert diag.pi_convergent

    def test_oscillation_is_weak_only(self, space63):
        x = space63.nodes
        ns = [11, 13, 16, 20, 24, 28]
        seq = [np.sin(n * np.pi * x) for n in ns]
        zero = np.zeros(63)
        diag = pairing_convergence_diagnostic(space63, seq, seq, zero, zero)
        assert diag.weakly_convergent
        assert not diag.pi_convergent
        np.testing.assert_allclose(diag.pairings, 0.5, atol=1e-2)

    def test_perturbation_decaying_like_one_over_n(self, space31):
        x = space31.nodes
        v, w = np.sin(np.pi * x), np.sin(3.0 * np.pi * x)
        ns = [4, 8, 16, 32]
        seq = [v + w / n for n in ns]
        diag = pairing_convergence_diagnostic(space31, seq, seq, v, v)
        assert diag.pi_convergent

    def test_length_mismatch(self, space31):
        v = np.zeros(31)
        with pytest.raises(DimensionMismatchError):
            pairing_convergence_diagnostic(space31, [v, v], [v], v, v)

    def test_space_time_moments(self, space31):
        x = space31.nodes
        block = np.tile(np.sin(np.pi * x), (4, 1))
        moments = sine_moments(space31, block, 3, dt=0.25)
        assert moments[0] == pytest.approx(0.5)
        assert moments[1] == pytest.approx(0.0, abs=1e-12)


class TestGraphLimit:
    def test_linear_graphs(self):
        ns = [4, 8, 16, 32]
        graphs = [linear_graph(1.0 + 1.0 / n) for n in ns]
        witnesses = [(1.0, 1.0 + 1.0 / n) for n in ns]
        diag = graph_limit_check(graphs, identity_graph(), witnesses, (1.0, 1.0))
        assert diag.passed
        assert diag.liminf_inclusion
        assert not diag.flags

    def test_shrinking_point_graphs(self):
        graphs = [point_graph(0.0, 0.0)] * 4
        diag = graph_limit_check(graphs, point_graph(0.0, 0.0), [(0.0, 0.0)] * 4, (0.0, 0.0))
        assert diag.passed

    def test_plateau_widths(self):
        ns = [4, 8, 16, 32]
        graphs = [plateau_graph(1.0 + 1.0 / n) for n in ns]
        witnesses = [(1.0 + 1.0 / n, 0.0) for n in ns]
        diag = graph_limit_check(graphs, plateau_graph(1.0), witnesses, (1.0, 0.0))
        assert diag.passed

    def test_missing_lower_limit_is_reported(self):
        graphs = [point_graph(0.0, 0.0)] * 3
        diag = graph_limit_check(graphs, identity_graph(), [(0.0, 0.0)] * 3, (0.0, 0.0))
        assert diag.passed
        assert not diag.liminf_inclusion
        assert diag.flags

    def test_wrong_limit_point(self):
        ns = [4, 8, 16]
        graphs = [linear_graph(2.0)] * 3
        witnesses = [(1.0, 2.0)] * 3
        diag = graph_limit_check(graphs, identity_graph(), witnesses, (1.0, 2.0))
        assert diag.limit_membership is False
        assert not diag.passed
        assert len(ns) == len(diag.witness_errors)


class TestSequences:
    def test_rejects_noncoercive_law(self, space15):
        with pytest.raises(CoercivityError):
            constant_sequence(space15, DiffusionLaw("affine", a=1.0))

    def test_rejects_unordered_indices(self, space15):
        with pytest.raises(ValueError):
            constant_sequence(space15, ns=(8, 4))

    def test_conductivity_bounds(self, space15):
        seq = conductivity_sequence(space15, ns=(1, 2), a=1.0)
        assert seq.bounds == (1.0, 26.0)
        assert seq.ns == [1, 2]


class TestExperiments:
    def test_constant_sequence(self, space15):
        seq = constant_sequence(space15, ns=(4, 8), T=0.1, K=16)
        report = run_stability_experiment(seq, jobs=2)
        assert max(report.errors) <= 1e-8
        assert report.passed
        assert [row["n"] for row in report.rows()] == [4, 8]

    def test_data_sequence_first_order(self, space15):
        seq = data_sequence(space15, ns=(4, 8, 16), T=0.1, K=16)
        report = run_stability_experiment(seq, jobs=1)
        e = report.errors
        assert e[1] / e[0] == pytest.approx(0.5, abs=0.05)
        assert e[2] / e[1] == pytest.approx(0.5, abs=0.05)
        assert report.passed

    def test_conductivity_sequence(self, space31):
        seq = conductivity_sequence(space31, ns=(4, 8, 16, 32), T=0.1, K=32)
        report = run_stability_experiment(seq)
        assert report.errors[-1] < report.errors[0]
        assert report.bounded
        assert report.limit_solves
        assert report.pairing is not None
        assert report.pairing.pi_convergent
        assert report.passed

    def test_abort_on_nonconvergence(self, space15):
        seq = constant_sequence(space15, ns=(4, 8), T=0.1, K=8)
        opts = SolveOptions(tol_null=1e-300, max_iter=1, preconditioner="none", oracle=False)
        with pytest.raises(StabilityAborted) as info:
            run_stability_experiment(seq, opts, jobs=1)
        assert info.value.report.aborted
        assert not info.value.report.passed

    async def test_async_runner(self):
        seq = constant_sequence(DiscreteSpace(7), ns=(2, 4), T=0.1, K=4)
        report = await run_stability_experiment_async(seq, jobs=2)
        assert report.passed
        assert report.to_dict()["passed"] is True
