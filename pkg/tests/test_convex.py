"""Tests for scalar convex functions, conjugates, proximal maps and smoothing."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from benflow.convex import (
    Abs,
    GraphPotential,
    GridSampled,
    IndicatorInterval,
    MoreauEnvelope,
    PiecewiseLinear,
    PowerP,
    Quadratic,
    conjugate,
    fenchel_gap,
    in_subdifferential,
    linear_graph,
    moreau_smooth,
    point_graph,
    prox,
)
from benflow.errors import ImproperFunctionError

GRID = np.linspace(-3.0, 3.0, 121)

CLOSED_FORM = [Quadratic(1.0), Quadratic(2.5), PowerP(3.0), PowerP(4.0), Abs(),
               IndicatorInterval(-1.0, 1.0)]


def _same(a: np.ndarray, b: np.ndarray, atol: float) -> bool:
    if not np.array_equal(np.isfinite(a), np.isfinite(b)):
        return False
    finite = np.isfinite(a)
    return bool(np.all(np.abs(a[finite] - b[finite]) <= atol))


class TestConjugate:
    def test_quadratic(self):
        assert conjugate(Quadratic(1.0))(2.0) == pytest.approx(2.0)

    def test_indicator_gives_abs(self):
        star = conjugate(IndicatorInterval(-1.0, 1.0))
        assert isinstance(star, Abs)
        assert star(-3.0) == pytest.approx(3.0)

    def test_power(self):
        assert conjugate(PowerP(4.0))(1.0) == pytest.approx(0.75)

    @pytest.mark.parametrize("phi", CLOSED_FORM, ids=lambda f: f.name)
    def test_biconjugate(self, phi):
        assert _same(conjugate(conjugate(phi))(GRID), phi(GRID), atol=1e-8)

    def test_abs_conjugate_is_indicator(self):
        star = conjugate(Abs())
        assert star(0.5) == 0.0
        assert star(1.0) == 0.0
        assert np.isinf(star(1.5))

    def test_general_interval_conjugate(self):
        star = conjugate(IndicatorInterval(-1.0, 2.0))
        assert star(3.0) == pytest.approx(6.0)
        assert star(-3.0) == pytest.approx(3.0)

    def test_sampled_quadratic(self):
        xs = np.linspace(-2.0, 2.0, 401)
        star = GridSampled(xs, 0.5 * xs**2).conjugate()
        assert isinstance(star, GridSampled)
        assert star.truncated
        assert star(0.5) == pytest.approx(0.125, abs=1e-4)
        assert np.isinf(star(3.0))

    def test_sampled_rejects_nonconvex(self):
        with pytest.raises(ImproperFunctionError):
            GridSampled([0.0, 1.0, 2.0], [0.0, 1.0, 0.0])

    def test_degenerate_quadratic(self):
        with pytest.raises(ImproperFunctionError):
            Quadratic(0.0)


class TestFenchelGap:
    def test_examples(self):
        assert fenchel_gap(Quadratic(1.0), 1.0, 1.0) == pytest.approx(0.0)
        assert fenchel_gap(Quadratic(1.0), 1.0, 2.0) == pytest.approx(0.5)
        assert fenchel_gap(Abs(), 0.0, 0.5) == pytest.approx(0.0)

    def test_subdifferential_membership(self):
        assert in_subdifferential(Abs(), 0.0, 0.3)
        assert not in_subdifferential(Abs(), 1.0, 0.3)

    @pytest.mark.parametrize("phi", CLOSED_FORM, ids=lambda f: f.name)
    def test_young_inequality(self, phi):
        v, s = np.meshgrid(GRID, GRID, indexing="ij")
        gap = np.asarray(fenchel_gap(phi, v, s))
        assert np.min(gap) >= -1e-10


class TestProx:
    def test_quadratic(self):
        assert prox(Quadratic(1.0), 1.0, 2.0) == pytest.approx(1.0)

    def test_soft_threshold(self):
        assert prox(Abs(), 1.0, 0.5) == 0.0
        assert prox(Abs(), 1.0, 2.5) == pytest.approx(1.5)

    def test_power_root(self):
        assert prox(PowerP(4.0), 1.0, 2.0) == pytest.approx(1.0, abs=1e-12)

    def test_indicator_projects(self):
        np.testing.assert_allclose(prox(IndicatorInterval(-1.0, 1.0), 0.3, [-4.0, 0.2, 9.0]),
                                   [-1.0, 0.2, 1.0])

    def test_rejects_nonpositive_step(self):
        with pytest.raises(ValueError):
            prox(Quadratic(1.0), 0.0, 1.0)

    @settings(max_examples=50, deadline=None)
    @given(
        index=st.integers(0, len(CLOSED_FORM) - 1),
        tau=st.floats(0.05, 5.0),
        w=st.floats(-5.0, 5.0),
    )
    def test_minimizes_prox_objective(self, index, tau, w):
        phi = CLOSED_FORM[index]
        p = prox(phi, tau, w)
        best = phi(p) + (p - w) ** 2 / (2.0 * tau)
        trial = np.linspace(-6.0, 6.0, 2001)
        objective = phi(trial) + (trial - w) ** 2 / (2.0 * tau)
        assert best <= np.min(objective) + 1e-9


class TestMoreau:
    def test_abs_envelope(self):
        env = moreau_smooth(Abs(), 1.0)
        assert env(2.0) == pytest.approx(1.5)
        assert env(0.5) == pytest.approx(0.125)

    def test_quadratic_envelope(self):
        assert moreau_smooth(Quadratic(1.0), 1.0)(1.0) == pytest.approx(0.25)

    def test_ordering(self):
        rough = Abs()
        coarse, fine = MoreauEnvelope(rough, 0.5), MoreauEnvelope(rough, 0.1)
        assert np.all(coarse(GRID) <= fine(GRID) + 1e-12)
        assert np.all(fine(GRID) <= rough(GRID) + 1e-12)

    def test_envelope_is_smooth(self):
        env = moreau_smooth(Abs(), 0.5)
        assert env.is_smooth
        assert env.derivative(2.0) == pytest.approx(1.0)
        assert env.derivative(0.25) == pytest.approx(0.5)


class TestGraphPotentials:
    def test_piecewise_linear_abs(self):
        f = PiecewiseLinear([0.0], [-1.0, 1.0])
        np.testing.assert_allclose(f(np.array([-2.0, 0.0, 3.0])), [2.0, 0.0, 3.0])
        star = conjugate(f)
        np.testing.assert_allclose(star(np.array([-1.0, 0.0, 0.5])), 0.0, atol=1e-12)
        assert star(2.0) == np.inf

    def test_piecewise_linear_knots(self):
        f = PiecewiseLinear([-1.0, 1.0], [-1.0, 0.0, 2.0], value_at_zero=1.0)
        np.testing.assert_allclose(f(np.array([-3.0, 0.0, 2.0])), [3.0, 1.0, 3.0])

    def test_piecewise_linear_invalid(self):
        with pytest.raises(ImproperFunctionError):
            PiecewiseLinear([0.0], [1.0, -1.0])
        with pytest.raises(ImproperFunctionError):
            PiecewiseLinear([0.0], [1.0])

    def test_potential_of_linear_graph(self):
        f = GraphPotential(linear_graph(2.0))
        assert f(1.5) == pytest.approx(2.25)
        assert conjugate(f)(2.0) == pytest.approx(1.0)

    def test_potential_needs_maximal_graph(self):
        with pytest.raises(ImproperFunctionError):
            GraphPotential(point_graph(0.0, 0.0))
