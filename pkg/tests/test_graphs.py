"""Tests for monotone graphs and the Kirchhoff transform."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from benflow.convex import (
    MonotoneGraph,
    graph_membership,
    identity_graph,
    linear_graph,
    plateau_graph,
    point_graph,
    sign_graph,
)
from benflow.errors import CoercivityError, ImproperFunctionError
from benflow.models import DiffusionLaw, kirchhoff_transform


class TestConstruction:
    def test_rejects_decreasing_points(self):
        with pytest.raises(ImproperFunctionError):
            MonotoneGraph(np.array([[0.0, 1.0], [1.0, 0.0]]), np.zeros(1), 1.0, 1.0)

    def test_rejects_negative_tail(self):
        with pytest.raises(ImproperFunctionError):
            linear_graph(-1.0)

    def test_maximality(self):
        assert identity_graph().is_maximal
        assert not point_graph(0.0, 0.0).is_maximal

    def test_sign_graph_shape(self):
        g = sign_graph()
        assert not g.single_valued
        assert not g.strictly_increasing
        assert g.range == (-1.0, 1.0)

    def test_plateau_shape(self):
        g = plateau_graph(1.0)
        assert g.single_valued
        assert g.domain == (-np.inf, np.inf)


class TestMembership:
    def test_examples(self):
        assert graph_membership(sign_graph(), 0.0, 0.5)
        assert graph_membership(plateau_graph(1.0), 0.5, 0.0)
        assert not graph_membership(identity_graph(), 1.0, 2.0)

    def test_distance(self):
        assert identity_graph().distance(1.0, 0.0) == pytest.approx(np.sqrt(0.5))

    def test_distance_to_curved_segment(self):
        # z = w^2 on [0, 2]; the foot of (0, 1) is at w = 1/sqrt(2)
        g = MonotoneGraph(np.array([[0.0, 0.0], [2.0, 4.0]]), np.array([1.0]), 0.0, None)
        assert float(g.distance(0.0, 1.0)) == pytest.approx(np.sqrt(0.75), abs=1e-12)
        assert float(g.distance(1.5, 2.25)) == pytest.approx(0.0, abs=1e-12)
        assert g.contains(1.0, 1.0)

    def test_selection(self):
        g = plateau_graph(1.0)
        np.testing.assert_allclose(g.selection([-1.0, 0.5, 2.0]), [-1.0, 0.0, 1.0])

    def test_resolvent(self):
        x = np.array([-2.0, 0.5, 3.0])
        np.testing.assert_allclose(identity_graph().resolvent(0.5, x), x / 1.5)

    def test_sign_resolvent_soft_thresholds(self):
        np.testing.assert_allclose(sign_graph().resolvent(1.0, [2.5, 0.5]), [1.5, 0.0])


class TestFitzpatrick:
    def test_identity_examples(self):
        g = identity_graph()
        assert g.fitzpatrick(1.0, 3.0) == pytest.approx(4.0)
        assert g.fitzpatrick(1.0, 1.0) == pytest.approx(1.0)

    def test_sign_on_graph(self):
        assert sign_graph().fitzpatrick(0.0, 0.5) == pytest.approx(0.0)

    @settings(max_examples=100, deadline=None)
    @given(v=st.floats(-10.0, 10.0), vstar=st.floats(-10.0, 10.0))
    def test_identity_closed_form(self, v, vstar):
        value = identity_graph().fitzpatrick(v, vstar)
        assert value == pytest.approx((v + vstar) ** 2 / 4.0, rel=1e-10, abs=1e-10)

    @settings(max_examples=100, deadline=None)
    @given(v=st.floats(-5.0, 5.0), vstar=st.floats(-5.0, 5.0))
    def test_dominates_pairing(self, v, vstar):
        g = plateau_graph(1.0)
        assert g.fitzpatrick(v, vstar) >= v * vstar - 1e-9 * (1.0 + abs(v * vstar))

    def test_unbounded_outside_range(self):
        sup = sign_graph().fitzpatrick_sup(0.0, 2.0)
        assert np.isinf(sup.value)
        assert sup.unbounded is not None


class TestKirchhoff:
    def test_affine_law(self):
        law = DiffusionLaw("affine", a=1.0, working_range=(-0.5, 3.0))
        theta = kirchhoff_transform(law)
        assert theta.selection(2.0) == pytest.approx(4.0)

    def test_constant_law_is_linear(self):
        theta = kirchhoff_transform(DiffusionLaw())
        assert theta.selection(2.0) == pytest.approx(2.0)

    def test_noncoercive_law(self):
        with pytest.raises(CoercivityError):
            kirchhoff_transform(DiffusionLaw("affine", a=1.0))

    def test_slopes_within_bounds(self):
        law = DiffusionLaw("quadratic", a=1.0, working_range=(-2.0, 2.0))
        k_min, k_max = law.bounds
        assert (k_min, k_max) == (1.0, 5.0)
        theta = kirchhoff_transform(law)
        ws = np.linspace(-1.9, 1.9, 50)
        slopes = theta.slope(ws)
        assert np.all(slopes >= k_min - 1e-9)
        assert np.all(slopes <= k_max + 1e-9)
        assert np.all(np.diff(theta.selection(ws)) > 0)


class TestGraphTransforms:
    def test_scaled(self):
        np.testing.assert_allclose(identity_graph().scaled(3.0).selection([2.0]), [6.0])
        with pytest.raises(ImproperFunctionError):
            identity_graph().scaled(0.0)

    def test_regularized_sign_is_invertible(self):
        g = sign_graph().regularized(0.5)
        np.testing.assert_allclose(g.selection([-2.0, 2.0]), [-2.0, 2.0])
        assert g.strictly_increasing

    def test_plateau_inverse_selection(self):
        np.testing.assert_allclose(plateau_graph(1.0).inverse_selection([-1.0, 0.0, 2.0]),
                                   [-1.0, 0.0, 3.0])

    def test_inverse_of_sign(self):
        cone = sign_graph().inverse()
        np.testing.assert_allclose(cone.selection([-0.5, 0.5]), [0.0, 0.0])
        assert cone.domain == (-1.0, 1.0)
