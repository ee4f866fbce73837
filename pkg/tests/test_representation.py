"""Tests for representatives: constructions, calculus rules and certification."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from benflow.convex import Abs, Quadratic, identity_graph, linear_graph, plateau_graph, sign_graph
from benflow.errors import CoercivityError, FamilyUndefinedError, RepresentationError
from benflow.models import DiffusionLaw, kirchhoff_transform
from benflow.representation import (
    ParamMonotoneFamily,
    certify_representative,
    dump_rows,
    elliptic_representative,
    fb_family,
    fenchel_representative,
    fitzpatrick_eval,
    fitzpatrick_representative,
    inf_convolution,
    multiplier_family,
    pivot_representative,
    semimono_representative,
    shift_by_linear,
)
from benflow.spaces import DiscreteSpace, laplacian_apply
from benflow.stability import midpoint_convex


class TestFenchel:
    def test_quadratic(self):
        f = fenchel_representative(Quadratic(1.0))
        assert f.evaluate(1.0, 1.0) == pytest.approx(1.0)
        assert f.evaluate(1.0, 2.0) == pytest.approx(2.5)

    def test_abs_outside_range(self):
        f = fenchel_representative(Abs())
        assert np.isinf(f.evaluate(1.0, 2.0))
        assert f.contains(1.0, 1.0)

    def test_smoothing_keeps_gap_nonnegative(self):
        f = fenchel_representative(Abs()).smoothed(1e-2)
        assert f.differentiable
        v, vs = np.meshgrid(np.linspace(-2, 2, 41), np.linspace(-2, 2, 41))
        assert np.min(f.gap(v, vs)) >= -1e-10


class TestFbFamily:
    def test_values(self):
        assert fb_family(1.0, 0.5).evaluate(1.0, 1.0) == pytest.approx(1.0)
        assert fb_family(1.0, 0.75).evaluate(1.0, 1.0) == pytest.approx(1.5)

    def test_half_represents_multiplication(self):
        f = fb_family(2.0, 0.5)
        assert f.contains(1.5, 3.0)

    def test_above_half_represents_origin_only(self):
        f = fb_family(1.0, 0.75)
        assert f.gap(0.0, 0.0) == pytest.approx(0.0)
        assert f.gap(1.0, 1.0) > 0.0

    @pytest.mark.parametrize(("a", "b"), [(1.0, 0.4), (0.0, 0.5), (-1.0, 1.0)])
    def test_rejects_invalid(self, a, b):
        with pytest.raises(RepresentationError):
            fb_family(a, b)


class TestShift:
    def test_values(self):
        g = shift_by_linear(fenchel_representative(Quadratic(1.0)), 1.0)
        assert g.evaluate(1.0, 2.0) == pytest.approx(2.0)
        assert g.evaluate(1.0, 1.0) == pytest.approx(1.5)

    def test_zero_shift_is_identity(self):
        f = fenchel_representative(Quadratic(1.0))
        assert shift_by_linear(f, 0.0) is f

    def test_negative_shift(self):
        with pytest.raises(RepresentationError):
            shift_by_linear(fenchel_representative(Quadratic(1.0)), -1.0)

    def test_shift_represents_sum(self):
        g = shift_by_linear(fitzpatrick_representative(sign_graph()), 2.0)
        # (1, 1 + 2) lies on sign + 2 I
        assert g.contains(1.0, 3.0)
        assert not g.contains(1.0, 2.0)


class TestInfConvolution:
    def test_values(self):
        g = fenchel_representative(Quadratic(1.0))
        h = inf_convolution(g, g)
        assert h.evaluate(1.0, 2.0) == pytest.approx(2.0, abs=1e-9)
        assert h.evaluate(1.0, 0.0) == pytest.approx(1.0, abs=1e-9)

    def test_represents_sum(self):
        g = fenchel_representative(Quadratic(1.0))
        h = inf_convolution(g, g)
        assert h.gap(1.5, 3.0) == pytest.approx(0.0, abs=1e-9)

    def test_boundary_minimum(self):
        g = fenchel_representative(Quadratic(1.0))
        h = inf_convolution(g, g, zstar_grid=np.linspace(-0.5, 0.5, 11))
        with pytest.raises(CoercivityError):
            h.evaluate(1.0, 4.0)

    def test_convex_on_samples(self):
        g = fenchel_representative(Quadratic(1.0))
        h = inf_convolution(g, g)
        axis = np.linspace(-2.0, 2.0, 21)
        vv, ss = np.meshgrid(axis, axis, indexing="ij")
        assert midpoint_convex(np.asarray(h.evaluate(vv, ss)), tol=1e-6)


class TestSemimonotone:
    def test_multiplier_family(self):
        f = semimono_representative(multiplier_family(lambda z: 1.0 + z * z))
        assert f.evaluate(1.0, 2.0) == pytest.approx(2.0)
        assert f.evaluate(0.0, 0.0) == pytest.approx(0.0)
        assert f.evaluate(1.0, 0.0) == pytest.approx(0.5)
        assert not f.convex
        assert f.topology == "intermediate"
        assert f.frozen(1.0).topology == "weak"

    def test_frozen_is_fitzpatrick_of_member(self):
        f = semimono_representative(multiplier_family(lambda z: 1.0 + z * z))
        frozen = f.frozen(1.0)
        assert frozen.evaluate(3.0, 1.0) == pytest.approx(fitzpatrick_eval(linear_graph(2.0), 3.0, 1.0))

    def test_family_domain(self):
        family = ParamMonotoneFamily(lambda z: linear_graph(z), domain=(0.0, 1.0), name="m")
        f = semimono_representative(family)
        with pytest.raises(FamilyUndefinedError):
            f.evaluate(2.0, 0.0)


class TestElliptic:
    def test_sine_on_graph(self, space63):
        g = elliptic_representative(space63, fenchel_representative(Quadratic(1.0)))
        v = np.sin(np.pi * space63.nodes)
        vstar = laplacian_apply(space63, v)
        assert g.gap(v, vstar) <= 1e-8
        assert g.evaluate(v, vstar) == pytest.approx(np.pi**2 / 2.0, rel=1e-2)

    def test_zero_dual(self, space63):
        g = elliptic_representative(space63, fenchel_representative(Quadratic(1.0)))
        v = np.sin(np.pi * space63.nodes)
        assert g.evaluate(v, np.zeros(63)) == pytest.approx(np.pi**2 / 4.0, rel=1e-2)

    def test_gap_nonnegative(self, space15, rng):
        g = elliptic_representative(space15, fenchel_representative(Quadratic(1.0)))
        v = rng.standard_normal((50, 15))
        vs = rng.standard_normal((50, 15))
        assert np.min(g.gap(v, vs)) >= -1e-9

    def test_trailing_dimension(self, space15):
        g = elliptic_representative(space15, fenchel_representative(Quadratic(1.0)))
        with pytest.raises(RepresentationError):
            g.evaluate(np.zeros(14), np.zeros(14))


class TestPivot:
    def test_gap_vanishes_on_laplacian(self, space31, rng):
        f = pivot_representative(space31, Quadratic(1.0))
        v = rng.standard_normal(31)
        assert f.gap(v, laplacian_apply(space31, v)) == pytest.approx(0.0, abs=1e-10)

    def test_gap_is_half_lifted_distance(self, space15, rng):
        f = pivot_representative(space15, Quadratic(1.0))
        v, r = rng.standard_normal(15), rng.standard_normal(15)
        eta = space15.laplacian.solve(r)
        expected = 0.5 * space15.dx * float(np.sum((v - eta) ** 2))
        assert f.gap(v, r) == pytest.approx(expected, rel=1e-10)
        assert f.provenance == "pivot"


AFFINE_KIRCHHOFF = kirchhoff_transform(DiffusionLaw("affine", a=1.0, working_range=(-0.5, 3.0)))


class TestCertify:
    @pytest.mark.parametrize(
        "graph",
        [identity_graph(), sign_graph(), AFFINE_KIRCHHOFF, plateau_graph(1.0)],
        ids=lambda g: g.name,
    )
    def test_fitzpatrick_is_certified(self, graph):
        report = certify_representative(fitzpatrick_representative(graph), graph, box=3.0,
                                        points=101)
        assert report.gap_ok
        assert report.graph_ok
        assert report.passed

    def test_fitzpatrick_below_quadratic_fenchel(self):
        report = certify_representative(
            fitzpatrick_representative(identity_graph()),
            identity_graph(),
            compare_with=fenchel_representative(Quadratic(1.0)),
        )
        assert report.minimality_ok

    def test_fitzpatrick_below_abs_fenchel(self):
        report = certify_representative(
            fitzpatrick_representative(sign_graph()),
            sign_graph(),
            compare_with=fenchel_representative(Abs()),
        )
        assert report.minimality_ok

    def test_fenchel_abs_represents_sign(self):
        report = certify_representative(fenchel_representative(Abs()), sign_graph())
        assert report.passed

    def test_fb_fails_off_origin(self):
        report = certify_representative(fb_family(1.0, 0.75), identity_graph())
        assert report.gap_ok
        assert report.graph_ok is False
        assert not report.passed
        assert report.failures

    def test_rows(self):
        rows = dump_rows(fitzpatrick_representative(identity_graph()), box=1.0, points=5)
        assert len(rows) == 25
        assert set(rows[0]) == {"v", "vstar", "f", "gap"}

    @settings(max_examples=100, deadline=None)
    @given(v=st.floats(-4.0, 4.0), vstar=st.floats(-4.0, 4.0))
    def test_plateau_gap_nonnegative(self, v, vstar):
        f = fitzpatrick_representative(plateau_graph(1.0))
        assert f.gap(v, vstar) >= -1e-9 * (1.0 + abs(v * vstar))
