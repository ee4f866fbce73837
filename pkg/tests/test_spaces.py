"""Tests for the discrete function spaces H, V and V'."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from benflow.errors import DimensionMismatchError
from benflow.spaces import (
    DiscreteSpace,
    GridFunction,
    gradient,
    gradient_adjoint,
    lambda_solve,
    laplacian_apply,
    norm_V,
    norm_Vdual,
    pairing_H,
)


class TestDiscreteSpace:
    def test_spacing(self):
        space = DiscreteSpace(31)
        assert space.dx * (space.M + 1) == pytest.approx(1.0)
        assert space.nodes[0] == pytest.approx(space.dx)
        assert space.nodes[-1] == pytest.approx(1.0 - space.dx)

    @pytest.mark.parametrize("M", [0, -3])
    def test_rejects_empty_grid(self, M):
        with pytest.raises(ValueError):
            DiscreteSpace(M)

    def test_grid_function_shape(self):
        with pytest.raises(DimensionMismatchError):
            GridFunction(DiscreteSpace(4), np.zeros(5))

    def test_grid_function_is_read_only(self):
        v = DiscreteSpace(3).grid([1.0, 2.0, 3.0])
        with pytest.raises(ValueError):
            v.values[0] = 0.0


class TestPairing:
    def test_zero_pairing(self):
        space = DiscreteSpace(5)
        assert pairing_H(space, space.zeros(), space.sample(np.cos)) == 0.0

    def test_single_node(self):
        space = DiscreteSpace(1)
        assert pairing_H(space, space.grid([2.0]), space.grid([3.0])) == pytest.approx(3.0)

    def test_sine_norm(self, space63):
        v = space63.sample(lambda x: np.sin(np.pi * x))
        assert pairing_H(space63, v, v) == pytest.approx(0.5, abs=1e-12)

    def test_mismatched_spaces(self):
        with pytest.raises(DimensionMismatchError):
            pairing_H(DiscreteSpace(3), DiscreteSpace(3).zeros(), DiscreteSpace(4).zeros())


class TestLaplacian:
    def test_parabola(self, space31):
        v = space31.sample(lambda x: 0.5 * x * (1.0 - x))
        out = laplacian_apply(space31, v)
        np.testing.assert_allclose(out.values, 1.0, atol=1e-10)

    def test_sine_eigenfunction(self, space63):
        v = space63.sample(lambda x: np.sin(np.pi * x))
        out = laplacian_apply(space63, v).values
        rel = np.max(np.abs(out - np.pi**2 * v.values)) / np.pi**2
        assert rel <= 1e-2

    def test_inverse_of_constant(self, space31):
        eta = lambda_solve(space31, space31.grid(np.ones(31)))
        assert eta.values[15] == pytest.approx(0.125, abs=1e-10)

    def test_inverse_of_sine(self, space63):
        rhs = space63.sample(lambda x: np.pi**2 * np.sin(np.pi * x))
        eta = lambda_solve(space63, rhs).values
        target = np.sin(np.pi * space63.nodes)
        assert np.max(np.abs(eta - target)) <= 1e-2

    @settings(max_examples=30, deadline=None)
    @given(M=st.sampled_from([3, 15, 63]), seed=st.integers(0, 2**32 - 1))
    def test_round_trip(self, M, seed):
        space = DiscreteSpace(M)
        v = np.random.default_rng(seed).standard_normal(M)
        back = lambda_solve(space, laplacian_apply(space, v))
        assert np.linalg.norm(back - v) <= 1e-10 * np.linalg.norm(v)

    def test_symmetric_positive(self, space15, rng):
        a, b = rng.standard_normal(15), rng.standard_normal(15)
        lhs = pairing_H(space15, laplacian_apply(space15, a), b)
        rhs = pairing_H(space15, a, laplacian_apply(space15, b))
        assert lhs == pytest.approx(rhs, rel=1e-12)
        assert pairing_H(space15, laplacian_apply(space15, a), a) > 0

    def test_gradient_adjoint(self, space15, rng):
        v = rng.standard_normal(15)
        w = rng.standard_normal(16)
        lhs = space15.dx * float(np.sum(gradient(space15, v) * w))
        rhs = space15.dx * float(np.sum(v * gradient_adjoint(space15, w)))
        assert lhs == pytest.approx(rhs, rel=1e-12)


class TestNorms:
    def test_dual_norm_of_image(self, space31, rng):
        v = rng.standard_normal(31)
        assert norm_Vdual(space31, laplacian_apply(space31, v)) == pytest.approx(
            norm_V(space31, v), rel=1e-10
        )

    def test_energy_norm(self, space31, rng):
        v = rng.standard_normal(31)
        assert norm_V(space31, v) ** 2 == pytest.approx(
            pairing_H(space31, laplacian_apply(space31, v), v), rel=1e-12
        )


class TestTridiagonal:
    def test_dense_agreement(self, space15, rng):
        op = space15.laplacian
        v = rng.standard_normal(15)
        np.testing.assert_allclose(op.apply(v), op.to_dense() @ v, rtol=1e-12)

    def test_solve_shifted(self, space15, rng):
        op = space15.laplacian.shifted(3.0)
        b = rng.standard_normal(15)
        np.testing.assert_allclose(op.apply(op.solve(b)), b, atol=1e-10)
