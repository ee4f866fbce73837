"""Tests for the diffusion laws, Stefan and convection models."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from benflow.errors import CoercivityError, ConvectionFieldError, DimensionMismatchError, ImproperFunctionError
from benflow.flow import EnthalpyPivot, LinearDiffusion, SemimonotoneDiffusion, implicit_euler_solve
from benflow.models import (
    ConvectionField,
    DiffusionLaw,
    build_diffusion_problem,
    build_stefan_problem,
    convection_form,
    diffusion_operator,
    enthalpy_balance,
    stefan_fields,
    stefan_graph,
)
from benflow.spaces import DiscreteSpace


class TestDiffusionLaw:
    def test_bounds(self):
        assert DiffusionLaw("quadratic", a=1.0, working_range=(-2.0, 2.0)).bounds == (1.0, 5.0)
        assert DiffusionLaw(k0=3.0).bounds == (3.0, 3.0)

    def test_clipped_outside_range(self):
        law = DiffusionLaw("affine", a=1.0, working_range=(-0.5, 3.0))
        assert law(10.0) == pytest.approx(4.0)

    def test_primitive(self):
        law = DiffusionLaw("quadratic", a=1.0)
        assert law.primitive(1.0) == pytest.approx(1.0 + 1.0 / 3.0)

    def test_grid_law(self):
        law = DiffusionLaw("grid", nodes=(0.0, 1.0, 2.0), values=(1.0, 2.0, 2.0))
        assert law(0.5) == pytest.approx(1.5)
        assert law.primitive(1.0) == pytest.approx(1.5)
        assert law.primitive(2.0) == pytest.approx(3.5)

    def test_invalid(self):
        with pytest.raises(ImproperFunctionError):
            DiffusionLaw("grid", nodes=(1.0, 0.0), values=(1.0, 1.0))
        with pytest.raises(ImproperFunctionError):
            DiffusionLaw(working_range=(1.0, 1.0))

    def test_noncoercive(self):
        with pytest.raises(CoercivityError):
            DiffusionLaw("affine", a=1.0).check_coercive()


class TestOperators:
    def test_constant_law_is_linear(self):
        assert isinstance(diffusion_operator(DiffusionLaw()), LinearDiffusion)

    def test_quadratic_law_is_semimonotone(self):
        assert isinstance(diffusion_operator(DiffusionLaw("quadratic", a=1.0)), SemimonotoneDiffusion)

    def test_kirchhoff_formulation(self):
        law = DiffusionLaw("affine", a=1.0, working_range=(-0.5, 3.0))
        assert isinstance(diffusion_operator(law, "kirchhoff"), EnthalpyPivot)

    def test_unknown_formulation(self):
        with pytest.raises(ValueError):
            diffusion_operator(DiffusionLaw("quadratic", a=1.0), "mixed")  # type: ignore[arg-type]

    def test_enthalpy_needs_single_valued_graph(self):
        from benflow.convex import sign_graph

        with pytest.raises(ImproperFunctionError):
            EnthalpyPivot(sign_graph())

    def test_kirchhoff_and_semimonotone_agree(self, space31):
        law = DiffusionLaw("affine", a=1.0, working_range=(-0.5, 3.0))
        u0 = lambda x: np.sin(np.pi * x)  # noqa: E731
        direct = implicit_euler_solve(build_diffusion_problem(space31, law, u0, T=0.05, K=16))
        enthalpy = implicit_euler_solve(
            build_diffusion_problem(space31, law, u0, T=0.05, K=16, formulation="kirchhoff")
        )
        # two consistent discretizations of one equation
        assert np.max(np.abs(direct.steps[-1] - enthalpy.steps[-1])) <= 5e-2


class TestStefan:
    def test_graph(self):
        g = stefan_graph(1.0, 0.0)
        np.testing.assert_allclose(g.selection([-1.0, 0.5, 2.0]), [-1.0, 0.0, 1.0])
        assert stefan_graph(1.0, 1e-3).strictly_increasing

    def test_mass_balance(self, space15):
        problem = build_stefan_problem(space15, latent_heat=1.0, eps=0.0, T=0.1, K=16)
        traj = implicit_euler_solve(problem)
        assert np.max(np.abs(enthalpy_balance(problem, traj))) <= 1e-8

    def test_degenerate_steps_solvable(self, space15, rng):
        problem = build_stefan_problem(space15, latent_heat=1.0, eps=0.0, T=0.1, K=16)
        op, dt = problem.operator, problem.dt
        for _ in range(20):
            b = rng.uniform(-1.0, 2.0, 15)
            u = op.resolvent(space15, b, dt)
            residual = (u - b) / dt + op.apply(space15, u)
            assert np.max(np.abs(residual)) * dt <= 1e-8

    def test_fields(self, space15):
        problem = build_stefan_problem(space15, latent_heat=1.0, eps=1e-3, T=0.1, K=4)
        traj = implicit_euler_solve(problem)
        enthalpy, temperature = stefan_fields(traj, problem.operator.graph)
        assert enthalpy.shape == temperature.shape == (5, 15)
        np.testing.assert_allclose(temperature, problem.operator.graph.selection(enthalpy))

    def test_balance_needs_enthalpy_problem(self, heat_problem):
        with pytest.raises(ValueError):
            enthalpy_balance(heat_problem, heat_problem.initial_trajectory())


class TestConvection:
    def test_constant_field_is_skew(self, space31, rng):
        field = ConvectionField.constant(space31, 2.0)
        assert convection_form(space31, field, rng.standard_normal(31)) == pytest.approx(0.0, abs=1e-12)

    def test_compressive_field(self, space31, rng):
        field = ConvectionField.from_function(space31, lambda x: -(x - 0.5))
        u = rng.standard_normal(31)
        expected = 0.5 * space31.dx * float(u @ u)
        assert convection_form(space31, field, u) == pytest.approx(expected, rel=1e-12)

    def test_expanding_field_rejected(self, space31):
        with pytest.raises(ConvectionFieldError):
            ConvectionField.from_function(space31, lambda x: x)

    def test_wrong_shape(self, space31):
        with pytest.raises(DimensionMismatchError):
            ConvectionField(space31, np.zeros(31))

    @settings(max_examples=50, deadline=None)
    @given(scale=st.floats(0.0, 5.0), seed=st.integers(0, 2**32 - 1))
    def test_form_nonnegative(self, scale, seed):
        space = DiscreteSpace(15)
        field = ConvectionField.from_function(space, lambda x: -scale * (x - 0.5))
        u = np.random.default_rng(seed).standard_normal(15)
        assert convection_form(space, field, u) >= -1e-12
