"""Tests for trajectories, the BEN functional and the implicit-Euler oracle."""

import numpy as np
import pytest

from benflow.errors import DimensionMismatchError
from benflow.flow import (
    Trajectory,
    assemble_ben,
    assemble_ben_integrated,
    discrete_dt,
    energy_telescoping,
    implicit_euler_solve,
    make_problem,
    time_weights,
    trajectory_rows,
    weighted_dt_identity_check,
)
from benflow.flow.operators import LinearDiffusion
from benflow.models import (
    ConvectionField,
    DiffusionLaw,
    build_convection_problem,
    build_diffusion_problem,
    build_stefan_problem,
)
from benflow.spaces import DiscreteSpace


def _unit_mode(x: np.ndarray) -> np.ndarray:
    return np.sqrt(2.0) * np.sin(np.pi * x)


def _sine(x: np.ndarray) -> np.ndarray:
    return np.sin(np.pi * x)


def _h_norm2(space: DiscreteSpace, u: np.ndarray) -> float:
    return space.dx * float(u @ u)


class TestTrajectory:
    def test_constant_has_zero_derivative(self, space15):
        traj = Trajectory.constant(space15, 1.0, 8, np.ones(15))
        for k in range(1, 9):
            np.testing.assert_array_equal(discrete_dt(traj, k).values, 0.0)

    def test_linear_in_time(self, space15):
        w = _sine(space15.nodes)
        traj = Trajectory.from_function(space15, 1.0, 10, lambda t, x: t * _sine(x))
        np.testing.assert_allclose(discrete_dt(traj, 7).values, w, atol=1e-12)

    def test_quadratic_in_time(self, space15):
        w = _sine(space15.nodes)
        traj = Trajectory.from_function(space15, 1.0, 10, lambda t, x: t * t * _sine(x))
        err = np.max(np.abs(discrete_dt(traj, 10).values - 2.0 * w))
        assert err <= traj.dt * np.max(np.abs(w)) + 1e-12

    @pytest.mark.parametrize("k", [0, 11])
    def test_step_out_of_range(self, space15, k):
        traj = Trajectory.constant(space15, 1.0, 10, np.zeros(15))
        with pytest.raises(IndexError):
            discrete_dt(traj, k)

    def test_shape_checked(self, space15):
        with pytest.raises(DimensionMismatchError):
            Trajectory(space15, 1.0, np.zeros((3, 14)))

    def test_rows(self, space15):
        traj = Trajectory.constant(space15, 1.0, 2, np.ones(15))
        rows = trajectory_rows(traj)
        assert len(rows) == 3 * 15
        assert rows[-1]["t"] == pytest.approx(1.0)


class TestTimeWeights:
    def test_lebesgue(self):
        np.testing.assert_array_equal(time_weights("lebesgue", 1.0, 4), 1.0)

    def test_linear_decay_midpoints(self):
        np.testing.assert_allclose(time_weights("linear_decay", 1.0, 4),
                                   [0.875, 0.625, 0.375, 0.125])

    def test_unknown(self):
        with pytest.raises(ValueError):
            time_weights("gaussian", 1.0, 4)  # type: ignore[arg-type]


class TestWeightedIdentity:
    def test_constant_trajectory(self, space15):
        traj = Trajectory.from_function(space15, 1.0, 64, lambda t, x: _unit_mode(x))
        lhs, rhs = weighted_dt_identity_check(space15, traj)
        assert lhs == pytest.approx(0.0, abs=1e-14)
        assert rhs == pytest.approx(0.0, abs=1e-12)

    def test_affine_trajectory(self, space15):
        traj = Trajectory.from_function(space15, 1.0, 1024, lambda t, x: (1.0 + t) * _unit_mode(x))
        lhs, rhs = weighted_dt_identity_check(space15, traj)
        assert lhs == pytest.approx(2.0 / 3.0, abs=1e-3)
        assert rhs == pytest.approx(2.0 / 3.0, abs=1e-3)

    def test_first_order_agreement(self, space15):
        def mismatch(K: int) -> float:
            traj = Trajectory.from_function(
                space15, 1.0, K, lambda t, x: (1.0 + t) * _unit_mode(x)
            )
            lhs, rhs = weighted_dt_identity_check(space15, traj)
            return abs(lhs - rhs)

        ratio = mismatch(128) / mismatch(64)
        assert 0.35 <= ratio <= 0.65

    def test_lebesgue_variant(self, space15):
        traj = Trajectory.from_function(space15, 1.0, 2048, lambda t, x: t * _unit_mode(x))
        lhs, rhs = weighted_dt_identity_check(space15, traj, weight="lebesgue")
        assert rhs == pytest.approx(0.5)
        assert lhs == pytest.approx(rhs, abs=1e-3)

    def test_energy_telescoping_is_exact(self, space15, rng):
        traj = Trajectory(space15, 0.5, rng.standard_normal((9, 15)))
        lhs, exact = energy_telescoping(traj)
        assert lhs == pytest.approx(exact, rel=1e-12)


class TestBenFunctional:
    def test_zero_problem(self, space15):
        problem = make_problem(space15, LinearDiffusion(), np.zeros(15), T=0.1, K=8)
        traj = problem.initial_trajectory()
        assert assemble_ben(problem, traj).value == 0.0

    def test_constant_candidate(self, space63):
        problem = build_diffusion_problem(space63, DiffusionLaw(), _sine, T=1.0, K=16)
        value = assemble_ben(problem, problem.initial_trajectory()).value
        assert value == pytest.approx(np.pi**2 / 4.0, rel=1e-2)

    @pytest.mark.parametrize("weight", ["lebesgue", "linear_decay"])
    def test_oracle_is_null_minimizer(self, heat_problem, weight):
        problem = heat_problem.with_weight(weight)
        result = assemble_ben(problem, implicit_euler_solve(problem))
        assert result.value <= 1e-10 * problem.K

    def test_perturbed_oracle_is_positive(self, heat_problem):
        problem = heat_problem.with_weight("linear_decay")
        oracle = implicit_euler_solve(problem)
        steps = np.array(oracle.steps)
        steps[5] += 1e-2 * np.sin(2.0 * np.pi * problem.space.nodes)
        assert assemble_ben(problem, oracle.with_steps(steps)).value > 1e-8

    def test_initial_condition_enforced(self, heat_problem):
        steps = np.array(heat_problem.initial_trajectory().steps)
        steps[0] += 1.0
        with pytest.raises(ValueError):
            assemble_ben(heat_problem, heat_problem.initial_trajectory().with_steps(steps))

    def test_candidate_shape(self, heat_problem, space15):
        with pytest.raises(DimensionMismatchError):
            assemble_ben(heat_problem, Trajectory.constant(space15, 0.1, 32, np.zeros(15)))

    def test_gaps_nonnegative(self, rng):
        space = DiscreteSpace(7)
        problem = make_problem(space, LinearDiffusion(2.0), rng.standard_normal(7), T=0.5, K=4)
        for _ in range(200):
            steps = rng.standard_normal((5, 7)) * rng.uniform(0.1, 3.0)
            steps[0] = problem.u0
            gaps = assemble_ben(problem, Trajectory(space, 0.5, steps)).per_step_gaps
            assert np.min(gaps) >= -1e-9

    def test_convex_along_segments(self, heat_problem, rng):
        K, M = heat_problem.K, heat_problem.space.M

        def candidate() -> Trajectory:
            steps = rng.standard_normal((K + 1, M))
            steps[0] = heat_problem.u0
            return Trajectory(heat_problem.space, heat_problem.T, steps)

        for _ in range(20):
            a, b = candidate(), candidate()
            mid = a.with_steps(0.5 * (a.steps + b.steps))
            fa = assemble_ben(heat_problem, a).value
            fb = assemble_ben(heat_problem, b).value
            fm = assemble_ben(heat_problem, mid).value
            assert fm <= 0.5 * (fa + fb) + 1e-10 * (1.0 + fa + fb)

    def test_integrated_form(self, heat_problem, rng):
        problem = heat_problem.with_weight("linear_decay")
        steps = rng.standard_normal((problem.K + 1, problem.space.M))
        steps[0] = problem.u0
        traj = Trajectory(problem.space, problem.T, steps)
        lhs, rhs = weighted_dt_identity_check(problem.space, traj, problem.T, problem.weight)
        expected = assemble_ben(problem, traj).value + rhs - lhs
        assert assemble_ben_integrated(problem, traj) == pytest.approx(expected, rel=1e-10)


class TestNullMinimizers:
    """The implicit-Euler trajectory zeroes the functional for every model."""

    @staticmethod
    def _problems(space: DiscreteSpace, weight: str) -> list:
        field = ConvectionField.from_function(space, lambda x: -(x - 0.5), name="compressive")
        return [
            build_diffusion_problem(space, DiffusionLaw(), _sine, T=0.1, K=32, weight=weight),
            build_diffusion_problem(space, DiffusionLaw("quadratic", a=1.0), _sine, T=0.1, K=32,
                                    weight=weight),
            build_convection_problem(space, DiffusionLaw(), field, _sine, T=0.1, K=32,
                                     weight=weight),
            build_stefan_problem(space, latent_heat=1.0, eps=1e-3, T=0.1, K=32, weight=weight),
        ]

    @pytest.mark.parametrize("weight", ["lebesgue", "linear_decay"])
    def test_oracle_value(self, space31, weight):
        for problem in self._problems(space31, weight):
            value = assemble_ben(problem, implicit_euler_solve(problem)).value
            bound = 1e-9 * problem.K * (1.0 + _h_norm2(space31, problem.u0))
            assert value <= bound, problem.name
