"""Shared fixtures for the benflow test suite."""

from pathlib import Path

import numpy as np
import pytest

from benflow.models import DiffusionLaw, build_diffusion_problem
from benflow.spaces import DiscreteSpace

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture
def configs_dir() -> Path:
    return CONFIGS


@pytest.fixture
def space15() -> DiscreteSpace:
    return DiscreteSpace(15)


@pytest.fixture
def space31() -> DiscreteSpace:
    return DiscreteSpace(31)


@pytest.fixture
def space63() -> DiscreteSpace:
    return DiscreteSpace(63)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


def sine(x: np.ndarray) -> np.ndarray:
    return np.sin(np.pi * x)


@pytest.fixture
def heat_problem(space31):
    """Linear heat equation, k = 1, u0 = sin(pi x), no source."""
    return build_diffusion_problem(space31, DiffusionLaw(), sine, T=0.1, K=32, name="heat")


@pytest.fixture
def quasilinear_problem(space31):
    return build_diffusion_problem(
        space31, DiffusionLaw("quadratic", a=1.0), sine, T=0.1, K=32, name="quasilinear"
    )
