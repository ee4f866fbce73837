"""Configuration management using Pydantic Settings."""

import os
from pathlib import Path

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-wide numerical defaults loaded from environment variables or .env file."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="BENFLOW_",
        case_sensitive=False,
    )

    # Application
    debug: bool = False
    output_dir: Path = Field(
        default=Path("runs"),
        description="Directory receiving report.json and CSV tables when --out is not given",
    )
    jobs: int | None = Field(
        default=None,
        description="Concurrent per-n solves in stability sweeps (empty = available parallelism)",
        ge=1,
    )

    # Minimizer
    tol_null_base: float = Field(
        default=1e-8,
        description="Null-minimization tolerance before scaling by (1 + ||u0||^2)",
        gt=0.0,
    )
    tol_grad: float = Field(
        default=1e-12,
        description="Stop when <g, P^-1 g> (gradient g, preconditioner P) is below tol_grad**2",
        gt=0.0,
    )
    max_iter: int = Field(
        default=5000,
        description="Iteration cap of the accelerated descent",
        ge=1,
    )
    smoothing_eps: float = Field(
        default=1e-3,
        description="Moreau smoothing parameter for nonsmooth representatives",
        gt=0.0,
    )
    armijo_factor: float = Field(
        default=0.5,
        description="Backtracking contraction factor",
        gt=0.0,
        lt=1.0,
    )

    # Picard / Newton
    picard_damping: float = Field(default=0.5, gt=0.0, le=1.0)
    picard_max_outer: int = Field(
        default=50,
        description="Outer freezing iterations for semi-monotone minimization",
        ge=1,
    )
    picard_tol: float = Field(
        default=1e-9,
        description="Relative change of the frozen argument that ends the outer loop",
        gt=0.0,
    )
    inner_tol: float = Field(
        default=1e-10,
        description="Implicit-Euler step tolerance (Picard increment or Newton residual)",
        gt=0.0,
    )
    inner_max_iter: int = Field(default=200, ge=1)

    # Sampling
    zstar_points: int = Field(
        default=401,
        description="Search grid size for partial inf-convolution",
        ge=11,
    )
    zstar_bound: float = Field(default=10.0, gt=0.0)
    kirchhoff_nodes: int = Field(
        default=401,
        description="Nodes of the piecewise-linear Kirchhoff graph for non-closed-form k",
        ge=3,
    )
    sample_box: float = Field(default=3.0, gt=0.0)
    sample_points: int = Field(default=101, ge=3)

    @field_validator("output_dir", mode="before")
    @classmethod
    def resolve_path(cls, v: str | Path) -> Path:
        """Convert string paths to Path objects."""
        return Path(v)

    def get_jobs(self) -> int:
        """Resolve the worker count, falling back to the CPU count."""
        if self.jobs:
            return self.jobs
        return os.cpu_count() or 1


# Global settings instance
settings = Settings()
