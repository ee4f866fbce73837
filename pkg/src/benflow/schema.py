"""Run configuration files: versioned TOML validated with Pydantic."""

from __future__ import annotations

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from benflow.errors import ConfigError, UnknownCommandError
from benflow.models.laws import DiffusionLaw

SCHEMA_VERSION = 1
MAX_M = 4097
MAX_K = 8192

Command = Literal["conjugate", "represent", "solve", "stability", "gamma"]
COMMANDS: tuple[str, ...] = ("conjugate", "represent", "solve", "stability", "gamma")


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SpaceConfig(_Section):
    M: int = Field(default=31, ge=1, le=MAX_M, description="Interior grid nodes")


class TimeConfig(_Section):
    T: float = Field(default=0.1, gt=0.0, description="Final time")
    K: int = Field(default=32, ge=1, le=MAX_K, description="Time steps")
    weight: Literal["lebesgue", "linear_decay"] = "lebesgue"


class LawConfig(_Section):
    kind: Literal["constant", "affine", "quadratic", "grid"] = "constant"
    a: float = 0.0
    k0: float = Field(default=1.0, gt=0.0)
    nodes: list[float] = Field(default_factory=list)
    values: list[float] = Field(default_factory=list)
    working_range: tuple[float, float] = (-5.0, 5.0)

    def build(self) -> DiffusionLaw:
        return DiffusionLaw(
            self.kind, self.a, self.k0, tuple(self.nodes), tuple(self.values),
            self.working_range,
        )


class ModelConfig(_Section):
    kind: Literal["heat", "quasilinear", "kirchhoff", "stefan", "convection"] = "heat"
    law: LawConfig = Field(default_factory=LawConfig)
    initial: Literal["sine", "zero", "stefan"] = "sine"
    amplitude: float = 1.0
    source: float = Field(default=0.0, description="Constant source term h")
    latent_heat: float = Field(default=1.0, ge=0.0)
    eps: float = Field(default=1e-3, ge=0.0, description="Stefan regularization")
    velocity: Literal["compressive", "constant"] = "compressive"
    velocity_scale: float = 1.0


class SolverConfig(_Section):
    """Unset fields fall back to the process settings."""

    tol_null: float | None = Field(default=None, gt=0.0)
    tol_grad: float | None = Field(default=None, gt=0.0)
    max_iter: int | None = Field(default=None, ge=1)
    smoothing_eps: float | None = Field(default=None, gt=0.0)
    preconditioner: Literal["time_stepping", "none"] = "time_stepping"
    momentum: bool = True
    oracle: bool = True


class FunctionConfig(_Section):
    kind: Literal["quadratic", "power", "abs", "indicator"] = "quadratic"
    a: float = Field(default=1.0, gt=0.0)
    p: float = Field(default=2.0, gt=1.0)
    lo: float = -1.0
    hi: float = 1.0
    box: float = Field(default=3.0, gt=0.0)
    samples: int = Field(default=101, ge=3, le=100_001)


class RepresentConfig(_Section):
    graph: Literal["identity", "sign", "linear", "plateau", "kirchhoff"] = "identity"
    kind: Literal["fitzpatrick", "fenchel"] = "fitzpatrick"
    slope: float = Field(default=1.0, ge=0.0)
    width: float = Field(default=1.0, ge=0.0)
    law: LawConfig = Field(default_factory=lambda: LawConfig(kind="affine", a=1.0,
                                                            working_range=(-0.5, 3.0)))
    box: float = Field(default=3.0, gt=0.0)
    points: int = Field(default=101, ge=3, le=1001)
    random_samples: int = Field(default=200, ge=0)


def _increasing(ns: list[int]) -> list[int]:
    if any(b <= a for a, b in zip(ns, ns[1:], strict=False)):
        raise ValueError(f"indices must be strictly increasing, got {ns}")
    return ns


class StabilityConfig(_Section):
    sequence: Literal["conductivity", "constant", "data"] = "conductivity"
    ns: list[int] = Field(default_factory=lambda: [4, 8, 16, 32], min_length=1)
    a: float = 1.0
    amplitude: float = 1.0
    law: LawConfig = Field(default_factory=LawConfig)

    @field_validator("ns")
    @classmethod
    def check_ns(cls, v: list[int]) -> list[int]:
        return _increasing(v)


class GammaConfig(_Section):
    family: Literal["fb", "quadratic", "constant"] = "fb"
    ns: list[int] = Field(default_factory=lambda: [4, 8, 16, 32], min_length=1)
    a: float = Field(default=1.0, gt=0.0)
    b: float = Field(default=0.5, ge=0.5, description="Fixed b of the constant family")
    box: float = Field(default=3.0, gt=0.0)
    points: int = Field(default=101, ge=3, le=1001)

    @field_validator("ns")
    @classmethod
    def check_ns(cls, v: list[int]) -> list[int]:
        return _increasing(v)


class OutputConfig(_Section):
    dir: Path | None = None
    timings: bool = False
    trajectory_csv: bool = True


class RunConfig(_Section):
    """A complete run: one command and its parameters."""

    schema_version: Literal[1]
    command: Command
    seed: int = 0
    space: SpaceConfig = Field(default_factory=SpaceConfig)
    time: TimeConfig = Field(default_factory=TimeConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    function: FunctionConfig = Field(default_factory=FunctionConfig)
    represent: RepresentConfig = Field(default_factory=RepresentConfig)
    stability: StabilityConfig = Field(default_factory=StabilityConfig)
    gamma: GammaConfig = Field(default_factory=GammaConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)


def _format_errors(err: ValidationError) -> str:
    parts = []
    for item in err.errors():
        where = ".".join(str(p) for p in item["loc"]) or "<root>"
        parts.append(f"{where}: {item['msg']}")
    return "; ".join(parts)


def parse_config(raw: dict[str, Any], source: str = "<config>") -> RunConfig:
    """Validate a decoded TOML document; unknown commands are reported on their own."""
    command = raw.get("command")
    if command is not None and command not in COMMANDS:
        raise UnknownCommandError(
            f"{source}: unknown command {command!r}; expected one of {', '.join(COMMANDS)}"
        )
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"{source}: {_format_errors(e)}") from e


def load_config(path: Path) -> RunConfig:
    """Read and validate a TOML run configuration."""
    try:
        with open(path, "rb") as f:
            raw = tomllib.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except (OSError, tomllib.TOMLDecodeError) as e:
        raise ConfigError(f"cannot parse {path}: {e}") from e
    return parse_config(raw, str(path))
