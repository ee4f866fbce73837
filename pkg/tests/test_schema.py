"""Tests for run-configuration parsing."""

from pathlib import Path

import pytest

from benflow.errors import ConfigError, UnknownCommandError
from benflow.schema import load_config, parse_config

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _raw(**overrides):
    raw = {"schema_version": 1, "command": "solve"}
    raw.update(overrides)
    return raw


class TestParse:
    def test_defaults(self):
        cfg = parse_config(_raw())
        assert cfg.space.M == 31
        assert cfg.time.weight == "lebesgue"
        assert cfg.solver.tol_null is None
        assert cfg.model.kind == "heat"

    def test_unknown_command(self):
        with pytest.raises(UnknownCommandError):
            parse_config(_raw(command="plot"))

    @pytest.mark.parametrize(
        "raw",
        [
            _raw(space={"M": 5000}),
            _raw(space={"M": 0}),
            _raw(time={"T": -1.0}),
            _raw(extra=1),
            _raw(schema_version=2),
            {"command": "solve"},
            _raw(stability={"ns": [8, 4]}),
            _raw(gamma={"b": 0.25}),
            _raw(solver={"tol_null": 0.0}),
        ],
    )
    def test_invalid(self, raw):
        with pytest.raises(ConfigError):
            parse_config(raw)

    def test_unknown_command_is_a_config_error(self):
        assert issubclass(UnknownCommandError, ConfigError)

    def test_law_build(self):
        cfg = parse_config(_raw(model={"kind": "quasilinear", "law": {"kind": "quadratic", "a": 1.0}}))
        assert cfg.model.law.build().bounds == (1.0, 26.0)


class TestLoad:
    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.toml")

    def test_bad_toml(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("schema_version = = 1\n")
        with pytest.raises(ConfigError):
            load_config(path)

    @pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.toml")), ids=lambda p: p.stem)
    def test_shipped_configs(self, path: Path):
        cfg = load_config(path)
        assert cfg.schema_version == 1
