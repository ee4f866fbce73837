"""Bit-stable JSON reports and CSV tables.

Floats are written with %.12e, non-finite floats as the strings "inf", "-inf"
and "nan", keys sorted, indent 2. Two runs with the same inputs therefore
produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any, Protocol

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from benflow.errors import ReportError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12e"


class SolveReportModel(BaseModel):
    """The serialized solve report; exactly these fields are written."""

    model_config = ConfigDict(extra="forbid")

    value: float
    per_step_gaps: list[float] = Field(min_length=1)
    oracle_distance: float | None
    iterations: int = Field(ge=0)
    wall_time_ms: float | None
    converged: bool


class _HasDict(Protocol):
    def to_dict(self) -> dict[str, Any]: ...


def validate_solve_report(payload: Mapping[str, Any]) -> dict[str, Any]:
    try:
        return SolveReportModel.model_validate(dict(payload)).model_dump()
    except ValidationError as e:
        raise ReportError(f"invalid solve report: {e.errors()[0]['msg']}") from e


def format_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return FLOAT_FORMAT % x


def _encode(obj: Any, level: int) -> str:
    pad = "  " * (level + 1)
    end = "  " * level
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int | np.integer):
        return str(int(obj))
    if isinstance(obj, float | np.floating):
        return format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, Path):
        return json.dumps(str(obj))
    if isinstance(obj, Mapping):
        if not obj:
            return "{}"
        items = [
            f"{pad}{json.dumps(str(k))}: {_encode(obj[k], level + 1)}"
            for k in sorted(obj, key=str)
        ]
        return "{\n" + ",\n".join(items) + f"\n{end}}}"
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), level)
    if isinstance(obj, Sequence | set):
        if not obj:
            return "[]"
        items = [f"{pad}{_encode(v, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + f"\n{end}]"
    raise ReportError(f"cannot serialize {type(obj).__name__}")


def dumps_report(report: Mapping[str, Any] | _HasDict) -> str:
    payload = report if isinstance(report, Mapping) else report.to_dict()
    return _encode(payload, 0) + "\n"


def emit_report(report: Mapping[str, Any] | _HasDict, path: Path) -> Path:
    """Write the report as bit-stable JSON."""
    text = dumps_report(report)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise ReportError(f"cannot write report {path}: {e}") from e
    logger.info(f"Wrote report {path}")
    return path


def _cell(value: Any) -> str:
    if isinstance(value, float | np.floating):
        return format_float(float(value)).strip('"')
    return str(value)


def write_csv(rows: Iterable[Mapping[str, Any]], path: Path, columns: Sequence[str]) -> Path:
    """Write rows with the given columns, floats formatted like the JSON reports."""
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_cell(row[c]) for c in columns])
    except KeyError as e:
        raise ReportError(f"row without column {e} for {path.name}") from e
    except OSError as e:
        raise ReportError(f"cannot write table {path}: {e}") from e
    logger.debug(f"Wrote table {path}")
    return path
