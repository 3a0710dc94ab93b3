"""
Report writer for geostab.

JSON reports carry a `schema_version` field and CSV tables a header row.
Floats are written with 17 significant digits so results round-trip exactly;
non-finite floats become null in JSON.
"""
import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Literal, Union

import numpy as np

from ..config import FLOAT_DIGITS, SCHEMA_VERSION
from ..errors import ConfigurationError

logger = logging.getLogger(__name__)


def format_float(value: float) -> str:
    return f"{value:.{FLOAT_DIGITS}g}"


def to_plain(value: Any) -> Any:
    """Reduce reports, arrays and numpy scalars to dicts, lists and Python scalars."""
    if hasattr(value, "to_dict"):
        return to_plain(value.to_dict())
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if value is None or isinstance(value, str):
        return value
    return str(value)


def _json_text(value: Any, level: int = 0, indent: int = 2) -> str:
    pad = " " * (indent * (level + 1))
    close = " " * (indent * level)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_json_text(v, level + 1, indent)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + close + "}"
    if isinstance(value, list):
        if not value:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in value):
            return "[" + ", ".join(_json_text(v, level + 1, indent) for v in value) + "]"
        items = [f"{pad}{_json_text(v, level + 1, indent)}" for v in value]
        return "[\n" + ",\n".join(items) + "\n" + close + "]"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_float(value) if math.isfinite(value) else "null"
    if value is None:
        return "null"
    return json.dumps(value)


def render_json(report: Any) -> str:
    body = to_plain(report)
    if not isinstance(body, dict):
        body = {"result": body}
    payload = {"schema_version": SCHEMA_VERSION}
    payload.update({k: v for k, v in body.items() if k != "schema_version"})
    return _json_text(payload) + "\n"


def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    return "" if value is None else str(value)


def emit_report(report: Any, format: Literal["json", "csv"], path: Union[str, Path]) -> Path:
    """
    Write a report to path.

    Args:
        report: A dict or result object with to_dict (JSON) / to_rows (CSV)
        format: "json" or "csv"
        path: Target file; parent directories are created

    Returns:
        The written path

    Raises:
        ConfigurationError: unknown format, or CSV requested for a report without a table
    """
    path = Path(path)
    if format == "json":
        text = render_json(report)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    elif format == "csv":
        if hasattr(report, "to_rows"):
            header, rows = report.to_rows()
        elif isinstance(report, dict) and "header" in report:
            header, rows = report["header"], report.get("rows", [])
        else:
            raise ConfigurationError(f"Report of type {type(report).__name__} has no tabular form", {"module": "cli"})
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_cell(v) for v in row])
    else:
        raise ConfigurationError(f"Unknown report format: {format}", {"module": "cli"})
    logger.info("wrote %s report %s", format, path)
    return path
