"""
Report emission - CSV and JSON rows with fixed columns
Rationals serialize as "p/q", reals with 12 significant digits; nothing run-dependent is written
"""

import csv
import io
import json
import sys
from enum import Enum
from fractions import Fraction
from numbers import Integral
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

from bounds import BoundReport
from errors import ArgumentError

FORMATS = ("csv", "json")


def format_value(value: Any) -> str:
    """Text form of one cell."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, Integral):
        return str(int(value))
    if isinstance(value, float):
        return format(value, ".12g")
    if isinstance(value, (list, tuple)):
        return json.dumps(value, separators=(",", ":"))
    return str(value)


def _json_value(value: Any) -> Any:
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, Integral):
        return int(value)
    if isinstance(value, float):
        return float(format(value, ".12g"))
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _json_value(v) for k, v in value.items()}
    return str(value)


def render(rows: Sequence[Dict[str, Any]], columns: Sequence[str], fmt: str = "csv") -> str:
    """
    Render rows with a fixed column order.

    Args:
        rows: Row dicts; missing keys render empty
        columns: Column names, also the CSV header
        fmt: 'csv' or 'json'
    """
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row.get(column)) for column in columns])
        return buffer.getvalue()
    if fmt == "json":
        payload = [{column: _json_value(row.get(column)) for column in columns} for row in rows]
        return json.dumps(payload, indent=2) + "\n"
    raise ArgumentError(f"Unknown report format '{fmt}' (expected one of {FORMATS})")


def write_report(text: str, output: Optional[Union[str, Path]] = None, stream=None):
    """Write rendered text to a file, or to the given stream (stdout by default)."""
    if output is not None:
        Path(output).write_text(text, encoding="utf-8")
        return
    (stream or sys.stdout).write(text)


def bound_rows(reports: Iterable[BoundReport]) -> List[Dict[str, Any]]:
    """BoundReport objects as bounds/audit rows (name, n, m, lhs, rhs, verdict)."""
    rows = []
    for item in reports:
        rows.append({
            "name": item.name,
            "n": item.params.get("n", item.params.get("l")),
            "m": item.params.get("m"),
            "lhs": item.lhs,
            "rhs": item.rhs,
            "verdict": item.verdict,
        })
    return rows


def any_failed(reports: Iterable[BoundReport]) -> bool:
    return any(item.failed for item in reports)
