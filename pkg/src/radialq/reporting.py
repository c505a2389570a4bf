"""Deterministic report assembly.

Reports are plain dicts serialized with sorted keys; all numbers travel as
decimal strings formatted from the working precision, so identical inputs
at identical precision produce byte-identical output.  Wall time is only
included when explicitly requested (it would break determinism).
"""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction

from gmpy2 import mpc, mpfr

from .documents import format_complex, format_real
from .hp import DEFAULT_PRECISION

SCHEMA_VERSION = "1"


def jsonable(value, precision: int = DEFAULT_PRECISION):
    """Recursively convert numbers to deterministic strings."""
    if isinstance(value, mpfr):
        return format_real(value, precision)
    if isinstance(value, mpc):
        return format_complex(value, precision)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, dict):
        return {k: jsonable(v, precision) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v, precision) for v in value]
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


def build_report(
    command: str,
    inputs: dict,
    results: dict,
    precision: int = DEFAULT_PRECISION,
    wall_time_s: float | None = None,
) -> dict:
    report = {
        "schema": SCHEMA_VERSION,
        "command": command,
        "precision_bits": precision,
        "inputs": jsonable(inputs, precision),
        "results": jsonable(results, precision),
    }
    if wall_time_s is not None:
        report["wall_time_s"] = f"{wall_time_s:.3f}"
    return report


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def rows_to_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()
