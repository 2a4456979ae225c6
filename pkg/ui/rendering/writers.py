#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Result files: density CSV, long-format plot table and the summary record."""

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, List, Sequence, Tuple, Union

import numpy as np

from core.errors import ConfigurationError
from features.probability.probability_engine import DetectionCurve
from utils.helpers import format_number

PLOT_HEADER = ("L", "method", "value")


def _writer(buffer: io.StringIO):
    return csv.writer(buffer, lineterminator="\n")


def render_density_csv(curves: Sequence[DetectionCurve]) -> str:
    """Header L,<method>...; one row per distance, 17 significant digits."""
    buffer = io.StringIO()
    writer = _writer(buffer)
    writer.writerow(["L"] + [curve.method.value for curve in curves])
    if not curves:
        return buffer.getvalue()
    distances = curves[0].distances
    for curve in curves[1:]:
        if curve.distances.shape != distances.shape or np.any(curve.distances != distances):
            raise ConfigurationError("curves in one CSV must share their distance grid")
    for index, distance in enumerate(distances):
        writer.writerow(
            [format_number(distance)] + [format_number(curve.values[index]) for curve in curves]
        )
    return buffer.getvalue()


def emit_plot_data(curves: Sequence[DetectionCurve]) -> str:
    """Long-format (L, method, value) table; header only for no curves."""
    buffer = io.StringIO()
    writer = _writer(buffer)
    writer.writerow(PLOT_HEADER)
    for curve in curves:
        for distance, value in zip(curve.distances, curve.values):
            writer.writerow([format_number(distance), curve.method.value, format_number(value)])
    return buffer.getvalue()


def read_plot_data(text: str) -> List[Tuple[float, str, float]]:
    """Inverse of emit_plot_data."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != PLOT_HEADER:
        raise ConfigurationError(f"plot data must start with header {','.join(PLOT_HEADER)}")
    rows = []
    for number, row in enumerate(reader, start=2):
        if len(row) != 3:
            raise ConfigurationError(f"plot data line {number}: expected 3 fields, got {len(row)}")
        rows.append((float(row[0]), row[1], float(row[2])))
    return rows


def jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become strings."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [jsonable(float(value.real)), jsonable(float(value.imag))]
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    return value


def render_summary(summary: dict) -> str:
    """Sorted-key JSON text."""
    return json.dumps(jsonable(summary), sort_keys=True, indent=2) + "\n"


def write_text(path: Union[str, Path], text: str) -> Path:
    """Write text with '\\n' line endings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    return path
