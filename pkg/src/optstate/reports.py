"""CSV and key-value summary emission.

CSV files use '.' decimals, a header row, and newline-terminated rows.
Summary documents are UTF-8 `key = value` text, valid TOML, with keys in
a fixed order so identical results reproduce byte-identical files.
"""

from __future__ import annotations

import math
from pathlib import Path


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return repr(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        escaped = v.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(format_value(x) for x in v) + "]"
    if isinstance(v, dict):
        inner = ", ".join(f"{k} = {format_value(v[k])}" for k in sorted(v))
        return "{ " + inner + " }"
    raise TypeError(f"cannot format {type(v).__name__}")


def csv_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def write_csv(path, header, rows):
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(csv_cell(v) for v in row) + "\n")
    return path


def write_summary(path, sections):
    """`sections` is a list of (section_name_or_None, [(key, value), ...])."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        first = True
        for name, items in sections:
            if name is not None:
                if not first:
                    fh.write("\n")
                fh.write(f"[{name}]\n")
            for k, v in items:
                if v is None:
                    continue
                fh.write(f"{k} = {format_value(v)}\n")
            first = False
    return path


def export_measure_csv(measure, path):
    """Point-mass export: one coordinate column per space dimension."""
    dim = measure.space.dim
    header = [f"x{i + 1}" for i in range(dim)] + ["weight"]
    rows = []
    for i in range(len(measure.weights)):
        p = measure.points[i]
        coords = [float(p)] if dim == 1 else [float(c) for c in p]
        rows.append(coords + [float(measure.weights[i])])
    return write_csv(path, header, rows)
