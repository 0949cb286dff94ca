"""CSV datasets and simulation report output."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from ..data import Dataset

__all__ = ["CsvFormatError", "load_csv", "save_csv", "rescale_columns", "emit_report", "format_table"]


class CsvFormatError(ValueError):
    """A malformed or non-numeric CSV row."""


def rescale_columns(x: np.ndarray, lo=-1.0, hi=1.0):
    """Affinely map each column's observed range onto [lo, hi].

    Returns ``(scaled, ranges)`` with ``ranges`` the original (min, max) per column.
    """
    x = np.asarray(x, dtype=float)
    cmin = x.min(axis=0)
    cmax = x.max(axis=0)
    span = np.where(cmax > cmin, cmax - cmin, 1.0)
    scaled = lo + (x - cmin) / span * (hi - lo)
    scaled[:, cmax == cmin] = 0.5 * (lo + hi)
    return scaled, np.column_stack([cmin, cmax])


def load_csv(path, response: str | int = -1, rescale: bool = False, lo=-1.0, hi=1.0) -> Dataset:
    """Read a headed CSV; ``response`` names (or indexes) the response column.

    All other columns are coordinates.  With ``rescale`` each coordinate column
    is mapped affinely onto [lo, hi]; otherwise values must already lie there.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file") from None
        if len(header) < 2:
            raise CsvFormatError(f"{path}: need at least one coordinate and a response column")
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise CsvFormatError(f"{path}:{line_no}: expected {len(header)} fields, got {len(row)}")
            try:
                vals = [float(c) for c in row]
            except ValueError as exc:
                raise CsvFormatError(f"{path}:{line_no}: {exc}") from None
            if not all(math.isfinite(v) for v in vals):
                raise CsvFormatError(f"{path}:{line_no}: non-finite value")
            rows.append(vals)
    if not rows:
        raise CsvFormatError(f"{path}: no data rows")
    table = np.array(rows)
    col = header.index(response) if isinstance(response, str) else response % len(header)
    y = table[:, col]
    x = np.delete(table, col, axis=1)
    if rescale:
        x, _ = rescale_columns(x, lo, hi)
    return Dataset(x, y, lo, hi)


def save_csv(data: Dataset, path, names=None) -> None:
    """Write coordinates then response; floats use ``repr`` so reading back is exact."""
    if names is None:
        names = [f"x{j + 1}" for j in range(data.d)] + ["y"]
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for xi, yi in zip(data.x, data.y):
            writer.writerow([repr(float(v)) for v in xi] + [repr(float(yi))])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def format_table(report: dict) -> str:
    """Aligned text: MISE x 1000 per estimator, percent of the best, optimal parameters."""
    ests = report["estimators"]
    valid = [e["mise"] for e in ests.values() if e.get("mise") is not None]
    best = min(valid) if valid else float("nan")
    head = f"{report.get('scenario', '')}  sigma={report.get('sigma')}  n={report.get('n')}  R={report.get('R')}"
    lines = [head, f"{'estimator':<10}{'MISE*1000':>11}{'bias2*1000':>12}{'var*1000':>10}{'%best':>8}  params"]
    for name, e in ests.items():
        if e.get("mise") is None:
            lines.append(f"{name:<10}{'n/a':>11}")
            continue
        params = ", ".join(f"{k}={v:.3f}" for k, v in e["params"].items())
        lines.append(
            f"{name:<10}{1000 * e['mise']:>11.2f}{1000 * e['bias2']:>12.2f}"
            f"{1000 * e['var']:>10.2f}{100 * e['mise'] / best:>7.0f}%  ({params})"
        )
    return "\n".join(lines) + "\n"


def emit_report(report: dict, path=None, fmt: str = "json") -> str:
    """Serialize a report as JSON or as a text table; write it when ``path`` is given."""
    if fmt == "json":
        text = json.dumps(_jsonable(report), indent=2) + "\n"
    elif fmt in ("text", "table"):
        text = format_table(report)
    else:
        raise ValueError("format must be 'json' or 'text'")
    if path is not None:
        Path(path).write_text(text)
    return text
