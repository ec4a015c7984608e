"""Reading point clouds and writing curve tables.

Point files are CSV with a header row (coordinate columns, then an optional
``weight`` column) or JSON ``{"points": [[...], ...], "weights": [...]}``.
A curve CSV written by :func:`curve_csv` can be read back as a point cloud:
its ``mu_*`` columns are taken as coordinates.
"""

import csv
import io
import json
import os
import tempfile
from pathlib import Path

from .measure import EmpiricalMeasure, from_points

__all__ = ["fmt", "read_points", "parse_points_csv", "curve_header", "curve_csv", "atomic_write"]


def fmt(x: float) -> str:
    """17 significant digits: enough to round-trip any double."""
    return format(float(x), ".17g")


def parse_points_csv(text: str) -> EmpiricalMeasure:
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise ValueError("empty CSV")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if not body:
        raise ValueError("CSV has a header but no points")
    try:
        float(header[0])
    except ValueError:
        pass
    else:
        raise ValueError("CSV header row is required")

    mu_cols = [i for i, h in enumerate(header) if h.startswith("mu_")]
    if mu_cols:
        coord_cols, weight_col = mu_cols, None
    elif header[-1].lower() == "weight":
        coord_cols, weight_col = list(range(len(header) - 1)), len(header) - 1
    else:
        coord_cols, weight_col = list(range(len(header))), None
    if not coord_cols:
        raise ValueError("CSV has no coordinate columns")

    points, weights = [], []
    for lineno, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise ValueError(f"line {lineno}: expected {len(header)} fields, got {len(r)}")
        try:
            points.append([float(r[i]) for i in coord_cols])
            if weight_col is not None:
                weights.append(float(r[weight_col]))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
    return from_points(points, weights if weight_col is not None else None)


def read_points(path) -> EmpiricalMeasure:
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        data = json.loads(text)
        if not isinstance(data, dict) or "points" not in data:
            raise ValueError('JSON input must be an object with a "points" key')
        return from_points(data["points"], data.get("weights"))
    return parse_points_csv(text)


def curve_header(dim: int) -> list:
    return ["alpha", *[f"mu_{i + 1}" for i in range(dim)], "norm", "angle_to_u", "objective", "residual", "status"]


def curve_csv(curve, dim: int) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(curve_header(dim))
    for p in curve:
        writer.writerow(
            [fmt(p.alpha), *map(fmt, p.mu), fmt(p.norm), fmt(p.angle_to_u),
             fmt(p.objective), fmt(p.residual), p.status.value]
        )
    return buf.getvalue()


def atomic_write(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
