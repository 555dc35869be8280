"""Field dumps (CSV) and JSON reports.

CSV layout::

    nx,ny,spacing,origin_x,origin_y
    domain_kind,param[,param...]
    v[0,0],v[0,1],...,v[0,nx-1]        # row j = 0 (smallest y)
    ...

Floats are written with 17 significant digits, so a dump/load cycle is bit-exact.
Exterior nodes are written as ``nan``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .grid import Grid2D, GridError, ScalarField, make_domain


class FieldFormatError(ValueError):
    """Malformed field file; the message names the offending row/column."""


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else format(float(x), ".17g")


def dumps_field(f: ScalarField) -> str:
    g = f.grid
    lines = [
        ",".join([str(g.nx), str(g.ny), _fmt(g.spacing), _fmt(g.origin[0]), _fmt(g.origin[1])]),
        ",".join([g.domain.kind, *(_fmt(p) for p in g.domain.params)]),
    ]
    values = np.where(g.active, f.values, np.nan)
    for row in values:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_field(path, f: ScalarField) -> None:
    Path(path).write_text(dumps_field(f))


def loads_field(text: str) -> ScalarField:
    rows = [line for line in text.splitlines() if line.strip()]
    if len(rows) < 2:
        raise FieldFormatError("row 1: missing two-line header")
    head = rows[0].split(",")
    if len(head) != 5:
        raise FieldFormatError(f"row 1: expected 5 header fields, got {len(head)}")
    try:
        nx, ny = int(head[0]), int(head[1])
        spacing, ox, oy = (float(s) for s in head[2:])
    except ValueError as exc:
        raise FieldFormatError(f"row 1: {exc}") from None
    dom = rows[1].split(",")
    try:
        domain = make_domain(dom[0].strip(), *(float(s) for s in dom[1:]))
        grid = Grid2D(nx, ny, spacing, (ox, oy), domain)
    except (GridError, TypeError, ValueError) as exc:
        raise FieldFormatError(f"row 2: {exc}") from None
    body = rows[2:]
    if len(body) != ny:
        raise FieldFormatError(f"row {len(rows) + 1}: expected {ny} value rows, got {len(body)}")
    values = np.empty((ny, nx))
    for j, line in enumerate(body):
        cells = line.split(",")
        if len(cells) != nx:
            raise FieldFormatError(f"row {j + 3}: expected {nx} columns, got {len(cells)}")
        for i, cell in enumerate(cells):
            try:
                values[j, i] = float(cell)
            except ValueError:
                raise FieldFormatError(f"row {j + 3}, column {i + 1}: cannot parse {cell!r}") from None
    return ScalarField(grid, values)


def read_field(path) -> ScalarField:
    return loads_field(Path(path).read_text())


def _plain(obj):
    # numpy scalars/arrays -> builtin types; non-finite floats -> None
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps_report(report: dict) -> str:
    """Deterministic JSON (sorted keys, round-trip float repr)."""
    return json.dumps(_plain(report), indent=2, sort_keys=True) + "\n"


def write_report(path, report: dict) -> None:
    Path(path).write_text(dumps_report(report))
