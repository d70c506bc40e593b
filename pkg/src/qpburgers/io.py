"""CSV and JSON serialization with provenance headers.

CSV numbers are written with 17 significant digits so that every float
round-trips; comment lines starting with ``#`` carry the provenance.
"""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from . import __version__
from .grid import GridFunction
from .profiles import SampledProfile


def fmt(v: float) -> str:
    return f"{float(v):.17g}"


def provenance(config: dict | None = None) -> list[str]:
    lines = [f"qpburgers {__version__}"]
    for k in sorted(config or {}):
        lines.append(f"{k}={config[k]}")
    return lines


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def to_json(payload: dict, config: dict | None = None) -> str:
    """JSON text; Python floats serialize with repr and round-trip exactly."""
    body = dict(payload)
    if config is not None:
        body = {"provenance": {"version": __version__, "config": config}, **body}
    return json.dumps(_json_safe(body), indent=2, sort_keys=False)


def table_csv(columns, rows, config: dict | None = None) -> str:
    buf = io.StringIO()
    for line in provenance(config):
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def profile_csv(sampled: SampledProfile, config: dict | None = None) -> str:
    x = sampled.u.x
    rows = zip(x, sampled.u.values, sampled.phi.values, sampled.phi_slope.values)
    return table_csv(("x", "u", "phi", "phi_slope"), rows, config)


def grid_csv(u: GridFunction, phi: GridFunction | None = None, config: dict | None = None) -> str:
    """x,u[,phi] for grid data without analytic slopes (e.g. evolved states)."""
    if phi is None:
        return table_csv(("x", "u"), zip(u.x, u.values), config)
    slope = np.append(phi.cell_slopes(), np.nan)
    return table_csv(("x", "u", "phi", "phi_slope"), zip(u.x, u.values, phi.values, slope), config)


def trace_csv(trace, config: dict | None = None) -> str:
    return table_csv(("t", "F"), trace, config)


def read_table(text: str) -> dict[str, np.ndarray]:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    data = np.array([[float(v) for v in row] for row in reader], dtype=float)
    if data.size == 0:
        data = data.reshape(0, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def read_grid(path) -> GridFunction:
    """Load the ``u`` column of a profile CSV as a grid function."""
    with open(path) as fh:
        table = read_table(fh.read())
    x = table["x"]
    if x.size < 3:
        raise ValueError("profile CSV needs at least three rows")
    h = np.diff(x)
    if np.max(np.abs(h - h.mean())) > 1e-9 * max(1.0, np.max(np.abs(x))):
        raise ValueError("profile CSV grid is not uniform")
    return GridFunction(float(x[0]), float(x[-1]), table["u"])
