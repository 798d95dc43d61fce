"""Deterministic CSV / JSON emission with a provenance header."""

from __future__ import annotations

import datetime as _dt
import io
import json
import math

import numpy as np

from . import __version__
from ._kernels import BACKEND_NAME

UNITS_NOTE = "units: lambda0 = omega0 = hbar = eps0 = 1; d and area in program units"


def header_fields(command, cfg, timestamp=True, extra=None):
    """Ordered list of ``(key, value)`` pairs describing a run."""
    fields = [("tool", "opencavity"), ("version", __version__), ("command", command),
              ("units", UNITS_NOTE)]
    if timestamp:
        now = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0)
        fields.append(("timestamp", now.isoformat()))
    fields.extend(cfg.echo())
    for k, v in (extra or []):
        fields.append((k, v))
    return fields


def _clean(obj):
    """Make ``obj`` JSON serialisable with stable formatting."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def fmt(v) -> str:
    """Shortest round-trip text for a CSV cell."""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def render_csv(header, columns, rows, notes=()):
    buf = io.StringIO()
    for k, v in header:
        buf.write(f"# {k} = {v}\n")
    for note in notes:
        buf.write(f"# {note}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(fmt(x) for x in row) + "\n")
    return buf.getvalue()


def render_json(header, payload):
    doc = {"header": {k: v for k, v in header}}
    doc.update(_clean(payload))
    return json.dumps(doc, indent=2, sort_keys=False, allow_nan=False) + "\n"


def error_record(kind, message, exit_code):
    return json.dumps({"error": kind, "message": str(message), "exit_code": exit_code,
                       "backend": BACKEND_NAME}, sort_keys=True)
