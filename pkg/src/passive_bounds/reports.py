"""Machine-checkable report records and their JSON/CSV serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

SCHEMA_VERSION = "passive-bounds/1"


def _num(x):
    """JSON-safe float: non-finite values become strings."""
    x = float(x)
    if math.isfinite(x):
        return x
    return "inf" if x > 0 else ("-inf" if x < 0 else "nan")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _num(obj.real), "im": _num(obj.imag)}
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    return obj


@dataclass
class BoundReport:
    """Outcome of one ``lhs <= rhs`` check over a frequency band.

    ``slack = rhs - lhs`` and ``passed`` iff ``slack >= -tol`` and every
    sub-check in ``children`` passes.
    """

    name: str
    band: Any
    lhs: float
    rhs: float
    tol: float = 1e-9
    witnesses: list = field(default_factory=list)
    notes: str = ""
    extras: dict = field(default_factory=dict)
    children: list = field(default_factory=list)

    @property
    def slack(self) -> float:
        return float(self.rhs) - float(self.lhs)

    @property
    def passed(self) -> bool:
        s = self.slack
        own = bool(s >= -self.tol) if not math.isnan(s) else False
        return own and all(c.passed for c in self.children)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "band": _jsonable(self.band),
            "lhs": _num(self.lhs),
            "rhs": _num(self.rhs),
            "slack": _num(self.slack),
            "pass": self.passed,
            "tol": _num(self.tol),
            "witnesses": [[_num(w), _jsonable(v)] for w, v in self.witnesses],
            "notes": self.notes,
            "extras": _jsonable(self.extras),
            "children": [c.to_dict() for c in self.children],
        }


@dataclass
class SumRuleReport:
    """Band-limited sum rule for ``v_m = h_m o v`` with its extrapolation history."""

    band: Any
    measure_desc: str
    integral_value: float
    a_minus1: float
    b_minus1: float
    tol: float = 1e-6
    y_sequence_used: list = field(default_factory=list)
    per_y_values: list = field(default_factory=list)
    extrapolation_error_estimate: float = 0.0
    non_monotone: bool = False
    extras: dict = field(default_factory=dict)

    @property
    def rhs_bound(self) -> float:
        return self.a_minus1 - self.b_minus1

    @property
    def slack(self) -> float:
        return self.rhs_bound - self.integral_value

    @property
    def passed(self) -> bool:
        return bool(self.slack >= -self.tol)

    def to_dict(self) -> dict:
        return {
            "name": "sum_rule",
            "band": _jsonable(self.band),
            "measure_desc": self.measure_desc,
            "integral_value": _num(self.integral_value),
            "a_minus1": _num(self.a_minus1),
            "b_minus1": _num(self.b_minus1),
            "rhs_bound": _num(self.rhs_bound),
            "slack": _num(self.slack),
            "pass": self.passed,
            "tol": _num(self.tol),
            "y_sequence_used": [_num(y) for y in self.y_sequence_used],
            "per_y_values": [_num(v) for v in self.per_y_values],
            "extrapolation_error_estimate": _num(self.extrapolation_error_estimate),
            "non_monotone": bool(self.non_monotone),
            "extras": _jsonable(self.extras),
        }


def dumps_report(payload: dict) -> str:
    """Deterministic JSON text (sorted keys, shortest round-trip floats)."""
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2, allow_nan=False) + "\n"


def fmt_float(x) -> str:
    """Shortest round-trip representation, ``inf``/``-inf``/``nan`` for non-finite."""
    x = float(x)
    if math.isfinite(x):
        return repr(x)
    return "inf" if x > 0 else ("-inf" if x < 0 else "nan")


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_float(v) if isinstance(v, (float, np.floating, int)) and not isinstance(v, bool) else v
                    for v in row])
    return buf.getvalue()
