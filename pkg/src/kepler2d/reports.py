"""Verification reports and their CSV/JSON serialisation."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable


def fmt_float(value: float) -> str:
    """17 significant digits, lowercase scientific; stable across runs."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.16e}"


def fmt_number(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, complex):
        if value.imag == 0.0:
            return fmt_float(value.real)
        return f"{fmt_float(value.real)}{'+' if value.imag >= 0 else ''}{fmt_float(value.imag)}j"
    return fmt_float(value)


def json_number(value):
    """JSON-friendly value: complex numbers become ``[re, im]`` unless real."""
    if isinstance(value, complex):
        if value.imag == 0.0:
            return float(value.real)
        return [float(value.real), float(value.imag)]
    return value


@dataclass(frozen=True)
class VerificationReport:
    label: str
    lhs: complex
    rhs: complex
    abs_error: float
    rel_error: float
    tolerance: float
    passed: bool
    cost: int = 0
    params: dict = field(default_factory=dict)

    @classmethod
    def compare(cls, label, lhs, rhs, tolerance, cost=0, **params):
        """Build a report from two sides; passes when
        ``|lhs - rhs| <= tolerance * max(1, |rhs|)``."""
        abs_error = float(abs(lhs - rhs))
        scale = abs(rhs)
        rel_error = abs_error / scale if scale > 0 else (0.0 if abs_error == 0 else math.inf)
        passed = abs_error <= tolerance * max(1.0, scale)
        return cls(label, lhs, rhs, abs_error, rel_error, float(tolerance), bool(passed),
                   int(cost), dict(params))

    def failed_copy(self, reason: str):
        """Same report, forced to failed, with ``reason`` recorded in params."""
        params = dict(self.params, failure=reason)
        return VerificationReport(self.label, self.lhs, self.rhs, self.abs_error, self.rel_error,
                                  self.tolerance, False, self.cost, params)

    def to_dict(self) -> dict:
        out = {
            "label": self.label,
            "lhs": json_number(self.lhs),
            "rhs": json_number(self.rhs),
            "abs_error": self.abs_error,
            "rel_error": self.rel_error,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "cost": self.cost,
        }
        out.update({k: json_number(v) for k, v in self.params.items()})
        return out


SCAN_COLUMNS = ("n", "m", "x", "lhs", "rhs", "abs_error", "rel_error", "passed", "cost")


def write_csv(rows: Iterable[dict], columns, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt_number(row[c]) for c in columns])


def reports_to_csv(reports: Iterable[VerificationReport], columns=SCAN_COLUMNS) -> str:
    rows = []
    for r in reports:
        row = dict(r.params)
        row.update(lhs=r.lhs, rhs=r.rhs, abs_error=r.abs_error, rel_error=r.rel_error,
                   passed=r.passed, cost=r.cost)
        rows.append(row)
    buf = io.StringIO()
    write_csv(rows, columns, buf)
    return buf.getvalue()


def dumps_json(obj) -> str:
    """Deterministic JSON (sorted keys, repr-exact floats)."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"
