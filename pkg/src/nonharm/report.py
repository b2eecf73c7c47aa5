"""Check records shared by every verification routine, plus CSV/JSON writers."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

CSV_COLUMNS = ("suite", "check", "param1", "param2", "measured", "target", "tol", "pass")


@dataclass(frozen=True)
class Check:
    """One measured quantity compared against a target.

    ``asserted=False`` marks a soft metric: it is written to reports but never
    changes the exit status of a campaign.
    """

    suite: str
    check: str
    measured: float
    target: float | str = ""
    tol: float | str = ""
    passed: bool = True
    param1: str | float | int = ""
    param2: str | float | int = ""
    asserted: bool = True

    def __post_init__(self):
        # numpy scalars would otherwise render differently from builtins
        object.__setattr__(self, "passed", bool(self.passed))
        object.__setattr__(self, "asserted", bool(self.asserted))
        for name in ("measured", "target", "tol", "param1", "param2"):
            v = getattr(self, name)
            if hasattr(v, "item") and not isinstance(v, (str, bytes)):
                object.__setattr__(self, name, v.item())


def fmt(value) -> str:
    """Stable text form of a report cell (17 significant digits for floats)."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float,)) or type(value).__name__ in ("float64", "float32"):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    if type(value).__name__ in ("int64", "int32"):
        return str(int(value))
    return str(value)


def _json_value(value):
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    try:
        v = float(value)
    except (TypeError, ValueError):
        return str(value)
    if isinstance(value, int) or type(value).__name__ in ("int64", "int32"):
        return int(value)
    if math.isnan(v) or math.isinf(v):
        return fmt(v)
    return v


def render_csv(checks: Sequence[Check], header: dict) -> str:
    buf = io.StringIO()
    for key, value in header.items():
        buf.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for c in checks:
        writer.writerow(
            [c.suite, c.check, fmt(c.param1), fmt(c.param2), fmt(c.measured),
             fmt(c.target), fmt(c.tol), fmt(c.passed if c.asserted else "soft:" + fmt(c.passed))]
        )
    return buf.getvalue()


def render_json(checks: Sequence[Check], header: dict, extra: dict | None = None) -> str:
    rows = []
    for c in checks:
        row = {k: _json_value(v) for k, v in asdict(c).items()}
        rows.append(row)
    doc = dict(header)
    doc["checks"] = rows
    if extra:
        doc["details"] = extra
    doc["pass"] = all_passed(checks)
    return json.dumps(doc, indent=2, sort_keys=True, default=_json_value) + "\n"


def all_passed(checks: Iterable[Check]) -> bool:
    return all(c.passed for c in checks if c.asserted)
