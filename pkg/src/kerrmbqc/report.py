"""Byte-stable number formatting and JSON report rows."""
from __future__ import annotations

import json
from typing import Any

SIGNIFICANT_DIGITS = 12
ZERO_CUTOFF = 1e-12


def fmt_number(x: float) -> float:
    """Round to 12 significant digits; tiny values and -0 become 0."""
    x = float(x)
    if abs(x) < ZERO_CUTOFF:
        return 0.0
    return float(f"{x:.{SIGNIFICANT_DIGITS}g}")


def fmt_complex(z: complex) -> list[float]:
    return [fmt_number(z.real), fmt_number(z.imag)]


def report_row(input_, outcome, probability, overlap, passed, state=None) -> dict[str, Any]:
    row = {
        "input": input_,
        "outcome": list(outcome),
        "probability": fmt_number(probability),
        "overlap": None if overlap is None else fmt_number(overlap),
        "pass": passed,
    }
    if state is not None:
        row["state"] = state
    return row


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"
