"""Golden reference files generated from the qubit oracle.

``cnot_cases.json`` holds the 16 pre-correction CNOT states with their Born
probabilities and derived corrections; ``teleport_corrections_n{N}.json``
holds the outcome -> correction table of an N-qubit chain.  Output is
byte-stable: sorted keys, 12 significant digits, canonical global phase.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import numpy as np

from . import oracle
from .errors import GoldenFileError
from .report import fmt_complex

GOLDEN_DIR = Path(__file__).parent / "golden"
TELEPORT_NS = (3, 4, 5, 7)
CNOT_FILE = "cnot_cases.json"
FORMAT_VERSION = 1


def teleport_file(n: int) -> str:
    return f"teleport_corrections_n{n}.json"


def golden_names() -> list[str]:
    return [CNOT_FILE] + [teleport_file(n) for n in TELEPORT_NS]


def canonical_phase(vec: np.ndarray, eps: float = 1e-12) -> np.ndarray:
    """Rotate so the first amplitude above ``eps`` is real and positive."""
    vec = np.asarray(vec, dtype=complex)
    for amp in vec:
        if abs(amp) > eps:
            return vec * (abs(amp) / amp)
    return vec


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cnot_cases_text() -> str:
    table = oracle.cnot_correction_table()
    cases = []
    for i1 in (0, 1):
        for i4 in (0, 1):
            branches = oracle.cnot_reference(i1, i4)
            for outcome in sorted(branches):
                prob, post = branches[outcome]
                n3, n4, _ = table[outcome]
                cases.append({
                    "input": [i1, i4],
                    "outcome": list(outcome),
                    "probability": fmt_complex(complex(prob))[0],
                    "state": [fmt_complex(a) for a in canonical_phase(post)],
                    "correction": {"q3": n3, "q4": n4},
                })
    return _dump({"version": FORMAT_VERSION, "qubits": 4, "cases": cases})


def teleport_corrections_text(n: int) -> str:
    table = oracle.teleport_correction_table(n)
    entries = [{"outcome": list(outcome), "correction": table[outcome][0]} for outcome in sorted(table)]
    return _dump({
        "version": FORMAT_VERSION,
        "n": n,
        "correction_set": sorted(oracle.correction_set(n)),
        "corrections": entries,
    })


def golden_texts() -> dict[str, str]:
    texts = {CNOT_FILE: cnot_cases_text()}
    for n in TELEPORT_NS:
        texts[teleport_file(n)] = teleport_corrections_text(n)
    return texts


def write_golden(out_dir) -> list[Path]:
    out = Path(out_dir)
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, text in golden_texts().items():
            path = out / name
            path.write_text(text, encoding="utf-8")
            written.append(path)
    except OSError as exc:
        raise GoldenFileError(exc.filename or out, exc.strerror or str(exc)) from None
    return written


def stale_files(golden_dir=GOLDEN_DIR) -> list[str]:
    """Names of golden files that are missing or differ from a fresh regeneration."""
    d = Path(golden_dir)
    stale = []
    for name, text in golden_texts().items():
        path = d / name
        try:
            current = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError):
            stale.append(name)
            continue
        if current != text:
            stale.append(name)
    return stale


def _read_json(path: Path):
    try:
        raw = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise GoldenFileError(path, "file not found") from None
    except (OSError, UnicodeDecodeError) as exc:
        raise GoldenFileError(path, f"unreadable: {exc}") from None
    if not raw.strip():
        raise GoldenFileError(path, "file is empty")
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise GoldenFileError(path, f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _bits(value, width: int, path: Path, what: str) -> tuple[int, ...]:
    if (not isinstance(value, list) or len(value) != width
            or any(type(b) is not int or b not in (0, 1) for b in value)):
        raise GoldenFileError(path, f"{what} must be a list of {width} bits, got {value!r}")
    return tuple(value)


def load_cnot_cases(path: Optional[Path] = None) -> dict:
    """``{((i1, i4), (s1, s2)): 16-amplitude vector}`` from a CNOT golden file."""
    path = Path(path) if path is not None else GOLDEN_DIR / CNOT_FILE
    data = _read_json(path)
    if not isinstance(data, dict) or not isinstance(data.get("cases"), list):
        raise GoldenFileError(path, "expected an object with a 'cases' list")
    cases = {}
    for k, case in enumerate(data["cases"]):
        if not isinstance(case, dict):
            raise GoldenFileError(path, f"case {k} is not an object")
        inp = _bits(case.get("input"), 2, path, f"case {k} input")
        outcome = _bits(case.get("outcome"), 2, path, f"case {k} outcome")
        state = case.get("state")
        try:
            vec = np.array([complex(float(re), float(im)) for re, im in state], dtype=complex)
        except (TypeError, ValueError):
            raise GoldenFileError(path, f"case {k} state must be a list of [re, im] pairs") from None
        if vec.shape != (16,):
            raise GoldenFileError(path, f"case {k} state has {vec.size} amplitudes, expected 16")
        if (inp, outcome) in cases:
            raise GoldenFileError(path, f"duplicate case {inp} {outcome}")
        cases[(inp, outcome)] = vec
    if len(cases) != 16:
        raise GoldenFileError(path, f"expected 16 cases, found {len(cases)}")
    return cases


def load_teleport_corrections(n: int, path: Optional[Path] = None) -> dict[tuple[int, ...], str]:
    path = Path(path) if path is not None else GOLDEN_DIR / teleport_file(n)
    data = _read_json(path)
    if not isinstance(data, dict) or data.get("n") != n or not isinstance(data.get("corrections"), list):
        raise GoldenFileError(path, f"expected an object with n = {n} and a 'corrections' list")
    table = {}
    for k, entry in enumerate(data["corrections"]):
        if not isinstance(entry, dict):
            raise GoldenFileError(path, f"entry {k} is not an object")
        outcome = _bits(entry.get("outcome"), n - 1, path, f"entry {k} outcome")
        name = entry.get("correction")
        if name not in oracle.EXTENDED_CORRECTIONS:
            raise GoldenFileError(path, f"entry {k} has unknown correction {name!r}")
        table[outcome] = name
    if len(table) != 2 ** (n - 1):
        raise GoldenFileError(path, f"expected {2 ** (n - 1)} entries, found {len(table)}")
    return table
