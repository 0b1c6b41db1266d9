"""Line-oriented circuit description language for dual-rail optical circuits.

One statement per line, whitespace-separated tokens, ``#`` starts a comment.
See ``docs/format.md`` for the grammar.  ``parse`` returns the first error
only; ``format_program`` renders a canonical text that parses back to an
equal program.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import pi
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import oracle
from .dualrail import DualRailRegister, logical_product_factors, measure_x, measure_z
from .errors import KerrSimError
from .fock import DEFAULT_TOL, PhotonicState, create_photon, make_vacuum
from .optics import (
    HADAMARD, PLUS_PREP, UNITARY_TOL, BeamSplitter, KerrGate, apply_beamsplitter, apply_kerr,
    qubit_prep_matrix,
)
from .protocols import (
    ENUMERATE, BranchPolicy, BranchWalker, ProtocolResult, apply_cnot_correction,
    apply_named_correction, measured_fixed, output_state, results_to_rows, sort_results,
    teleport_correction, CORRECTION_MODES,
)

MAX_MODES = 4096
MAX_CUTOFF = 64
CIRCUITS_DIR = Path(__file__).parent / "circuits"


class ParseError(KerrSimError):
    """Syntax error with a 1-based line/column position and the offending token."""

    def __init__(self, line: int, column: int, message: str, token: str = ""):
        self.line = line
        self.column = column
        self.message = message
        self.token = token
        where = f"line {line}, column {column}"
        super().__init__(f"{where}: {message}" + (f" (at {token!r})" if token else ""))


class ValidationError(ParseError):
    """Well-formed statement that breaks a semantic rule."""


class ExecutionError(KerrSimError):
    def __init__(self, line: int, message: str):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}")


# -- program model -----------------------------------------------------------

@dataclass(frozen=True)
class Angle:
    """Either an exact multiple of pi or a plain value in radians."""
    pi_multiple: Optional[Fraction] = None
    radians: Optional[float] = None

    @property
    def value(self) -> float:
        if self.pi_multiple is not None:
            return float(self.pi_multiple) * pi
        return self.radians


@dataclass(frozen=True)
class DefQubit:
    name: str
    mode_a: int
    mode_b: int
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Source:
    mode: int
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BS:
    mode_a: int
    mode_b: int
    preset: str
    params: tuple[complex, ...] = ()
    line: int = field(default=0, compare=False)

    @property
    def matrix(self) -> np.ndarray:
        if self.preset == "h":
            return HADAMARD
        if self.preset == "plus":
            return PLUS_PREP
        if self.preset == "prep":
            return qubit_prep_matrix(*self.params)
        return np.array(self.params, dtype=complex).reshape(2, 2)


@dataclass(frozen=True)
class Kerr:
    mode_a: int
    mode_b: int
    angle: Angle
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Measure:
    basis: str
    qubit: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Correct:
    target: str
    table: str
    sources: tuple[str, ...]
    control: Optional[str] = None
    mode: str = "derived"
    line: int = field(default=0, compare=False)


Statement = Union[DefQubit, Source, BS, Kerr, Measure, Correct]


@dataclass(frozen=True)
class CircuitProgram:
    """An empty program defaults to a single vacuum mode."""
    mode_count: int = 1
    cutoff: int = 1
    statements: tuple[Statement, ...] = ()

    @property
    def qubits(self) -> list[DefQubit]:
        return [s for s in self.statements if isinstance(s, DefQubit)]

    def register(self) -> DualRailRegister:
        return DualRailRegister(tuple((q.mode_a, q.mode_b) for q in self.qubits))

    def qubit_index(self, name: str) -> int:
        for i, q in enumerate(self.qubits):
            if q.name == name:
                return i
        raise KeyError(name)


# -- lexical helpers -----------------------------------------------------------

_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_REAL_RE = re.compile(rf"[+-]?{_NUM}")
_IMAG_RE = re.compile(rf"([+-]?)({_NUM})?i")
_FULL_RE = re.compile(rf"([+-]?{_NUM})([+-])({_NUM})?i")
_PI_RE = re.compile(r"([+-]?)((?:\d+(?:\.\d*)?|\.\d+)?)pi(?:/(\d+))?")
_INT_RE = re.compile(r"\d+")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")

KEYWORDS = ("modes", "cutoff", "qubit", "source", "bs", "kerr", "measure", "mx", "mz", "correct")


@dataclass(frozen=True)
class _Tok:
    text: str
    line: int
    column: int


def _tokens(line_text: str, lineno: int) -> list[_Tok]:
    code = line_text.split("#", 1)[0]
    return [_Tok(m.group(0), lineno, m.start() + 1) for m in re.finditer(r"\S+", code)]


def parse_complex(text: str) -> Optional[complex]:
    """``re``, ``imi``, ``re+imi``; returns None when the token is not a complex literal."""
    if _REAL_RE.fullmatch(text):
        return complex(float(text), 0.0)
    m = _IMAG_RE.fullmatch(text)
    if m:
        mag = float(m.group(2)) if m.group(2) else 1.0
        return complex(0.0, -mag if m.group(1) == "-" else mag)
    m = _FULL_RE.fullmatch(text)
    if m:
        mag = float(m.group(3)) if m.group(3) else 1.0
        return complex(float(m.group(1)), -mag if m.group(2) == "-" else mag)
    return None


def format_complex(z: complex) -> str:
    re_, im = z.real, z.imag
    if im == 0:
        return repr(re_)
    if re_ == 0:
        return f"{im!r}i"
    return f"{re_!r}{'+' if im > 0 else '-'}{abs(im)!r}i"


def parse_angle(text: str) -> Optional[Angle]:
    m = _PI_RE.fullmatch(text)
    if m:
        coef = Fraction(m.group(2)) if m.group(2) else Fraction(1)
        if m.group(1) == "-":
            coef = -coef
        if m.group(3) is not None:
            den = int(m.group(3))
            if den == 0:
                return None
            coef /= den
        return Angle(pi_multiple=coef)
    if _REAL_RE.fullmatch(text):
        return Angle(radians=float(text))
    return None


def _exact_decimal(f: Fraction) -> Optional[str]:
    den = f.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return None
    k = max(twos, fives)
    scaled = abs(f.numerator) * 10 ** k // f.denominator
    digits = str(scaled).rjust(k + 1, "0")
    body = digits if k == 0 else f"{digits[:-k]}.{digits[-k:]}"
    return ("-" if f < 0 else "") + body


def format_angle(angle: Angle) -> str:
    if angle.pi_multiple is None:
        return repr(angle.radians)
    f = angle.pi_multiple
    dec = _exact_decimal(f)
    if dec is not None:
        return f"{dec}pi"
    return f"{f.numerator}pi/{f.denominator}"


# -- parser --------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.mode_count: Optional[int] = None
        self.cutoff: Optional[int] = None
        self.statements: list[Statement] = []
        self.qubits: dict[str, DefQubit] = {}
        self.used_modes: dict[int, str] = {}
        self.measured: set[str] = set()
        self.corrected = False

    # errors
    def syntax(self, tok: _Tok, message: str):
        raise ParseError(tok.line, tok.column, message, tok.text)

    def invalid(self, tok: _Tok, message: str):
        raise ValidationError(tok.line, tok.column, message, tok.text)

    # token readers
    def arity(self, head: _Tok, toks: list[_Tok], lo: int, hi: Optional[int] = None):
        hi = lo if hi is None else hi
        n = len(toks) - 1
        if n < lo:
            end = toks[-1]
            raise ParseError(end.line, end.column, f"{head.text} expects {lo} argument(s), got {n}", end.text)
        if n > hi:
            self.syntax(toks[hi + 1], f"unexpected token after {head.text} statement")

    def integer(self, tok: _Tok, what: str) -> int:
        if not _INT_RE.fullmatch(tok.text):
            self.syntax(tok, f"expected a non-negative integer {what}")
        return int(tok.text)

    def mode(self, tok: _Tok) -> int:
        m = self.integer(tok, "mode index")
        if self.mode_count is None:
            self.invalid(tok, "modes must be declared before any mode is referenced")
        if m >= self.mode_count:
            self.invalid(tok, f"mode {m} out of range for {self.mode_count} modes")
        return m

    def mode_pair(self, ta: _Tok, tb: _Tok, what: str) -> tuple[int, int]:
        if self.integer(ta, "mode index") == self.integer(tb, "mode index"):
            self.invalid(tb, f"{what} needs two distinct modes")
        return self.mode(ta), self.mode(tb)

    def complex_(self, tok: _Tok) -> complex:
        z = parse_complex(tok.text)
        if z is None:
            self.syntax(tok, "expected a complex literal such as 0.6, 0.8i or 0.6+0.8i")
        return z

    def qubit_ref(self, tok: _Tok) -> str:
        if not _NAME_RE.fullmatch(tok.text):
            self.syntax(tok, "expected a qubit name")
        if tok.text not in self.qubits:
            self.invalid(tok, f"undeclared qubit {tok.text!r}")
        return tok.text

    # driver
    def run(self) -> CircuitProgram:
        for lineno, line_text in enumerate(self.text.splitlines(), start=1):
            toks = _tokens(line_text, lineno)
            if toks:
                self.statement(toks)
        return CircuitProgram(self.mode_count or 1, self.cutoff or 1, tuple(self.statements))

    def statement(self, toks: list[_Tok]):
        head = toks[0]
        kw = head.text
        if kw not in KEYWORDS:
            self.syntax(head, "unknown keyword")
        if self.corrected:
            self.invalid(head, "correct must be the last statement")
        getattr(self, "st_" + kw)(head, toks)

    def st_modes(self, head, toks):
        self.arity(head, toks, 1)
        if self.mode_count is not None or self.statements or self.cutoff is not None:
            self.invalid(head, "modes must be the first statement and appear once")
        n = self.integer(toks[1], "mode count")
        if not 1 <= n <= MAX_MODES:
            self.invalid(toks[1], f"mode count must lie in 1..{MAX_MODES}")
        self.mode_count = n

    def st_cutoff(self, head, toks):
        self.arity(head, toks, 1)
        if self.cutoff is not None or self.statements:
            self.invalid(head, "cutoff must precede all elements and appear once")
        k = self.integer(toks[1], "cutoff")
        if not 1 <= k <= MAX_CUTOFF:
            self.invalid(toks[1], f"cutoff must lie in 1..{MAX_CUTOFF}")
        self.cutoff = k

    def st_qubit(self, head, toks):
        self.arity(head, toks, 3)
        name_tok = toks[1]
        if not _NAME_RE.fullmatch(name_tok.text) or name_tok.text in KEYWORDS:
            self.syntax(name_tok, "expected a qubit name (letter or _ then letters, digits, _)")
        if name_tok.text in self.qubits:
            self.invalid(name_tok, f"duplicate qubit {name_tok.text!r}")
        a, b = self.mode_pair(toks[2], toks[3], "qubit")
        for tok, m in ((toks[2], a), (toks[3], b)):
            if m in self.used_modes:
                self.invalid(tok, f"mode {m} already belongs to qubit {self.used_modes[m]!r}")
        st = DefQubit(name_tok.text, a, b, head.line)
        self.qubits[st.name] = st
        self.used_modes[a] = self.used_modes[b] = st.name
        self.statements.append(st)

    def st_source(self, head, toks):
        self.arity(head, toks, 1)
        self.statements.append(Source(self.mode(toks[1]), head.line))

    def st_bs(self, head, toks):
        self.arity(head, toks, 3, 7)
        a, b = self.mode_pair(toks[1], toks[2], "beam splitter")
        preset_tok = toks[3]
        preset = preset_tok.text
        wanted = {"h": 0, "plus": 0, "prep": 2, "matrix": 4}
        if preset not in wanted:
            self.syntax(preset_tok, "expected a beam splitter preset: h, plus, prep or matrix")
        args = toks[4:]
        if len(args) != wanted[preset]:
            tok = args[wanted[preset]] if len(args) > wanted[preset] else preset_tok
            self.syntax(tok, f"bs {preset} takes {wanted[preset]} complex argument(s), got {len(args)}")
        params = tuple(self.complex_(t) for t in args)
        st = BS(a, b, preset, params, head.line)
        try:
            m = st.matrix
            if not np.allclose(m.conj().T @ m, np.eye(2), atol=UNITARY_TOL, rtol=0):
                self.invalid(preset_tok, "beam splitter matrix is not unitary")
        except (ValueError, KerrSimError) as exc:
            if isinstance(exc, ParseError):
                raise
            self.invalid(preset_tok, str(exc))
        self.statements.append(st)

    def st_kerr(self, head, toks):
        self.arity(head, toks, 3)
        a, b = self.mode_pair(toks[1], toks[2], "Kerr gate")
        angle = parse_angle(toks[3].text)
        if angle is None:
            self.syntax(toks[3], "expected an angle such as 0.25pi, pi/4, 1pi/3 or 0.785")
        self.statements.append(Kerr(a, b, angle, head.line))

    def _measure(self, head, basis: str, name_tok: _Tok):
        name = self.qubit_ref(name_tok)
        self.measured.add(name)
        self.statements.append(Measure(basis, name, head.line))

    def st_measure(self, head, toks):
        self.arity(head, toks, 2)
        basis = toks[1].text
        if basis not in ("x", "z"):
            self.syntax(toks[1], "measurement basis must be x or z")
        self._measure(head, basis.upper(), toks[2])

    def st_mx(self, head, toks):
        self.arity(head, toks, 1)
        self._measure(head, "X", toks[1])

    def st_mz(self, head, toks):
        self.arity(head, toks, 1)
        self._measure(head, "Z", toks[1])

    def st_correct(self, head, toks):
        self.arity(head, toks, 3, MAX_MODES)
        target = self.qubit_ref(toks[1])
        if target in self.measured:
            self.invalid(toks[1], f"correction target {target!r} has already been measured")
        table = toks[2].text
        if table == "teleport":
            src_toks = toks[3:]
            control, mode, keep = None, "derived", {target}
        elif table == "cnot":
            if len(toks) < 6:
                self.syntax(toks[-1], "expected: correct TARGET cnot S1 S2 CONTROL [MODE]")
            if len(toks) > 7:
                self.syntax(toks[7], "unexpected token after cnot correction")
            src_toks = toks[3:5]
            control = self.qubit_ref(toks[5])
            if control in self.measured:
                self.invalid(toks[5], f"control {control!r} has already been measured")
            if control == target:
                self.invalid(toks[5], "control and target must differ")
            mode = "derived"
            if len(toks) == 7:
                mode = toks[6].text
                if mode not in CORRECTION_MODES:
                    self.syntax(toks[6], f"CNOT correction mode must be one of {', '.join(CORRECTION_MODES)}")
            keep = {target, control}
        else:
            self.syntax(toks[2], "correction table must be teleport or cnot")
        sources = []
        for t in src_toks:
            name = self.qubit_ref(t)
            if name not in self.measured:
                self.invalid(t, f"qubit {name!r} has not been measured yet")
            if name in sources:
                self.invalid(t, f"qubit {name!r} listed twice")
            sources.append(name)
        if table == "teleport":
            if len(sources) < 1:
                self.syntax(head, "teleport correction needs at least one measured qubit")
            if len(sources) + 1 > oracle.MAX_QUBITS:
                self.invalid(head, f"teleport tables cover at most {oracle.MAX_QUBITS} qubits")
        for name in self.qubits:
            if name not in keep and name not in self.measured:
                self.invalid(head, f"qubit {name!r} is neither measured nor an output of the correction")
        self.corrected = True
        self.statements.append(Correct(target, table, tuple(sources), control, mode, head.line))


def parse(text: str) -> CircuitProgram:
    """Parse and validate a program; raises the first ParseError/ValidationError."""
    return _Parser(text).run()


def load_program(path) -> CircuitProgram:
    data = Path(path).read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        head = data[:exc.start]
        line = head.count(b"\n") + 1
        column = exc.start - (head.rfind(b"\n") + 1) + 1
        raise ParseError(line, column, "source is not valid UTF-8", repr(data[exc.start:exc.start + 1])) from None
    return parse(text)


def shipped_program(name: str) -> Path:
    """Path of a circuit shipped with the package, e.g. ``teleport3.qc``."""
    return CIRCUITS_DIR / name


# -- formatter -----------------------------------------------------------------

def _format_statement(st: Statement) -> str:
    if isinstance(st, DefQubit):
        return f"qubit {st.name} {st.mode_a} {st.mode_b}"
    if isinstance(st, Source):
        return f"source {st.mode}"
    if isinstance(st, BS):
        return " ".join(["bs", str(st.mode_a), str(st.mode_b), st.preset] + [format_complex(p) for p in st.params])
    if isinstance(st, Kerr):
        return f"kerr {st.mode_a} {st.mode_b} {format_angle(st.angle)}"
    if isinstance(st, Measure):
        return f"measure {st.basis.lower()} {st.qubit}"
    if isinstance(st, Correct):
        parts = ["correct", st.target, st.table, *st.sources]
        if st.control is not None:
            parts.append(st.control)
        if st.mode != "derived":
            parts.append(st.mode)
        return " ".join(parts)
    raise TypeError(f"not a statement: {st!r}")


def format_program(program: CircuitProgram) -> str:
    lines = [f"modes {program.mode_count}", f"cutoff {program.cutoff}"]
    lines += [_format_statement(st) for st in program.statements]
    return "\n".join(lines) + "\n"


# -- execution -----------------------------------------------------------------

@dataclass
class ExecutionReport:
    program: CircuitProgram
    results: list[ProtocolResult]

    def rows(self, tol: float = DEFAULT_TOL, include_states: bool = False) -> list[dict]:
        return results_to_rows(self.results, tol, include_states)


def _wrap(line: int, fn, *args):
    try:
        return fn(*args)
    except ParseError:
        raise
    except (KerrSimError, ValueError) as exc:
        raise ExecutionError(line, f"{type(exc).__name__}: {exc}") from exc


def execute(program: CircuitProgram, policy: BranchPolicy = ENUMERATE) -> ExecutionReport:
    """Run the statements in order; one ProtocolResult per realized branch."""
    reg = program.register()
    order: list[tuple[int, str]] = []
    walker = BranchWalker(policy)
    branches = walker.start(make_vacuum(program.mode_count, program.cutoff))
    snapshot: Optional[PhotonicState] = None
    correct: Optional[Correct] = None

    for st in program.statements:
        if isinstance(st, Kerr) and snapshot is None:
            snapshot = branches[0][2]
        if isinstance(st, DefQubit):
            continue
        if isinstance(st, Measure):
            if snapshot is None:
                snapshot = branches[0][2]
            q = program.qubit_index(st.qubit)
            branches = _wrap(st.line, walker.measure, branches, reg, q, st.basis)
            order.append((q, st.basis))
            continue
        if isinstance(st, Correct):
            correct = st
            continue
        if isinstance(st, Source):
            op = lambda s, st=st: create_photon(s, st.mode)
        elif isinstance(st, BS):
            op = lambda s, st=st: apply_beamsplitter(s, BeamSplitter(st.mode_a, st.mode_b, st.matrix))
        else:
            op = lambda s, st=st: apply_kerr(s, KerrGate(st.mode_a, st.mode_b, st.angle.value))
        branches = [(o, p, _wrap(st.line, op, s), r) for o, p, s, r in branches]

    if snapshot is None:
        snapshot = branches[0][2]
    factors = logical_product_factors(snapshot, reg) if reg.qubit_count else None

    results = []
    for outcome, prob, raw, records in branches:
        res = ProtocolResult(outcome=outcome, probability=prob, input_factors=factors, raw_state=raw,
                             corrected_state=raw, records=list(records))
        if correct is not None:
            _wrap(correct.line, _apply_correct, res, correct, program, reg, order, factors)
        results.append(res)
    return ExecutionReport(program, sort_results(results))


def _apply_correct(res: ProtocolResult, st: Correct, program: CircuitProgram, reg: DualRailRegister,
                   order: list[tuple[int, str]], factors) -> None:
    latest = {}
    for (q, _), s in zip(order, res.outcome):
        latest[q] = s
    src = [program.qubit_index(name) for name in st.sources]
    bits = tuple(latest[q] for q in src)
    t = program.qubit_index(st.target)
    fixed = measured_fixed(order, res.outcome)
    if st.table == "teleport":
        name = teleport_correction(len(src) + 1, bits)
        res.corrected_state = apply_named_correction(res.raw_state, reg, t, name)
        res.correction = name
        res.output = output_state(res.corrected_state, reg, [t], fixed)
        if factors is not None:
            res.target = factors[src[0]]
    else:
        c = program.qubit_index(st.control)
        res.corrected_state, res.correction = apply_cnot_correction(res.raw_state, reg, bits, st.mode, t, c)
        res.output = output_state(res.corrected_state, reg, [t, c], fixed)
        if factors is not None:
            res.target = oracle.ideal_cnot_output(factors[src[0]], factors[c])
    if res.target is not None:
        res.fidelity = oracle.fidelity(res.target, res.output)
