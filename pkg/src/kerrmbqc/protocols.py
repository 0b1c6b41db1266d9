"""Optical teleportation chains and the four-qubit Kerr CNOT.

Both protocols share one layout shape: prepare dual-rail qubits from single
photons, entangle with Kerr gates, measure sigma_x in order and feed the
outcomes forward into a correction on the output qubit(s).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import oracle
from .dualrail import (
    DualRailRegister, apply_logical_unitary, apply_pauli, decode_qubit, decode_subset,
    logical_product_factors, measure_x, measure_z, prepare_qubit,
)
from .errors import KerrSimError
from .fock import DEFAULT_TOL, PhotonicState, make_vacuum, state_to_json
from .optics import QUARTER_PI, KerrGate, apply_kerr
from .report import fmt_complex, report_row

SQRT_HALF = 1 / math.sqrt(2)
PLUS_AMPS = (SQRT_HALF, SQRT_HALF)

CORRECTION_MODES = ("derived", "inverse-u-cnot")


@dataclass(frozen=True)
class BranchPolicy:
    """``enumerate`` visits every branch; ``sample`` draws ``shots`` runs from PCG64(seed)."""
    mode: str = "enumerate"
    seed: Optional[int] = None
    shots: int = 1

    def __post_init__(self):
        if self.mode not in ("enumerate", "sample"):
            raise ValueError(f"unknown branch policy {self.mode!r}")
        if self.mode == "sample":
            if self.seed is None or self.seed < 0:
                raise ValueError("sampling needs a non-negative integer seed")
            if self.shots < 1:
                raise ValueError("shots must be >= 1")

    @classmethod
    def sample(cls, seed: int, shots: int = 1) -> "BranchPolicy":
        return cls("sample", seed, shots)


ENUMERATE = BranchPolicy()


@dataclass
class ProtocolLayout:
    register: DualRailRegister
    kerr_gates: list[KerrGate]
    prep: list[tuple[complex, complex]]
    measurement_order: list[tuple[int, str]]


@dataclass(eq=False)
class ProtocolResult:
    outcome: tuple[int, ...]
    probability: float
    input_factors: Optional[list[np.ndarray]]
    raw_state: PhotonicState
    corrected_state: PhotonicState
    output: Optional[np.ndarray] = None
    target: Optional[np.ndarray] = None
    fidelity: Optional[float] = None
    correction: Optional[str] = None
    records: list = field(default_factory=list)

    def passed(self, tol: float = DEFAULT_TOL) -> Optional[bool]:
        if self.fidelity is None:
            return None
        return self.fidelity >= 1 - tol


# -- layouts -----------------------------------------------------------------

def chain_kerr(register: DualRailRegister, q1: int, q2: int, angle: float = QUARTER_PI) -> KerrGate:
    """Kerr gate from mode a of q1 to mode b of q2.

    With |0>_L on mode a, (1 - 2n_a)(1 - 2n_b) = -z_1 z_2, so the gate is
    exactly exp(-i angle z_1 z_2) on the logical qubits.
    """
    return KerrGate(register.pair(q1)[0], register.pair(q2)[1], angle)


def teleport_layout(alpha: complex, beta: complex, n: int, kerr_angle: float = QUARTER_PI) -> ProtocolLayout:
    if n < 2:
        raise ValueError("teleportation needs at least two qubits")
    reg = DualRailRegister.contiguous(n)
    return ProtocolLayout(
        register=reg,
        kerr_gates=[chain_kerr(reg, k, k + 1, kerr_angle) for k in range(n - 1)],
        prep=[(alpha, beta)] + [PLUS_AMPS] * (n - 1),
        measurement_order=[(k, "X") for k in range(n - 1)],
    )


def cnot_layout(target: Sequence[complex], control: Sequence[complex],
                kerr_angle: float = QUARTER_PI) -> ProtocolLayout:
    """Qubit 1 = t_in, qubit 3 = t_out, qubit 4 = control; Kerr edges 1-2, 2-3, 2-4."""
    reg = DualRailRegister.contiguous(4)
    # modes a..h = 0..7; chi_3 couples c (qubit 2, mode a) with h (qubit 4, mode b).
    gates = [chain_kerr(reg, 0, 1, kerr_angle), chain_kerr(reg, 1, 2, kerr_angle), chain_kerr(reg, 1, 3, kerr_angle)]
    return ProtocolLayout(
        register=reg,
        kerr_gates=gates,
        prep=[tuple(target), PLUS_AMPS, PLUS_AMPS, tuple(control)],
        measurement_order=[(0, "X"), (1, "X")],
    )


# -- shared machinery ----------------------------------------------------------

def prepare_layout(layout: ProtocolLayout) -> PhotonicState:
    reg = layout.register
    state = make_vacuum(reg.mode_count)
    for q, (alpha, beta) in enumerate(layout.prep):
        state = prepare_qubit(state, reg, q, alpha, beta)
    return state


def entangle_stages(layout: ProtocolLayout) -> list[PhotonicState]:
    """The prepared state followed by the state after each Kerr gate."""
    stages = [prepare_layout(layout)]
    for gate in layout.kerr_gates:
        stages.append(apply_kerr(stages[-1], gate))
    return stages


class BranchWalker:
    """Carries (outcomes, probability, state, records) branches through measurements."""

    def __init__(self, policy: BranchPolicy):
        self.policy = policy
        self.rng = np.random.default_rng(policy.seed) if policy.mode == "sample" else None

    def start(self, state: PhotonicState) -> list[tuple]:
        shots = self.policy.shots if self.policy.mode == "sample" else 1
        return [((), 1.0, state, ()) for _ in range(shots)]

    def measure(self, branches: list[tuple], register: DualRailRegister, qubit: int, basis: str) -> list[tuple]:
        fn = measure_x if basis == "X" else measure_z
        nxt = []
        for outcome, prob, state, records in branches:
            pair = fn(state, register, qubit)
            if self.rng is None:
                chosen = [r for r in pair if r.post_state is not None]
            else:
                u = self.rng.random()
                chosen = [pair[0] if u < pair[0].probability else pair[1]]
            for rec in chosen:
                nxt.append((outcome + (rec.outcome,), prob * rec.probability, rec.post_state, records + (rec,)))
        return nxt


def _basis_vector(basis: str, s: int) -> np.ndarray:
    return (oracle.X_BASIS if basis == "X" else oracle.Z_BASIS)[s]


def measured_fixed(order: Sequence[tuple[int, str]], outcome: Sequence[int]) -> dict[int, np.ndarray]:
    """Known post-measurement single-qubit states, latest measurement winning."""
    fixed: dict[int, np.ndarray] = {}
    for (q, basis), s in zip(order, outcome):
        fixed[q] = _basis_vector(basis, s)
    return fixed


def apply_named_correction(state: PhotonicState, register: DualRailRegister, qubit: int, name: str) -> PhotonicState:
    if name in ("I", "X", "Z", "XZ"):
        return apply_pauli(state, register, qubit, name)
    return apply_logical_unitary(state, register, qubit, oracle.EXTENDED_CORRECTIONS[name])


def output_state(state: PhotonicState, register: DualRailRegister, keep: Sequence[int],
                 fixed: dict[int, np.ndarray]) -> np.ndarray:
    out = decode_subset(state, register, keep, fixed)
    nrm = np.linalg.norm(out)
    return out / nrm if nrm > 0 else out


def sort_results(results: list[ProtocolResult]) -> list[ProtocolResult]:
    return sorted(results, key=lambda r: r.outcome)


# -- teleportation -------------------------------------------------------------

def teleport_correction(n: int, outcome: tuple[int, ...], pauli_only: bool = False) -> str:
    return oracle.teleport_correction_table(n, pauli_only)[tuple(outcome)][0]


def run_teleportation(alpha: complex, beta: complex, n: int = 3, policy: BranchPolicy = ENUMERATE,
                      kerr_angle: float = QUARTER_PI,
                      measurement_order: Optional[Sequence[int]] = None,
                      pauli_only: bool = False) -> list[ProtocolResult]:
    """Teleport alpha|0> + beta|1> from qubit 1 to qubit n of an optical chain.

    Corrections come from the oracle table; ``pauli_only`` restricts it to
    {I, X, Z, XZ}, which is exact only for odd n.
    """
    layout = teleport_layout(alpha, beta, n, kerr_angle)
    if measurement_order is not None:
        if sorted(measurement_order) != list(range(n - 1)):
            raise ValueError("measurement order must be a permutation of qubits 0..n-2")
        layout.measurement_order = [(q, "X") for q in measurement_order]
    reg = layout.register
    prepared = prepare_layout(layout)
    factors = logical_product_factors(prepared, reg)
    state = prepared
    for gate in layout.kerr_gates:
        state = apply_kerr(state, gate)
    walker = BranchWalker(policy)
    branches = walker.start(state)
    for q, basis in layout.measurement_order:
        branches = walker.measure(branches, reg, q, basis)
    target = np.array([alpha, beta], dtype=complex)
    results = []
    for outcome, prob, raw, records in branches:
        # Correction tables are keyed by qubit order 0..n-2.
        by_qubit = dict(zip((q for q, _ in layout.measurement_order), outcome))
        canonical = tuple(by_qubit[q] for q in range(n - 1))
        name = teleport_correction(n, canonical, pauli_only)
        corrected = apply_named_correction(raw, reg, n - 1, name)
        out = output_state(corrected, reg, [n - 1], measured_fixed(layout.measurement_order, outcome))
        results.append(ProtocolResult(
            outcome=outcome, probability=prob, input_factors=factors, raw_state=raw,
            corrected_state=corrected, output=out, target=target,
            fidelity=oracle.fidelity(target, out), correction=name, records=list(records)))
    return sort_results(results)


# -- CNOT ----------------------------------------------------------------------

Qubit = Union[int, Sequence[complex]]


def as_amplitudes(value: Qubit) -> tuple[complex, complex]:
    if isinstance(value, (int, np.integer)):
        if value not in (0, 1):
            raise ValueError(f"computational input must be 0 or 1, got {value}")
        return (1 + 0j, 0j) if value == 0 else (0j, 1 + 0j)
    alpha, beta = value
    return complex(alpha), complex(beta)


def cnot_corrections(outcome: tuple[int, int], mode: str = "derived") -> tuple[np.ndarray, Optional[np.ndarray], str]:
    """Matrices for (qubit 3, qubit 4) and a label for the report."""
    if mode == "derived":
        n3, n4, _ = oracle.cnot_correction_table()[tuple(outcome)]
        return oracle.CNOT_Q3_CANDIDATES[n3], oracle.CNOT_Q4_CANDIDATES[n4], f"{n3}*{n4}"
    if mode == "inverse-u-cnot":
        return np.linalg.inv(oracle.u_cnot(outcome[1])), None, "u_cnot^-1"
    raise ValueError(f"unknown CNOT correction mode {mode!r}; choose from {CORRECTION_MODES}")


def apply_cnot_correction(state: PhotonicState, register: DualRailRegister, outcome: tuple[int, int],
                          mode: str = "derived", q3: int = 2, q4: int = 3) -> tuple[PhotonicState, str]:
    m3, m4, label = cnot_corrections(outcome, mode)
    state = apply_logical_unitary(state, register, q3, m3)
    if m4 is not None:
        state = apply_logical_unitary(state, register, q4, m4)
    return state, label


def run_cnot(i1: Qubit = 0, i4: Qubit = 0, policy: BranchPolicy = ENUMERATE, correction: str = "derived",
             kerr_angle: float = QUARTER_PI) -> list[ProtocolResult]:
    """Optical CNOT with target input on qubit 1 and control on qubit 4."""
    target_in, control_in = as_amplitudes(i1), as_amplitudes(i4)
    layout = cnot_layout(target_in, control_in, kerr_angle)
    reg = layout.register
    prepared = prepare_layout(layout)
    factors = logical_product_factors(prepared, reg)
    state = prepared
    for gate in layout.kerr_gates:
        state = apply_kerr(state, gate)
    walker = BranchWalker(policy)
    branches = walker.start(state)
    for q, basis in layout.measurement_order:
        branches = walker.measure(branches, reg, q, basis)
    ideal = oracle.ideal_cnot_output(target_in, control_in)
    results = []
    for outcome, prob, raw, records in branches:
        corrected, label = apply_cnot_correction(raw, reg, outcome, correction)
        out = output_state(corrected, reg, [2, 3], measured_fixed(layout.measurement_order, outcome))
        results.append(ProtocolResult(
            outcome=outcome, probability=prob, input_factors=factors, raw_state=raw,
            corrected_state=corrected, output=out, target=ideal,
            fidelity=oracle.fidelity(ideal, out), correction=label, records=list(records)))
    return sort_results(results)


# -- table verification --------------------------------------------------------

COMPUTATIONAL_INPUTS = [(0, 0), (0, 1), (1, 0), (1, 1)]


def verify_tables(kerr_angle: float = QUARTER_PI, tol: float = DEFAULT_TOL,
                  golden_cases: Optional[dict] = None) -> list[dict]:
    """Compare every optical pre-correction CNOT state with the reference tables.

    ``golden_cases`` maps ((i1, i4), (s1, s2)) to a 4-qubit vector; when given,
    a row passes only if it matches both the table and the golden state.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    rows = []
    reg = DualRailRegister.contiguous(4)
    for i1, i4 in COMPUTATIONAL_INPUTS:
        for res in run_cnot(i1, i4, ENUMERATE, kerr_angle=kerr_angle):
            decoded = decode_qubit(res.raw_state, reg)
            ov = oracle.fidelity(oracle.tabulated_cnot_state(i1, i4, *res.outcome), decoded)
            if golden_cases is not None:
                key = ((i1, i4), tuple(res.outcome))
                if key not in golden_cases:
                    raise KerrSimError(f"golden CNOT cases lack entry {key}")
                ov = min(ov, oracle.fidelity(golden_cases[key], decoded))
            rows.append(report_row([i1, i4], res.outcome, res.probability, ov, bool(ov >= 1 - tol)))
    return rows


# -- reports -------------------------------------------------------------------

def input_field(factors: Optional[list[np.ndarray]]) -> Optional[list]:
    if factors is None:
        return None
    return [{"alpha": fmt_complex(f[0]), "beta": fmt_complex(f[1])} for f in factors]


def results_to_rows(results: Sequence[ProtocolResult], tol: float = DEFAULT_TOL,
                    include_states: bool = False) -> list[dict]:
    rows = []
    for r in results:
        rows.append(report_row(
            input_field(r.input_factors), r.outcome, r.probability, r.fidelity, r.passed(tol),
            state_to_json(r.corrected_state) if include_states else None))
    return rows


def random_qubit(rng: np.random.Generator) -> tuple[complex, complex]:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v = v / np.linalg.norm(v)
    return complex(v[0]), complex(v[1])


def teleport_fidelity_suite(ns: Sequence[int] = (3, 4, 5, 7), samples: int = 100, seed: int = 2003,
                            tol: float = DEFAULT_TOL,
                            runner: Optional[Callable] = None) -> list[dict]:
    """Worst corrected fidelity over seeded random inputs and every branch, per chain length."""
    runner = runner or run_teleportation
    rows = []
    for n in ns:
        rng = np.random.default_rng(seed + n)
        worst, branches, total_prob_err = 1.0, 0, 0.0
        for _ in range(samples):
            alpha, beta = random_qubit(rng)
            results = runner(alpha, beta, n)
            branches += len(results)
            total_prob_err = max(total_prob_err, abs(sum(r.probability for r in results) - 1))
            worst = min(worst, min(r.fidelity for r in results))
        rows.append({"n": n, "samples": samples, "branches": branches,
                     "min_fidelity": float(worst), "pass": bool(worst >= 1 - tol and total_prob_err < 1e-10)})
    return rows
