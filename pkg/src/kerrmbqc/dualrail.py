"""Dual-rail logical qubits on top of the Fock engine.

Each qubit owns a mode pair ``(a, b)`` with |0>_L = |1>_a|0>_b and
|1>_L = |0>_a|1>_b.  Measurements return both branches; picking one is the
caller's business.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidDualRailSupport, InvalidMode, NotNormalized, NotVacuum
from .fock import PhotonicState, create_photon
from .oracle import project_out
from .optics import (
    HADAMARD, BeamSplitter, apply_beamsplitter, apply_phase, check_unitary, qubit_prep, swap_modes,
)

BRANCH_EPS = 1e-28


@dataclass(frozen=True)
class DualRailRegister:
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        pairs = tuple((int(a), int(b)) for a, b in self.pairs)
        flat = [m for p in pairs for m in p]
        if len(set(flat)) != len(flat):
            raise InvalidMode(f"mode pairs overlap: {pairs}")
        if any(m < 0 for m in flat):
            raise InvalidMode(f"negative mode index in {pairs}")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def contiguous(cls, qubit_count: int) -> "DualRailRegister":
        """Qubit k on modes (2k, 2k+1)."""
        return cls(tuple((2 * k, 2 * k + 1) for k in range(qubit_count)))

    @property
    def qubit_count(self) -> int:
        return len(self.pairs)

    @property
    def mode_count(self) -> int:
        return 1 + max(m for p in self.pairs for m in p) if self.pairs else 0

    def pair(self, qubit: int) -> tuple[int, int]:
        if not 0 <= qubit < len(self.pairs):
            raise InvalidMode(f"qubit {qubit} not in register of {len(self.pairs)} qubits")
        return self.pairs[qubit]

    def check_fits(self, state: PhotonicState) -> None:
        if self.pairs and self.mode_count > state.mode_count:
            raise InvalidMode(f"register needs {self.mode_count} modes, state has {state.mode_count}")


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    qubit: int
    basis: str
    outcome: int
    probability: float
    post_state: Optional[PhotonicState]


def _pair_occupations(state: PhotonicState, register: DualRailRegister, qubit: int):
    a, b = register.pair(qubit)
    register.check_fits(state)
    return a, b


def check_support(state: PhotonicState, register: DualRailRegister, qubit: int) -> None:
    a, b = _pair_occupations(state, register, qubit)
    for occ in state.terms:
        if occ[a] + occ[b] != 1:
            raise InvalidDualRailSupport(
                f"qubit {qubit} (modes {a}, {b}) holds {occ[a] + occ[b]} photons in term {occ}")


def prepare_qubit(state: PhotonicState, register: DualRailRegister, qubit: int,
                  alpha: complex, beta: complex) -> PhotonicState:
    """Inject a photon into mode b and rotate it to alpha|0>_L + beta|1>_L."""
    a, b = _pair_occupations(state, register, qubit)
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1) > 1e-12:
        raise NotNormalized(f"|alpha|^2 + |beta|^2 = {abs(alpha) ** 2 + abs(beta) ** 2}")
    if any(occ[a] or occ[b] for occ in state.terms):
        raise NotVacuum(f"modes ({a}, {b}) of qubit {qubit} are not empty")
    state = create_photon(state, b)
    return apply_beamsplitter(state, qubit_prep(a, b, alpha, beta))


def decode_qubit(state: PhotonicState, register: DualRailRegister) -> np.ndarray:
    """Dense qubit vector whose |b_1..b_n> amplitude is that of the matching Fock term."""
    register.check_fits(state)
    n = register.qubit_count
    pairs = register.pairs
    out = np.zeros(2 ** n, dtype=complex)
    seen = set()
    for occ, amp in state.terms.items():
        idx = 0
        for a, b in pairs:
            if occ[a] + occ[b] != 1:
                q = pairs.index((a, b))
                raise InvalidDualRailSupport(
                    f"qubit {q} (modes {a}, {b}) holds {occ[a] + occ[b]} photons in term {occ}")
            idx = (idx << 1) | occ[b]
        if idx in seen:
            raise InvalidDualRailSupport(f"term {occ} differs from another only outside the register")
        seen.add(idx)
        out[idx] = amp
    return out


def apply_logical_unitary(state: PhotonicState, register: DualRailRegister, qubit: int, matrix) -> PhotonicState:
    a, b = _pair_occupations(state, register, qubit)
    return apply_beamsplitter(state, BeamSplitter(a, b, check_unitary(matrix)))


def apply_pauli(state: PhotonicState, register: DualRailRegister, qubit: int, pauli: str) -> PhotonicState:
    """X swaps the pair, Z is a pi phase on mode b; strings apply right to left."""
    a, b = _pair_occupations(state, register, qubit)
    if pauli not in ("I", "X", "Z", "Y", "XZ", "ZX"):
        raise ValueError(f"unknown Pauli {pauli!r}")
    if pauli == "Y":
        # Y = i XZ; drop the global i.
        pauli = "XZ"
    for p in reversed(pauli):
        if p == "X":
            state = swap_modes(state, a, b)
        elif p == "Z":
            state = apply_phase(state, b, math.pi)
    return state


def _project(state: PhotonicState, mode: int) -> tuple[float, dict]:
    kept = {occ: amp for occ, amp in state.terms.items() if occ[mode] == 1}
    return sum(abs(v) ** 2 for v in kept.values()), kept


def _measure(state: PhotonicState, register: DualRailRegister, qubit: int, basis: str):
    check_support(state, register, qubit)
    a, b = register.pair(qubit)
    rotate = basis == "X"
    hbs = BeamSplitter(a, b, HADAMARD)
    work = apply_beamsplitter(state, hbs) if rotate else state
    records = []
    for outcome, mode in ((0, a), (1, b)):
        prob, kept = _project(work, mode)
        if prob < BRANCH_EPS:
            records.append(MeasurementRecord(qubit, basis, outcome, 0.0, None))
            continue
        scale = 1 / math.sqrt(prob)
        post = work.with_terms({k: v * scale for k, v in kept.items()})
        if rotate:
            # Leave the pair in |+>_L or |->_L rather than the rotated frame.
            post = apply_beamsplitter(post, hbs)
        records.append(MeasurementRecord(qubit, basis, outcome, prob, post))
    return records[0], records[1]


def measure_x(state: PhotonicState, register: DualRailRegister, qubit: int):
    """Branches (s=0 <-> |+>_L, s=1 <-> |->_L) of a sigma_x measurement."""
    return _measure(state, register, qubit, "X")


def measure_z(state: PhotonicState, register: DualRailRegister, qubit: int):
    return _measure(state, register, qubit, "Z")


def logical_product_factors(state: PhotonicState, register: DualRailRegister,
                            tol: float = 1e-10) -> Optional[list[np.ndarray]]:
    """Per-qubit factors of a product logical state, or None when entangled or not decodable.

    Each factor is phase-fixed so its first non-negligible amplitude is real positive.
    """
    try:
        vec = decode_qubit(state, register)
    except InvalidDualRailSupport:
        return None
    n = register.qubit_count
    if n == 0 or np.linalg.norm(vec) == 0:
        return None
    t = vec.reshape([2] * n)
    ref = np.unravel_index(int(np.argmax(np.abs(vec))), t.shape)
    factors = []
    for q in range(n):
        idx = list(ref)
        f = np.zeros(2, dtype=complex)
        for bit in (0, 1):
            idx[q] = bit
            f[bit] = t[tuple(idx)]
        f = f / np.linalg.norm(f)
        lead = f[0] if abs(f[0]) > 1e-12 else f[1]
        factors.append(f * abs(lead) / lead)
    rebuilt = np.array([1], dtype=complex)
    for f in factors:
        rebuilt = np.kron(rebuilt, f)
    if abs(abs(np.vdot(rebuilt, vec)) / np.linalg.norm(vec) - 1) > tol:
        return None
    return factors


def decode_subset(state: PhotonicState, register: DualRailRegister, keep: Sequence[int],
                  fixed: dict[int, np.ndarray]) -> np.ndarray:
    """Decode, then contract the ``fixed`` qubits against known states, leaving ``keep`` in order."""
    vec = decode_qubit(state, register)
    rest, _ = project_out(vec, fixed)
    remaining = [q for q in range(register.qubit_count) if q not in fixed]
    if list(keep) != remaining:
        n = len(remaining)
        t = rest.reshape([2] * n)
        t = np.transpose(t, [remaining.index(q) for q in keep])
        rest = t.reshape(-1)
    return rest
