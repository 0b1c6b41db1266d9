"""Unitary optical elements: beam splitters, phase shifters and the Kerr gate.

Beam splitters are specified by the 2x2 unitary acting on the single-photon
amplitudes ``(amp|1,0>, amp|0,1>)`` of the mode pair.  Multi-photon terms get
the bosonic lift ``a_i^dag -> sum_j U[j, i] a_j^dag``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import CutoffExceeded, InvalidMode, NotNormalized, NotUnitary
from .fock import PhotonicState, prune

UNITARY_TOL = 1e-12
QUARTER_PI = math.pi / 4

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def check_unitary(matrix, tol: float = UNITARY_TOL) -> np.ndarray:
    m = np.asarray(matrix, dtype=complex)
    if m.shape != (2, 2):
        raise NotUnitary(f"expected a 2x2 matrix, got shape {m.shape}")
    if not np.allclose(m.conj().T @ m, np.eye(2), atol=tol, rtol=0):
        raise NotUnitary(f"matrix is not unitary within {tol}: {m.tolist()}")
    return m


def qubit_prep_matrix(alpha: complex, beta: complex) -> np.ndarray:
    """Unitary taking the source photon |0,1> to alpha|1,0> + beta|0,1>."""
    alpha, beta = complex(alpha), complex(beta)
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1) > UNITARY_TOL:
        raise NotNormalized(f"|alpha|^2 + |beta|^2 = {abs(alpha) ** 2 + abs(beta) ** 2}, expected 1")
    return np.array([[beta.conjugate(), alpha], [-alpha.conjugate(), beta]], dtype=complex)


PLUS_PREP = qubit_prep_matrix(1 / math.sqrt(2), 1 / math.sqrt(2))


@dataclass(frozen=True)
class BeamSplitter:
    mode_a: int
    mode_b: int
    matrix: np.ndarray = field(default_factory=lambda: HADAMARD.copy())

    def __post_init__(self):
        if self.mode_a == self.mode_b:
            raise InvalidMode(f"beam splitter needs two distinct modes, got {self.mode_a} twice")
        object.__setattr__(self, "matrix", check_unitary(self.matrix))

    def dagger(self) -> "BeamSplitter":
        return BeamSplitter(self.mode_a, self.mode_b, self.matrix.conj().T)


@dataclass(frozen=True)
class KerrGate:
    """Cross-phase ``exp(i angle (1 - 2 n_a)(1 - 2 n_b))`` between two modes."""
    mode_a: int
    mode_b: int
    angle: float = QUARTER_PI

    def __post_init__(self):
        if self.mode_a == self.mode_b:
            raise InvalidMode(f"Kerr gate needs two distinct modes, got {self.mode_a} twice")


def hadamard_bs(mode_a: int, mode_b: int) -> BeamSplitter:
    return BeamSplitter(mode_a, mode_b, HADAMARD)


def qubit_prep(mode_a: int, mode_b: int, alpha: complex, beta: complex) -> BeamSplitter:
    return BeamSplitter(mode_a, mode_b, qubit_prep_matrix(alpha, beta))


def apply_kerr(state: PhotonicState, gate: KerrGate) -> PhotonicState:
    state.check_mode(gate.mode_a)
    state.check_mode(gate.mode_b)
    a, b, theta = gate.mode_a, gate.mode_b, gate.angle
    # (1 - 2n_a)(1 - 2n_b) only takes a few values; cache the phases.
    phases: dict[int, complex] = {}
    out = {}
    for occ, amp in state.terms.items():
        k = (1 - 2 * occ[a]) * (1 - 2 * occ[b])
        ph = phases.get(k)
        if ph is None:
            ph = phases[k] = cmath.exp(1j * theta * k)
        out[occ] = amp * ph
    return state.with_terms(out)


def apply_phase(state: PhotonicState, mode: int, phase: float) -> PhotonicState:
    state.check_mode(mode)
    return state.with_terms({occ: amp * cmath.exp(1j * phase * occ[mode]) for occ, amp in state.terms.items()})


@lru_cache(maxsize=256)
def _lift(matrix_key: tuple, na: int, nb: int) -> tuple:
    """Expansion of (U a^dag)^na (U b^dag)^nb |0,0> / sqrt(na! nb!) into Fock terms."""
    u00, u01, u10, u11 = matrix_key
    out: dict[tuple[int, int], complex] = {}
    for j in range(na + 1):
        cj = math.comb(na, j) * u00 ** j * u10 ** (na - j)
        for k in range(nb + 1):
            ck = math.comb(nb, k) * u01 ** k * u11 ** (nb - k)
            p, q = j + k, na + nb - j - k
            out[(p, q)] = out.get((p, q), 0j) + cj * ck
    norm_in = math.sqrt(math.factorial(na) * math.factorial(nb))
    return tuple(((p, q), c * math.sqrt(math.factorial(p) * math.factorial(q)) / norm_in)
                 for (p, q), c in out.items())


def apply_beamsplitter(state: PhotonicState, bs: BeamSplitter) -> PhotonicState:
    state.check_mode(bs.mode_a)
    state.check_mode(bs.mode_b)
    a, b = bs.mode_a, bs.mode_b
    m = bs.matrix
    key = (complex(m[0, 0]), complex(m[0, 1]), complex(m[1, 0]), complex(m[1, 1]))
    u00, u01, u10, u11 = key
    out: dict[tuple[int, ...], complex] = {}
    get = out.get
    for occ, amp in state.terms.items():
        na, nb = occ[a], occ[b]
        if na + nb == 0:
            out[occ] = get(occ, 0j) + amp
            continue
        if na + nb == 1:
            # Single photon: the 2x2 matrix acts on the amplitudes directly.
            new = list(occ)
            new[a], new[b] = 1, 0
            ka = tuple(new)
            new[a], new[b] = 0, 1
            kb = tuple(new)
            ca, cb = (u00, u10) if na else (u01, u11)
            out[ka] = get(ka, 0j) + amp * ca
            out[kb] = get(kb, 0j) + amp * cb
            continue
        for (p, q), c in _lift(key, na, nb):
            if c == 0:
                continue
            new = list(occ)
            new[a], new[b] = p, q
            new = tuple(new)
            out[new] = out.get(new, 0j) + amp * c
    out = prune(out)
    for occ in out:
        if occ[a] > state.cutoff or occ[b] > state.cutoff:
            raise CutoffExceeded(
                f"beam splitter on modes ({a}, {b}) produces {occ[a]}/{occ[b]} photons, cutoff is {state.cutoff}")
    return PhotonicState._trusted(state.mode_count, state.cutoff, out)


def swap_modes(state: PhotonicState, mode_a: int, mode_b: int) -> PhotonicState:
    state.check_mode(mode_a)
    state.check_mode(mode_b)
    out = {}
    for occ, amp in state.terms.items():
        new = list(occ)
        new[mode_a], new[mode_b] = occ[mode_b], occ[mode_a]
        out[tuple(new)] = amp
    return state.with_terms(out)
