"""Dense qubit-level reference simulator.

State vectors are plain complex numpy arrays of length ``2**n`` with qubit 0
as the most significant bit.  The z-convention is z = +1 for |0> and -1
for |1>.  Nothing here touches the Fock engine, so it serves as an
independent check of the optical simulation.
"""
from __future__ import annotations

import cmath
import itertools
import math
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidGraph

MAX_QUBITS = 12
FIDELITY_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
# exp(-i pi/4 sigma_x): the extra byproduct left by an even-length chain.
V = (I2 - 1j * X) / math.sqrt(2)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
PLUS = np.array([1, 1], dtype=complex) / math.sqrt(2)
MINUS = np.array([1, -1], dtype=complex) / math.sqrt(2)
X_BASIS = (PLUS, MINUS)
Z_BASIS = (KET0, KET1)

PAULI_CORRECTIONS = {"I": I2, "X": X, "Z": Z, "XZ": X @ Z}
EXTENDED_CORRECTIONS = {**PAULI_CORRECTIONS, "V": V, "XV": X @ V, "ZV": Z @ V, "XZV": X @ Z @ V}

Edge = tuple[int, int]


# -- construction and basic operations -------------------------------------

def qubit_count(state: np.ndarray) -> int:
    n = int(round(math.log2(len(state))))
    if 2 ** n != len(state):
        raise ValueError(f"state length {len(state)} is not a power of two")
    return n


def product_state(factors: Sequence[Sequence[complex]]) -> np.ndarray:
    if len(factors) > MAX_QUBITS:
        raise ValueError(f"dense oracle is limited to {MAX_QUBITS} qubits")
    out = np.array([1], dtype=complex)
    for f in factors:
        out = np.kron(out, np.asarray(f, dtype=complex))
    return out


def basis_state(bits: Sequence[int]) -> np.ndarray:
    return product_state([Z_BASIS[b] for b in bits])


def apply_single(state: np.ndarray, qubit: int, matrix) -> np.ndarray:
    n = qubit_count(state)
    t = state.reshape([2] * n)
    t = np.tensordot(np.asarray(matrix, dtype=complex), t, axes=([1], [qubit]))
    return np.moveaxis(t, 0, qubit).reshape(-1)


def apply_two(state: np.ndarray, q1: int, q2: int, matrix) -> np.ndarray:
    """Apply a 4x4 operator on (q1, q2), q1 being the more significant index."""
    n = qubit_count(state)
    t = state.reshape([2] * n)
    m = np.asarray(matrix, dtype=complex).reshape(2, 2, 2, 2)
    t = np.tensordot(m, t, axes=([2, 3], [q1, q2]))
    return np.moveaxis(t, [0, 1], [q1, q2]).reshape(-1)


def z_values(n: int) -> np.ndarray:
    """Row k of the result holds z = +-1 for every qubit of basis index k."""
    idx = np.arange(2 ** n)
    bits = (idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    return 1 - 2 * bits


def validate_graph(n: int, edges: Iterable[Edge]) -> list[Edge]:
    out = []
    for a, b in edges:
        if a == b:
            raise InvalidGraph(f"self-loop on qubit {a}")
        if not (0 <= a < n and 0 <= b < n):
            raise InvalidGraph(f"edge ({a}, {b}) out of range for {n} qubits")
        out.append((a, b))
    return out


def chain(n: int) -> list[Edge]:
    return [(k, k + 1) for k in range(n - 1)]


CNOT_GRAPH: list[Edge] = [(0, 1), (1, 2), (1, 3)]


# -- entangling evolutions ---------------------------------------------------

def ising_entangle(state: np.ndarray, edges: Iterable[Edge], theta: float) -> np.ndarray:
    """exp(-i theta sum_edges z_a z_b), applied as a diagonal phase."""
    n = qubit_count(state)
    edges = validate_graph(n, edges)
    z = z_values(n)
    total = np.zeros(2 ** n)
    for a, b in edges:
        total += z[:, a] * z[:, b]
    return state * np.exp(-1j * theta * total)


def ising_entangle_rb_form(state: np.ndarray, edges: Iterable[Edge], g_integral: float,
                           excited: int = 0) -> np.ndarray:
    """exp(-i g sum_edges P_a P_b) with P the projector onto |excited>.

    ``excited=0`` reads (1 + sigma_z)/2 as the projector onto |0>.
    """
    n = qubit_count(state)
    edges = validate_graph(n, edges)
    bits = (1 - z_values(n)) // 2
    hit = (bits == excited).astype(float)
    total = np.zeros(2 ** n)
    for a, b in edges:
        total += hit[:, a] * hit[:, b]
    return state * np.exp(-1j * g_integral * total)


def ising_matrix(n: int, edges: Iterable[Edge], theta: float) -> np.ndarray:
    return np.diag(ising_entangle(np.ones(2 ** n, dtype=complex), edges, theta))


def rb_form_matrix(n: int, edges: Iterable[Edge], g_integral: float, excited: int = 0) -> np.ndarray:
    return np.diag(ising_entangle_rb_form(np.ones(2 ** n, dtype=complex), edges, g_integral, excited))


def rb_local_rotations(n: int, edges: Iterable[Edge], theta: float, excited: int = 0) -> np.ndarray:
    """Global phase times single-qubit z-rotations linking the two forms.

    With g = 4 theta, rb_form = rb_local_rotations @ ising_form.
    """
    edges = list(edges)
    sign = 1 if excited == 0 else -1
    degree = [0] * n
    for a, b in edges:
        degree[a] += 1
        degree[b] += 1
    out = np.array([[cmath.exp(-1j * theta * len(edges))]], dtype=complex)
    for d in degree:
        rz = np.diag([cmath.exp(-1j * theta * d * sign), cmath.exp(1j * theta * d * sign)])
        out = np.kron(out, rz)
    return out


# -- diagnostics ---------------------------------------------------------------

def reduced_density_matrix(state: np.ndarray, qubit: int) -> np.ndarray:
    n = qubit_count(state)
    t = np.moveaxis(state.reshape([2] * n), qubit, 0).reshape(2, -1)
    return t @ t.conj().T


def reduced_purity(state: np.ndarray, qubit: int) -> float:
    if qubit_count(state) < 2:
        raise ValueError("reduced purity needs at least two qubits")
    rho = reduced_density_matrix(state, qubit)
    return float(np.real(np.trace(rho @ rho)))


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>| / (|a| |b|)."""
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(abs(np.vdot(a, b)) / (na * nb))


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = FIDELITY_TOL) -> bool:
    return fidelity(a, b) >= 1 - tol


# -- measurement -------------------------------------------------------------

def measure_qubit(state: np.ndarray, qubit: int, basis: str = "X"):
    """Both branches of a projective measurement, as (outcome, probability, post_state).

    The measured qubit stays in the eigenstate it was projected onto.
    A zero-probability branch carries ``None`` as its post-state.
    """
    vectors = X_BASIS if basis.upper() == "X" else Z_BASIS
    n = qubit_count(state)
    t = state.reshape([2] * n)
    branches = []
    for s, v in enumerate(vectors):
        reduced = np.tensordot(v.conj(), t, axes=([0], [qubit]))
        prob = float(np.real(np.vdot(reduced, reduced)))
        if prob < 1e-28:
            branches.append((s, 0.0, None))
            continue
        post = np.moveaxis(np.tensordot(v, reduced, axes=0), 0, qubit).reshape(-1) / math.sqrt(prob)
        branches.append((s, prob, post))
    return branches


def measure_x_qubit(state: np.ndarray, qubit: int):
    return measure_qubit(state, qubit, "X")


def measure_z_qubit(state: np.ndarray, qubit: int):
    return measure_qubit(state, qubit, "Z")


def project_out(state: np.ndarray, fixed: dict[int, np.ndarray]) -> tuple[np.ndarray, float]:
    """Contract the given qubits against known single-qubit states.

    Returns the state of the remaining qubits (in their original order) and
    the norm of that contraction, which is 1 whenever the fixed qubits are
    really in a product with the rest.
    """
    n = qubit_count(state)
    t = state.reshape([2] * n)
    for q in sorted(fixed, reverse=True):
        t = np.tensordot(np.asarray(fixed[q]).conj(), t, axes=([0], [q]))
    rest = np.asarray(t, dtype=complex).reshape(-1)
    return rest, float(np.linalg.norm(rest))


def measure_sequence(state: np.ndarray, qubits: Sequence[int], basis: str = "X"):
    """Enumerate every outcome tuple of sequential measurements."""
    branches = [((), 1.0, state)]
    for q in qubits:
        nxt = []
        for outcome, prob, st in branches:
            for s, p, post in measure_qubit(st, q, basis):
                if post is not None:
                    nxt.append((outcome + (s,), prob * p, post))
        branches = nxt
    return branches


# -- teleportation -----------------------------------------------------------

def teleport_chain_output(factor: Sequence[complex], n: int, outcome: Sequence[int]) -> np.ndarray:
    """Unnormalized state of qubit n-1 after projecting qubits 0..n-2 onto |s_j>_x."""
    state = ising_entangle(product_state([factor] + [PLUS] * (n - 1)), chain(n), math.pi / 4)
    rest, _ = project_out(state, {q: X_BASIS[s] for q, s in enumerate(outcome)})
    return rest


def correction_set(n: int) -> dict[str, np.ndarray]:
    """Pauli corrections for odd chains; even chains also need the V byproduct."""
    return dict(PAULI_CORRECTIONS) if n % 2 == 1 else dict(EXTENDED_CORRECTIONS)


def _probe_states(count: int = 6, seed: int = 7) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    probes = [KET0, KET1, PLUS, np.array([1, 1j]) / math.sqrt(2)]
    for _ in range(count):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        probes.append(v / np.linalg.norm(v))
    return probes


def best_correction(target: np.ndarray, output: np.ndarray, corrections: dict[str, np.ndarray]):
    """(name, fidelity) of the correction bringing output closest to target.  Ties keep the first."""
    best_name, best_fid = None, -1.0
    for name, mat in corrections.items():
        f = fidelity(target, mat @ output)
        if f > best_fid + 1e-13:
            best_name, best_fid = name, f
    return best_name, best_fid


@lru_cache(maxsize=None)
def teleport_correction_table(n: int, pauli_only: bool = False) -> dict[tuple[int, ...], tuple[str, float]]:
    """Brute-force the outcome -> correction table for an n-qubit chain.

    Each entry keeps the correction with the best worst-case fidelity over a
    fixed probe set, so the table does not depend on any particular input.
    """
    if n < 2:
        raise ValueError("teleportation needs at least two qubits")
    corrections = PAULI_CORRECTIONS if pauli_only else correction_set(n)
    probes = _probe_states()
    table = {}
    for outcome in itertools.product((0, 1), repeat=n - 1):
        outputs = [teleport_chain_output(p, n, outcome) for p in probes]
        best_name, best_worst = None, -1.0
        for name, mat in corrections.items():
            worst = min(fidelity(p, mat @ o) for p, o in zip(probes, outputs))
            if worst > best_worst + 1e-13:
                best_name, best_worst = name, worst
        table[outcome] = (best_name, best_worst)
    return table


def teleport_reference(alpha: complex, beta: complex, n: int, pauli_only: bool = False):
    """For every outcome tuple: (best correction, corrected fidelity, probability)."""
    psi = np.array([alpha, beta], dtype=complex)
    corrections = PAULI_CORRECTIONS if pauli_only else correction_set(n)
    result = {}
    for outcome in itertools.product((0, 1), repeat=n - 1):
        out = teleport_chain_output(psi, n, outcome)
        prob = float(np.vdot(out, out).real)
        name, fid = best_correction(psi, out, corrections)
        result[outcome] = (name, fid, prob)
    return result


# -- CNOT --------------------------------------------------------------------

# Core of exp(-i pi/4 (1 + sigma_y)) in its reference matrix form: [[1, -1], [1, 1]] / sqrt2.
CNOT_CORE = np.array([[1, -1], [1, 1]], dtype=complex) / math.sqrt(2)
CNOT_IDEAL = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex)
"""CNOT on (target, control) ordering: control is the second, less significant qubit."""


def u_cnot(s2: int) -> np.ndarray:
    """The measurement-dependent local unitary on t_out in its reference form."""
    if s2 not in (0, 1):
        raise ValueError("s2 must be 0 or 1")
    scalar = 0.5 * (1 + (-1) ** s2 * 1j) * cmath.exp(-1j * math.pi / 4)
    return scalar * np.array([[1, -1], [1, 1]], dtype=complex) @ np.linalg.matrix_power(X, s2)


def u_sigma_34(s1: int, s2: int) -> np.ndarray:
    """sigma_z^(s1+1) sigma_x^s2 on qubit 3 tensored with sigma_z^s1 on qubit 4."""
    q3 = np.linalg.matrix_power(Z, (s1 + 1) % 2) @ np.linalg.matrix_power(X, s2)
    q4 = np.linalg.matrix_power(Z, s1)
    return np.kron(q3, q4)


def cnot_input(target: Sequence[complex], control: Sequence[complex]) -> np.ndarray:
    return product_state([target, PLUS, PLUS, control])


def cnot_branches(target: Sequence[complex], control: Sequence[complex], kerr_angle: float = math.pi / 4):
    """Post-measurement 4-qubit states for each (s1, s2) after sigma_x on qubits 1, 2."""
    state = ising_entangle(cnot_input(target, control), CNOT_GRAPH, kerr_angle)
    return {outcome: (prob, post) for outcome, prob, post in measure_sequence(state, [0, 1], "X")}


def cnot_output_pair(post: np.ndarray, outcome: Sequence[int]) -> np.ndarray:
    """State of (qubit 3, qubit 4) once qubits 1, 2 are factored out."""
    rest, _ = project_out(post, {0: X_BASIS[outcome[0]], 1: X_BASIS[outcome[1]]})
    return rest / np.linalg.norm(rest)


def cnot_reference(i1: int, i4: int):
    """{(s1, s2): (probability, normalized 4-qubit post-measurement state)}."""
    return cnot_branches(Z_BASIS[i1], Z_BASIS[i4])


def ideal_cnot_output(target: Sequence[complex], control: Sequence[complex]) -> np.ndarray:
    return CNOT_IDEAL @ np.kron(np.asarray(target, dtype=complex), np.asarray(control, dtype=complex))


CNOT_Q3_CANDIDATES = {"M": CNOT_CORE, "XM": X @ CNOT_CORE, "ZM": Z @ CNOT_CORE, "XZM": X @ Z @ CNOT_CORE}
CNOT_Q4_CANDIDATES = {"I": I2, "Z": Z}


def _cnot_probe_inputs():
    probes = [(Z_BASIS[i1], Z_BASIS[i4]) for i1 in (0, 1) for i4 in (0, 1)]
    probes += [(KET0, PLUS), (KET0, np.array([1, 1j]) / math.sqrt(2)), (KET0, np.array([0.6, 0.8j]))]
    return probes


@lru_cache(maxsize=None)
def cnot_correction_table() -> dict[tuple[int, int], tuple[str, str, float]]:
    """Brute-force search for the feed-forward correction on (qubit 3, qubit 4).

    The probe set is the four computational inputs plus target |0> with
    superposed controls; each entry is (q3 name, q4 name, worst fidelity).
    """
    probes = _cnot_probe_inputs()
    per_probe = []
    for target, control in probes:
        per_probe.append((ideal_cnot_output(target, control), cnot_branches(target, control)))
    table = {}
    for outcome in itertools.product((0, 1), repeat=2):
        best = (None, None, -1.0)
        for n3, m3 in CNOT_Q3_CANDIDATES.items():
            for n4, m4 in CNOT_Q4_CANDIDATES.items():
                corr = np.kron(m3, m4)
                worst = min(fidelity(ideal, corr @ cnot_output_pair(br[outcome][1], outcome))
                            for ideal, br in per_probe)
                if worst > best[2] + 1e-13:
                    best = (n3, n4, worst)
        table[outcome] = best
    return table


def cnot_correction_matrices(outcome: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    n3, n4, _ = cnot_correction_table()[tuple(outcome)]
    return CNOT_Q3_CANDIDATES[n3], CNOT_Q4_CANDIDATES[n4]


def tabulated_cnot_state(i1: int, i4: int, s1: int, s2: int) -> np.ndarray:
    """One row of the reference CNOT output tables, as a 4-qubit vector."""
    sign, plus_i, q3_sign = CNOT_TABLES[(i1, i4)][(s1, s2)]
    scalar = sign * 0.5 * cmath.exp(-1j * math.pi / 4) * (1 + (1j if plus_i else -1j))
    q3 = np.array([1, q3_sign], dtype=complex)
    return scalar * product_state([X_BASIS[s1], X_BASIS[s2], q3, Z_BASIS[i4]])


# (i1, i4) -> (s1, s2) -> (overall sign, factor is (1+i) rather than (1-i), sign of |1>_3)
CNOT_TABLES = {
    (0, 0): {(0, 0): (-1, True, -1), (0, 1): (1, False, 1), (1, 0): (-1, True, -1), (1, 1): (1, False, 1)},
    (0, 1): {(0, 0): (1, True, 1), (0, 1): (1, False, -1), (1, 0): (1, True, 1), (1, 1): (1, False, -1)},
    (1, 0): {(0, 0): (1, True, 1), (0, 1): (1, False, -1), (1, 0): (-1, True, 1), (1, 1): (-1, False, -1)},
    (1, 1): {(0, 0): (1, True, -1), (0, 1): (-1, False, 1), (1, 0): (-1, True, -1), (1, 1): (1, False, 1)},
}
