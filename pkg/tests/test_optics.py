import cmath
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kerrmbqc.errors import CutoffExceeded, InvalidMode, NotUnitary
from kerrmbqc.fock import (
    PhotonicState, create_photon, equal_up_to_global_phase, from_terms, inner_product, make_vacuum,
)
from kerrmbqc.optics import (
    HADAMARD, QUARTER_PI, BeamSplitter, KerrGate, apply_beamsplitter, apply_kerr, apply_phase,
    hadamard_bs, qubit_prep, qubit_prep_matrix,
)

SQ = 1 / math.sqrt(2)


def close(s1: PhotonicState, s2: PhotonicState, tol=1e-12):
    keys = set(s1.terms) | set(s2.terms)
    return all(abs(s1.amplitude(k) - s2.amplitude(k)) <= tol for k in keys)


class TestKerr:
    @pytest.mark.parametrize("occ,sign", [((0, 0), 1), ((0, 1), -1), ((1, 0), -1), ((1, 1), 1)])
    def test_phases(self, occ, sign):
        s = from_terms(2, {occ: 1})
        out = apply_kerr(s, KerrGate(0, 1, QUARTER_PI))
        assert out.amplitude(occ) == pytest.approx(cmath.exp(1j * sign * math.pi / 4))

    def test_zero_angle(self):
        s = from_terms(2, {(0, 1): 0.6, (1, 0): 0.8j, (1, 1): 0})
        assert close(apply_kerr(s, KerrGate(0, 1, 0.0)), s)

    def test_same_mode(self):
        with pytest.raises(InvalidMode):
            KerrGate(1, 1)

    def test_out_of_range(self):
        with pytest.raises(InvalidMode):
            apply_kerr(make_vacuum(2), KerrGate(0, 5))

    def test_teleport_chain_phases(self):
        # three |+> qubits' photon pattern: chi on (a, d) then (c, f) on the input product
        alpha, beta = 0.6, 0.8j
        kets = {}
        for i, bits in enumerate(itertools.product((0, 1), repeat=3)):
            occ = tuple(m for b in bits for m in ((1, 0) if b == 0 else (0, 1)))
            kets[occ] = (alpha if bits[0] == 0 else beta)
        s = from_terms(6, kets)
        s = apply_kerr(apply_kerr(s, KerrGate(0, 3)), KerrGate(2, 5))
        expected = {(1, 0, 1, 0, 1, 0): -1j * alpha, (1, 0, 1, 0, 0, 1): alpha, (1, 0, 0, 1, 1, 0): 1j * alpha,
                    (1, 0, 0, 1, 0, 1): alpha, (0, 1, 1, 0, 1, 0): beta, (0, 1, 1, 0, 0, 1): 1j * beta,
                    (0, 1, 0, 1, 1, 0): beta, (0, 1, 0, 1, 0, 1): -1j * beta}
        assert equal_up_to_global_phase(s, from_terms(6, expected), 1e-12)


class TestBeamSplitter:
    def test_hadamard_on_source(self):
        out = apply_beamsplitter(from_terms(2, {(0, 1): 1}), hadamard_bs(0, 1))
        assert out.amplitude((1, 0)) == pytest.approx(SQ)
        assert out.amplitude((0, 1)) == pytest.approx(-SQ)

    def test_identity(self):
        s = from_terms(3, {(0, 1, 0): 0.6, (1, 0, 1): 0.8})
        assert close(apply_beamsplitter(s, BeamSplitter(0, 1, np.eye(2))), s)

    def test_vacuum_unchanged(self):
        assert apply_beamsplitter(make_vacuum(2), hadamard_bs(0, 1)).terms == {(0, 0): 1}

    def test_conjugate_matrix_convention(self):
        a, b = 0.6, 0.8j
        m = np.array([[np.conj(a), np.conj(b)], [b, -a]])
        out = apply_beamsplitter(from_terms(2, {(0, 1): 1}), BeamSplitter(0, 1, m))
        assert out.amplitude((1, 0)) == pytest.approx(np.conj(b))
        assert out.amplitude((0, 1)) == pytest.approx(-a)

    @pytest.mark.parametrize("alpha,beta", [(1, 0), (0, 1), (SQ, SQ), (0.6, 0.8j), (-0.28j, 0.96)])
    def test_qubit_prep(self, alpha, beta):
        out = apply_beamsplitter(from_terms(2, {(0, 1): 1}), qubit_prep(0, 1, alpha, beta))
        assert out.amplitude((1, 0)) == pytest.approx(alpha)
        assert out.amplitude((0, 1)) == pytest.approx(beta)

    def test_hong_ou_mandel(self):
        s = from_terms(2, {(1, 1): 1}, cutoff=2)
        out = apply_beamsplitter(s, hadamard_bs(0, 1))
        assert abs(out.amplitude((1, 1))) < 1e-15
        assert abs(out.amplitude((2, 0))) == pytest.approx(SQ)
        assert abs(out.amplitude((0, 2))) == pytest.approx(SQ)

    def test_two_photon_requires_cutoff(self):
        with pytest.raises(CutoffExceeded):
            apply_beamsplitter(from_terms(2, {(1, 1): 1}), hadamard_bs(0, 1))

    def test_not_unitary(self):
        with pytest.raises(NotUnitary):
            BeamSplitter(0, 1, [[1, 1], [0, 1]])
        with pytest.raises(NotUnitary):
            BeamSplitter(0, 1, np.eye(3))

    def test_same_mode(self):
        with pytest.raises(InvalidMode):
            hadamard_bs(2, 2)

    def test_prep_not_normalized(self):
        with pytest.raises(ValueError):
            qubit_prep_matrix(1, 1)


def _permanent(m):
    n = m.shape[0]
    return sum(np.prod([m[i, p[i]] for i in range(n)]) for p in itertools.permutations(range(n)))


def _lift_oracle(u, occ_in, occ_out):
    """<out|U|in> via the permanent of the repeated-row/column submatrix."""
    rows = [j for j, n in enumerate(occ_out) for _ in range(n)]
    cols = [i for i, n in enumerate(occ_in) for _ in range(n)]
    sub = u[np.ix_(rows, cols)]
    norm = math.sqrt(math.prod(math.factorial(n) for n in occ_in) * math.prod(math.factorial(n) for n in occ_out))
    return _permanent(sub) / norm


def _random_unitary(rng):
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / abs(np.diag(r)))


@pytest.mark.parametrize("na,nb", [(1, 1), (2, 0), (2, 1), (0, 3), (2, 2)])
def test_bosonic_lift_matches_permanent(na, nb, rng):
    u = _random_unitary(rng)
    cutoff = na + nb
    out = apply_beamsplitter(from_terms(2, {(na, nb): 1}, cutoff=cutoff), BeamSplitter(0, 1, u))
    for p in range(cutoff + 1):
        q = cutoff - p
        assert out.amplitude((p, q)) == pytest.approx(_lift_oracle(u, (na, nb), (p, q)), abs=1e-12)


class TestPhase:
    def test_pi(self):
        assert apply_phase(from_terms(1, {(1,): 1}), 0, math.pi).amplitude((1,)) == pytest.approx(-1)

    def test_vacuum(self):
        assert apply_phase(make_vacuum(1), 0, 1.234).terms == {(0,): 1}

    def test_half_pi(self):
        out = apply_phase(from_terms(1, {(0,): 1, (1,): 1}), 0, math.pi / 2)
        assert out.amplitude((1,)) == pytest.approx(1j * SQ)


# -- properties ------------------------------------------------------------

def _random_state(rng, modes=4, cutoff=2, terms=5):
    out = {}
    for _ in range(terms):
        occ = tuple(int(x) for x in rng.integers(0, 2, size=modes))
        out[occ] = complex(rng.normal(), rng.normal())
    return from_terms(modes, out, cutoff=cutoff)


seeds = st.integers(0, 2 ** 32 - 1)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_norm_and_photon_number_preserved(seed):
    rng = np.random.default_rng(seed)
    s = _random_state(rng)
    u = _random_unitary(rng)
    for op in (lambda x: apply_beamsplitter(x, BeamSplitter(0, 2, u)),
               lambda x: apply_kerr(x, KerrGate(1, 3, rng.normal())),
               lambda x: apply_phase(x, 2, rng.normal())):
        out = op(s)
        assert out.norm() == pytest.approx(1, abs=1e-12)
        # total photon number is conserved per term family
        assert out.photon_numbers() <= s.photon_numbers()


@settings(max_examples=60, deadline=None)
@given(seeds, st.floats(-4, 4))
def test_kerr_inverse_and_commutation(seed, theta):
    rng = np.random.default_rng(seed)
    s = _random_state(rng, modes=5, cutoff=1)
    assert close(apply_kerr(apply_kerr(s, KerrGate(0, 1, theta)), KerrGate(0, 1, -theta)), s)
    g1, g2 = KerrGate(0, 1, theta), KerrGate(2, 4, -0.3)
    assert close(apply_kerr(apply_kerr(s, g1), g2), apply_kerr(apply_kerr(s, g2), g1))


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_beamsplitter_dagger_is_inverse(seed):
    rng = np.random.default_rng(seed)
    s = _random_state(rng)
    bs = BeamSplitter(1, 3, _random_unitary(rng))
    assert close(apply_beamsplitter(apply_beamsplitter(s, bs), bs.dagger()), s)
