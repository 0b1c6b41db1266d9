"""Random element sequences run side by side on the optical and qubit simulators."""
import numpy as np

from kerrmbqc import oracle
from kerrmbqc.dualrail import (
    DualRailRegister, apply_logical_unitary, decode_qubit, measure_x, measure_z, prepare_qubit,
)
from kerrmbqc.fock import make_vacuum
from kerrmbqc.optics import KerrGate, apply_kerr


def random_unitary(rng):
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / abs(np.diag(r)))


def random_qubit(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)


def run_sequence(seed: int, steps: int = 8):
    """Yield (label, optical decoded vector, oracle vector) after every element."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    reg = DualRailRegister.contiguous(n)
    state = make_vacuum(reg.mode_count)
    factors = [random_qubit(rng) for _ in range(n)]
    for q, f in enumerate(factors):
        state = prepare_qubit(state, reg, q, f[0], f[1])
    ref = oracle.product_state(factors)
    yield "prep", decode_qubit(state, reg), ref
    for _ in range(steps):
        kind = rng.choice(["kerr", "unitary", "measure"] if n > 1 else ["unitary", "measure"])
        if kind == "kerr":
            p, q = (int(x) for x in rng.choice(n, size=2, replace=False))
            side_p, side_q = (int(x) for x in rng.integers(0, 2, size=2))
            theta = float(rng.normal())
            state = apply_kerr(state, KerrGate(reg.pairs[p][side_p], reg.pairs[q][side_q], theta))
            # (1 - 2 n_a) = -z and (1 - 2 n_b) = z on a dual-rail pair
            sign = (-1 if side_p == 0 else 1) * (-1 if side_q == 0 else 1)
            ref = oracle.ising_entangle(ref, [(p, q)], -sign * theta)
        elif kind == "unitary":
            q = int(rng.integers(n))
            u = random_unitary(rng)
            state = apply_logical_unitary(state, reg, q, u)
            ref = oracle.apply_single(ref, q, u)
        else:
            q = int(rng.integers(n))
            basis = str(rng.choice(["X", "Z"]))
            optical = (measure_x if basis == "X" else measure_z)(state, reg, q)
            dense = oracle.measure_qubit(ref, q, basis)
            live = [s for s in (0, 1) if optical[s].post_state is not None]
            s = live[int(rng.integers(len(live)))]
            if abs(optical[s].probability - dense[s][1]) > 1e-10:
                raise AssertionError(f"branch probabilities differ: {optical[s].probability} vs {dense[s][1]}")
            state, ref = optical[s].post_state, dense[s][2]
        yield kind, decode_qubit(state, reg), ref


def random_program_text(rng) -> str:
    """A valid circuit program with random elements, for round-trip checks."""
    modes = int(rng.integers(2, 9))
    lines = [f"modes {modes}", f"cutoff {int(rng.integers(1, 4))}"]
    names = [f"q{k}" for k in range(int(rng.integers(0, modes // 2 + 1)))]
    for k, name in enumerate(names):
        lines.append(f"qubit {name} {2 * k} {2 * k + 1}")
    for _ in range(int(rng.integers(0, 12))):
        kinds = ["source", "bs", "kerr"] + (["measure"] if names else [])
        kind = kinds[int(rng.integers(len(kinds)))]
        a, b = (int(x) for x in rng.choice(modes, size=2, replace=False))
        if kind == "source":
            lines.append(f"source {a}")
        elif kind == "kerr":
            if rng.random() < 0.5:
                lines.append(f"kerr {a} {b} {int(rng.integers(-8, 9))}pi/{int(rng.integers(1, 13))}")
            else:
                lines.append(f"kerr {a} {b} {float(rng.normal())!r}")
        elif kind == "bs":
            preset = ["h", "plus", "prep", "matrix"][int(rng.integers(4))]
            if preset == "prep":
                v = [complex(x) for x in random_qubit(rng)]
                lines.append(f"bs {a} {b} prep {v[0].real!r}{v[0].imag:+}i {v[1].real!r}{v[1].imag:+}i")
            elif preset == "matrix":
                th = float(rng.uniform(0, 3))
                c, s = float(np.cos(th)), float(np.sin(th))
                lines.append(f"bs {a} {b} matrix {c!r} {-s!r} {s!r} {c!r}")
            else:
                lines.append(f"bs {a} {b} {preset}")
        else:
            lines.append(f"measure {'xz'[int(rng.integers(2))]} {names[int(rng.integers(len(names)))]}")
    return "\n".join(lines) + "\n"
