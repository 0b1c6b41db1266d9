"""Sparse Fock-basis states of a handful of bosonic modes.

A state maps occupation tuples ``(n_0, ..., n_{m-1})`` to complex amplitudes.
Only non-negligible terms are stored, so the dual-rail protocols (one photon
per mode pair) never hold more than ``2**qubits`` terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .errors import CutoffExceeded, InvalidMode, MismatchedShape
from .report import fmt_number

FockBasisVector = tuple[int, ...]

PRUNE_THRESHOLD = 1e-14
DEFAULT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class PhotonicState:
    mode_count: int
    cutoff: int = 1
    terms: Mapping[FockBasisVector, complex] = field(default_factory=dict)

    def __post_init__(self):
        if self.mode_count < 1:
            raise ValueError(f"mode_count must be >= 1, got {self.mode_count}")
        if self.cutoff < 1:
            raise ValueError(f"cutoff must be >= 1, got {self.cutoff}")
        for occ in self.terms:
            if len(occ) != self.mode_count:
                raise MismatchedShape(f"basis vector {occ} has {len(occ)} modes, expected {self.mode_count}")
            if any(n < 0 or n > self.cutoff for n in occ):
                raise CutoffExceeded(f"basis vector {occ} violates cutoff {self.cutoff}")

    @classmethod
    def _trusted(cls, mode_count: int, cutoff: int, terms: dict) -> "PhotonicState":
        """Skip validation; callers guarantee shape and cutoff already hold."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "mode_count", mode_count)
        object.__setattr__(obj, "cutoff", cutoff)
        object.__setattr__(obj, "terms", terms)
        return obj

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[FockBasisVector]:
        return iter(sorted(self.terms))

    def items(self) -> list[tuple[FockBasisVector, complex]]:
        """Terms in lexicographic order, mode 0 most significant."""
        return sorted(self.terms.items())

    def amplitude(self, occ: Iterable[int]) -> complex:
        return self.terms.get(tuple(occ), 0j)

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.terms.values()))

    def normalized(self) -> "PhotonicState":
        nrm = self.norm()
        if nrm == 0:
            raise ValueError("cannot normalize a zero state")
        return self.with_terms({k: v / nrm for k, v in self.terms.items()})

    def scaled(self, factor: complex) -> "PhotonicState":
        return self.with_terms({k: v * factor for k, v in self.terms.items()})

    def with_terms(self, terms: Mapping[FockBasisVector, complex]) -> "PhotonicState":
        """Same shape, new terms; negligible amplitudes are dropped.

        Only for terms derived from this state by shape- and cutoff-preserving maps.
        """
        return PhotonicState._trusted(self.mode_count, self.cutoff, prune(terms))

    def check_mode(self, mode: int) -> None:
        if not 0 <= mode < self.mode_count:
            raise InvalidMode(f"mode {mode} out of range for {self.mode_count} modes")

    def photon_numbers(self) -> set[int]:
        return {sum(occ) for occ in self.terms}

    def __repr__(self):
        body = " + ".join(f"({a:.4g})|{''.join(map(str, k))}>" for k, a in self.items())
        return f"PhotonicState(modes={self.mode_count}, cutoff={self.cutoff}: {body or '0'})"


def prune(terms: Mapping[FockBasisVector, complex], threshold: float = PRUNE_THRESHOLD) -> dict:
    return {k: v for k, v in terms.items() if abs(v) >= threshold}


def make_vacuum(mode_count: int, cutoff: int = 1) -> PhotonicState:
    if mode_count < 1:
        raise ValueError("a state needs at least one mode")
    return PhotonicState(mode_count, cutoff, {(0,) * mode_count: 1 + 0j})


def from_terms(mode_count: int, terms: Mapping[Iterable[int], complex], cutoff: int = 1,
               normalize: bool = True) -> PhotonicState:
    """Build a state from ``{occupations: amplitude}``, normalizing by default."""
    state = PhotonicState(mode_count, cutoff, prune({tuple(k): complex(v) for k, v in terms.items()}))
    return state.normalized() if normalize else state


def create_photon(state: PhotonicState, mode: int) -> PhotonicState:
    """Apply a creation operator to ``mode`` and renormalize."""
    state.check_mode(mode)
    out = {}
    for occ, amp in state.terms.items():
        n = occ[mode]
        if n + 1 > state.cutoff:
            raise CutoffExceeded(f"mode {mode} would hold {n + 1} photons, cutoff is {state.cutoff}")
        new = occ[:mode] + (n + 1,) + occ[mode + 1:]
        out[new] = out.get(new, 0j) + amp * math.sqrt(n + 1)
    return PhotonicState(state.mode_count, state.cutoff, prune(out)).normalized()


def _check_same_shape(s1: PhotonicState, s2: PhotonicState) -> None:
    if s1.mode_count != s2.mode_count or s1.cutoff != s2.cutoff:
        raise MismatchedShape(
            f"states differ in shape: ({s1.mode_count} modes, cutoff {s1.cutoff}) vs "
            f"({s2.mode_count} modes, cutoff {s2.cutoff})")


def inner_product(s1: PhotonicState, s2: PhotonicState) -> complex:
    """<s1|s2>, antilinear in the first argument."""
    _check_same_shape(s1, s2)
    small, large = (s1.terms, s2.terms) if len(s1.terms) <= len(s2.terms) else (s2.terms, s1.terms)
    total = 0j
    for occ in small:
        if occ in large:
            total += s1.terms[occ].conjugate() * s2.terms[occ]
    return total


def overlap(s1: PhotonicState, s2: PhotonicState) -> float:
    """|<s1|s2>| / (|s1| |s2|); 1 means equal up to a global phase."""
    n1, n2 = s1.norm(), s2.norm()
    if n1 == 0 or n2 == 0:
        return 0.0
    return abs(inner_product(s1, s2)) / (n1 * n2)


def equal_up_to_global_phase(s1: PhotonicState, s2: PhotonicState, tol: float = DEFAULT_TOL) -> bool:
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    return overlap(s1, s2) >= 1 - tol


def state_to_json(state: PhotonicState) -> dict:
    return {
        "modes": state.mode_count,
        "cutoff": state.cutoff,
        "terms": [{"occ": list(occ), "re": fmt_number(a.real), "im": fmt_number(a.imag)} for occ, a in state.items()],
    }


def state_from_json(data: Mapping) -> PhotonicState:
    try:
        terms = {tuple(int(n) for n in t["occ"]): complex(t["re"], t["im"]) for t in data["terms"]}
        return PhotonicState(int(data["modes"]), int(data.get("cutoff", 1)), prune(terms))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed state JSON: {exc}") from exc
