"""Simulator for measurement-based optical quantum computing with Kerr gates."""
from .errors import KerrSimError
from .fock import PhotonicState, create_photon, make_vacuum
from .protocols import BranchPolicy, run_cnot, run_teleportation, verify_tables

__all__ = [
    "KerrSimError", "PhotonicState", "create_photon", "make_vacuum",
    "BranchPolicy", "run_cnot", "run_teleportation", "verify_tables",
]
__version__ = "0.1.0"
