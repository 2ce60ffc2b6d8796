"""Counterdiabatic adiabatic-rapid-passage CZ gates with Rydberg blockade."""

from .gate import GateRun, PhaseJumpSpec, ProtocolConfig, bell_fidelity, prepare_bell, run_cz
from .model import INFINITE, SPECIES, DecayChannel, LevelScheme, TwoAtomSystem
from .pulsegen import PulseParams
from .units import ghz, mhz

__version__ = "0.1.0"

__all__ = [
    "INFINITE",
    "SPECIES",
    "DecayChannel",
    "GateRun",
    "LevelScheme",
    "PhaseJumpSpec",
    "ProtocolConfig",
    "PulseParams",
    "TwoAtomSystem",
    "bell_fidelity",
    "ghz",
    "mhz",
    "prepare_bell",
    "run_cz",
]
