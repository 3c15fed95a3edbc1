"""Chain-automaton quantum circuit simulators.

Two translation-invariant nearest-neighbor chain constructions that run a
nearest-neighbor W/S/I circuit autonomously, together with the exactly
solvable reductions used to analyze them (path-graph walk, free-particle
counting statistics) and a brute-force full-space oracle that verifies the
restricted simulators.
"""

from .circuits import (
    Circuit,
    CircuitFormatError,
    GATE_KINDS,
    basis_state,
    circuit_unitary,
    output_bit_probability,
    output_sigma_z,
    simulate_circuit,
)
from .fermions import FermionBlock
from .hopping import ChainSpec, HoppingSector, RestrictedChain, SizeGuardError
from .shuttle import ShuttleLayout, ShuttleState, StateLine, build_initial_state, generate_line

__version__ = "0.1.0"

__all__ = [
    "Circuit",
    "CircuitFormatError",
    "GATE_KINDS",
    "basis_state",
    "circuit_unitary",
    "output_bit_probability",
    "output_sigma_z",
    "simulate_circuit",
    "FermionBlock",
    "ChainSpec",
    "HoppingSector",
    "RestrictedChain",
    "SizeGuardError",
    "ShuttleLayout",
    "ShuttleState",
    "StateLine",
    "build_initial_state",
    "generate_line",
    "__version__",
]
