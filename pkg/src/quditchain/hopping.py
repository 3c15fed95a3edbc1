"""The d=10 gate-hopping chain automaton.

Each site of the chain carries a 5-state program register (empty, pointer,
W, S, I) over a data qubit.  Gates hop left/right past fill symbols; a gate
crossing a pointer is applied to the two data qubits below.  Because the
fill sequence and the gate order are both invariant, a reachable chain
state is labeled entirely by the bit string of gate positions, and the
Hamiltonian restricted to those labels is minus the adjacency matrix of
single-particle hops -- the same hopping model as hard-core particles on a
line.

This module provides:
  * generic hopping-sector machinery (basis enumeration by lexicographic
    combinadics, the hopping Hamiltonian, exact evolution, counting
    statistics) -- also used as the many-body oracle for the free-fermion
    reduction;
  * the chain-specific layer: initial configuration, program-register
    reconstruction, the applied-prefix rule, success probability and the
    output-qubit expectation.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Optional

import numpy as np

from .circuits import (
    Circuit,
    apply_two_qubit_gate,
    basis_state,
    output_sigma_z,
)

EMPTY = "."
POINTER = "*"

DEFAULT_SIZE_GUARD = 10**6


class SizeGuardError(RuntimeError):
    """Raised when a basis enumeration would exceed the configured guard."""


class ConfigurationError(ValueError):
    """Raised for gate configurations that cannot arise from the dynamics."""


# ---------------------------------------------------------------------------
# combinadics: rank/unrank sorted 1-based position tuples in lexicographic
# order, matching itertools.combinations
# ---------------------------------------------------------------------------

def rank_positions(positions, length: int) -> int:
    g = len(positions)
    rank = 0
    prev = 0
    for i, p in enumerate(positions):
        for v in range(prev + 1, p):
            rank += comb(length - v, g - i - 1)
        prev = p
    return rank


def unrank_positions(rank: int, length: int, count: int) -> tuple[int, ...]:
    positions = []
    prev = 0
    remaining = rank
    for i in range(count):
        v = prev + 1
        while True:
            block = comb(length - v, count - i - 1)
            if remaining < block:
                break
            remaining -= block
            v += 1
        positions.append(v)
        prev = v
    return tuple(positions)


def hop_moves(positions, length: int):
    """Legal single hops: (gate index m 1-based, step -1 or +1)."""
    occupied = set(positions)
    moves = []
    for m, p in enumerate(positions, start=1):
        if p - 1 >= 1 and p - 1 not in occupied:
            moves.append((m, -1))
        if p + 1 <= length and p + 1 not in occupied:
            moves.append((m, +1))
    return moves


def apply_move(positions, move) -> tuple[int, ...]:
    m, step = move
    out = list(positions)
    out[m - 1] += step
    return tuple(out)


class HoppingSector:
    """All configurations of `count` hard-core particles on `length` sites.

    Basis order is lexicographic in the position tuples.  The Hamiltonian
    has a -1 entry between configurations that differ by one adjacent hop.
    The eigendecomposition is computed once and cached.
    """

    def __init__(self, length: int, count: int, size_guard: int = DEFAULT_SIZE_GUARD):
        if not 0 < count <= length:
            raise ValueError("particle count out of range")
        dim = comb(length, count)
        if dim > size_guard:
            raise SizeGuardError(
                f"C({length},{count}) = {dim} exceeds size guard {size_guard}"
            )
        self.length = length
        self.count = count
        self.dim = dim
        self.basis = tuple(itertools.combinations(range(1, length + 1), count))
        self._eig = None

    def index_of(self, positions) -> int:
        return rank_positions(tuple(positions), self.length)

    def hamiltonian(self) -> np.ndarray:
        h = np.zeros((self.dim, self.dim))
        for i, positions in enumerate(self.basis):
            for move in hop_moves(positions, self.length):
                j = self.index_of(apply_move(positions, move))
                h[i, j] = -1.0
        return h

    def _eigensystem(self):
        if self._eig is None:
            self._eig = np.linalg.eigh(self.hamiltonian())
        return self._eig

    def evolve(self, amplitudes: np.ndarray, tau: float) -> np.ndarray:
        """exp(-i H tau) applied through the cached eigendecomposition."""
        lam, vec = self._eigensystem()
        return vec @ (np.exp(-1j * lam * tau) * (vec.conj().T @ amplitudes))

    def point_state(self, positions) -> np.ndarray:
        amps = np.zeros(self.dim, dtype=complex)
        amps[self.index_of(positions)] = 1.0
        return amps

    def region_counts(self, region: tuple[int, int]) -> np.ndarray:
        """Particle count inside the inclusive region for every basis config."""
        lo, hi = region
        return np.array(
            [sum(1 for p in cfg if lo <= p <= hi) for cfg in self.basis]
        )


def hopping_counting_distribution(
    length: int, occupied, region: tuple[int, int], tau: float
) -> np.ndarray:
    """Many-body counting PMF by brute-force evolution in the full sector.

    Independent oracle for the correlation-matrix counting statistics:
    evolves the point configuration `occupied` under the hopping Hamiltonian
    and marginalizes the particle count in `region`.
    """
    occupied = tuple(sorted(occupied))
    sector = HoppingSector(length, len(occupied))
    amps = sector.evolve(sector.point_state(occupied), tau)
    counts = sector.region_counts(region)
    pmf = np.zeros(len(occupied) + 1)
    np.add.at(pmf, counts, np.abs(amps) ** 2)
    return pmf


# ---------------------------------------------------------------------------
# chain-specific layer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChainSpec:
    """A circuit plus classical input, laid out on the gate-hopping chain.

    With `padding_factor` (f) unset the chain has length 2M with M = K*N
    gates; with f set the chain has length (f+2)M carrying 2M gates (the
    extra M are appended identities) and the work qubits sit at fM+1..fM+N.
    """

    circuit: Circuit
    input_bits: tuple[int, ...]
    padding_factor: Optional[int] = None

    def __post_init__(self):
        bits = tuple(int(b) for b in self.input_bits)
        object.__setattr__(self, "input_bits", bits)
        if len(bits) != self.circuit.n_qubits:
            raise ValueError("input width does not match circuit width")
        if self.padding_factor is not None and self.padding_factor < 1:
            raise ValueError("padding factor must be a positive integer")

    @property
    def n_qubits(self) -> int:
        return self.circuit.n_qubits

    @property
    def n_rounds(self) -> int:
        return self.circuit.n_rounds

    @property
    def real_gates(self) -> int:
        """M = K*N: program length before padding."""
        return self.n_rounds * self.n_qubits

    @property
    def padded(self) -> bool:
        return self.padding_factor is not None

    @property
    def gate_count(self) -> int:
        return 2 * self.real_gates if self.padded else self.real_gates

    @property
    def length(self) -> int:
        if self.padded:
            return (self.padding_factor + 2) * self.real_gates
        return 2 * self.real_gates

    @property
    def work_offset(self) -> int:
        """Work qubit n sits at chain position work_offset + n."""
        return (self.padding_factor if self.padded else 1) * self.real_gates

    @property
    def fill_repeats(self) -> int:
        """The (N-1 empties + pointer) block repeats this many times."""
        return (self.padding_factor if self.padded else 1) * self.n_rounds

    def program_entries(self) -> tuple[tuple[str, Optional[int]], ...]:
        """Gate kinds in program order with their work pair, or None for the
        round-leading / padding identities that only guard boundaries."""
        entries = []
        for k in range(1, self.n_rounds + 1):
            entries.append(("I", None))
            for g in range(1, self.n_qubits):
                entries.append((self.circuit.gate(k, g), g))
        if self.padded:
            entries.extend([("I", None)] * self.real_gates)
        return tuple(entries)

    def fill_symbols(self) -> tuple[str, ...]:
        block = (EMPTY,) * (self.n_qubits - 1) + (POINTER,)
        return block * self.fill_repeats


def initial_gate_positions(spec: ChainSpec) -> tuple[int, ...]:
    """Gates start packed directly above/right of the work qubits."""
    return tuple(range(spec.work_offset + 1, spec.work_offset + spec.gate_count + 1))


def program_register(spec: ChainSpec, positions) -> tuple[str, ...]:
    """Reconstruct the full program register from the gate positions alone.

    Gate kinds are written at the positions in program order; the remaining
    sites carry the invariant fill sequence left to right.
    """
    positions = tuple(positions)
    if len(positions) != spec.gate_count:
        raise ConfigurationError("wrong number of gate positions")
    entries = spec.program_entries()
    fill = spec.fill_symbols()
    register = []
    gi = fi = 0
    occupied = set(positions)
    for p in range(1, spec.length + 1):
        if p in occupied:
            register.append(entries[gi][0])
            gi += 1
        else:
            register.append(fill[fi])
            fi += 1
    return tuple(register)


def gate_moves(spec: ChainSpec, positions):
    """Applicable transitions from a configuration; see `hop_moves`."""
    return hop_moves(positions, spec.length)


def applied_gate_count(spec: ChainSpec, positions) -> int:
    """How many leading program gates have been applied to the work register.

    If no pointer sits over the work qubits, this is N times the number of
    pointers strictly to the right of the last work qubit; otherwise it is
    the number of gates strictly left of that pointer.
    """
    register = program_register(spec, positions)
    work_lo = spec.work_offset + 1
    work_hi = spec.work_offset + spec.n_qubits
    over_work = [
        p for p in range(work_lo, work_hi + 1) if register[p - 1] == POINTER
    ]
    if len(over_work) > 1:
        raise ConfigurationError(
            f"two pointers over the work region at {over_work}: unreachable"
        )
    if over_work:
        q = over_work[0]
        return sum(1 for p in positions if p < q)
    pointers_right = sum(
        1 for p in range(work_hi + 1, spec.length + 1) if register[p - 1] == POINTER
    )
    return spec.n_qubits * pointers_right


def prefix_work_states(spec: ChainSpec) -> list[np.ndarray]:
    """Work-register state after each prefix of the program, cumulative."""
    states = [basis_state(spec.input_bits)]
    for kind, pair in spec.program_entries():
        prev = states[-1]
        if pair is None or kind == "I":
            states.append(prev)
        else:
            states.append(apply_two_qubit_gate(kind, prev, pair))
    return states


class RestrictedChain:
    """Exact many-body dynamics of the chain in its reachable-label basis.

    Wraps a `HoppingSector` over the gate-position bit strings and adds the
    chain semantics: the initial configuration, the computation-done label
    set, and the per-configuration work-register state via the prefix rule.
    """

    def __init__(self, spec: ChainSpec, size_guard: int = DEFAULT_SIZE_GUARD):
        self.spec = spec
        self.sector = HoppingSector(spec.length, spec.gate_count, size_guard)
        self.initial_index = self.sector.index_of(initial_gate_positions(spec))
        self._prefixes = None
        self._sigma_by_prefix = None

    @property
    def dim(self) -> int:
        return self.sector.dim

    def hamiltonian(self) -> np.ndarray:
        return self.sector.hamiltonian()

    def initial_amplitudes(self) -> np.ndarray:
        amps = np.zeros(self.dim, dtype=complex)
        amps[self.initial_index] = 1.0
        return amps

    def evolve(self, tau: float, amplitudes: Optional[np.ndarray] = None) -> np.ndarray:
        if amplitudes is None:
            amplitudes = self.initial_amplitudes()
        return self.sector.evolve(amplitudes, tau)

    def prefixes(self) -> np.ndarray:
        if self._prefixes is None:
            self._prefixes = np.array(
                [applied_gate_count(self.spec, cfg) for cfg in self.sector.basis]
            )
        return self._prefixes

    def done_mask(self) -> np.ndarray:
        """Configurations whose M-th gate has cleared the work region."""
        if not self.spec.padded:
            raise ValueError("the computation-done label set needs a padded chain")
        m = self.spec.real_gates
        boundary = self.spec.padding_factor * m
        return np.array([cfg[m - 1] <= boundary for cfg in self.sector.basis])

    def success_probability(self, tau: float) -> float:
        amps = self.evolve(tau)
        return float((np.abs(amps) ** 2)[self.done_mask()].sum())

    def sigma_z_expectation(self, tau: float) -> float:
        """Exact <sigma_z> on the output qubit in the evolved chain state."""
        if self._sigma_by_prefix is None:
            states = prefix_work_states(self.spec)
            self._sigma_by_prefix = np.array(
                [output_sigma_z(s, self.spec.n_qubits) for s in states]
            )
        amps = self.evolve(tau)
        weights = np.abs(amps) ** 2
        return float(np.sum(weights * self._sigma_by_prefix[self.prefixes()]))

    def region_count_distribution(self, tau: float) -> np.ndarray:
        """PMF of the gate count left of the work region (padded chains)."""
        if not self.spec.padded:
            raise ValueError("needs a padded chain")
        region = (1, self.spec.padding_factor * self.spec.real_gates)
        amps = self.evolve(tau)
        counts = self.sector.region_counts(region)
        pmf = np.zeros(self.spec.gate_count + 1)
        np.add.at(pmf, counts, np.abs(amps) ** 2)
        return pmf

    def energy(self, amplitudes: np.ndarray) -> float:
        lam, vec = self.sector._eigensystem()
        coeffs = vec.conj().T @ amplitudes
        return float(np.sum(lam * np.abs(coeffs) ** 2))
