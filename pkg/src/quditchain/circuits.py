"""Nearest-neighbor circuits in round normal form, simulated on dense state vectors.

A circuit on N qubits is K rounds of N-1 two-qubit gates from {W, S, I},
where the gate in slot g of a round acts on the neighboring qubit pair
(g, g+1), 1-based.  W is a controlled pi/2 rotation about the y-axis with
the control on the left qubit; S is the swap; I does nothing.

Basis convention: qubit 1 is the most significant bit of the state-vector
index, so printed bit strings read left to right along the chain.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

GATE_KINDS = ("W", "S", "I")

NORM_TOL = 1e-10

_SQ = 1.0 / np.sqrt(2.0)

# Rows/columns ordered |00>, |01>, |10>, |11>; left qubit is the control.
W_MATRIX = np.array(
    [
        [1, 0, 0, 0],
        [0, 1, 0, 0],
        [0, 0, _SQ, -_SQ],
        [0, 0, _SQ, _SQ],
    ],
    dtype=complex,
)
S_MATRIX = np.array(
    [
        [1, 0, 0, 0],
        [0, 0, 1, 0],
        [0, 1, 0, 0],
        [0, 0, 0, 1],
    ],
    dtype=complex,
)
I_MATRIX = np.eye(4, dtype=complex)

GATE_MATRICES = {"W": W_MATRIX, "S": S_MATRIX, "I": I_MATRIX}


class CircuitFormatError(ValueError):
    """Raised when a circuit description violates the normal form."""


@dataclass(frozen=True)
class Circuit:
    """K rounds of N-1 nearest-neighbor gates on an N-qubit line."""

    n_qubits: int
    rounds: tuple[tuple[str, ...], ...] = field(default=())

    def __post_init__(self):
        if self.n_qubits < 2:
            raise CircuitFormatError("need at least 2 qubits")
        if len(self.rounds) < 1:
            raise CircuitFormatError("need at least 1 round")
        for r, rnd in enumerate(self.rounds):
            if len(rnd) != self.n_qubits - 1:
                raise CircuitFormatError(
                    f"round {r + 1} has {len(rnd)} gates, expected {self.n_qubits - 1}"
                )
            for kind in rnd:
                if kind not in GATE_KINDS:
                    # W with the control on the right is deliberately not
                    # accepted; we refuse rather than silently transpose.
                    raise CircuitFormatError(f"unknown gate kind {kind!r}")

    @property
    def n_rounds(self) -> int:
        return len(self.rounds)

    def gate(self, round_index: int, slot: int) -> str:
        """Gate kind in round `round_index` acting on pair (slot, slot+1), 1-based."""
        return self.rounds[round_index - 1][slot - 1]

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        obj = json.loads(text)
        try:
            n = int(obj["n_qubits"])
            rounds = tuple(tuple(str(g) for g in rnd) for rnd in obj["rounds"])
        except (KeyError, TypeError) as exc:
            raise CircuitFormatError(f"malformed circuit JSON: {exc}") from exc
        return cls(n, rounds)

    @classmethod
    def load(cls, path) -> "Circuit":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(fh.read())

    def to_json(self) -> str:
        return json.dumps(
            {"n_qubits": self.n_qubits, "rounds": [list(r) for r in self.rounds]}
        )

    def padded(self, extra_identity_rounds: int) -> "Circuit":
        """Append rounds of identity gates after the real program."""
        pad = (("I",) * (self.n_qubits - 1),) * extra_identity_rounds
        return Circuit(self.n_qubits, self.rounds + pad)


def identity_circuit(n_qubits: int, n_rounds: int = 1) -> Circuit:
    return Circuit(n_qubits, (("I",) * (n_qubits - 1),) * n_rounds)


def basis_state(bits) -> np.ndarray:
    """Computational-basis state |b1 b2 ... bN>, qubit 1 most significant."""
    bits = tuple(int(b) for b in bits)
    if any(b not in (0, 1) for b in bits):
        raise ValueError("bits must be 0/1")
    index = 0
    for b in bits:
        index = (index << 1) | b
    vec = np.zeros(2 ** len(bits), dtype=complex)
    vec[index] = 1.0
    return vec


def _n_qubits_of(state: np.ndarray) -> int:
    n = int(round(np.log2(state.size)))
    if 2**n != state.size:
        raise ValueError("state length is not a power of two")
    return n


def check_normalized(state: np.ndarray) -> None:
    nrm2 = float(np.vdot(state, state).real)
    if abs(nrm2 - 1.0) > NORM_TOL:
        raise ValueError(f"state not normalized: |norm^2 - 1| = {abs(nrm2 - 1.0):.3e}")


def apply_two_qubit_gate(kind: str, state: np.ndarray, left_qubit: int) -> np.ndarray:
    """Apply the 4x4 gate `kind` to qubits (left_qubit, left_qubit+1), 1-based."""
    n = _n_qubits_of(state)
    if not 1 <= left_qubit <= n - 1:
        raise IndexError(f"left_qubit {left_qubit} out of range for {n} qubits")
    mat = GATE_MATRICES[kind]
    if kind == "I":
        return state.copy()
    tensor = np.asarray(state, dtype=complex).reshape((2,) * n)
    # qubit j (1-based, MSB first) lives on axis j-1
    a = left_qubit - 1
    out = np.tensordot(mat.reshape(2, 2, 2, 2), tensor, axes=([2, 3], [a, a + 1]))
    out = np.moveaxis(out, [0, 1], [a, a + 1])
    return out.reshape(-1)


def simulate_circuit(circuit: Circuit, state: np.ndarray) -> np.ndarray:
    """Apply all rounds in order; within a round, slots g = 1..N-1 left to right."""
    if state.size != 2**circuit.n_qubits:
        raise ValueError("state dimension does not match circuit width")
    out = np.asarray(state, dtype=complex).copy()
    for rnd in circuit.rounds:
        for g, kind in enumerate(rnd, start=1):
            if kind != "I":
                out = apply_two_qubit_gate(kind, out, g)
    return out


def output_sigma_z(state: np.ndarray, qubit: int) -> float:
    """<sigma_z> on `qubit`, with |1> the +1 eigenstate (spin up = output 'yes')."""
    n = _n_qubits_of(state)
    if not 1 <= qubit <= n:
        raise IndexError(f"qubit {qubit} out of range")
    probs = np.abs(np.asarray(state)) ** 2
    bits = (np.arange(state.size) >> (n - qubit)) & 1
    return float(np.sum(probs * (2 * bits - 1)))


def output_bit_probability(state: np.ndarray, qubit: int) -> float:
    """Probability of reading 1 on `qubit`."""
    n = _n_qubits_of(state)
    probs = np.abs(np.asarray(state)) ** 2
    bits = (np.arange(state.size) >> (n - qubit)) & 1
    return float(np.sum(probs * bits))


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense 2^N x 2^N matrix of the whole circuit (small N only)."""
    dim = 2**circuit.n_qubits
    cols = [simulate_circuit(circuit, np.eye(dim, dtype=complex)[:, j]) for j in range(dim)]
    return np.column_stack(cols)
