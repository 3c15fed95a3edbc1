"""The d=20 program-shuttle chain automaton.

Each site carries a 10-state program register over a data qubit.  A unique
active symbol (turn-around, apply-gate, shift-program, or a marked gate)
walks back and forth: marking passes carry the active spot from the back of
the program sequence to the front; an apply pass drags the apply symbol
rightward through the program, executing each gate on the data qubits below;
shift passes move the whole program one site to the left.  The reachable
states form a single line psi_0 .. psi_T on which the chain Hamiltonian acts
as minus the path adjacency matrix, so the computation progresses as a
quantum walk on that line.

Program symbols used here:
    W S I   gates            w s i   marked gates (active spot in transit)
    A       apply-gate       P       shift-program
    T       turn-around      .       empty

The data register holds fixed boundary-marker bits (1 at the sequence
boundaries, 0 elsewhere) plus the N work qubits; marker bits never change.

Note on the turn-around transitions: the data-bit condition that decides
whether the active symbol turns into apply/shift (and, reversed, whether a
turn-around came from an apply or a shift pass) is read from the site under
the adjacent empty symbol, not under the active symbol itself.  The marker
layout puts a 1 there exactly at the end of an apply pass and a 0 at the end
of a shift pass, which is what makes the forward and backward walks
deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .circuits import (
    Circuit,
    apply_two_qubit_gate,
    basis_state,
    output_bit_probability,
    simulate_circuit,
)
from .walk import spectrum

GATES = ("W", "S", "I")
MARKED = {"W": "w", "S": "s", "I": "i"}
UNMARK = {v: k for k, v in MARKED.items()}
APPLY = "A"
SHIFT = "P"
TURN = "T"
EMPTY = "."

from .circuits import W_MATRIX

INVERSE_GATE = {"W": W_MATRIX.conj().T}

PADDING_ROUND_FACTOR = 5  # identity rounds appended per real round when padding


class MalformedStateError(RuntimeError):
    """A state where zero or several transition rules apply, or a rule would
    touch a data qubit it must not touch."""


@dataclass(frozen=True)
class ShuttleLayout:
    """Static geometry of the chain for a circuit (optionally padded)."""

    circuit: Circuit
    original_rounds: int
    padded: bool

    @property
    def n_qubits(self) -> int:
        return self.circuit.n_qubits

    @property
    def total_rounds(self) -> int:
        return self.circuit.n_rounds

    @property
    def length(self) -> int:
        n, k = self.n_qubits, self.total_rounds
        return (2 * k - 1) * (n + 1) + 2

    @property
    def work_offset(self) -> int:
        """Work qubit n sits at site work_offset + n."""
        return (self.total_rounds - 1) * (self.n_qubits + 1) + 2

    @property
    def marker_sites(self) -> tuple[int, ...]:
        n = self.n_qubits
        return tuple((k - 1) * (n + 1) + 2 for k in range(1, 2 * self.total_rounds + 1))

    @property
    def readout_site(self) -> int:
        """Program site whose distance from the right end equals the length
        of the original (unpadded) program."""
        return self.length - self.original_rounds * (self.n_qubits + 1)

    def work_index(self, site: int) -> Optional[int]:
        w = site - self.work_offset
        return w if 1 <= w <= self.n_qubits else None

    def data_bit(self, site: int) -> Optional[int]:
        """Fixed classical data bit at `site`, or None for a work slot."""
        if self.work_index(site) is not None:
            return None
        return 1 if site in set(self.marker_sites) else 0

    def program_string(self) -> tuple[str, ...]:
        """I round1, I I round2, I I round3, ... -- length K(N+1) - 1."""
        out = []
        for k in range(1, self.total_rounds + 1):
            out.append("I")
            if k > 1:
                out.append("I")
            for g in range(1, self.n_qubits):
                out.append(self.circuit.gate(k, g))
        return tuple(out)


@dataclass(frozen=True)
class ShuttleState:
    layout: ShuttleLayout
    program: tuple[str, ...]
    work: np.ndarray
    n_applied: int = 0

    def same_configuration(self, other: "ShuttleState") -> bool:
        return (
            self.program == other.program
            and np.allclose(self.work, other.work, atol=1e-12)
        )


def build_initial_state(circuit: Circuit, input_bits, pad: bool = False) -> ShuttleState:
    """Empty sites on the left, the program at the right end, turn-around last.

    With `pad`, 5K rounds of identities are appended to the circuit and the
    whole layout is rebuilt for the 6K-round program.
    """
    original_rounds = circuit.n_rounds
    if pad:
        circuit = circuit.padded(PADDING_ROUND_FACTOR * circuit.n_rounds)
    layout = ShuttleLayout(circuit, original_rounds, pad)
    prog = layout.program_string()
    register = (
        (EMPTY,) * (layout.length - len(prog) - 1) + prog + (TURN,)
    )
    assert len(register) == layout.length
    return ShuttleState(layout, register, basis_state(input_bits), 0)


def _checked_bit(layout: ShuttleLayout, site: int) -> int:
    bit = layout.data_bit(site)
    if bit is None:
        raise MalformedStateError(
            f"transition rule conditions on work qubit at site {site}"
        )
    return bit


def _apply_gate_to_data(
    state: ShuttleState, kind: str, left_site: int, inverse: bool
) -> tuple[np.ndarray, int]:
    """Gate action of an apply-pass swap on data sites (left_site, left_site+1).

    Over two work slots the gate acts on the work register (inverse when
    walking backward).  Over marker/extra bits it must act as the identity;
    anything else means the state is off the reachable line.
    """
    layout = state.layout
    wl = layout.work_index(left_site)
    wr = layout.work_index(left_site + 1)
    if wl is not None and wr is not None:
        if kind == "I":
            return state.work, state.n_applied
        if inverse and kind in INVERSE_GATE:
            mat = INVERSE_GATE[kind]
            # apply dagger by routing through apply_two_qubit_gate on W^-1
            work = _apply_matrix(state.work, mat, wl)
        elif inverse:
            # S and I are self-inverse
            work = apply_two_qubit_gate(kind, state.work, wl)
        else:
            work = apply_two_qubit_gate(kind, state.work, wl)
        return work, state.n_applied + (-1 if inverse else 1)
    if (wl is None) != (wr is None):
        # boundary of the work region: the inserted identities guarantee
        # only I ever lands here
        if kind != "I":
            raise MalformedStateError(
                f"gate {kind} at work-region boundary (site {left_site})"
            )
        return state.work, state.n_applied
    b1 = _checked_bit(layout, left_site)
    b2 = _checked_bit(layout, left_site + 1)
    if kind != "I" and (b1, b2) != (0, 0):
        raise MalformedStateError(
            f"gate {kind} over marker bits ({b1}{b2}) at site {left_site}"
        )
    return state.work, state.n_applied


def _apply_matrix(work: np.ndarray, mat: np.ndarray, left_qubit: int) -> np.ndarray:
    n = int(round(np.log2(work.size)))
    a = left_qubit - 1
    tensor = np.asarray(work, dtype=complex).reshape((2,) * n)
    out = np.tensordot(mat.reshape(2, 2, 2, 2), tensor, axes=([2, 3], [a, a + 1]))
    return np.moveaxis(out, [0, 1], [a, a + 1]).reshape(-1)


def _forward_matches(state: ShuttleState):
    """All (bond, rule, successor) with a forward rule applicable at the bond."""
    layout = state.layout
    prog = state.program
    matches = []

    def emit(i, rule, p1, p2, work=None, n_applied=None):
        register = prog[: i - 1] + (p1, p2) + prog[i + 1 :]
        matches.append(
            (
                i,
                rule,
                replace(
                    state,
                    program=register,
                    work=state.work if work is None else work,
                    n_applied=state.n_applied if n_applied is None else n_applied,
                ),
            )
        )

    for i in range(1, layout.length):
        p1, p2 = prog[i - 1], prog[i]
        if p1 in GATES and p2 == TURN:
            emit(i, "1", MARKED[p1], EMPTY)
        elif p1 in GATES and p2 in UNMARK:
            emit(i, "2", MARKED[p1], UNMARK[p2])
        elif p1 == EMPTY and p2 in UNMARK:
            emit(i, "3", TURN, UNMARK[p2])
        elif p1 == EMPTY and p2 == TURN:
            if _checked_bit(layout, i + 1) == 1:
                emit(i, "4a", EMPTY, APPLY)
            else:
                emit(i, "4b", EMPTY, SHIFT)
        elif p1 == APPLY and p2 in GATES:
            work, napp = _apply_gate_to_data(state, p2, i, inverse=False)
            emit(i, "5a", p2, APPLY, work, napp)
        elif p1 == SHIFT and p2 in GATES:
            emit(i, "5b", p2, SHIFT)
        elif p1 == APPLY and p2 == EMPTY and _checked_bit(layout, i + 1) == 1:
            emit(i, "6a", TURN, EMPTY)
        elif p1 == SHIFT and p2 == EMPTY and _checked_bit(layout, i + 1) == 0:
            emit(i, "6b", TURN, EMPTY)
    return matches


def _backward_matches(state: ShuttleState):
    layout = state.layout
    prog = state.program
    matches = []

    def emit(i, rule, p1, p2, work=None, n_applied=None):
        register = prog[: i - 1] + (p1, p2) + prog[i + 1 :]
        matches.append(
            (
                i,
                rule,
                replace(
                    state,
                    program=register,
                    work=state.work if work is None else work,
                    n_applied=state.n_applied if n_applied is None else n_applied,
                ),
            )
        )

    for i in range(1, layout.length):
        p1, p2 = prog[i - 1], prog[i]
        if p1 in UNMARK and p2 == EMPTY:
            emit(i, "1", UNMARK[p1], TURN)
        elif p1 in UNMARK and p2 in GATES:
            emit(i, "2", UNMARK[p1], MARKED[p2])
        elif p1 == TURN and p2 in GATES:
            emit(i, "3", EMPTY, MARKED[p2])
        elif p1 == EMPTY and p2 == APPLY and _checked_bit(layout, i + 1) == 1:
            emit(i, "4a", EMPTY, TURN)
        elif p1 == EMPTY and p2 == SHIFT and _checked_bit(layout, i + 1) == 0:
            emit(i, "4b", EMPTY, TURN)
        elif p1 in GATES and p2 == APPLY:
            work, napp = _apply_gate_to_data(state, p1, i, inverse=True)
            emit(i, "5a", APPLY, p1, work, napp)
        elif p1 in GATES and p2 == SHIFT:
            emit(i, "5b", SHIFT, p1)
        elif p1 == TURN and p2 == EMPTY:
            if _checked_bit(layout, i + 1) == 1:
                emit(i, "6a", APPLY, EMPTY)
            else:
                emit(i, "6b", SHIFT, EMPTY)
    return matches


def _unique(matches, state, direction: str) -> Optional[ShuttleState]:
    if not matches:
        return None
    if len(matches) > 1:
        rules = [(i, r) for i, r, _ in matches]
        raise MalformedStateError(
            f"{len(matches)} {direction} rules apply at {rules}; expected one"
        )
    return matches[0][2]


def step_forward(state: ShuttleState) -> Optional[ShuttleState]:
    """The unique successor state, or None at the end of the line."""
    return _unique(_forward_matches(state), state, "forward")


def step_backward(state: ShuttleState) -> Optional[ShuttleState]:
    """The unique predecessor state, or None at the start of the line."""
    return _unique(_backward_matches(state), state, "backward")


@dataclass(frozen=True)
class StateLine:
    """The full forward orbit psi_0 .. psi_T."""

    states: tuple[ShuttleState, ...]

    @property
    def final_index(self) -> int:
        return len(self.states) - 1

    @property
    def layout(self) -> ShuttleLayout:
        return self.states[0].layout


def generate_line(initial: ShuttleState, step_cap: Optional[int] = None) -> StateLine:
    """Iterate forward to termination, asserting no configuration repeats."""
    layout = initial.layout
    if step_cap is None:
        span = layout.total_rounds * (layout.n_qubits + 1)
        step_cap = 4 * (span + 2) ** 2 + 1000
    states = [initial]
    seen = {initial.program: 0}
    current = initial
    while True:
        nxt = step_forward(current)
        if nxt is None:
            break
        if nxt.program in seen:
            raise MalformedStateError(
                f"configuration cycle: step {len(states)} repeats {seen[nxt.program]}"
            )
        if len(states) > step_cap:
            raise MalformedStateError(f"line exceeded step cap {step_cap}")
        seen[nxt.program] = len(states)
        states.append(nxt)
        current = nxt
    return StateLine(tuple(states))


def line_hamiltonian(line: StateLine) -> np.ndarray:
    """(T+1)x(T+1) matrix of the chain Hamiltonian restricted to the line.

    For every state, every transition term applied at every bond (forward
    and backward) must land exactly on the line neighbors; any image off the
    line, or a missing/duplicated neighbor, raises.  The result is the
    tridiagonal -1 matrix of a path graph.
    """
    states = line.states
    t_max = line.final_index
    h = np.zeros((t_max + 1, t_max + 1))
    for t, state in enumerate(states):
        images = [(s, "fwd") for _, _, s in _forward_matches(state)]
        images += [(s, "bwd") for _, _, s in _backward_matches(state)]
        expected = {}
        if t < t_max:
            expected[t + 1] = 1
        if t > 0:
            expected[t - 1] = 1
        found: dict[int, int] = {}
        for image, direction in images:
            hit = None
            for u in (t - 1, t + 1):
                if 0 <= u <= t_max and image.same_configuration(states[u]):
                    hit = u
                    break
            if hit is None:
                raise MalformedStateError(
                    f"{direction} term image of psi_{t} is off the line"
                )
            found[hit] = found.get(hit, 0) + 1
        if found != expected:
            raise MalformedStateError(
                f"psi_{t} neighbor multiplicities {found} != {expected}"
            )
        for u in expected:
            h[t, u] = -1.0
    return h


def success_indices(line: StateLine) -> np.ndarray:
    """States whose readout program site already shows the empty symbol."""
    site = line.layout.readout_site
    return np.array(
        [t for t, s in enumerate(line.states) if s.program[site - 1] == EMPTY],
        dtype=int,
    )


def success_is_tail(line: StateLine) -> bool:
    idx = success_indices(line)
    return idx.size > 0 and bool(
        np.array_equal(idx, np.arange(idx[0], line.final_index + 1))
    )


def final_work_reference(line: StateLine, input_bits) -> np.ndarray:
    """Direct circuit simulation of the same program on the same input."""
    return simulate_circuit(line.layout.circuit, basis_state(input_bits))


def readout(line: StateLine, tau_max: float, samples: int, seed: int) -> dict:
    """Two-step readout at uniformly random times.

    Draws tau ~ Uniform(0, tau_max), evolves |psi_0> under the line-walk
    Hamiltonian, reads the probability that the readout program site shows
    the empty symbol (p_bullet) and the joint probability of that event and
    output bit 1 (p_out1).  Deterministic for a fixed seed.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    n_states = line.final_index + 1
    succ = success_indices(line)
    succ_mask = np.zeros(n_states)
    succ_mask[succ] = 1.0
    n = line.layout.n_qubits
    p_one = np.array(
        [output_bit_probability(s.work, n) for s in line.states]
    )

    rng = np.random.default_rng(seed)
    taus = rng.uniform(0.0, tau_max, size=samples) if tau_max > 0 else np.zeros(samples)

    lam, phi = spectrum(n_states)
    weighted = np.exp(-1j * np.outer(lam, taus)) * phi[:, 0][:, None]
    # keep everything real and contiguous so BLAS does the heavy lifting
    amp_re = phi.T @ np.ascontiguousarray(weighted.real)
    amp_im = phi.T @ np.ascontiguousarray(weighted.imag)
    probs = amp_re**2 + amp_im**2  # (n_states, samples)

    p_bullet = succ_mask @ probs
    p_out1 = (succ_mask * p_one) @ probs
    total_bullet = float(p_bullet.mean())
    total_out1 = float(p_out1.mean())
    conditional = total_out1 / total_bullet if total_bullet > 0 else float("nan")
    return {
        "estimate": total_bullet,
        "conditional_output_one": conditional,
        "trace": [
            (float(t), float(pb), float(po))
            for t, pb, po in zip(taus, p_bullet, p_out1)
        ],
        "n_states": n_states,
        "readout_site": line.layout.readout_site,
        "tau_max": tau_max,
        "samples": samples,
        "seed": seed,
        "rng": "numpy PCG64",
    }
