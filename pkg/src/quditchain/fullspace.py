"""Unrestricted chain Hamiltonians on the full many-qudit space.

Both chain constructions are defined by one translation-invariant
nearest-neighbor bond operator: d = 10 sites are a 5-state program register
over a data qubit, d = 20 sites a 10-state program register over a data
qubit.  This module builds H = -sum_i (R + R*)_{i,i+1} literally, as a
sparse matrix on the full d^L-dimensional space, with no reference to the
reachable-subspace machinery.  It is the independent oracle that the
restricted simulators are checked against: embedded reachable states must
span an invariant subspace (zero leakage), the restriction of H to that
subspace must reproduce the restricted Hamiltonian exactly, and full-space
time evolution must agree with restricted evolution.

Exponential scaling is the point here, so hard size guards keep usage to
the deliberately tiny verification instances.
"""
from __future__ import annotations

from typing import Iterable, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .circuits import GATE_MATRICES, basis_state
from .hopping import (
    ChainSpec,
    RestrictedChain,
    SizeGuardError,
    applied_gate_count,
    prefix_work_states,
    program_register,
)
from . import hopping
from . import shuttle
from .shuttle import ShuttleState, StateLine

# program symbol -> index; site digit = 2 * program_index + data_bit
PROGRAM_10 = (hopping.EMPTY, hopping.POINTER, "W", "S", "I")
PROGRAM_20 = (
    shuttle.EMPTY,
    "W",
    "S",
    "I",
    "w",
    "s",
    "i",
    shuttle.APPLY,
    shuttle.SHIFT,
    shuttle.TURN,
)

DEFAULT_GUARD_10 = 2 * 10**5
# 20^5 = 3.2e6 already; the smallest usable d=20 instance needs this much
DEFAULT_GUARD_20 = 4 * 10**6


def _site_digit(symbols: tuple[str, ...], program: str, bit: int) -> int:
    return 2 * symbols.index(program) + bit


def _bond_entries_10():
    """Forward-hop matrix elements <new|R|old> on one bond, d = 10.

    A gate hops left past an empty site unchanged, or past a pointer while
    its unitary acts on the two data qubits below (left qubit = control).
    """
    entries = []
    for kind in ("W", "S", "I"):
        mat = GATE_MATRICES[kind]
        for d1 in (0, 1):
            for d2 in (0, 1):
                # empty crossing: data untouched
                entries.append(
                    (
                        (_site_digit(PROGRAM_10, kind, d1), _site_digit(PROGRAM_10, hopping.EMPTY, d2)),
                        (_site_digit(PROGRAM_10, hopping.EMPTY, d1), _site_digit(PROGRAM_10, kind, d2)),
                        1.0,
                    )
                )
                # pointer crossing: gate acts on (d1, d2)
                for e1 in (0, 1):
                    for e2 in (0, 1):
                        amp = mat[2 * e1 + e2, 2 * d1 + d2]
                        if amp != 0:
                            entries.append(
                                (
                                    (_site_digit(PROGRAM_10, kind, e1), _site_digit(PROGRAM_10, hopping.POINTER, e2)),
                                    (_site_digit(PROGRAM_10, hopping.POINTER, d1), _site_digit(PROGRAM_10, kind, d2)),
                                    amp,
                                )
                            )
    return entries


def _bond_entries_20(condition_site: str = "right"):
    """Forward matrix elements <new|R|old> on one bond, d = 20.

    `condition_site` selects which data qubit the turn-around transitions
    condition on: "right" (the bit under the adjacent empty symbol, the
    convention under which the line dynamics is deterministic) or "left"
    (under the active symbol itself).  The "left" variant is kept only so
    tests can demonstrate that the verification machinery rejects it.
    """
    if condition_site not in ("right", "left"):
        raise ValueError("condition_site must be 'right' or 'left'")
    sym = PROGRAM_20
    entries = []

    def add(p1_new, p2_new, p1_old, p2_old, data_map):
        """data_map: list of ((e1, e2), (d1, d2), amp)."""
        for (e1, e2), (d1, d2), amp in data_map:
            entries.append(
                (
                    (_site_digit(sym, p1_new, e1), _site_digit(sym, p2_new, e2)),
                    (_site_digit(sym, p1_old, d1), _site_digit(sym, p2_old, d2)),
                    amp,
                )
            )

    identity_data = [((d1, d2), (d1, d2), 1.0) for d1 in (0, 1) for d2 in (0, 1)]

    def projected_data(bit):
        if condition_site == "right":
            return [((d1, bit), (d1, bit), 1.0) for d1 in (0, 1)]
        return [((bit, d2), (bit, d2), 1.0) for d2 in (0, 1)]

    for kind in ("W", "S", "I"):
        marked = shuttle.MARKED[kind]
        # 1: start a marking pass at the turn-around symbol
        add(marked, shuttle.EMPTY, kind, shuttle.TURN, identity_data)
        # 2: carry the mark one gate to the left (any neighbor gate kind)
        for other in ("W", "S", "I"):
            add(marked, other, kind, shuttle.MARKED[other], identity_data)
        # 3: mark reaches the front, becomes the turn-around
        add(shuttle.TURN, kind, shuttle.EMPTY, marked, identity_data)
        # 5a: apply symbol swaps right through a gate, executing it
        mat = GATE_MATRICES[kind]
        gate_data = []
        for d1 in (0, 1):
            for d2 in (0, 1):
                for e1 in (0, 1):
                    for e2 in (0, 1):
                        amp = mat[2 * e1 + e2, 2 * d1 + d2]
                        if amp != 0:
                            gate_data.append(((e1, e2), (d1, d2), amp))
        add(kind, shuttle.APPLY, shuttle.APPLY, kind, gate_data)
        # 5b: shift symbol swaps right through a gate
        add(kind, shuttle.SHIFT, shuttle.SHIFT, kind, identity_data)
    # 4a/4b: turn-around turns into apply (marker bit 1) or shift (bit 0)
    add(shuttle.EMPTY, shuttle.APPLY, shuttle.EMPTY, shuttle.TURN, projected_data(1))
    add(shuttle.EMPTY, shuttle.SHIFT, shuttle.EMPTY, shuttle.TURN, projected_data(0))
    # 6a/6b: apply/shift symbol reaches the back, becomes the turn-around
    add(shuttle.TURN, shuttle.EMPTY, shuttle.APPLY, shuttle.EMPTY, projected_data(1))
    add(shuttle.TURN, shuttle.EMPTY, shuttle.SHIFT, shuttle.EMPTY, projected_data(0))
    return entries


def _bond_operator(entries, local_dim: int) -> sp.csr_matrix:
    """-(R + R*) on one bond from the forward entries of R."""
    d2 = local_dim * local_dim
    rows, cols, vals = [], [], []
    for (n1, n2), (o1, o2), amp in entries:
        rows.append(n1 * local_dim + n2)
        cols.append(o1 * local_dim + o2)
        vals.append(amp)
    r = sp.coo_matrix((vals, (rows, cols)), shape=(d2, d2)).tocsr()
    return (-(r + r.conj().T)).tocsr()


def bond_operator_10() -> sp.csr_matrix:
    return _bond_operator(_bond_entries_10(), 10)


def bond_operator_20(condition_site: str = "right") -> sp.csr_matrix:
    return _bond_operator(_bond_entries_20(condition_site), 20)


def _check_dim(local_dim: int, length: int, guard: int) -> int:
    dim = local_dim**length
    if dim > guard:
        raise SizeGuardError(
            f"{local_dim}^{length} = {dim} exceeds full-space guard {guard}"
        )
    return dim


def _chain_hamiltonian(bond: sp.spmatrix, local_dim: int, length: int) -> sp.csr_matrix:
    dim = local_dim**length
    h = sp.csr_matrix((dim, dim), dtype=bond.dtype)
    for i in range(length - 1):
        left = sp.identity(local_dim**i, format="csr")
        right = sp.identity(local_dim ** (length - i - 2), format="csr")
        h = h + sp.kron(sp.kron(left, bond, format="csr"), right, format="csr")
    return h.tocsr()


def full_hamiltonian_10(length: int, guard: int = DEFAULT_GUARD_10) -> sp.csr_matrix:
    _check_dim(10, length, guard)
    return _chain_hamiltonian(bond_operator_10(), 10, length)


def full_hamiltonian_20(
    length: int, guard: int = DEFAULT_GUARD_20, condition_site: str = "right"
) -> sp.csr_matrix:
    _check_dim(20, length, guard)
    return _chain_hamiltonian(bond_operator_20(condition_site), 20, length)


# ---------------------------------------------------------------------------
# embeddings of restricted states into the full space
# ---------------------------------------------------------------------------

def _embed(
    local_dim: int,
    symbols: tuple[str, ...],
    program: tuple[str, ...],
    fixed_bits: dict[int, int],
    work_sites: tuple[int, ...],
    work: np.ndarray,
) -> np.ndarray:
    """Full-space vector for a program register with classical bits at
    `fixed_bits` (1-based site -> bit) and the work register spread over
    `work_sites` in order."""
    length = len(program)
    dim = local_dim**length
    weight = [local_dim ** (length - p) for p in range(1, length + 1)]
    base = 0
    for p in range(1, length + 1):
        bit = fixed_bits.get(p, 0)
        base += _site_digit(symbols, program[p - 1], bit) * weight[p - 1]
    vec = np.zeros(dim, dtype=complex)
    n = len(work_sites)
    for idx in range(work.size):
        if work[idx] == 0:
            continue
        offset = 0
        for q, site in enumerate(work_sites, start=1):
            bit = (idx >> (n - q)) & 1
            offset += bit * weight[site - 1]
        vec[base + offset] += work[idx]
    return vec


def embed_gate_configuration(
    spec: ChainSpec, positions, guard: int = DEFAULT_GUARD_10
) -> np.ndarray:
    """d = 10 basis state for one gate-position configuration.

    The program register is reconstructed from the positions; the work data
    qubits carry the prefix state dictated by the applied-gate count, all
    other data qubits are 0.
    """
    _check_dim(10, spec.length, guard)
    register = program_register(spec, positions)
    work = prefix_work_states(spec)[applied_gate_count(spec, positions)]
    work_sites = tuple(spec.work_offset + n for n in range(1, spec.n_qubits + 1))
    return _embed(10, PROGRAM_10, register, {}, work_sites, np.asarray(work))


def restricted_embedding_10(
    chain: RestrictedChain, guard: int = DEFAULT_GUARD_10
) -> np.ndarray:
    """Columns: every reachable-basis state embedded in the full space."""
    cols = [
        embed_gate_configuration(chain.spec, cfg, guard) for cfg in chain.sector.basis
    ]
    return np.column_stack(cols)


def embed_shuttle_state(state: ShuttleState, guard: int = DEFAULT_GUARD_20) -> np.ndarray:
    layout = state.layout
    _check_dim(20, layout.length, guard)
    fixed = {site: 1 for site in layout.marker_sites}
    work_sites = tuple(layout.work_offset + n for n in range(1, layout.n_qubits + 1))
    return _embed(20, PROGRAM_20, state.program, fixed, work_sites, state.work)


def line_embedding_20(line: StateLine, guard: int = DEFAULT_GUARD_20) -> np.ndarray:
    return np.column_stack([embed_shuttle_state(s, guard) for s in line.states])


# ---------------------------------------------------------------------------
# verification against the restricted dynamics
# ---------------------------------------------------------------------------

def subspace_leakage(h_full: sp.spmatrix, embedding: np.ndarray) -> float:
    """max over basis columns v of || (1 - P) H v ||, P projecting onto the
    embedded subspace.  Zero iff the subspace is invariant under H."""
    hv = h_full @ embedding
    residual = hv - embedding @ (embedding.conj().T @ hv)
    return float(np.max(np.linalg.norm(residual, axis=0)))


def restriction_matrix(h_full: sp.spmatrix, embedding: np.ndarray) -> np.ndarray:
    """V* H V: the full Hamiltonian compressed to the embedded basis."""
    return embedding.conj().T @ (h_full @ embedding)


def evolution_deviation(
    h_full: sp.spmatrix,
    embedding: np.ndarray,
    restricted_amplitudes_by_tau: dict[float, np.ndarray],
    initial_index: int,
) -> float:
    """max over tau of || full-space evolution - embedded restricted evolution ||.

    Full-space evolution uses Krylov exponentiation on the sparse H; the
    restricted amplitudes come from the caller's (independent) simulator.
    """
    start = embedding[:, initial_index]
    worst = 0.0
    for tau, amps in restricted_amplitudes_by_tau.items():
        full = expm_multiply(-1j * float(tau) * h_full.astype(complex), start)
        worst = max(worst, float(np.linalg.norm(full - embedding @ amps)))
    return worst


def verify_chain_10(
    spec: ChainSpec,
    taus: Iterable[float],
    guard: int = DEFAULT_GUARD_10,
) -> dict:
    """Full verification bundle for a d = 10 instance small enough to afford.

    Returns leakage, the worst elementwise deviation of V*HV from the
    restricted hopping Hamiltonian, and the evolution deviation over `taus`.
    """
    chain = RestrictedChain(spec)
    h_full = full_hamiltonian_10(spec.length, guard)
    v = restricted_embedding_10(chain, guard)
    restriction = restriction_matrix(h_full, v)
    amps = {float(t): chain.evolve(float(t)) for t in taus}
    return {
        "dim_full": h_full.shape[0],
        "dim_restricted": chain.dim,
        "leakage": subspace_leakage(h_full, v),
        "restriction_error": float(
            np.max(np.abs(restriction - chain.hamiltonian()))
        ),
        "evolution_deviation": evolution_deviation(
            h_full, v, amps, chain.initial_index
        ),
    }


def verify_line_20(
    line: StateLine,
    taus: Iterable[float],
    guard: int = DEFAULT_GUARD_20,
    condition_site: str = "right",
) -> dict:
    """Same bundle for a d = 20 line; restricted evolution is the walk on
    the tridiagonal line Hamiltonian."""
    layout = line.layout
    h_full = full_hamiltonian_20(layout.length, guard, condition_site)
    v = line_embedding_20(line, guard)
    h_line = shuttle.line_hamiltonian(line)
    lam, modes = np.linalg.eigh(h_line)
    amps = {}
    for tau in taus:
        phases = np.exp(-1j * lam * float(tau))
        amps[float(tau)] = modes @ (phases * modes[0, :].conj())
    return {
        "dim_full": h_full.shape[0],
        "dim_restricted": len(line.states),
        "leakage": subspace_leakage(h_full, v),
        "restriction_error": float(np.max(np.abs(restriction_matrix(h_full, v) - h_line))),
        "evolution_deviation": evolution_deviation(h_full, v, amps, 0),
    }
