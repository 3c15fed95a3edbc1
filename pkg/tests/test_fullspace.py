import numpy as np
import pytest

from quditchain.circuits import Circuit
from quditchain.fullspace import (
    bond_operator_10,
    bond_operator_20,
    embed_gate_configuration,
    embed_shuttle_state,
    full_hamiltonian_10,
    full_hamiltonian_20,
    restricted_embedding_10,
    restriction_matrix,
    subspace_leakage,
    verify_chain_10,
    verify_line_20,
)
from quditchain.hopping import ChainSpec, RestrictedChain, SizeGuardError
from quditchain.shuttle import build_initial_state, generate_line

MINIMAL = Circuit(2, (("W",),))


def test_bond_operators_hermitian():
    for bond in (bond_operator_10(), bond_operator_20()):
        dense = bond.toarray()
        assert np.allclose(dense, dense.conj().T, atol=1e-15)


def test_size_guards():
    with pytest.raises(SizeGuardError):
        full_hamiltonian_10(12)
    with pytest.raises(SizeGuardError):
        full_hamiltonian_20(8)


def test_embedded_states_are_normalized():
    spec = ChainSpec(MINIMAL, (1, 0))
    chain = RestrictedChain(spec)
    for cfg in chain.sector.basis:
        vec = embed_gate_configuration(spec, cfg)
        assert np.linalg.norm(vec) == pytest.approx(1.0, abs=1e-12)
    state = build_initial_state(MINIMAL, (1, 0))
    assert np.linalg.norm(embed_shuttle_state(state)) == pytest.approx(1.0, abs=1e-12)


def test_chain_10_verification():
    report = verify_chain_10(ChainSpec(MINIMAL, (1, 0)), taus=[0.5, 2.0])
    assert report["dim_full"] == 10**4
    assert report["dim_restricted"] == 6
    assert report["leakage"] < 1e-12
    assert report["restriction_error"] < 1e-12
    assert report["evolution_deviation"] < 1e-8


def test_chain_10_verification_with_gate_applied_inside():
    # a W actually fires on a nontrivial work state during this evolution
    spec = ChainSpec(Circuit(2, (("W",),)), (1, 1))
    report = verify_chain_10(spec, taus=[1.0, 3.0])
    assert report["leakage"] < 1e-12
    assert report["evolution_deviation"] < 1e-8


@pytest.fixture(scope="module")
def minimal_line():
    return generate_line(build_initial_state(MINIMAL, (1, 0)))


def test_line_20_verification(minimal_line):
    report = verify_line_20(minimal_line, taus=[0.5, 2.0])
    assert report["dim_full"] == 20**5
    assert report["dim_restricted"] == 11
    assert report["leakage"] < 1e-12
    assert report["restriction_error"] < 1e-12
    assert report["evolution_deviation"] < 1e-8


def test_wrong_condition_site_is_rejected(minimal_line):
    # conditioning the turn-around on the bit under the active symbol breaks
    # invariance of the line subspace; the verifier must see it
    report = verify_line_20(minimal_line, taus=[], condition_site="left")
    assert report["leakage"] > 0.5
    assert report["restriction_error"] > 0.5


def test_restriction_matrix_matches_restricted_hamiltonian():
    spec = ChainSpec(MINIMAL, (0, 1))
    chain = RestrictedChain(spec)
    h_full = full_hamiltonian_10(spec.length)
    v = restricted_embedding_10(chain)
    assert subspace_leakage(h_full, v) < 1e-12
    assert np.allclose(restriction_matrix(h_full, v), chain.hamiltonian(), atol=1e-12)
