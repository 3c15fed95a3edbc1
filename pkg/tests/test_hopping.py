import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quditchain.circuits import Circuit, basis_state
from quditchain.hopping import (
    ChainSpec,
    ConfigurationError,
    HoppingSector,
    RestrictedChain,
    SizeGuardError,
    apply_move,
    applied_gate_count,
    gate_moves,
    hop_moves,
    hopping_counting_distribution,
    initial_gate_positions,
    prefix_work_states,
    program_register,
    rank_positions,
    unrank_positions,
)
from quditchain.walk import propagator_column

FIG_CIRCUIT = Circuit(3, (("W", "S"), ("S", "W")))


def test_rank_matches_combinations_order():
    length, count = 7, 3
    for rank, combo in enumerate(itertools.combinations(range(1, length + 1), count)):
        assert rank_positions(combo, length) == rank
        assert unrank_positions(rank, length, count) == combo


@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_rank_unrank_roundtrip(data):
    length = data.draw(st.integers(1, 30))
    count = data.draw(st.integers(1, length))
    positions = tuple(
        sorted(
            data.draw(
                st.sets(st.integers(1, length), min_size=count, max_size=count)
            )
        )
    )
    assert unrank_positions(rank_positions(positions, length), length, count) == positions


def test_hop_moves_example():
    # gates on sites 2 and 4 of a 4-site chain: three legal hops
    moves = hop_moves((2, 4), 4)
    assert sorted(moves) == [(1, -1), (1, 1), (2, -1)]
    assert apply_move((2, 4), (1, -1)) == (1, 4)


def test_sector_hamiltonian_structure():
    sector = HoppingSector(5, 2)
    h = sector.hamiltonian()
    assert np.allclose(h, h.T)
    assert set(np.unique(h)) <= {0.0, -1.0}
    # each row has one -1 per legal hop
    for i, cfg in enumerate(sector.basis):
        assert -h[i].sum() == len(hop_moves(cfg, 5))


def test_single_particle_sector_is_path_walk():
    sector = HoppingSector(8, 1)
    amps = sector.evolve(sector.point_state((3,)), 1.9)
    assert np.allclose(amps, propagator_column(8, 1.9, 3), atol=1e-12)


def test_evolution_is_unitary_and_reversible():
    sector = HoppingSector(6, 3)
    amps = sector.evolve(sector.point_state((4, 5, 6)), 2.4)
    assert np.linalg.norm(amps) == pytest.approx(1.0, abs=1e-12)
    back = sector.evolve(amps.conj(), 2.4).conj()
    assert np.allclose(back, sector.point_state((4, 5, 6)), atol=1e-10)


def test_size_guard():
    with pytest.raises(SizeGuardError):
        HoppingSector(60, 30)


def test_counting_distribution_normalized():
    pmf = hopping_counting_distribution(6, (4, 5, 6), (1, 3), 1.2)
    assert pmf.sum() == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# chain layer
# ---------------------------------------------------------------------------

def test_unpadded_layout():
    spec = ChainSpec(FIG_CIRCUIT, (1, 0, 0))
    assert (spec.length, spec.gate_count, spec.work_offset) == (12, 6, 6)
    assert initial_gate_positions(spec) == (7, 8, 9, 10, 11, 12)
    assert spec.fill_symbols() == (".", ".", "*", ".", ".", "*")
    assert program_register(spec, initial_gate_positions(spec)) == (
        ".", ".", "*", ".", ".", "*", "I", "W", "S", "I", "S", "W",
    )


def test_padded_layout():
    spec = ChainSpec(FIG_CIRCUIT, (1, 0, 0), padding_factor=4)
    assert (spec.length, spec.gate_count, spec.work_offset) == (36, 12, 24)
    entries = spec.program_entries()
    assert [k for k, _ in entries] == list("IWSISW") + ["I"] * 6
    assert spec.fill_symbols() == (".", ".", "*") * 8


def test_prefix_rule_boundary_cases():
    spec = ChainSpec(FIG_CIRCUIT, (1, 0, 0))
    assert applied_gate_count(spec, initial_gate_positions(spec)) == 0
    # all gates past the work region: both pointers now sit right of it
    assert applied_gate_count(spec, (1, 2, 3, 4, 5, 6)) == 6


def test_prefix_rule_total_on_every_configuration():
    # the fill ordering makes a second pointer over the work window
    # geometrically impossible, so the prefix is defined everywhere
    spec = ChainSpec(Circuit(2, (("W",),)), (1, 0), padding_factor=2)
    chain = RestrictedChain(spec)
    m = spec.real_gates
    for cfg in chain.sector.basis:
        prefix = applied_gate_count(spec, cfg)
        assert 0 <= prefix <= spec.gate_count
        # once the last real gate cleared the work region, it is applied
        if cfg[m - 1] <= spec.padding_factor * m:
            assert prefix >= m


def test_prefix_work_states_cumulative():
    spec = ChainSpec(Circuit(2, (("S",),)), (1, 0))
    states = prefix_work_states(spec)
    assert len(states) == 3  # input, after leading I, after S
    assert np.allclose(states[0], basis_state((1, 0)))
    assert np.allclose(states[1], basis_state((1, 0)))
    assert np.allclose(states[2], basis_state((0, 1)))


def test_prefix_changes_by_at_most_one_hop():
    spec = ChainSpec(Circuit(2, (("W",),)), (1, 0), padding_factor=4)
    chain = RestrictedChain(spec)
    for cfg in chain.sector.basis:
        try:
            before = applied_gate_count(spec, cfg)
        except ConfigurationError:
            continue
        for move in gate_moves(spec, cfg):
            try:
                after = applied_gate_count(spec, apply_move(cfg, move))
            except ConfigurationError:
                continue
            assert abs(after - before) <= 1


def test_restricted_chain_probabilities():
    spec = ChainSpec(Circuit(2, (("S",),)), (1, 0), padding_factor=2)
    chain = RestrictedChain(spec)
    assert chain.dim == 70
    assert chain.success_probability(0.0) == pytest.approx(0.0, abs=1e-12)
    p = chain.success_probability(37.0)
    assert 0.0 <= p <= 1.0
    pmf = chain.region_count_distribution(37.0)
    assert pmf.sum() == pytest.approx(1.0, abs=1e-10)
    # done set == at least M gates in the left region
    m = spec.real_gates
    assert chain.success_probability(37.0) == pytest.approx(
        pmf[m:].sum(), abs=1e-10
    )


def test_sigma_z_tracks_deterministic_swap():
    spec = ChainSpec(Circuit(2, (("S",),)), (1, 0), padding_factor=2)
    chain = RestrictedChain(spec)
    # initially nothing applied: output qubit reads 0
    assert chain.sigma_z_expectation(0.0) == pytest.approx(-1.0, abs=1e-12)


def test_energy_conserved():
    spec = ChainSpec(Circuit(2, (("W",),)), (0, 1), padding_factor=2)
    chain = RestrictedChain(spec)
    e0 = chain.energy(chain.initial_amplitudes())
    assert chain.energy(chain.evolve(11.3)) == pytest.approx(e0, abs=1e-10)
