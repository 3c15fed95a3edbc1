"""Acceptance gate: the end-to-end claims the package is built around.

Each test covers one numbered claim, prints exactly one PASS/FAIL line and
pins its tolerance in the assertion.  Expected values are either exact small
cases, independently frozen checkpoints, or cross-checks between two
independent implementations -- never tuned to the code under test.
"""
import math
import time
from pathlib import Path

import numpy as np
import pytest

from quditchain import cli, fermions, fullspace, hopping, shuttle, walk
from quditchain.circuits import (
    Circuit,
    basis_state,
    output_bit_probability,
    simulate_circuit,
)

DATA = Path(__file__).parent / "data"
FIG_CIRCUIT = Circuit(3, (("W", "S"), ("S", "W")))


def _report(number: int, name: str):
    class Reporter:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            verdict = "PASS" if exc_type is None else "FAIL"
            print(f"[PRIMARY {number}] {name}: {verdict}")
            return False

    return Reporter()


@pytest.fixture(scope="module")
def fig_line():
    return shuttle.generate_line(shuttle.build_initial_state(FIG_CIRCUIT, (1, 0, 0)))


@pytest.fixture(scope="module")
def padded_fig_line():
    return shuttle.generate_line(
        shuttle.build_initial_state(FIG_CIRCUIT, (1, 0, 0), pad=True)
    )


def test_01_walk_limiting_distribution():
    with _report(1, "path-walk limiting distribution"):
        assert np.allclose(
            walk.limiting_distribution(3, 1), [3 / 8, 1 / 4, 3 / 8], atol=1e-15
        )
        start = time.perf_counter()
        p_bar = walk.averaged_distribution(51, 1, 1e4)
        tv = walk.total_variation(p_bar, walk.limiting_distribution(51, 1))
        elapsed = time.perf_counter() - start
        assert tv <= 0.02
        assert elapsed < 1.0


def test_02_walk_tail_at_length_1001():
    with _report(2, "long-chain tail probability"):
        length = 1001
        tau_max = 10.0 * length * math.log(length)
        start = time.perf_counter()
        tail = walk.tail_success_probability(length, 1, tau_max)
        elapsed = time.perf_counter() - start
        assert tail >= 5 / 6 - 0.05
        assert elapsed < 30.0


def test_03_fermion_block_statistics():
    with _report(3, "free-particle block statistics at f=22"):
        block = fermions.FermionBlock.right_block(22, 5)
        assert block.length == 120
        tau_max = 10.0 * block.length * math.log(block.length)
        start = time.perf_counter()
        averaged = fermions.averaged_region_count(block, tau_max)
        bulk = 2 * 5 * 22 / 24  # 2M f/(f+2)
        assert abs(averaged - bulk) <= 0.5
        result = fermions.sampled_region_success(
            block, tau_max, threshold=5, samples=2000, seed=7
        )
        elapsed = time.perf_counter() - start
        assert result["estimate"] >= 5 / 6 - 0.05
        assert elapsed < 120.0


def test_04_counting_statistics_against_many_body_oracle():
    with _report(4, "counting statistics vs many-body evolution"):
        block = fermions.FermionBlock(8, (5, 6, 7, 8), (1, 4))
        for tau in (0.3, 1.7, 6.0):
            free = fermions.region_count_distribution(block, tau)
            brute = hopping.hopping_counting_distribution(8, (5, 6, 7, 8), (1, 4), tau)
            assert np.max(np.abs(free - brute)) <= 1e-8


def test_05_gate_hopping_chain_vs_full_space():
    with _report(5, "gate-hopping chain vs unrestricted Hamiltonian"):
        spec = hopping.ChainSpec(Circuit(2, (("W",),)), (1, 0))
        report = fullspace.verify_chain_10(spec, taus=[0.5, 1.0, 2.0, 5.0])
        assert report["dim_full"] == 10**4
        assert report["dim_restricted"] == 6
        assert report["leakage"] <= 1e-12
        assert report["restriction_error"] <= 1e-12
        assert report["evolution_deviation"] <= 1e-8


def test_06_shuttle_line_dynamics(fig_line):
    with _report(6, "program-shuttle line dynamics"):
        assert fig_line.final_index == 93
        assert "".join(fig_line.states[12].program) == ".....IWSAIISW."
        assert "".join(fig_line.states[93].program) == "TIWSIISW......"
        reference = simulate_circuit(FIG_CIRCUIT, basis_state((1, 0, 0)))
        fidelity = abs(np.vdot(reference, fig_line.states[-1].work)) ** 2
        assert fidelity >= 1 - 1e-10
        assert shuttle.step_backward(fig_line.states[0]) is None
        assert shuttle.step_forward(fig_line.states[-1]) is None
        for t in range(1, len(fig_line.states)):
            prev = shuttle.step_backward(fig_line.states[t])
            assert prev is not None
            assert prev.same_configuration(fig_line.states[t - 1])
        size = fig_line.final_index + 1
        assert np.array_equal(
            shuttle.line_hamiltonian(fig_line),
            -(np.eye(size, k=1) + np.eye(size, k=-1)),
        )


def test_07_shuttle_readout(padded_fig_line):
    with _report(7, "program-shuttle readout statistics"):
        line = padded_fig_line
        n_states = line.final_index + 1
        assert n_states == 4414
        tau_max = 10.0 * n_states * math.log(n_states)
        result = shuttle.readout(line, tau_max, samples=1000, seed=7)
        assert result["estimate"] >= 0.78
        direct = output_bit_probability(
            simulate_circuit(line.layout.circuit, basis_state((1, 0, 0))), 3
        )
        assert abs(result["conditional_output_one"] - direct) <= 1e-8


def test_08_sigma_z_sign_tracks_circuit_output():
    with _report(8, "output-spin sign vs circuit output"):
        for bits, expected_sign in (((1, 0), 1.0), ((0, 1), -1.0)):
            spec = hopping.ChainSpec(Circuit(2, (("S",),)), bits, padding_factor=6)
            chain = hopping.RestrictedChain(spec)
            tau_max = 10.0 * spec.length * math.log(spec.length)
            taus = np.random.default_rng(7).uniform(0.0, tau_max, size=40)
            qualified = 0
            for tau in taus:
                if chain.success_probability(float(tau)) > 0.5:
                    qualified += 1
                    sigma = chain.sigma_z_expectation(float(tau))
                    assert math.copysign(1.0, sigma) == expected_sign
            assert qualified > 0


def test_09_reruns_are_byte_identical(tmp_path):
    with _report(9, "byte-identical reruns"):
        runs = [
            ["walk"],
            [
                "simulate10",
                "--circuit", str(DATA / "minimal.json"),
                "--f", "4",
                "--samples", "15",
                "--seed", "13",
            ],
            [
                "simulate20",
                "--circuit", str(DATA / "minimal.json"),
                "--samples", "15",
                "--seed", "13",
            ],
        ]
        for k, args in enumerate(runs):
            first = tmp_path / f"run{k}a.csv"
            second = tmp_path / f"run{k}b.csv"
            assert cli.main(args + ["--out", str(first)]) == 0
            assert cli.main(args + ["--out", str(second)]) == 0
            assert first.read_bytes() == second.read_bytes()
            assert (tmp_path / f"run{k}a.csv.summary.json").read_bytes() == (
                tmp_path / f"run{k}b.csv.summary.json"
            ).read_bytes()
