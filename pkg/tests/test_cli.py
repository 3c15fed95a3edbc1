import json
from pathlib import Path

import pytest

from quditchain import cli

DATA = Path(__file__).parent / "data"


def run(args):
    return cli.main(args)


def test_walk_writes_trace_and_summary(tmp_path, capsys):
    out = tmp_path / "walk.csv"
    assert run(["walk", "--out", str(out)]) == 0
    text = out.read_text()
    assert text.startswith("# experiment=walk-convergence")
    assert "length,tau_factor,tau_max,tv" in text
    summary = json.loads((tmp_path / "walk.csv.summary.json").read_text())
    assert "tv_slope_at_largest_factor" in summary
    # larger windows shrink the distance to the limit
    rows = [line.split(",") for line in text.splitlines() if line[0].isdigit()]
    first_length = [r for r in rows if r[0] == rows[0][0]]
    tvs = [float(r[3]) for r in first_length]
    assert tvs[-1] < tvs[0]


def test_simulate10_runs_exact_mode(tmp_path):
    out = tmp_path / "sim10.csv"
    code = run(
        [
            "simulate10",
            "--circuit", str(DATA / "minimal.json"),
            "--f", "4",
            "--samples", "10",
            "--seed", "3",
            "--out", str(out),
        ]
    )
    assert code == 0
    text = out.read_text()
    assert "tau,p_done,sigma_z" in text
    summary = json.loads((tmp_path / "sim10.csv.summary.json").read_text())
    assert summary["mode"] == "exact"
    assert 0.0 <= summary["p_done"] <= 1.0


def test_simulate10_falls_back_to_free_mode(tmp_path):
    out = tmp_path / "sim10f.csv"
    code = run(
        [
            "simulate10",
            "--circuit", str(DATA / "fig1a.json"),
            "--f", "22",
            "--samples", "5",
            "--seed", "3",
            "--out", str(out),
        ]
    )
    assert code == 0
    summary = json.loads((tmp_path / "sim10f.csv.summary.json").read_text())
    assert summary["mode"] == "free"
    assert 0.0 <= summary["p_done"] <= 1.0


def test_simulate20_summary(tmp_path):
    out = tmp_path / "sim20.csv"
    code = run(
        [
            "simulate20",
            "--circuit", str(DATA / "minimal.json"),
            "--samples", "30",
            "--seed", "3",
            "--out", str(out),
        ]
    )
    assert code == 0
    assert "tau,p_bullet,p_out1" in out.read_text()
    summary = json.loads((tmp_path / "sim20.csv.summary.json").read_text())
    assert summary["readout_site"] == 32
    assert 0.0 <= summary["p_bullet"] <= 1.0


def test_fermion_trace(tmp_path):
    out = tmp_path / "fermion.csv"
    code = run(
        [
            "fermion",
            "--circuit", str(DATA / "minimal.json"),
            "--f", "4",
            "--samples", "10",
            "--seed", "3",
            "--out", str(out),
        ]
    )
    assert code == 0
    assert "tau,E_X,p_success" in out.read_text()


def test_reruns_are_byte_identical(tmp_path):
    args = [
        "simulate10",
        "--circuit", str(DATA / "minimal.json"),
        "--f", "4",
        "--samples", "10",
        "--seed", "9",
    ]
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    assert run(args + ["--out", str(first)]) == 0
    assert run(args + ["--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    assert (tmp_path / "a.csv.summary.json").read_bytes() == (
        tmp_path / "b.csv.summary.json"
    ).read_bytes()


def test_missing_circuit_file_fails_cleanly(tmp_path, capsys):
    code = run(["simulate10", "--circuit", str(tmp_path / "nope.json")])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_malformed_circuit_fails_cleanly(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n_qubits": 2, "rounds": [["Q"]]}')
    code = run(["simulate10", "--circuit", str(bad)])
    assert code == 2
    assert "error:" in capsys.readouterr().err
