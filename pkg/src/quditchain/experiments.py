"""Experiment drivers behind the command-line interface.

Every run is a pure function of its arguments: random times come from a
seeded numpy PCG64 generator, output rows are formatted with a fixed float
format, and summaries are JSON with sorted keys -- re-running a command with
the same arguments reproduces the output files byte for byte.  No renderer
lives here; the emitted CSV/JSON is the deliverable.
"""
from __future__ import annotations

import io
import json
import math
from importlib import resources

import numpy as np

from . import fermions, fullspace, hopping, shuttle, walk
from .circuits import Circuit, output_bit_probability

FLOAT_FORMAT = "{:.12g}"


def load_defaults() -> dict:
    with resources.files(__package__).joinpath("defaults.json").open("r") as fh:
        return json.load(fh)


def load_circuit_file(path) -> tuple[Circuit, tuple[int, ...]]:
    """Circuit JSON plus an optional "input" bit list (default all zeros)."""
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    circuit = Circuit.from_json(json.dumps(obj))
    bits = tuple(int(b) for b in obj.get("input", [0] * circuit.n_qubits))
    if len(bits) != circuit.n_qubits:
        raise ValueError("input bit list does not match circuit width")
    return circuit, bits


def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return FLOAT_FORMAT.format(value)
    return str(value)


def render_csv(metadata: dict, header: tuple[str, ...], rows) -> str:
    """Delimited output: '# key=value' metadata lines, header, data rows."""
    buf = io.StringIO()
    for key in sorted(metadata):
        buf.write(f"# {key}={_fmt(metadata[key])}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def render_summary(summary: dict) -> str:
    return json.dumps(summary, sort_keys=True, indent=2) + "\n"


def default_tau_max(scale: int, tau_coefficient: float) -> float:
    """The standard averaging window: coefficient * scale * ln(scale)."""
    return tau_coefficient * scale * math.log(scale)


# ---------------------------------------------------------------------------
# simulate10: the gate-hopping chain, exact when affordable
# ---------------------------------------------------------------------------

def run_simulate10(
    circuit: Circuit,
    input_bits,
    padding_factor: int,
    tau_coefficient: float,
    samples: int,
    seed: int,
) -> dict:
    """Monte-Carlo success statistics of the padded gate-hopping chain.

    Exact mode (restricted many-body basis) reports both the done
    probability and the output-qubit <sigma_z>; when the basis would exceed
    the size guard the run falls back to the free-particle reduction, which
    yields the done probability only (sigma_z column is nan).
    """
    spec = hopping.ChainSpec(circuit, input_bits, padding_factor)
    tau_max = default_tau_max(spec.length, tau_coefficient)
    rng = np.random.default_rng(seed)
    taus = rng.uniform(0.0, tau_max, size=samples)
    try:
        chain = hopping.RestrictedChain(spec)
        mode = "exact"
    except hopping.SizeGuardError:
        chain = None
        mode = "free"
    rows = []
    if chain is not None:
        for tau in taus:
            rows.append(
                (
                    float(tau),
                    chain.success_probability(float(tau)),
                    chain.sigma_z_expectation(float(tau)),
                )
            )
    else:
        block = fermions.FermionBlock.right_block(padding_factor, spec.real_gates)
        for tau in taus:
            rows.append(
                (
                    float(tau),
                    fermions.region_count_success(block, float(tau), spec.real_gates),
                    float("nan"),
                )
            )
    p_done = float(np.mean([r[1] for r in rows]))
    sigma = float(np.mean([r[2] for r in rows])) if mode == "exact" else float("nan")
    metadata = {
        "chain": "d10",
        "mode": mode,
        "length": spec.length,
        "gates": spec.gate_count,
        "padding_factor": padding_factor,
        "tau_max": tau_max,
        "samples": samples,
        "seed": seed,
        "rng": "numpy PCG64",
    }
    summary = dict(metadata)
    summary.update(
        {
            "p_done": p_done,
            "sigma_z": sigma,
            "circuit": json.loads(circuit.to_json()),
            "input": list(input_bits),
        }
    )
    return {
        "metadata": metadata,
        "header": ("tau", "p_done", "sigma_z"),
        "rows": rows,
        "summary": summary,
        "ok": True,
    }


# ---------------------------------------------------------------------------
# simulate20: the program-shuttle chain
# ---------------------------------------------------------------------------

def run_simulate20(
    circuit: Circuit,
    input_bits,
    tau_coefficient: float,
    samples: int,
    seed: int,
) -> dict:
    """Readout statistics of the padded program-shuttle line walk.

    p_bullet is the probability the readout program site is already empty;
    p_out1 the joint probability of that event and output bit 1.
    """
    line = shuttle.generate_line(shuttle.build_initial_state(circuit, input_bits, pad=True))
    n_states = line.final_index + 1
    tau_max = default_tau_max(n_states, tau_coefficient)
    result = shuttle.readout(line, tau_max, samples, seed)
    direct = output_bit_probability(
        shuttle.final_work_reference(line, input_bits), circuit.n_qubits
    )
    metadata = {
        "chain": "d20",
        "length": line.layout.length,
        "line_states": n_states,
        "readout_site": line.layout.readout_site,
        "tau_max": tau_max,
        "samples": samples,
        "seed": seed,
        "rng": "numpy PCG64",
    }
    summary = dict(metadata)
    summary.update(
        {
            "p_bullet": result["estimate"],
            "p_out1_given_bullet": result["conditional_output_one"],
            "p_out1_direct": direct,
            "circuit": json.loads(circuit.to_json()),
            "input": list(input_bits),
        }
    )
    return {
        "metadata": metadata,
        "header": ("tau", "p_bullet", "p_out1"),
        "rows": result["trace"],
        "summary": summary,
        "ok": True,
    }


# ---------------------------------------------------------------------------
# walk: convergence of the averaged path walk to its limiting distribution
# ---------------------------------------------------------------------------

def run_walk(lengths, tau_factors, tau_coefficient: float) -> dict:
    """Total-variation convergence sweep over chain lengths and windows.

    For each length L, the averaged distribution from the first site over
    tau_max = factor * coefficient * L ln L is compared with the limiting
    distribution.  The summary fits the decay exponent of TV against L at
    the largest factor.
    """
    rows = []
    tv_at_top = []
    top = max(tau_factors)
    for length in lengths:
        limit = walk.limiting_distribution(length, 1)
        for factor in tau_factors:
            tau_max = factor * default_tau_max(length, tau_coefficient)
            p_bar = walk.averaged_distribution(length, 1, tau_max)
            tv = walk.total_variation(p_bar, limit)
            rows.append((length, float(factor), float(tau_max), tv))
            if factor == top:
                tv_at_top.append((length, tv))
    slope = float("nan")
    if len(tv_at_top) >= 2:
        xs = np.log([length for length, _ in tv_at_top])
        ys = np.log([max(tv, 1e-300) for _, tv in tv_at_top])
        slope = float(np.polyfit(xs, ys, 1)[0])
    metadata = {
        "experiment": "walk-convergence",
        "tau_coefficient": tau_coefficient,
        "start_site": 1,
    }
    summary = dict(metadata)
    summary.update(
        {
            "lengths": list(lengths),
            "tau_factors": [float(f) for f in tau_factors],
            "tv_slope_at_largest_factor": slope,
        }
    )
    return {
        "metadata": metadata,
        "header": ("length", "tau_factor", "tau_max", "tv"),
        "rows": rows,
        "summary": summary,
        "ok": True,
    }


# ---------------------------------------------------------------------------
# fermion: free-particle counting statistics of the reduced chain
# ---------------------------------------------------------------------------

def run_fermion(
    circuit: Circuit,
    padding_factor: int,
    tau_coefficient: float,
    samples: int,
    seed: int,
) -> dict:
    """Counting statistics of the free-particle reduction of the chain."""
    m = circuit.n_rounds * circuit.n_qubits
    block = fermions.FermionBlock.right_block(padding_factor, m)
    tau_max = default_tau_max(block.length, tau_coefficient)
    result = fermions.sampled_region_success(block, tau_max, m, samples, seed)
    metadata = {
        "experiment": "fermion-counting",
        "length": block.length,
        "particles": block.n_particles,
        "threshold": m,
        "padding_factor": padding_factor,
        "tau_max": tau_max,
        "samples": samples,
        "seed": seed,
        "rng": "numpy PCG64",
    }
    summary = dict(metadata)
    summary.update(
        {
            "p_success": result["estimate"],
            "expected_count_limit": fermions.limiting_region_count(block),
            "expected_count_averaged": fermions.averaged_region_count(block, tau_max),
        }
    )
    return {
        "metadata": metadata,
        "header": ("tau", "E_X", "p_success"),
        "rows": result["trace"],
        "summary": summary,
        "ok": True,
    }


# ---------------------------------------------------------------------------
# oracle: full-space verification of both constructions
# ---------------------------------------------------------------------------

def run_oracle(circuit: Circuit, input_bits, tolerance: float) -> dict:
    """Check both restricted simulators against the unrestricted Hamiltonians.

    Runs on the unpadded instance; sizes beyond the guards fail fast with a
    clear error rather than attempting an exponential build.
    """
    taus = [0.5, 1.0, 2.0, 5.0]
    spec = hopping.ChainSpec(circuit, input_bits)
    report10 = fullspace.verify_chain_10(spec, taus)
    line = shuttle.generate_line(shuttle.build_initial_state(circuit, input_bits))
    report20 = fullspace.verify_line_20(line, taus[:2])
    rows = []
    ok = True
    for name, rep in (("d10", report10), ("d20", report20)):
        for key in ("leakage", "restriction_error", "evolution_deviation"):
            passed = rep[key] <= tolerance
            ok = ok and passed
            rows.append((name, key, rep[key], "pass" if passed else "FAIL"))
    metadata = {
        "experiment": "fullspace-oracle",
        "tolerance": tolerance,
        "taus": ",".join(_fmt(t) for t in taus),
    }
    summary = dict(metadata)
    summary.update(
        {
            "d10": report10,
            "d20": report20,
            "ok": ok,
            "circuit": json.loads(circuit.to_json()),
            "input": list(input_bits),
        }
    )
    return {
        "metadata": metadata,
        "header": ("chain", "check", "value", "status"),
        "rows": rows,
        "summary": summary,
        "ok": ok,
    }
