"""Command-line interface.

    quditchain simulate10 --circuit c.json [--f 22] [--tau-coeff 10] ...
    quditchain simulate20 --circuit c.json ...
    quditchain walk [--tau-coeff 10]
    quditchain fermion --circuit c.json [--f 22] ...
    quditchain oracle --circuit c.json

Each run writes a delimited trace (stdout, or --out FILE plus a
FILE.summary.json sibling) and exits 0 on success.  Outputs are byte-stable
for fixed arguments: seeds are explicit, nothing is timestamped.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import experiments
from .circuits import CircuitFormatError
from .hopping import SizeGuardError


def build_parser(defaults: dict) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quditchain",
        description="Chain-automaton circuit simulators and their oracles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, circuit=True):
        if circuit:
            p.add_argument(
                "--circuit", required=True, help="circuit JSON file (rounds of W/S/I)"
            )
        p.add_argument(
            "--f",
            type=int,
            default=defaults["padding_factor"],
            help="padding factor of the gate-hopping chain",
        )
        p.add_argument(
            "--tau-coeff",
            type=float,
            default=defaults["tau_coefficient"],
            help="averaging window coefficient (tau_max = coeff * scale * ln scale)",
        )
        p.add_argument("--samples", type=int, default=defaults["samples"])
        p.add_argument("--seed", type=int, default=defaults["seed"])
        p.add_argument("--out", help="write the trace here (plus .summary.json)")

    common(sub.add_parser("simulate10", help="padded gate-hopping chain statistics"))
    common(sub.add_parser("simulate20", help="padded program-shuttle readout"))
    common(sub.add_parser("walk", help="path-walk convergence sweep"), circuit=False)
    common(sub.add_parser("fermion", help="free-particle counting statistics"))
    common(sub.add_parser("oracle", help="full-space verification of both chains"))
    return parser


def _emit(result: dict, out: str | None) -> None:
    csv_text = experiments.render_csv(
        result["metadata"], result["header"], result["rows"]
    )
    summary_text = experiments.render_summary(result["summary"])
    if out:
        path = Path(out)
        path.write_text(csv_text, encoding="utf-8")
        path.with_name(path.name + ".summary.json").write_text(
            summary_text, encoding="utf-8"
        )
    else:
        sys.stdout.write(csv_text)
        sys.stdout.write(summary_text)


def main(argv=None) -> int:
    defaults = experiments.load_defaults()
    args = build_parser(defaults).parse_args(argv)
    try:
        if args.command == "walk":
            result = experiments.run_walk(
                defaults["walk_lengths"], defaults["walk_tau_factors"], args.tau_coeff
            )
        else:
            circuit, bits = experiments.load_circuit_file(args.circuit)
            if args.command == "simulate10":
                result = experiments.run_simulate10(
                    circuit, bits, args.f, args.tau_coeff, args.samples, args.seed
                )
            elif args.command == "simulate20":
                result = experiments.run_simulate20(
                    circuit, bits, args.tau_coeff, args.samples, args.seed
                )
            elif args.command == "fermion":
                result = experiments.run_fermion(
                    circuit, args.f, args.tau_coeff, args.samples, args.seed
                )
            else:
                result = experiments.run_oracle(
                    circuit, bits, defaults["oracle_tolerance"]
                )
    except (CircuitFormatError, ValueError, OSError, SizeGuardError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit(result, args.out)
    return 0 if result["ok"] else 1


if __name__ == "__main__":
    sys.exit(main())
