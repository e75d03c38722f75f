"""Command-line interface.

    zne bench <scenario> [--config cfg.json] [--seed S] [--out DIR]
    zne fold --in circuit.txt --lambda 2.0 [--method global|left|right|random] [--seed S]
    zne extrapolate --curve curve.csv --method linear|poly:d|richardson|exp|polyexp:d [--asymptote a]

Exit status is 0 on success, 2 for invalid input or configuration and 3 when
an extrapolation or fit fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench.config import SCENARIOS, ConfigError, ExperimentConfig
from .bench.experiments import run_scenario
from .circuit import CircuitSyntaxError, parse_circuit, serialize_circuit
from .extrapolate import EstimationError, NoiseCurve, by_name
from .folding import fold, realized_lambda

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ESTIMATION = 3


def _bench(args: argparse.Namespace) -> int:
    if args.config:
        cfg = ExperimentConfig.from_json(args.config)
        if cfg.scenario != ExperimentConfig.for_scenario(args.scenario).scenario:
            raise ConfigError(f"config is for scenario {cfg.scenario!r}, not {args.scenario!r}")
    else:
        cfg = ExperimentConfig.for_scenario(args.scenario)
    if args.seed is not None:
        cfg.seed = args.seed
    out = args.out or cfg.output or "results"
    report = run_scenario(cfg)
    paths = report.write(out)
    print(json.dumps({"scenario": report.scenario, "summary": json.loads(report.to_json())["summary"],
                      "files": [str(p) for p in paths]}, indent=2))
    return EXIT_OK


def _fold(args: argparse.Namespace) -> int:
    try:
        text = Path(args.input).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read circuit: {exc}") from exc
    circuit = parse_circuit(text)
    folded = fold(circuit, args.lam, args.method, args.seed)
    realized = realized_lambda(circuit.depth(), args.lam)
    print(f"# lambda requested {args.lam!r}, realized {realized!r}")
    sys.stdout.write(serialize_circuit(folded))
    return EXIT_OK


def _extrapolate(args: argparse.Namespace) -> int:
    try:
        curve = NoiseCurve.from_csv(args.curve)
    except OSError as exc:
        raise ConfigError(f"cannot read curve: {exc}") from exc
    estimator = by_name(args.method, args.asymptote)
    print(json.dumps(estimator(curve).to_dict(), indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zne", description="Digital zero-noise extrapolation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="run a benchmark scenario and write CSV and JSON reports")
    bench.add_argument("scenario", help=f"one of {', '.join(SCENARIOS)}")
    bench.add_argument("--config", help="JSON file whose keys mirror ExperimentConfig fields")
    bench.add_argument("--seed", type=int, default=None, help="override the master seed")
    bench.add_argument("--out", default=None, help="output directory (default: results)")
    bench.set_defaults(func=_bench)

    fold_p = sub.add_parser("fold", help="fold a circuit file and print the result")
    fold_p.add_argument("--in", dest="input", required=True, help="circuit text file")
    fold_p.add_argument("--lambda", dest="lam", type=float, required=True, help="scale factor >= 1")
    fold_p.add_argument("--method", default="global", help="global, left, right or random")
    fold_p.add_argument("--seed", type=int, default=None, help="seed for random folding")
    fold_p.set_defaults(func=_fold)

    ext = sub.add_parser("extrapolate", help="extrapolate a noise curve CSV to zero noise")
    ext.add_argument("--curve", required=True, help="CSV with columns lambda,y[,shots,sigma]")
    ext.add_argument("--method", required=True, help="linear, poly:d, richardson, exp or polyexp:d")
    ext.add_argument("--asymptote", type=float, default=None, help="known large-noise limit")
    ext.set_defaults(func=_extrapolate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EstimationError as exc:
        print(f"zne: estimation failed: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except (ConfigError, CircuitSyntaxError, ValueError) as exc:
        print(f"zne: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
