"""
SMMSE Toolkit - Command Line
============================
    python cli.py run --config sweep.json --output results --seed 7
    python cli.py lut --estimator results/estimator_ETF_0.4.json --matrix results/matrix_ETF.json
    python cli.py validate
    python cli.py matrix --family EquiangularTightFrame --M 3 --N 6
"""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import pandas as pd

from components.errors import SmmseError
from components.estimators import export_lut
from components.matrices import MatrixFamily, MatrixSpec, build, matrix_to_json
from utils.config import ExperimentConfig, load_experiment_config, setup_logging
from utils.experiment import run
from utils.persistence import load_estimator, load_matrix, save_lut
from utils.validation import ValidationSettings, run_validation

logger = logging.getLogger(__name__)


def parse_args(argv=None):
    parser = argparse.ArgumentParser(
        description="Structured nonlinear MMSE estimators for uniform priors on generalized unit balls"
    )
    parser.add_argument(
        "--log-level",
        type=str,
        default=None,
        help="Logging level (default: $SMMSE_LOG_LEVEL or INFO)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="Run the NMSE-vs-p sweep")
    run_parser.add_argument("--config", type=Path, default=None, help="Experiment config JSON")
    run_parser.add_argument("--output", type=Path, default=None, help="Output directory")
    run_parser.add_argument("--seed", type=int, default=None, help="Master seed (unsigned 64-bit)")
    run_parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="Sweep worker threads (default: $SMMSE_THREADS or 1)",
    )

    lut_parser = commands.add_parser("lut", help="Re-export the LUT of a saved estimator")
    lut_parser.add_argument("--estimator", type=Path, required=True, help="Estimator JSON")
    lut_parser.add_argument("--matrix", type=Path, required=True, help="Sensing matrix JSON")
    lut_parser.add_argument("--entries", type=int, default=256, help="Number of LUT entries")
    lut_parser.add_argument("--output", type=Path, default=None, help="CSV path (default: stdout)")

    validate_parser = commands.add_parser("validate", help="Run the oracle checks")
    validate_parser.add_argument("--seed", type=int, default=0, help="Seed of the random instances")
    validate_parser.add_argument(
        "--samples",
        type=int,
        default=100_000,
        help="Monte-Carlo samples per check",
    )

    matrix_parser = commands.add_parser("matrix", help="Emit a sensing matrix as JSON")
    matrix_parser.add_argument(
        "--family",
        type=str,
        choices=[family.value for family in MatrixFamily],
        default=MatrixFamily.EQUIANGULAR_TIGHT_FRAME.value,
    )
    matrix_parser.add_argument("--M", type=int, default=3)
    matrix_parser.add_argument("--N", type=int, default=6)
    matrix_parser.add_argument("--seed", type=int, default=0)
    matrix_parser.add_argument("--basis", type=str, choices=["qr", "dct"], default="qr")
    matrix_parser.add_argument(
        "--approximate",
        action="store_true",
        help="Allow a numerically optimized ETF where no closed form exists",
    )
    matrix_parser.add_argument("--output", type=Path, default=None, help="JSON path (default: stdout)")

    return parser.parse_args(argv)


def command_run(args):
    config = load_experiment_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    result = run(config, output_dir=args.output, threads=args.threads)
    if not result.ok:
        logger.error(f"{len(result.failures)} cells failed; see {result.output_dir / 'failures.json'}")
        return 1
    return 0


def command_lut(args):
    est, p = load_estimator(args.estimator)
    A = load_matrix(args.matrix)
    lut = export_lut(est, A, p, args.entries)
    if args.output is None:
        lut.to_csv(sys.stdout, index=False, float_format='%.12g', lineterminator='\n')
    else:
        save_lut(args.output, lut)
        logger.info(f"wrote {len(lut)} LUT entries to {args.output}")
    return 0


def command_validate(args):
    report = run_validation(ValidationSettings(seed=args.seed, mc_samples=args.samples))
    with pd.option_context('display.max_rows', None, 'display.width', 200):
        print(report.to_string(index=False))
    return 0 if report['passed'].all() else 1


def command_matrix(args):
    spec = MatrixSpec(
        family=args.family,
        M=args.M,
        N=args.N,
        seed=args.seed,
        basis=args.basis,
        approximate_etf=args.approximate,
    )
    text = matrix_to_json(build(spec))
    if args.output is None:
        print(text)
    else:
        args.output.parent.mkdir(parents=True, exist_ok=True)
        args.output.write_text(text + '\n')
        logger.info(f"wrote {spec.label} {spec.M}x{spec.N} to {args.output}")
    return 0


COMMANDS = {
    "run": command_run,
    "lut": command_lut,
    "validate": command_validate,
    "matrix": command_matrix,
}


def main(argv=None):
    args = parse_args(argv)
    setup_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except (SmmseError, OSError) as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
