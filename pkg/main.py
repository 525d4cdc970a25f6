# main.py
"""
Command-line entry point for the mobility imputation toolkit

Commands: impute, features, simulate-missingness, evaluate, analytic.
Every command is a pure function of (inputs, config, seed).
"""

import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from config.models import load_run_config
from config.settings import APP_NAME, APP_VERSION
from utils.analysis_orchestrator import AnalysisOrchestrator
from utils.exceptions import MobilityError

logger = logging.getLogger(APP_NAME)

COMMANDS = ['impute', 'features', 'simulate-missingness', 'evaluate', 'analytic']


def build_parser() -> argparse.ArgumentParser:
    """Top-level parser with one subcommand per workflow"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('inputs', nargs='*', help='GPS CSV files, PLT files or a Geolife directory')
    common.add_argument('--config', help='JSON run configuration')
    common.add_argument('--seed', type=int)
    common.add_argument('--kernel', choices=['TL', 'GL', 'GLC', 'LI'])
    common.add_argument('--scale-mult', type=float, dest='scale_multiplier')
    common.add_argument('--replicates', type=int, help='B, number of imputation replicates')
    common.add_argument('--schedule', help='ON/OFF minutes, e.g. 2/10')
    common.add_argument('--format', choices=['csv', 'plt'], dest='input_format')
    common.add_argument('--out', dest='out_dir')
    common.add_argument('--verbose', action='store_true')
    common.add_argument('--debug', action='store_true')

    parser = argparse.ArgumentParser(prog=APP_NAME, description='GPS trajectory imputation and mobility features')
    parser.add_argument('--version', action='version', version=f'{APP_NAME} {APP_VERSION}')
    sub = parser.add_subparsers(dest='command', required=True)
    sub.add_parser('impute', parents=[common], help='write completed traces per replicate')
    sub.add_parser('features', parents=[common], help='daily feature table with intervals')
    sub.add_parser('simulate-missingness', parents=[common], help='impose an on/off duty cycle')
    evaluate = sub.add_parser('evaluate', parents=[common], help='error tables against dense truth')
    evaluate.add_argument('--synthetic', type=int, default=0, metavar='N',
                          help='evaluate on N synthetic commuter traces instead of inputs')
    evaluate.add_argument('--sweep', action='store_true', help='also run the configured schedule sweep')
    analytic = sub.add_parser('analytic', parents=[common], help='closed-form and Monte Carlo gap curves')
    analytic.add_argument('--curve', action='store_true', help='n from 50 to 1000 in steps of 50')
    return parser


def configure_logging(verbose: bool, debug: bool):
    level = logging.DEBUG if debug else logging.INFO if verbose else logging.WARNING
    logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')


def run(args: argparse.Namespace):
    config = load_run_config(args.config).with_overrides(
        seed=args.seed,
        kernel=args.kernel,
        scale_multiplier=args.scale_multiplier,
        replicates=args.replicates,
        input_format=args.input_format,
        out_dir=args.out_dir,
        inputs=args.inputs or None,
        schedule=args.schedule,
    )
    if args.command == 'analytic' and args.curve:
        config = config.model_copy(update={'analytic': config.analytic.model_copy(update={'curve': True})})

    orchestrator = AnalysisOrchestrator(config, args.command)
    if args.command == 'impute':
        orchestrator.run_impute()
    elif args.command == 'features':
        orchestrator.run_features()
    elif args.command == 'simulate-missingness':
        orchestrator.run_simulate_missingness()
    elif args.command == 'evaluate':
        orchestrator.run_evaluate(synthetic=args.synthetic, sweep=args.sweep)
    elif args.command == 'analytic':
        orchestrator.run_analytic()
    logger.info("%s finished, outputs in %s", args.command, config.out_dir)


def main(argv: Optional[List[str]] = None) -> int:
    """Main application entry point"""
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.debug)
    try:
        run(args)
    except (MobilityError, ValidationError) as e:
        logger.error("%s failed: %s", args.command, e)
        return 2
    except OSError as e:
        logger.error("%s failed: %s", args.command, e)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
