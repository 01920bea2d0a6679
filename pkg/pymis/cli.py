"""
Module to store the command line and logger functions.

Functions:
    load_logger: Function to define the program logging object.
    load_parser: Function to define the command line arguments.
"""

from pymis.configuration import PATTERNS, STAGES

import logging
import argparse
import argcomplete


def _common_parser():
    '''
    Arguments shared by the pipeline subcommands.
    '''

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        '-o',
        '--output-dir',
        type=str,
        help='Artifact directory, default $PYMIS_OUTPUT_DIR',
        default=None,
    )
    common.add_argument(
        '--seed',
        type=int,
        help='Seed of the random draws',
        default=None,
    )
    common.add_argument(
        '--workers',
        type=int,
        help='Threads of the oracles and sweeps',
        default=None,
    )
    return common


def _pipeline_parser(common):
    '''
    Arguments of the subcommands that run pipeline stages.
    '''

    pipeline = argparse.ArgumentParser(add_help=False, parents=[common])
    pipeline.add_argument(
        'input',
        type=str,
        help='Graph file or stage artifact',
    )
    pipeline.add_argument(
        '-p',
        '--pattern',
        type=str,
        choices=PATTERNS,
        help='Coupling pattern of the hardware lattice',
        default=None,
    )
    pipeline.add_argument(
        '-J',
        '--threshold',
        type=float,
        help='Energy scale J of the reduction',
        default=None,
    )
    pipeline.add_argument(
        '--magnitude',
        type=float,
        help='Magnitude of the lattice couplings',
        default=None,
    )
    pipeline.add_argument(
        '--variant',
        type=str,
        choices=['representative', 'distributed'],
        help='Degeneracy breaking variant',
        default=None,
    )
    pipeline.add_argument(
        '--spin-budget',
        type=int,
        help='Free spins of the exhaustive ground state search',
        default=None,
    )
    pipeline.add_argument(
        '--vertex-budget',
        type=int,
        help='Vertices of the exact MIS search',
        default=None,
    )
    pipeline.add_argument(
        '--width-budget',
        type=int,
        help='Elimination width of the exact oracles past their budgets',
        default=None,
    )
    pipeline.add_argument(
        '--defects',
        type=str,
        help='JSON file with the realized defective couplings',
        default=None,
    )
    pipeline.add_argument(
        '--gamma0',
        type=float,
        help='Initial transverse field',
        default=None,
    )
    pipeline.add_argument(
        '--points',
        type=int,
        help='Points of the transverse field grid',
        default=None,
    )
    pipeline.add_argument(
        '-T',
        '--total-time',
        type=float,
        help='Annealing time',
        default=None,
    )
    return pipeline


def load_parser():
    '''
    Function to define the command line arguments.
    '''

    # Argparse
    parser = argparse.ArgumentParser(
        description='Compile maximum independent set instances onto fixed '
        'coupling Ising lattices and certify every stage.',
    )
    parser.add_argument(
        '-v',
        '--verbose',
        action='store_true',
        help='Show debug messages',
    )

    subparser = parser.add_subparsers(dest='subcommand', help='subcommands')
    common = _common_parser()
    pipeline = _pipeline_parser(common)

    run_parser = subparser.add_parser('run', parents=[pipeline])
    run_parser.add_argument(
        '-s',
        '--stages',
        type=str,
        help='Comma separated stages or all',
        default='all',
    )
    run_parser.add_argument(
        '--strict',
        action='store_true',
        help='Fail instead of skipping stages beyond the simulation budget',
    )

    for stage in STAGES:
        subparser.add_parser(stage, parents=[pipeline])

    sweep_parser = subparser.add_parser('sweep-defects', parents=[common])
    sweep_parser.add_argument(
        'program',
        type=str,
        help='Program or routed artifact',
    )
    sweep_parser.add_argument(
        '-d',
        '--densities',
        type=float,
        nargs='+',
        help='Defect densities',
        default=None,
    )
    sweep_parser.add_argument(
        '-t',
        '--trials',
        type=int,
        help='Trials per density',
        default=None,
    )

    ensemble_parser = subparser.add_parser('ensemble', parents=[common])
    ensemble_parser.add_argument(
        '-n',
        '--count',
        type=int,
        help='Number of random instances',
        default=None,
    )
    ensemble_parser.add_argument(
        '--vertices',
        type=int,
        help='Vertices of every random graph',
        default=None,
    )
    ensemble_parser.add_argument(
        '--edge-probability',
        type=float,
        help='Probability of each extra edge',
        default=None,
    )
    ensemble_parser.add_argument(
        '--gamma0',
        type=float,
        help='Top of the transverse field grid',
        default=None,
    )
    ensemble_parser.add_argument(
        '--points',
        type=int,
        help='Points of the transverse field grid',
        default=None,
    )

    report_parser = subparser.add_parser('report')
    report_parser.add_argument(
        'directory',
        type=str,
        nargs='?',
        help='Artifact directory, default $PYMIS_OUTPUT_DIR',
        default=None,
    )

    argcomplete.autocomplete(parser)
    return parser


def load_logger(verbose=False):
    '''
    Function to define the program logging object.
    '''

    logging.addLevelName(logging.INFO, "[\033[36mINFO\033[0m]")
    logging.addLevelName(logging.ERROR, "[\033[31mERROR\033[0m]")
    logging.addLevelName(logging.DEBUG, "[\033[32mDEBUG\033[0m]")
    logging.addLevelName(logging.WARNING, "[\033[33mWARNING\033[0m]")
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="  %(levelname)s %(message)s"
    )
    return logging.getLogger('main')
