#!/usr/bin/python3

# This file is part of pymis.
#
# pymis is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# pymis is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with pymis.  If not, see <http://www.gnu.org/licenses/>.

import os
from pymis.configuration import Config
config = Config(
    os.getenv('PYMIS_CONFIG', '~/.local/share/pymis/config.yaml'),
    required='PYMIS_CONFIG' in os.environ,
)

from pymis.cli import load_logger, load_parser
from pymis.configuration import PipelineConfig
from pymis.errors import EXIT_PASS, PymisError
from pymis.ops import ensemble, run, sweep_defects
from pymis.reports import report

import logging
import sys

log = logging.getLogger('main')

PIPELINE_OPTIONS = (
    'pattern',
    'threshold',
    'magnitude',
    'variant',
    'spin_budget',
    'vertex_budget',
    'width_budget',
    'defects',
    'gamma0',
    'points',
    'total_time',
    'seed',
    'workers',
)


def _output_dir(args):
    return getattr(args, 'output_dir', None) or os.getenv(
        'PYMIS_OUTPUT_DIR',
        config.get('pipeline.output_dir', 'artifacts'),
    )


def _option(args, name, key, default):
    value = getattr(args, name, None)
    if value is None:
        value = config.get(key, default)
    return value


def pipeline_commands(args):
    """
    Function to run the pipeline stages of a subcommand.

    Arguments:
        args (argparse): Parsed arguments.

    Returns:
        int: Exit status.
    """

    stages = args.stages if args.subcommand == 'run' else args.subcommand
    pipeline_config = PipelineConfig(
        config,
        args.input,
        stages,
        args.output_dir,
        **{name: getattr(args, name, None) for name in PIPELINE_OPTIONS}
    )
    return run(pipeline_config, strict=getattr(args, 'strict', False))


def main(argv=sys.argv[1:]):
    parser = load_parser()
    args = parser.parse_args(argv)
    load_logger(args.verbose)

    try:
        if args.subcommand == 'sweep-defects':
            sweep_defects(
                args.program,
                _option(args, 'densities', 'defects.densities', [0.05]),
                _option(args, 'trials', 'defects.trials', 100),
                _option(args, 'seed', 'pipeline.seed', 0),
                _option(args, 'workers', 'pipeline.workers', 1),
                _output_dir(args),
            )
            return EXIT_PASS
        elif args.subcommand == 'ensemble':
            ensemble(
                _option(args, 'count', 'ensemble.count', 50),
                _option(args, 'vertices', 'ensemble.vertices', 8),
                _option(
                    args,
                    'edge_probability',
                    'ensemble.edge_probability',
                    0.3,
                ),
                config.get('reduction.threshold', 1),
                _option(args, 'gamma0', 'annealer.gamma0', None),
                _option(args, 'points', 'annealer.points', 41),
                _option(args, 'seed', 'pipeline.seed', 0),
                _option(args, 'workers', 'pipeline.workers', 1),
                _output_dir(args),
            )
            return EXIT_PASS
        elif args.subcommand == 'report':
            report(
                args.directory or _output_dir(args),
                config.get(
                    'report.columns',
                    ['stage', 'count', 'bound', 'within', 'detail'],
                ),
                config.get(
                    'report.labels',
                    ['Stage', 'Size', 'Bound', 'Within bound', 'Detail'],
                ),
            )
            return EXIT_PASS
        elif args.subcommand is None:
            parser.print_help()
            return EXIT_PASS
        return pipeline_commands(args)
    except PymisError as error:
        log.error('{} [{}] in stage {}: {}'.format(
            type(error).__name__,
            error.code,
            error.stage,
            error.message,
        ))
        return error.exit_code


if __name__ == '__main__':
    sys.exit(main())
