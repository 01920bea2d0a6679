from pymis import config, main
from pymis.errors import (
    EXIT_BUDGET,
    EXIT_CERTIFICATION,
    EXIT_CONFIG,
    EXIT_PASS,
    BudgetExceeded,
    ConfigError,
)
from unittest.mock import patch

import pytest


class TestMain:

    @pytest.fixture(autouse=True)
    def setup(self):
        self.run_patch = patch('pymis.run', autospec=True)
        self.run = self.run_patch.start()
        self.run.return_value = EXIT_PASS
        self.sweep_patch = patch('pymis.sweep_defects', autospec=True)
        self.sweep = self.sweep_patch.start()
        self.ensemble_patch = patch('pymis.ensemble', autospec=True)
        self.ensemble = self.ensemble_patch.start()
        self.report_patch = patch('pymis.report', autospec=True)
        self.report = self.report_patch.start()
        self.logger_patch = patch('pymis.load_logger', autospec=True)
        self.logger_patch.start()

        yield 'setup'

        self.run_patch.stop()
        self.sweep_patch.stop()
        self.ensemble_patch.stop()
        self.report_patch.stop()
        self.logger_patch.stop()

    def test_stage_subcommand_runs_a_single_stage(self):
        assert main(['reduce', 'graph.json']) == EXIT_PASS

        pipeline_config = self.run.call_args[0][0]
        assert pipeline_config.stages == ['reduce']
        assert pipeline_config.input_path == 'graph.json'
        assert self.run.call_args[1] == {'strict': False}

    def test_run_subcommand_passes_the_options(self):
        main([
            'run',
            '-s',
            'verify,reduce',
            '--strict',
            '-p',
            'direct',
            '--seed',
            '4',
            '-o',
            'out',
            'graph.json',
        ])

        pipeline_config = self.run.call_args[0][0]
        assert pipeline_config.stages == ['reduce', 'verify']
        assert pipeline_config.pattern == 'direct'
        assert pipeline_config.seed == 4
        assert pipeline_config.output_dir == 'out'
        assert self.run.call_args[1] == {'strict': True}

    def test_unset_options_take_the_configuration_values(self):
        main(['embed', 'graph.json'])

        pipeline_config = self.run.call_args[0][0]
        assert pipeline_config.pattern == config.get('hardware.pattern')
        assert pipeline_config.points == config.get('annealer.points')
        assert pipeline_config.spin_budget == \
            config.get('oracle.spin_budget')

    def test_output_dir_from_the_environment(self, monkeypatch):
        monkeypatch.setenv('PYMIS_OUTPUT_DIR', 'env_artifacts')

        main(['reduce', 'graph.json'])

        assert self.run.call_args[0][0].output_dir == 'env_artifacts'

    def test_certificate_failure_exit_status(self):
        self.run.return_value = EXIT_CERTIFICATION

        assert main(['verify', 'graph.json']) == EXIT_CERTIFICATION

    def test_config_errors_exit_status(self):
        self.run.side_effect = ConfigError('Input file missing')

        assert main(['reduce', 'graph.json']) == EXIT_CONFIG

    def test_budget_errors_exit_status(self):
        self.run.side_effect = BudgetExceeded('Too many spins', 'anneal')

        assert main(['anneal', 'instance.json']) == EXIT_BUDGET

    def test_sweep_defects_subcommand(self):
        result = main([
            'sweep-defects',
            '-d',
            '0.0',
            '0.1',
            '-t',
            '5',
            '-o',
            'out',
            'program.json',
        ])

        assert result == EXIT_PASS
        self.sweep.assert_called_once_with(
            'program.json',
            [0.0, 0.1],
            5,
            config.get('pipeline.seed'),
            config.get('pipeline.workers'),
            'out',
        )

    def test_sweep_defects_takes_configured_densities(self):
        main(['sweep-defects', '-o', 'out', 'program.json'])

        self.sweep.assert_called_once_with(
            'program.json',
            config.get('defects.densities'),
            config.get('defects.trials'),
            config.get('pipeline.seed'),
            config.get('pipeline.workers'),
            'out',
        )

    def test_ensemble_subcommand(self):
        main(['ensemble', '-n', '3', '--vertices', '5', '-o', 'out'])

        self.ensemble.assert_called_once_with(
            3,
            5,
            config.get('ensemble.edge_probability'),
            config.get('reduction.threshold'),
            config.get('annealer.gamma0'),
            config.get('annealer.points'),
            config.get('pipeline.seed'),
            config.get('pipeline.workers'),
            'out',
        )

    def test_report_subcommand(self):
        main(['report', 'artifacts_dir'])

        self.report.assert_called_once_with(
            'artifacts_dir',
            config.get('report.columns'),
            config.get('report.labels'),
        )

    def test_without_subcommand_prints_help(self):
        with patch('pymis.load_parser', autospec=True) as parser:
            parser.return_value.parse_args.return_value.subcommand = None

            assert main([]) == EXIT_PASS

            assert parser.return_value.print_help.called
        assert not self.run.called
