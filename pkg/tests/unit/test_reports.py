from pymis import config
from pymis.errors import MissingArtifact
from pymis.ops import (
    ENSEMBLE_CSV,
    SPECTRUM_CSV,
    SWEEP_CSV,
    write_artifact,
)
from pymis.reports import (
    DefectReport,
    EnsembleReport,
    GapReport,
    SummaryReport,
    report,
)
from unittest.mock import patch

import os
import pytest

EDGE = {'n': 2, 'edges': [[0, 1]]}


class BaseReport:
    """
    Abstract base test class to ensure that all the reports have the same
    interface.

    Public attributes:
        print (mock): print mock.
        tabulate (mock): tabulate mock.
        output_dir (str): Artifact directory.
    """

    @pytest.fixture(autouse=True)
    def base_setup(self, output_dir):
        self.print_patch = patch('pymis.reports.print')
        self.print = self.print_patch.start()
        self.tabulate_patch = patch(
            'pymis.reports.tabulate',
            autospec=True
        )
        self.tabulate = self.tabulate_patch.start()
        self.output_dir = output_dir

        yield 'base_setup'

        self.print_patch.stop()
        self.tabulate_patch.stop()


@pytest.mark.usefixtures('base_setup')
class TestSummaryReport(BaseReport):

    @pytest.fixture(autouse=True)
    def setup(self):
        self.report = SummaryReport(self.output_dir)
        self.columns = config.get('report.columns').copy()
        self.labels = config.get('report.labels').copy()

    def test_empty_directory_has_no_rows(self):
        assert self.report.available() is False
        assert self.report.rows() == []

    def test_instance_row(self):
        write_artifact(self.output_dir, 'instance', {
            'graph': EDGE,
            'instance': {'spins': 2},
            'gap_bound': 2,
        })

        assert self.report.rows() == [{
            'stage': 'reduce',
            'count': 2,
            'bound': 2,
            'within': True,
            'detail': 'gap bound 2',
        }]

    def test_layout_bounds_depend_on_the_geometry(self):
        write_artifact(self.output_dir, 'layout', {
            'graph': EDGE,
            'pattern': 'direct',
            'layout': {'sites': [{}, {}], 'geometry': 'square', 'side': 1},
        })

        row = self.report.rows()[0]

        assert row['bound'] == 36 * 4
        assert row['within'] is True

    def test_triangular_program_bound(self):
        write_artifact(self.output_dir, 'layout', {
            'graph': EDGE,
            'pattern': 'half-frustrated',
            'layout': {
                'sites': [{}, {}],
                'geometry': 'triangular',
                'side': 1,
            },
        })
        write_artifact(self.output_dir, 'program', {
            'stats': {
                'pattern': 'half-frustrated',
                'sites': 16,
                'active': 12,
                'deleted': 4,
            },
        })

        rows = self.report.rows()

        assert rows[0]['bound'] == 8
        assert rows[1] == {
            'stage': 'compile',
            'count': 16,
            'bound': 24,
            'within': True,
            'detail': '12 active, 4 deleted',
        }

    def test_certificate_and_skipped_anneal_rows(self):
        write_artifact(self.output_dir, 'certificate', {
            'passed': True,
            'checks': [{'passed': True}, {'passed': None}],
        })
        write_artifact(self.output_dir, 'anneal', {
            'spins': 30,
            'skipped': True,
        })

        assert [row['detail'] for row in self.report.rows()] == [
            '1 passed, 0 failed, 1 skipped',
            'skipped',
        ]

    def test_print_report(self):
        write_artifact(self.output_dir, 'anneal', {
            'spins': 30,
            'skipped': True,
        })

        self.report.print(self.columns, self.labels)

        self.tabulate.assert_called_once_with(
            [['anneal', 30, '', '', 'skipped']],
            headers=self.labels,
            tablefmt='simple',
        )
        self.print.assert_called_once_with(self.tabulate.return_value)


@pytest.mark.usefixtures('base_setup')
class TestGapReport(BaseReport):

    def test_gap_curve_is_written_as_csv(self):
        write_artifact(self.output_dir, 'anneal', {
            'spins': 1,
            'skipped': False,
            'spectrum': {
                'gammas': [1.0, 0.0],
                'ground': [-1.5, -1.0],
                'excited': [1.5, 1.0],
                'gaps': [3.0, 2.0],
            },
        })

        GapReport(self.output_dir).print()

        with open(os.path.join(self.output_dir, SPECTRUM_CSV), 'r') as f:
            assert f.read().splitlines() == [
                'gamma,e0,e1,gap',
                '1.0,-1.5,1.5,3.0',
                '0.0,-1.0,1.0,2.0',
            ]
        assert self.print.called

    def test_skipped_anneal_prints_nothing(self):
        write_artifact(self.output_dir, 'anneal', {'skipped': True})

        GapReport(self.output_dir).print()

        assert not self.print.called


@pytest.mark.usefixtures('base_setup')
class TestEnsembleReport(BaseReport):

    def test_minimum_gaps_are_written_as_csv(self):
        write_artifact(self.output_dir, 'ensemble', {
            'instances': 2,
            'gamma_star': [1.0, 2.0],
            'g_min': [0.5, 0.25],
            'mean_of_min': 0.375,
            'min_of_mean': 0.5,
            'ordering_holds': True,
            'histogram': {'counts': [1, 1], 'edges': [0.0, 1.0, 2.0]},
        })

        EnsembleReport(self.output_dir).print()

        with open(os.path.join(self.output_dir, ENSEMBLE_CSV), 'r') as f:
            assert f.read().splitlines() == [
                'instance,gamma_star,g_min',
                '0,1.0,0.5',
                '1,2.0,0.25',
            ]
        assert self.print.call_count == 2


@pytest.mark.usefixtures('base_setup')
class TestDefectReport(BaseReport):

    def test_sweep_is_written_as_csv(self):
        write_artifact(self.output_dir, 'sweep', {
            'rows': [
                {'density': 0.0, 'trials': 4, 'successes': 4, 'rate': 1.0},
                {'density': 0.5, 'trials': 4, 'successes': 1, 'rate': 0.25},
            ],
        })

        DefectReport(self.output_dir).print()

        with open(os.path.join(self.output_dir, SWEEP_CSV), 'r') as f:
            assert f.read().splitlines() == [
                'density,trials,successes,rate',
                '0.0,4,4,1.0',
                '0.5,4,1,0.25',
            ]


@pytest.mark.usefixtures('base_setup')
class TestReport(BaseReport):

    def test_missing_directory_raises_error(self):
        with pytest.raises(MissingArtifact):
            report(self.output_dir, ['stage'], ['Stage'])

    def test_directory_without_artifacts_raises_error(self, tmp_path):
        with pytest.raises(MissingArtifact):
            report(str(tmp_path), ['stage'], ['Stage'])

    def test_prints_the_available_reports(self):
        write_artifact(self.output_dir, 'sweep', {'rows': []})

        report(self.output_dir, ['stage'], ['Stage'])

        assert self.print.call_count == 2
