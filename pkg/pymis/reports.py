"""
Module to store the pymis reports

Classes:
    BaseReport: Abstract class to gather common report methods and attributes.
    SummaryReport: Class to print the stage sizes against their bounds.
    GapReport: Class to print the gap curve of an anneal artifact.
    EnsembleReport: Class to print the ensemble ordering experiment.
    DefectReport: Class to print a defect sweep.

Functions:
    report: Print every report the artifact directory supports.
"""

from pymis.embedder import SQUARE, TriLattice
from pymis.errors import MissingArtifact
from pymis.hardware import DIRECT, HALF_FRUSTRATED, PITCH, SIMULATED_SQUARE
from pymis.ops import (
    ARTIFACTS,
    ENSEMBLE_CSV,
    SPECTRUM_CSV,
    SWEEP_CSV,
    read_artifact,
    write_csv,
)
from tabulate import tabulate

import os

CELL_QUBITS = 8


class BaseReport():
    """
    Abstract class to gather common report methods and attributes.

    Arguments:
        directory (str): Artifact directory.

    Public attributes:
        directory (str): Artifact directory.

    Internal methods:
        _load: Payload of an artifact, None if it doesn't exist.
    """

    def __init__(self, directory):
        self.directory = directory

    def _load(self, kind):
        path = os.path.join(self.directory, ARTIFACTS[kind])
        if not os.path.isfile(path):
            return None
        return read_artifact(path, kind)[1]

    def available(self):
        return any(
            os.path.isfile(os.path.join(self.directory, filename))
            for filename in ARTIFACTS.values()
        )


class SummaryReport(BaseReport):
    """
    Class to print the size of every stage against its bound:

        * Triangular embedding: N (2N - 1) < 2 N^2 sites.
        * Simulated triangular lattice: 8 qubits per simulated site.
        * Direct square embedding: 36 N^2 sites.

    Public methods:
        rows: Report rows.
        print: Method to print the report.
    """

    def rows(self):
        rows = []
        instance = self._load('instance')
        if instance is not None:
            vertices = instance['graph']['n']
            rows.append({
                'stage': 'reduce',
                'count': instance['instance']['spins'],
                'bound': vertices,
                'within': instance['instance']['spins'] <= vertices,
                'detail': 'gap bound {}'.format(instance['gap_bound']),
            })

        layout = self._load('layout')
        if layout is not None:
            vertices = layout['graph']['n']
            sites = len(layout['layout']['sites'])
            if layout['layout']['geometry'] == SQUARE:
                bound = 36 * vertices ** 2
            else:
                bound = 2 * vertices ** 2
            rows.append({
                'stage': 'embed',
                'count': sites,
                'bound': bound,
                'within': sites <= bound,
                'detail': 'side {}'.format(layout['layout']['side']),
            })

        for stage, kind in (('compile', 'program'), ('route', 'routed')):
            program = self._load(kind)
            if program is None:
                continue
            stats = program['stats']
            bound = self._program_bound(stats, layout)
            rows.append({
                'stage': stage,
                'count': stats['sites'],
                'bound': bound,
                'within': None if bound is None else stats['sites'] <= bound,
                'detail': '{} active, {} deleted'.format(
                    stats['active'],
                    stats['deleted'],
                ),
            })

        certificate = self._load('certificate')
        if certificate is not None:
            checks = certificate['checks']
            rows.append({
                'stage': 'verify',
                'count': len(checks),
                'bound': None,
                'within': certificate.get('certified', certificate['passed']),
                'detail': '{} passed, {} failed, {} skipped'.format(
                    sum(1 for c in checks if c['passed'] is True),
                    sum(1 for c in checks if c['passed'] is False),
                    sum(1 for c in checks if c['passed'] is None),
                ),
            })

        anneal = self._load('anneal')
        if anneal is not None:
            if anneal.get('skipped'):
                detail = 'skipped'
            else:
                detail = 'g_min {:.6g} at gamma {:.6g}'.format(
                    anneal['spectrum']['g_min'],
                    anneal['spectrum']['gamma_star'],
                )
            rows.append({
                'stage': 'anneal',
                'count': anneal['spins'],
                'bound': None,
                'within': None,
                'detail': detail,
            })
        return rows

    @staticmethod
    def _program_bound(stats, layout):
        if stats['pattern'] == DIRECT and layout is not None:
            return 36 * layout['graph']['n'] ** 2
        if layout is None:
            return None
        side = layout['layout']['side']
        if stats['pattern'] == HALF_FRUSTRATED:
            return CELL_QUBITS * len(TriLattice(side))
        if stats['pattern'] == SIMULATED_SQUARE:
            return PITCH ** 2 * (side + 1) ** 2
        return None

    def print(self, columns, labels):
        """
        Method to print the report

        Arguments:
            columns (list): Row keys to print.
            labels (list): Headers of the columns.
        """
        report_data = [
            [
                '' if row.get(column) is None else row.get(column)
                for column in columns
            ]
            for row in self.rows()
        ]
        print(tabulate(report_data, headers=labels, tablefmt='simple'))


class GapReport(BaseReport):
    """
    Class to print the gap curve of an anneal artifact and write it as CSV.
    """

    def print(self):
        anneal = self._load('anneal')
        if anneal is None or anneal.get('skipped'):
            return
        spectrum = anneal['spectrum']
        rows = list(zip(
            spectrum['gammas'],
            spectrum['ground'],
            spectrum['excited'],
            spectrum['gaps'],
        ))
        write_csv(
            self.directory,
            SPECTRUM_CSV,
            ('gamma', 'e0', 'e1', 'gap'),
            rows,
        )
        print(tabulate(
            rows,
            headers=['Gamma', 'E0', 'E1', 'Gap'],
            tablefmt='simple',
        ))


class EnsembleReport(BaseReport):
    """
    Class to print the ensemble ordering experiment and write the minimum
    gap of every instance as CSV.
    """

    def print(self):
        ensemble = self._load('ensemble')
        if ensemble is None:
            return
        rows = [
            (index, gamma_star, g_min)
            for index, (gamma_star, g_min) in enumerate(
                zip(ensemble['gamma_star'], ensemble['g_min'])
            )
        ]
        write_csv(
            self.directory,
            ENSEMBLE_CSV,
            ('instance', 'gamma_star', 'g_min'),
            rows,
        )
        print(tabulate(
            [
                ['instances', ensemble['instances']],
                ['mean of minimum gaps', ensemble['mean_of_min']],
                ['minimum of mean gap', ensemble['min_of_mean']],
                ['ordering holds', ensemble['ordering_holds']],
            ],
            tablefmt='simple',
        ))
        histogram = ensemble['histogram']
        print(tabulate(
            [
                [
                    '{:.4g} - {:.4g}'.format(low, high),
                    count,
                ]
                for low, high, count in zip(
                    histogram['edges'],
                    histogram['edges'][1:],
                    histogram['counts'],
                )
            ],
            headers=['Gamma*', 'Instances'],
            tablefmt='simple',
        ))


class DefectReport(BaseReport):
    """
    Class to print a defect sweep and write it as CSV.
    """

    def print(self):
        sweep = self._load('sweep')
        if sweep is None:
            return
        rows = [
            (row['density'], row['trials'], row['successes'], row['rate'])
            for row in sweep['rows']
        ]
        write_csv(
            self.directory,
            SWEEP_CSV,
            ('density', 'trials', 'successes', 'rate'),
            rows,
        )
        print(tabulate(
            rows,
            headers=['Density', 'Trials', 'Successes', 'Rate'],
            tablefmt='simple',
        ))


def report(directory, columns, labels):
    """
    Print every report the artifact directory supports.

    Raises:
        MissingArtifact: If the directory holds no artifact.
    """

    summary = SummaryReport(directory)
    if not os.path.isdir(directory) or not summary.available():
        raise MissingArtifact(
            'No artifacts found in {}'.format(directory),
        )
    summary.print(columns, labels)
    GapReport(directory).print()
    EnsembleReport(directory).print()
    DefectReport(directory).print()
