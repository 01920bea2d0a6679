"""
Module to define the configuration of the main program.

Classes:
    Config: Class to manipulate the configuration of the program.
    PipelineConfig: Validated settings of a single pipeline run.
"""

from collections import UserDict
from pymis.errors import ConfigError
from ruamel.yaml import YAML
from ruamel.yaml.scanner import ScannerError

import logging
import os

log = logging.getLogger(__name__)

PATTERNS = ('half-frustrated', 'simulated-square', 'direct', 'random')

STAGES = [
    'planarize',
    'reduce',
    'embed',
    'compile',
    'route',
    'verify',
    'anneal',
]


class Config(UserDict):
    """
    Class to manipulate the configuration of the program.

    Arguments:
        config_path (str): Path to the configuration file.
            Default: ~/.local/share/pymis/config.yaml
        required (bool): Fail if the file doesn't exist, otherwise every
            value takes its default.

    Public methods:
        get: Fetch the configuration value of the specified key.
            If there are nested dictionaries, a dot notation can be used.
        load: Loads configuration from configuration YAML file.
        save: Saves configuration in the configuration YAML file.

    Attributes and properties:
        config_path (str): Path to the configuration file.
        data(dict): Program configuration.
    """

    def __init__(
        self,
        config_path='~/.local/share/pymis/config.yaml',
        required=True,
    ):
        self.config_path = os.path.expanduser(config_path)
        if not required and not os.path.isfile(self.config_path):
            log.debug(
                'Configuration file {} not found, using the defaults'.format(
                    self.config_path
                )
            )
            self.data = {}
            return
        self.load()

    def get(self, key, default=None):
        """
        Fetch the configuration value of the specified key. If there are nested
        dictionaries, a dot notation can be used.

        So if the configuration contents are:

        self.data = {
            'first': {
                'second': 'value'
            },
        }

        self.data.get('first.second') == 'value'

        Arguments:
            key(str): Configuration key to fetch
            default: Value returned when the key doesn't exist.
        """
        keys = key.split('.')
        value = self.data.copy()

        for key in keys:
            try:
                value = value[key]
            except (KeyError, TypeError):
                return default

        return value

    def load(self):
        """
        Loads configuration from configuration YAML file.
        """

        try:
            with open(os.path.expanduser(self.config_path), 'r') as f:
                try:
                    self.data = YAML().load(f)
                except ScannerError as e:
                    log.error(
                        'Error parsing yaml of configuration file '
                        '{}: {}'.format(
                            e.problem_mark,
                            e.problem,
                        )
                    )
                    raise ConfigError(
                        'Invalid configuration file {}'.format(
                            self.config_path
                        )
                    )
        except FileNotFoundError:
            log.error(
                'Error opening configuration file {}'.format(self.config_path)
            )
            raise ConfigError(
                'Missing configuration file {}'.format(self.config_path)
            )

    def save(self):
        """
        Saves configuration in the configuration YAML file.
        """

        with open(os.path.expanduser(self.config_path), 'w+') as f:
            yaml = YAML()
            yaml.default_flow_style = False
            yaml.dump(self.data, f)


class PipelineConfig:
    """
    Validated settings of a single pipeline run.

    Values not given explicitly are taken from the program configuration.

    Arguments:
        config (Config): Program configuration.
        input_path (str): Graph or stage artifact to start from.
        stages (list or str): Stage names, comma separated string or 'all'.
        output_dir (str): Directory where the artifacts are written.
        **overrides: Any of pattern, magnitude, threshold, variant, gamma0,
            points, total_time, seed, spin_budget, vertex_budget,
            width_budget, workers, defects.

    Public methods:
        validate: Check the invariants of the run configuration.

    Attributes and properties:
        stages (list): Ordered stage names to run.
    """

    def __init__(
        self,
        config,
        input_path,
        stages='all',
        output_dir=None,
        **overrides
    ):
        self.input_path = input_path
        self.stages = self._parse_stages(stages)
        self.output_dir = output_dir or os.getenv(
            'PYMIS_OUTPUT_DIR',
            config.get('pipeline.output_dir', 'artifacts'),
        )

        defaults = {
            'pattern': config.get('hardware.pattern', 'half-frustrated'),
            'magnitude': config.get('hardware.magnitude', 1),
            'threshold': config.get('reduction.threshold', 1),
            'variant': config.get('reduction.variant', 'representative'),
            'gamma0': config.get('annealer.gamma0'),
            'points': config.get('annealer.points', 41),
            'total_time': config.get('annealer.total_time', 20.0),
            'seed': config.get('pipeline.seed', 0),
            'spin_budget': config.get('oracle.spin_budget', 24),
            'vertex_budget': config.get('oracle.vertex_budget', 40),
            'width_budget': config.get('oracle.width_budget', 10),
            'workers': config.get('pipeline.workers', 1),
            'defects': None,
        }
        for key, value in defaults.items():
            if overrides.get(key) is None:
                overrides[key] = value
        for key, value in overrides.items():
            setattr(self, key, value)

    @staticmethod
    def _parse_stages(stages):
        if stages is None or stages == 'all':
            return list(STAGES)
        if isinstance(stages, str):
            stages = [stage.strip() for stage in stages.split(',')]
        unknown = [stage for stage in stages if stage not in STAGES]
        if unknown:
            raise ConfigError('Unknown stages: {}'.format(', '.join(unknown)))
        return [stage for stage in STAGES if stage in stages]

    def validate(self):
        """
        Check the invariants of the run configuration.

        The input file must exist and budgets must be positive. Stages run
        in pipeline order, each one reading the artifacts of the previous
        ones.
        """

        if not os.path.isfile(self.input_path):
            raise ConfigError(
                'Input file {} does not exist'.format(self.input_path)
            )
        if self.defects is not None and not os.path.isfile(self.defects):
            raise ConfigError(
                'Defect file {} does not exist'.format(self.defects)
            )
        if self.spin_budget <= 0 or self.vertex_budget <= 0:
            raise ConfigError('Oracle budgets must be positive')
        if self.width_budget < 0:
            raise ConfigError('Elimination width budget must not be negative')
        if self.threshold <= 0:
            raise ConfigError('Threshold J must be positive')
        if self.magnitude < self.threshold:
            raise ConfigError(
                'Coupling magnitude {} is below the threshold {}'.format(
                    self.magnitude,
                    self.threshold,
                )
            )
        if self.pattern not in PATTERNS:
            raise ConfigError('Unknown pattern {}'.format(self.pattern))
        if self.points < 2:
            raise ConfigError('Gap sweeps need at least 2 points')
        if self.workers < 1:
            raise ConfigError('At least one worker is needed')

        if not self.stages:
            raise ConfigError('No stages to run')
        if self.stages[0] in ('compile', 'route') and \
                not self.input_path.endswith('.json'):
            raise ConfigError(
                'Stage {} needs a layout artifact as input'.format(
                    self.stages[0]
                )
            )
        return self
