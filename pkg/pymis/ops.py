"""
Module to store the pipeline operations and the artifact formats.

Every stage reads the artifact of its predecessor and writes its own JSON
artifact in the output directory. Artifacts are wrapped in an envelope
with a schema tag and a version, keys are sorted so identical runs give
byte identical files.

Classes:
    Pipeline: Artifact store of a pipeline run.

Functions:
    write_artifact: Write a versioned JSON artifact.
    read_artifact: Read a versioned JSON artifact.
    write_csv: Write plot ready CSV rows.
    run: Run the configured stages.
    sweep_defects: Defect density sweep of a hardware program.
    ensemble: Minimum gap ordering experiment on random instances.
"""

from pymis.annealer import (
    MAX_EVOLUTION_SPINS,
    MAX_SPECTRUM_SPINS,
    Schedule,
    default_gamma0,
    ensemble_experiment,
    evolve,
    gap_sweep,
    random_instance_generator,
)
from pymis.defects import (
    DefectMap,
    classify_defects,
    defect_sweep,
    is_monotone,
    reroute,
    route_layout,
)
from pymis.embedder import ClusterLayout, embed_planar, embed_square
from pymis.errors import (
    EXIT_CERTIFICATION,
    EXIT_PASS,
    CertificationFailure,
    ConfigError,
    MissingArtifact,
    PymisError,
)
from pymis.graphs import (
    CrossingRecord,
    Drawing,
    Graph,
    certify_crossover,
    planarize,
)
from pymis.hardware import (
    DIRECT,
    HALF_FRUSTRATED,
    RANDOM,
    SIMULATED_SQUARE,
    HardwareProgram,
    LatticeSpec,
    certify_links,
    compile_direct_layout,
    compile_simulated_square,
    compile_simulated_triangular,
    program_stats,
)
from pymis.models import IsingInstance, from_number, to_number
from pymis.oracle import Certificate, StageCheck, mis_exact, verify_pipeline
from pymis.reduction import build_cluster_hamiltonian, decode, mis_to_ising

import csv
import json
import logging
import os

log = logging.getLogger(__name__)

SCHEMA_PREFIX = 'pymis'
SCHEMA_VERSION = 1

ARTIFACTS = {
    'graph': 'graph.json',
    'planar': 'planar.json',
    'instance': 'instance.json',
    'layout': 'layout.json',
    'program': 'program.json',
    'routed': 'routed.json',
    'certificate': 'certificate.json',
    'anneal': 'anneal.json',
    'sweep': 'defect_sweep.json',
    'ensemble': 'ensemble.json',
}

SPECTRUM_CSV = 'spectrum.csv'
SWEEP_CSV = 'defect_sweep.csv'
ENSEMBLE_CSV = 'ensemble.csv'

PATTERN_CHOICES = (HALF_FRUSTRATED, SIMULATED_SQUARE, DIRECT, RANDOM)


def _schema(kind):
    return '{}.{}'.format(SCHEMA_PREFIX, kind)


def write_artifact(directory, kind, data, seed=None):
    """
    Write a versioned JSON artifact.

    Arguments:
        directory (str): Output directory, created if missing.
        kind (str): Artifact kind, a key of ARTIFACTS.
        data (dict): JSON serializable payload.
        seed (int): Seed of the run that produced it.

    Returns:
        str: Path of the artifact.
    """

    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, ARTIFACTS[kind])
    envelope = {
        'schema': _schema(kind),
        'version': SCHEMA_VERSION,
        'seed': seed,
        'data': data,
    }
    with open(path, 'w') as f:
        f.write(json.dumps(envelope, indent=2, sort_keys=True))
        f.write('\n')
    log.debug('Wrote {}'.format(path))
    return path


def read_artifact(path, kind=None):
    """
    Read a versioned JSON artifact, ignoring fields it doesn't know.

    Arguments:
        path (str): Artifact path.
        kind (str): Expected artifact kind, any if None.

    Returns:
        tuple: (kind, payload)
    """

    try:
        with open(path, 'r') as f:
            envelope = json.load(f)
    except FileNotFoundError:
        raise MissingArtifact('Artifact {} not found'.format(path))
    except json.JSONDecodeError as e:
        raise ConfigError('Invalid artifact {}: {}'.format(path, e))

    schema = envelope.get('schema', '') if isinstance(envelope, dict) else ''
    if not schema.startswith(SCHEMA_PREFIX + '.'):
        raise ConfigError('{} is not a pymis artifact'.format(path))
    found = schema.split('.', 1)[1]
    if kind is not None and found != kind:
        raise ConfigError(
            '{} holds a {} artifact, expected {}'.format(path, found, kind)
        )
    if envelope.get('version', 0) > SCHEMA_VERSION:
        raise ConfigError(
            'Artifact {} has version {}, the newest supported is {}'.format(
                path,
                envelope['version'],
                SCHEMA_VERSION,
            )
        )
    return found, envelope.get('data', {})


def write_csv(directory, filename, header, rows):
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, filename)
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow(['' if value is None else value for value in row])
    return path


def _is_artifact(path):
    if not path.endswith('.json'):
        return False
    try:
        with open(path, 'r') as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError):
        return False
    return isinstance(data, dict) and 'schema' in data


class Pipeline:
    """
    Artifact store of a pipeline run.

    Artifacts produced by the run are kept in memory, the rest are read
    from the output directory. The input file is either a graph or the
    artifact of a stage.

    Arguments:
        config (PipelineConfig): Validated run settings.

    Public methods:
        load: Payload of an artifact kind.
        save: Write and keep an artifact.
        graph: Graph the run works on.
        run_stage: Run one stage.
    """

    def __init__(self, config, strict=False):
        self.config = config
        self.strict = strict
        self.output_dir = config.output_dir
        self._artifacts = {}
        self.certificate = None

        if _is_artifact(config.input_path):
            kind, data = read_artifact(config.input_path)
            self._artifacts[kind] = data
        else:
            g, drawing = Graph.load(config.input_path)
            self._artifacts['graph'] = {
                'graph': g.to_dict(),
                'coords': None if drawing is None else drawing.to_list(),
            }

    def load(self, kind):
        if kind in self._artifacts:
            return self._artifacts[kind]
        path = os.path.join(self.output_dir, ARTIFACTS[kind])
        if not os.path.isfile(path):
            raise ConfigError(
                'Missing {} artifact, run the previous stages first'.format(
                    kind
                )
            )
        _, data = read_artifact(path, kind)
        self._artifacts[kind] = data
        return data

    def has(self, kind):
        return kind in self._artifacts or os.path.isfile(
            os.path.join(self.output_dir, ARTIFACTS[kind])
        )

    def save(self, kind, data):
        self._artifacts[kind] = data
        return write_artifact(self.output_dir, kind, data, self.config.seed)

    def graph(self):
        """
        Graph the stages encode: the planarized one when the run has it,
        the input graph otherwise.
        """

        for kind in ('planar', 'instance', 'layout', 'program', 'routed'):
            if kind in self._artifacts:
                return Graph.from_dict(self._artifacts[kind]['graph'])
        if 'graph' in self._artifacts:
            return Graph.from_dict(self._artifacts['graph']['graph'])
        for kind in ('planar', 'graph'):
            if self.has(kind):
                return Graph.from_dict(self.load(kind)['graph'])
        raise ConfigError('The run has no graph to work on')

    def run_stage(self, stage):
        log.info('Running stage {}'.format(stage))
        try:
            return STAGE_RUNNERS[stage](self)
        except PymisError as error:
            if error.stage is None:
                error.stage = stage
            raise


def _planarize(pipeline):
    source = pipeline.load('graph')
    g = Graph.from_dict(source['graph'])
    drawing = None if source.get('coords') is None \
        else Drawing(source['coords'])
    planar, crossings, offset = planarize(g, drawing)
    data = {
        'graph': planar.to_dict(),
        'original': g.to_dict(),
        'crossings': [record.to_dict() for record in crossings],
        'offset': offset,
    }
    pipeline.save('planar', data)
    return data


def _reduce(pipeline):
    g = pipeline.graph()
    threshold = pipeline.config.threshold
    inst = mis_to_ising(
        g,
        {edge: -pipeline.config.magnitude for edge in g.edges},
        threshold,
    )
    data = {
        'graph': g.to_dict(),
        'instance': inst.to_dict(),
        'gap_bound': from_number(2 * threshold),
    }
    pipeline.save('instance', data)
    return data


def _embed(pipeline):
    g = pipeline.graph()
    pattern = pipeline.config.pattern
    if pattern == HALF_FRUSTRATED:
        layout = embed_planar(g)
    elif pattern == DIRECT:
        layout = embed_square(g, LatticeSpec(DIRECT).sign)
    else:
        layout = embed_square(g)
    data = {
        'graph': g.to_dict(),
        'pattern': pattern,
        'layout': layout.to_dict(),
    }
    pipeline.save('layout', data)
    return data


def _compile(pipeline):
    config = pipeline.config
    source = pipeline.load('layout')
    layout = ClusterLayout.from_dict(source['layout'])
    pattern = source.get('pattern', config.pattern)
    if pattern == HALF_FRUSTRATED:
        program = compile_simulated_triangular(
            layout,
            config.magnitude,
            config.threshold,
            variant=config.variant,
        )
    elif pattern == SIMULATED_SQUARE:
        program = compile_simulated_square(
            layout,
            config.magnitude,
            config.threshold,
            variant=config.variant,
        )
    elif pattern == DIRECT:
        program = compile_direct_layout(
            layout,
            config.magnitude,
            config.threshold,
            config.variant,
        )
    elif pattern == RANDOM:
        program = route_layout(
            layout,
            seed=config.seed,
            magnitude=config.magnitude,
            threshold=config.threshold,
        )
    else:
        raise ConfigError('Unknown pattern {}'.format(pattern))
    data = {
        'graph': source['graph'],
        'program': program.to_dict(),
        'stats': program_stats(program),
    }
    pipeline.save('program', data)
    return data


def _route(pipeline):
    config = pipeline.config
    source = pipeline.load('program')
    program = HardwareProgram.from_dict(source['program'])
    defects = DefectMap()
    if config.defects is not None:
        try:
            with open(config.defects, 'r') as f:
                entries = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(
                'Invalid defect file {}: {}'.format(config.defects, e)
            )
        if isinstance(entries, dict):
            entries = entries.get('defects', [])
        defects = classify_defects(
            program.spec,
            DefectMap.parse(entries, program),
            program.threshold,
        )
    routed = reroute(program, defects)
    data = {
        'graph': source['graph'],
        'program': routed.to_dict(),
        'defects': defects.to_dict(),
        'stats': program_stats(routed),
    }
    pipeline.save('routed', data)
    return data


def _stage_checks(pipeline, certificate):
    """
    StageCheck of every stage artifact the run has, and the local checks
    that don't need the exact oracle.
    """

    config = pipeline.config
    checks = []
    if pipeline.has('instance'):
        data = pipeline.load('instance')
        inst = IsingInstance.from_dict(data['instance'])
        checks.append(StageCheck(
            'reduce',
            inst,
            lambda s, inst=inst: decode(inst, s),
            to_number(data['gap_bound']),
        ))

    if pipeline.has('layout'):
        layout = ClusterLayout.from_dict(pipeline.load('layout')['layout'])
        cluster_model = layout.to_cluster_model(
            config.magnitude,
            -config.magnitude,
        )
        inst = build_cluster_hamiltonian(
            cluster_model,
            config.threshold,
            config.variant,
        )
        checks.append(StageCheck(
            'embed',
            inst,
            lambda s, inst=inst: decode(inst, s),
            config.threshold,
        ))

    for stage, kind in (('route', 'routed'), ('compile', 'program')):
        if not pipeline.has(kind):
            continue
        program = HardwareProgram.from_dict(pipeline.load(kind)['program'])
        for result in certify_links(
            program,
            budget=config.spin_budget,
            workers=config.workers,
        ):
            certificate.add(
                stage,
                'link',
                result['passed'],
                'link {} - {}: expected {}, observed {}'.format(
                    result['link'][0],
                    result['link'][1],
                    result['expected'],
                    result['observed'],
                ),
                witness=None if result['passed'] is not False
                else {'link': [list(site) for site in result['link']]},
            )
        inst = program.to_instance()
        checks.append(StageCheck(
            stage,
            inst,
            lambda s, inst=inst: decode(inst, s),
            inst.threshold,
            [program.index[site] for site in program.deleted],
        ))
        break
    return checks


def _verify(pipeline):
    config = pipeline.config
    g = pipeline.graph()
    certificate = Certificate()
    if pipeline.has('planar'):
        planar = pipeline.load('planar')
        crossings = [
            CrossingRecord.from_dict(record)
            for record in planar['crossings']
        ]
        if crossings:
            try:
                increment = certify_crossover()
                certificate.add(
                    'planarize',
                    'gadget',
                    True,
                    'crossover increment {}'.format(increment),
                )
            except CertificationFailure as error:
                certificate.add(
                    'planarize',
                    'gadget',
                    False,
                    error.message,
                    witness=error.witness,
                    code=error.code,
                )
        original = Graph.from_dict(planar['original'])
        try:
            planar_mis = mis_exact(
                g,
                budget=config.vertex_budget,
                width=config.width_budget,
            )
            original_mis = mis_exact(
                original,
                budget=config.vertex_budget,
                width=config.width_budget,
            )
            passed = planar_mis.size == original_mis.size + planar['offset']
            certificate.add(
                'planarize',
                'offset',
                passed,
                'planar MIS {} against MIS {} plus offset {}'.format(
                    planar_mis.size,
                    original_mis.size,
                    planar['offset'],
                ),
            )
        except PymisError as error:
            certificate.add(
                'planarize',
                'offset',
                None,
                error.message,
                code=error.code,
            )

    checks = _stage_checks(pipeline, certificate)
    result = verify_pipeline(
        g,
        checks,
        budget=config.spin_budget,
        workers=config.workers,
        width=config.width_budget,
    )
    certificate.checks.extend(result.checks)
    data = certificate.to_dict()
    data['graph'] = g.to_dict()
    pipeline.certificate = certificate
    pipeline.save('certificate', data)
    return data


def _anneal(pipeline):
    config = pipeline.config
    source = pipeline.load('instance')
    inst = IsingInstance.from_dict(source['instance'])
    data = {'graph': source['graph'], 'spins': inst.n_spins}
    if inst.n_spins > MAX_SPECTRUM_SPINS and not pipeline.strict:
        log.warning(
            'Skipping the anneal stage, {} spins are beyond the {} spin '
            'simulation budget'.format(inst.n_spins, MAX_SPECTRUM_SPINS)
        )
        data['skipped'] = True
        pipeline.save('anneal', data)
        return data

    gamma0 = config.gamma0 or default_gamma0(inst)
    spectrum = gap_sweep(
        inst,
        gamma0,
        config.points,
        workers=config.workers,
    )
    data['spectrum'] = spectrum.to_dict()
    write_csv(
        pipeline.output_dir,
        SPECTRUM_CSV,
        ('gamma', 'e0', 'e1', 'gap'),
        spectrum.rows(),
    )
    if inst.n_spins <= MAX_EVOLUTION_SPINS:
        schedule = Schedule(config.total_time, gamma0)
        evolution = evolve(inst, schedule)
        data['schedule'] = schedule.to_dict()
        data['evolution'] = evolution.to_dict()
    else:
        log.warning('Instance too big for time evolution, only the gap '
                    'curve was computed')
    data['skipped'] = False
    pipeline.save('anneal', data)
    return data


STAGE_RUNNERS = {
    'planarize': _planarize,
    'reduce': _reduce,
    'embed': _embed,
    'compile': _compile,
    'route': _route,
    'verify': _verify,
    'anneal': _anneal,
}


def run(config, strict=False):
    """
    Run the configured stages.

    Arguments:
        config (PipelineConfig): Run settings.
        strict (bool): Fail with BudgetExceeded instead of skipping the
            anneal stage on instances beyond the simulation budget.

    Returns:
        int: Process exit status.
    """

    config.validate()
    pipeline = Pipeline(config, strict)
    for stage in config.stages:
        pipeline.run_stage(stage)

    if pipeline.certificate is not None:
        if not pipeline.certificate.passed:
            log.error('Certificate failed')
            return EXIT_CERTIFICATION
        if not pipeline.certificate.certified:
            log.warning(
                'No check failed but {} were skipped beyond the oracle '
                'budgets, the run is not certified'.format(
                    sum(
                        check['passed'] is None
                        for check in pipeline.certificate.checks
                    )
                )
            )
    return EXIT_PASS


def sweep_defects(
    program_path,
    densities,
    trials,
    seed=0,
    workers=1,
    output_dir='artifacts',
):
    """
    Defect density sweep of a hardware program.

    Returns:
        dict: Sweep payload.
    """

    kind, data = read_artifact(program_path)
    if kind not in ('program', 'routed'):
        raise ConfigError(
            '{} is not a hardware program artifact'.format(program_path)
        )
    program = HardwareProgram.from_dict(data['program'])
    rows = defect_sweep(program, densities, trials, seed, workers)
    payload = {
        'rows': [
            {
                'density': density,
                'trials': count,
                'successes': successes,
                'rate': rate,
            }
            for density, count, successes, rate in rows
        ],
        'monotone': is_monotone(rows),
        'stats': program_stats(program),
    }
    write_artifact(output_dir, 'sweep', payload, seed)
    write_csv(
        output_dir,
        SWEEP_CSV,
        ('density', 'trials', 'successes', 'rate'),
        rows,
    )
    return payload


def ensemble(
    count,
    vertices,
    edge_probability=0.5,
    threshold=1,
    gamma0=None,
    points=41,
    seed=0,
    workers=1,
    output_dir='artifacts',
):
    """
    Minimum gap ordering experiment on random MIS instances.

    Returns:
        dict: Ensemble payload.
    """

    result = ensemble_experiment(
        random_instance_generator(vertices, edge_probability, threshold),
        count,
        gamma0,
        points,
        seed,
        workers,
    )
    payload = result.to_dict()
    payload.update(vertices=vertices, edge_probability=edge_probability)
    write_artifact(output_dir, 'ensemble', payload, seed)
    write_csv(
        output_dir,
        ENSEMBLE_CSV,
        ('instance', 'gamma_star', 'g_min'),
        result.rows(),
    )
    return payload
