"""
Module to classify coupling defects and route programs around them.

A coupling is defective when it is too weak or has the wrong sign. One of
its qubits is marked as defective and deleted, and the clusters and links
that used it are routed again through defect free sites.

Classes:
    DefectRecord: One defective coupling.
    DefectMap: Realized couplings and their defects.

Functions:
    classify_defects: Compare the realized couplings with the pattern.
    reroute: Route a program around the defective sites.
    route_layout: Route a square layout on a lattice with random signs.
    defect_sweep: Monte Carlo success rate of rerouting per defect density.
"""

from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pymis.embedder import ANTIFERRO, FERRO, SQUARE
from pymis.errors import ConfigError, PatternMismatch, RoutingFailed
from pymis.hardware import (
    AUXILIARY,
    CONTROL,
    DELETED,
    RANDOM,
    WORKING,
    LatticeSpec,
    _assemble,
    _edge,
    certify_links,
)
from pymis.models import from_number, to_number

import logging
import networkx as nx
import numpy as np

log = logging.getLogger(__name__)

WEAK_COUPLING = 'WeakCoupling'
WRONG_SIGN = 'WrongSign'
ROUTING_MARGIN = 2


class DefectRecord:
    """
    One defective coupling.

    Arguments:
        edge (tuple): Sorted (site, site) bond.
        kind (str): WEAK_COUPLING or WRONG_SIGN.
        site (tuple): Implicated site, the lowest of the bond.
        value (number): Realized coupling.
    """

    def __init__(self, edge, kind, site, value):
        self.edge = edge
        self.kind = kind
        self.site = site
        self.value = value

    def to_dict(self):
        return {
            'edge': [list(site) for site in self.edge],
            'kind': self.kind,
            'site': list(self.site),
            'value': from_number(self.value),
        }


class DefectMap:
    """
    Realized couplings and their defects.

    Arguments:
        realized (dict): (site, site) -> realized coupling.
        records (list): DefectRecord objects.

    Attributes and properties:
        sites (set): Implicated sites.
    """

    def __init__(self, realized=None, records=()):
        self.realized = {
            _edge(a, b): value for (a, b), value in (realized or {}).items()
        }
        self.records = list(records)

    @property
    def sites(self):
        return {record.site for record in self.records}

    def __len__(self):
        return len(self.records)

    def to_dict(self):
        return {
            'defects': [record.to_dict() for record in self.records],
            'sites': [list(site) for site in sorted(self.sites)],
        }

    @staticmethod
    def parse(data, program):
        """
        Realized couplings from [{"edge": [i, k], "value": x}] entries.

        Sites are spin ids of the program, or their coordinates.
        """
        realized = {}
        try:
            for entry in data:
                sites = []
                for site in entry['edge']:
                    if isinstance(site, int):
                        site = program.sites[site]
                    sites.append(tuple(site))
                realized[_edge(*sites)] = to_number(entry['value'])
        except (IndexError, KeyError, TypeError, ValueError) as e:
            raise ConfigError('Invalid defect data: {}'.format(e))
        return realized


def classify_defects(spec, realized, threshold=1):
    """
    Compare the realized couplings with the pattern signs.

    A coupling with |J| < threshold is a WeakCoupling and one whose sign
    differs from the pattern is a WrongSign, a coupling can be both. The
    lowest site of the bond is implicated.

    Arguments:
        spec (LatticeSpec): Nominal pattern.
        realized (dict): (site, site) -> realized coupling.
        threshold (number): Energy scale J.

    Returns:
        DefectMap
    """

    records = []
    for (a, b), value in sorted(
        (_edge(a, b), value) for (a, b), value in realized.items()
    ):
        if value * spec.sign(a, b) < 0:
            records.append(DefectRecord((a, b), WRONG_SIGN, a, value))
        if abs(value) < threshold:
            records.append(DefectRecord((a, b), WEAK_COUPLING, a, value))
    log.debug('Found {} defective couplings'.format(len(records)))
    return DefectMap(realized, records)


class _Router:
    """
    Shortest path search through free sites with sign parity bookkeeping.

    A new path joins its sites to the source cluster, so every site of the
    path must only touch its predecessor, and the last one also its
    target. Paths keep the gauge: couplings inside clusters are
    ferromagnetic and the ones between clusters antiferromagnetic.

    Arguments:
        spec (LatticeSpec): Pattern of the lattice.
        region (iterable): Lattice sites.
        owner (dict): Active site -> vertex, updated in place.
        tau (dict): Active site -> gauge sign, updated in place.
        blocked (set): Sites that can't be used.
        value (callable): (site, site) -> coupling.
    """

    def __init__(self, spec, region, owner, tau, blocked, value):
        self.spec = spec
        self.region = set(region)
        self.owner = owner
        self.tau = tau
        self.blocked = set(blocked)
        self.value = value
        self.added = set()

    def _sign(self, a, b):
        return 1 if self.value(a, b) > 0 else -1

    def _free(self, site):
        return site in self.region and site not in self.owner and \
            site not in self.blocked

    def _path(self, parents, state):
        path = []
        while state is not None:
            path.append(state[0])
            state = parents[state]
        return path[::-1]

    def route(self, vertex, targets, inter):
        """
        Join a path of free sites from the cluster of vertex to one of the
        target sites.

        Arguments:
            vertex (int): Cluster the path belongs to.
            targets (set): Active sites to reach.
            inter (bool): The last coupling is between clusters.

        Returns:
            list: Sites of the path, source and target included.
        """

        sources = sorted(
            site for site, owner in self.owner.items() if owner == vertex
        )
        parents = {}
        queue = []
        for source in sources:
            state = (source, self.tau[source])
            parents[state] = None
            queue.append(state)

        position = 0
        while position < len(queue):
            state = queue[position]
            position += 1
            site, sign = state
            path = set(self._path(parents, state))
            for neighbor in sorted(self.spec.neighbors(site)):
                if not self._free(neighbor):
                    continue
                touching = [
                    other for other in self.spec.neighbors(neighbor)
                    if other != site and (other in self.owner or other in path)
                ]
                if any(other not in targets for other in touching) or \
                        len(touching) > 1:
                    continue
                tau = sign * self._sign(site, neighbor)
                if touching:
                    target = touching[0]
                    coupling = self._sign(neighbor, target)
                    if target in self.tau:
                        effective = coupling * tau * self.tau[target]
                        if (effective < 0) != inter:
                            continue
                    parents[(neighbor, tau)] = state
                    path = self._path(parents, (neighbor, tau)) + [target]
                    self._claim(vertex, path, inter)
                    return path
                if (neighbor, tau) not in parents:
                    parents[(neighbor, tau)] = state
                    queue.append((neighbor, tau))
        raise RoutingFailed(
            'No defect free path from cluster {} to {}'.format(
                vertex,
                sorted(targets)[:3],
            ),
            witness={'cluster': vertex},
        )

    def _claim(self, vertex, path, inter):
        for previous, site in zip(path, path[1:-1]):
            self.owner[site] = vertex
            self.tau[site] = self.tau[previous] * self._sign(previous, site)
            self.added.add(site)
        target = path[-1]
        if target not in self.tau:
            # Free gauge of a lone target, it follows the path
            sign = self.tau[path[-2]] * self._sign(path[-2], target)
            self.tau[target] = sign if not inter else -sign

    def components(self, vertex):
        """
        Connected pieces of a cluster, each one sorted.
        """
        sites = [site for site, owner in self.owner.items() if owner == vertex]
        graph = nx.Graph()
        graph.add_nodes_from(sites)
        graph.add_edges_from(
            (site, neighbor)
            for site in sites
            for neighbor in self.spec.neighbors(site)
            if neighbor in graph
        )
        return sorted(
            sorted(piece) for piece in nx.connected_components(graph)
        )


def _reconnect(router, vertex, terminals, representative):
    """
    Drop the pieces of a cluster without terminals and join the rest.
    """
    pieces = router.components(vertex)
    if not pieces:
        raise RoutingFailed(
            'Every site of cluster {} is defective'.format(vertex),
            witness={'cluster': vertex},
        )
    kept = [piece for piece in pieces if terminals & set(piece)] or pieces[:1]
    for piece in pieces:
        if piece not in kept:
            for site in piece:
                del router.owner[site]
                del router.tau[site]
    main = next(
        (piece for piece in kept if representative in piece),
        kept[0],
    )
    pending = [piece for piece in kept if piece is not main]
    # Pieces wait outside the cluster until a path reaches them
    for piece in pending:
        for site in piece:
            router.owner[site] = None
    for piece in pending:
        router.route(vertex, set(piece), inter=False)
        for site in piece:
            router.owner[site] = vertex
    return representative if representative in router.owner else main[0]


def _routing_region(program, margin):
    """
    Program box grown by margin sites on every side, restricted to the
    bonds a random pattern has signs for.
    """
    xs = [x for x, _ in program.sites]
    ys = [y for _, y in program.sites]
    region = {
        (x, y)
        for x in range(min(xs) - margin, max(xs) + margin + 1)
        for y in range(min(ys) - margin, max(ys) + margin + 1)
    }
    if program.spec.pattern == RANDOM:
        signed = {site for edge in program.spec.signs for site in edge}
        region &= signed | set(program.sites)
    return region


def reroute(
    program,
    defects,
    certify=False,
    radius=2,
    budget=24,
    margin=ROUTING_MARGIN,
):
    """
    Route a program around the sites implicated by its defects.

    Implicated sites are deleted with the realized couplings. Clusters
    split by them are joined again and the broken links are routed anew,
    both through defect free sites and keeping the effective signs. Paths
    may leave the program box by up to margin sites, the couplings out
    there are nominal.

    Arguments:
        program (HardwareProgram): Program on a square lattice.
        defects (DefectMap): Classified defects.
        certify (bool): Certify the links of the result by clamped
            enumeration.
        margin (int): Lattice sites around the program box paths may use.

    Returns:
        HardwareProgram: Same cluster ids, no implicated site active.
    """

    bad = defects.sites
    if not bad:
        return program
    if program.spec.geometry != SQUARE:
        raise PatternMismatch('Rerouting needs a square lattice')

    couplings = dict(program.couplings)
    couplings.update(defects.realized)

    def value(a, b):
        return couplings.get(
            _edge(a, b),
            program.spec.sign(a, b) * program.magnitude,
        )

    cluster_of = program.cluster_of()
    owner = {site: v for site, v in cluster_of.items() if site not in bad}
    tau = {site: program.tau[site] for site in owner}
    blocked = bad | program.defective
    router = _Router(
        program.spec,
        _routing_region(program, margin),
        owner,
        tau,
        blocked,
        value,
    )

    terminals = [set() for _ in program.clusters]
    broken = []
    for a, b in program.links:
        u, v = cluster_of[a], cluster_of[b]
        if a in bad or b in bad:
            broken.append((min(u, v), max(u, v)))
        else:
            terminals[u].add(a)
            terminals[v].add(b)

    representatives = []
    for vertex, sites in enumerate(program.clusters):
        representative = sites[0]
        if representative not in bad:
            terminals[vertex].add(representative)
        representatives.append(
            _reconnect(router, vertex, terminals[vertex], representative)
        )

    for u, v in sorted(broken):
        targets = {site for site, owner in router.owner.items() if owner == v}
        path = router.route(u, targets, inter=True)
        log.debug('Link {} - {} routed through {} sites'.format(
            u,
            v,
            len(path) - 2,
        ))

    roles = dict(program.roles)
    for site in bad:
        roles[site] = DELETED
    for site in router.added:
        roles[site] = AUXILIARY
    for vertex, site in enumerate(representatives):
        roles[site] = WORKING

    rerouted = _assemble(
        program.spec,
        roles,
        router.owner,
        representatives,
        program.magnitude,
        program.threshold,
        couplings,
        defective=blocked,
    )
    log.info(
        'Rerouted around {} defective sites with {} new sites'.format(
            len(bad),
            len(router.added),
        )
    )

    if certify:
        for result in certify_links(rerouted, radius, budget):
            if result['passed'] is False:
                raise RoutingFailed(
                    'Link {} is effectively {} after rerouting'.format(
                        result['link'],
                        result['observed'],
                    ),
                    witness=result,
                )
    return rerouted


def route_layout(layout, spec=None, pitch=4, seed=0, magnitude=1, threshold=1):
    """
    Route a square layout on a lattice with random coupling signs.

    Layout sites are spread pitch sites apart and the links between them
    become parity correct paths: ferromagnetic in the gauge inside the
    clusters and antiferromagnetic between them.

    Arguments:
        layout (ClusterLayout): Square layout.
        spec (LatticeSpec): Pattern to route on, a random one drawn with
            seed if missing.
        pitch (int): Lattice spacing between layout sites.

    Returns:
        HardwareProgram
    """

    if layout.geometry != SQUARE:
        raise PatternMismatch('Layout is not square')
    if pitch < 2:
        raise ConfigError('Pitch must be at least 2')

    def place(site):
        return (pitch * (site[0] + 1), pitch * (site[1] + 1))

    size = pitch * (layout.side + 2)
    region = [(x, y) for x in range(size + 1) for y in range(size + 1)]
    if spec is None:
        spec = LatticeSpec.random(region, seed)

    def value(a, b):
        return spec.sign(a, b) * magnitude

    # Every layout site is reserved before any path is routed
    owner = {place(site): None for site in layout.cluster_of()}
    tau = {}
    for vertex, sites in enumerate(layout.clusters):
        owner[place(sites[0])] = vertex
        tau[place(sites[0])] = 1
    router = _Router(spec, region, owner, tau, set(), value)

    ferro = [(a, b) for a, b, kind in layout.links if kind == FERRO]
    cluster_of = layout.cluster_of()
    for vertex, sites in enumerate(layout.clusters):
        joined = {sites[0]}
        pending = [
            (a, b) for a, b in ferro if cluster_of[a] == vertex
        ]
        while pending:
            for a, b in pending:
                if (a in joined) != (b in joined):
                    new = b if a in joined else a
                    router.owner[place(new)] = None
                    router.route(vertex, {place(new)}, inter=False)
                    router.owner[place(new)] = vertex
                    joined.add(new)
                    pending.remove((a, b))
                    break
            else:
                raise PatternMismatch(
                    'Cluster {} of the layout is not a tree'.format(vertex)
                )

    for a, b, kind in sorted(layout.links):
        if kind != ANTIFERRO:
            continue
        u, v = cluster_of[a], cluster_of[b]
        router.route(
            u,
            {site for site, owner in router.owner.items() if owner == v},
            inter=True,
        )

    roles = {site: DELETED for site in region}
    for site in router.owner:
        roles[site] = AUXILIARY
        for neighbor in spec.neighbors(site):
            if roles.get(neighbor) == DELETED and neighbor not in router.owner:
                roles[neighbor] = CONTROL
    representatives = [place(sites[0]) for sites in layout.clusters]
    for site in representatives:
        roles[site] = WORKING

    program = _assemble(
        spec,
        roles,
        router.owner,
        representatives,
        magnitude,
        threshold,
    )
    log.info(
        'Routed {} clusters on a random pattern with {} active sites'.format(
            len(layout.clusters),
            len(program.active),
        )
    )
    return program


def _trial(program, densities, threshold, seed):
    """
    Successes of one trial for every density, with nested defect sets.
    """
    rng = np.random.default_rng(seed)
    edges = program.edges()
    draws = rng.random(len(edges))
    kinds = rng.random(len(edges))
    outcomes = []
    for density in densities:
        realized = {}
        for (a, b), draw, kind in zip(edges, draws, kinds):
            if draw >= density:
                continue
            nominal = program.coupling(a, b)
            if kind < 0.5:
                realized[(a, b)] = -nominal
            else:
                realized[(a, b)] = Fraction(nominal) / 2
        defects = classify_defects(program.spec, realized, threshold)
        try:
            reroute(program, defects)
        except (RoutingFailed, PatternMismatch) as error:
            log.debug('Trial failed at density {}: {}'.format(
                density,
                error.message,
            ))
            outcomes.append(False)
            continue
        outcomes.append(True)
    return outcomes


def defect_sweep(program, densities, trials, seed=0, workers=1, threshold=None):
    """
    Monte Carlo success rate of rerouting a program per defect density.

    Every bond is defective with probability density, half of them with
    the wrong sign and half at half strength. Each trial draws once and
    reuses the draws for every density, so the defect sets of a trial grow
    with the density.

    Arguments:
        program (HardwareProgram): Program to damage.
        densities (list): Defect densities in [0, 1].
        trials (int): Trials per density.
        seed (int): Seed of the per trial random streams.
        workers (int): Threads running the trials.

    Returns:
        list: (density, trials, successes, rate) rows.
    """

    densities = list(densities)
    if any(not 0 <= density <= 1 for density in densities):
        raise ConfigError('Defect densities must be in [0, 1]')
    if trials < 1:
        raise ConfigError('At least one trial is needed')
    threshold = program.threshold if threshold is None else threshold

    streams = np.random.SeedSequence(seed).spawn(trials)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            outcomes = list(
                executor.map(
                    lambda stream: _trial(
                        program,
                        densities,
                        threshold,
                        stream,
                    ),
                    streams,
                )
            )
    else:
        outcomes = [
            _trial(program, densities, threshold, stream)
            for stream in streams
        ]

    rows = []
    for column, density in enumerate(densities):
        successes = sum(1 for outcome in outcomes if outcome[column])
        rows.append((density, trials, successes, successes / trials))
        log.info('Density {}: {} of {} reroutes succeeded'.format(
            density,
            successes,
            trials,
        ))
    return rows


def is_monotone(rows):
    """
    True if the success rate doesn't grow with the density.
    """
    ordered = sorted(rows)
    return all(a[3] >= b[3] for a, b in zip(ordered, ordered[1:]))
