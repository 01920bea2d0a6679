"""
Module to compile cluster layouts onto lattices with fixed couplings, where
the only programmable quantities are the local fields.

Couplings can't be switched off, so unused qubits are deleted: a dominating
field pins them to +1 and the fields of their neighbors compensate the
couplings they leave behind.

Physical lattices are square, sites are (x, y) coordinates.

Classes:
    LatticeSpec: Lattice geometry with a fixed sign on every coupling.
    HardwareProgram: Local field program of a fixed coupling lattice.

Functions:
    delete_qubit: Remove a spin from an instance by polarizing it.
    delete_qubits: Remove several spins at once.
    compile_simulated_triangular: Simulate a switchable triangular lattice.
    compile_simulated_square: Simulate a sign programmable square lattice.
    compile_direct_square: Embed a graph directly in a fixed sign lattice.
    compile_direct_layout: Compile a square layout on the direct pattern.
    effective_coupling: Clamped enumeration of the coupling of two spins.
    certify_effective_coupling: Classify the effective coupling of two spins.
    certify_links: Certify every link of a program.
    program_stats: Size summary of a program.
"""

from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pymis.embedder import (
    ANTIFERRO,
    FERRO,
    NEIGHBOR_OFFSETS,
    SQUARE,
    SQUARE_OFFSETS,
    TRIANGULAR,
    TriLattice,
    embed_square,
)
from pymis.errors import (
    AlreadyDeleted,
    ConfigError,
    GaugeViolation,
    PatchTooLarge,
    PatternMismatch,
    ThresholdViolation,
    TreeViolation,
)
from pymis.models import (
    ClusterModel,
    IsingInstance,
    from_number,
    to_number,
)
from pymis.oracle import FLOAT_TOLERANCE, ising_ground
from pymis.reduction import build_cluster_hamiltonian, decode, orient_tau

import logging
import networkx as nx
import numpy as np

log = logging.getLogger(__name__)

HALF_FRUSTRATED = 'half-frustrated'
SIMULATED_TRIANGULAR = 'simulated-triangular'
SIMULATED_SQUARE = 'simulated-square'
DIRECT = 'direct'
RANDOM = 'random'

WORKING = 'working'
AUXILIARY = 'auxiliary'
CONTROL = 'control'
DELETED = 'deleted'
ROLES = (WORKING, AUXILIARY, CONTROL, DELETED)

SEVERED = 'none'

# Unit cell of the half frustrated pattern, one per simulated site
CELL_ROLES = {
    (0, 0): AUXILIARY,
    (1, 0): WORKING,
    (2, 0): AUXILIARY,
    (3, 0): CONTROL,
    (0, 1): CONTROL,
    (1, 1): DELETED,
    (2, 1): CONTROL,
    (3, 1): DELETED,
}
CELL_CONTROLS = {(1, 0): (3, 0), (0, 1): (2, 1), (-1, 1): (0, 1)}

# Fabric joining two working sites PITCH sites apart. Both routes go from
# the fork to the join and enclose nine plaquettes between them.
PITCH = 8
WORKING_OFFSET = 2
FABRIC_TAIL = ((1, 0), (2, 0))
FABRIC_ROUTES = (
    ('shallow', ((2, 1), (3, 1), (4, 1), (5, 1)), 2),
    ('deep', ((2, -1), (2, -2), (3, -2), (4, -2), (5, -2), (5, -1)), 3),
)
FABRIC_HEAD = ((5, 0), (6, 0), (7, 0))


def _edge(a, b):
    a, b = tuple(a), tuple(b)
    return (a, b) if a <= b else (b, a)


def _cell_local(site):
    x, y = site
    r, dy = divmod(y, 2)
    return (x - 2 * r) % 4, dy


def _half_frustrated(a, b):
    """
    Cells of 4 x 2 sites, shifted two columns every row pair. Horizontal
    bonds leaving local column 3 of the lower row and vertical bonds leaving
    local columns 0 and 2 of the upper row are antiferromagnetic.
    """
    dx, dy = _cell_local(a)
    if a[1] == b[1]:
        return -1 if (dx, dy) == (3, 0) else 1
    return -1 if dy == 1 and dx in (0, 2) else 1


def _even_columns(a, b):
    return -1 if a[0] == b[0] and a[0] % 2 == 0 else 1


def _even_rows(a, b):
    return -1 if a[1] == b[1] and a[1] % 2 == 0 else 1


def _antiferro(a, b):
    return -1


PATTERNS = {
    HALF_FRUSTRATED: (SQUARE, _half_frustrated),
    SIMULATED_TRIANGULAR: (TRIANGULAR, _antiferro),
    SIMULATED_SQUARE: (SQUARE, _even_rows),
    DIRECT: (SQUARE, _even_columns),
    RANDOM: (SQUARE, None),
}


class LatticeSpec:
    """
    Lattice geometry with a fixed sign on every coupling.

    Arguments:
        pattern (str): Pattern id, one of PATTERNS.
        signs (dict): (site, site) -> sign, only for random patterns.
        seed (int): Seed the random signs were drawn with.

    Public methods:
        sign: Fixed sign of a lattice bond.
        neighbors: Lattice neighbors of a site.
        plaquettes: Elementary loops of a box.
        frustration: Fraction of frustrated plaquettes of a box.
        check: Certify the pattern constraints.
        random: Pattern with random signs.
    """

    def __init__(self, pattern, signs=None, seed=None):
        if pattern not in PATTERNS:
            raise ConfigError('Unknown lattice pattern {}'.format(pattern))
        if pattern == RANDOM and signs is None:
            raise ConfigError('Random patterns need their signs')
        self.pattern = pattern
        self.geometry, self._rule = PATTERNS[pattern]
        self.signs = {
            _edge(a, b): int(sign) for (a, b), sign in (signs or {}).items()
        }
        self.seed = seed
        if self.geometry == SQUARE:
            self.offsets = SQUARE_OFFSETS
        else:
            self.offsets = NEIGHBOR_OFFSETS

    @classmethod
    def random(cls, sites, seed):
        """
        Pattern with an independent random sign on every bond of sites.
        """
        sites = set(map(tuple, sites))
        edges = sorted(
            _edge(site, (site[0] + dx, site[1] + dy))
            for site in sites for dx, dy in ((1, 0), (0, 1))
            if (site[0] + dx, site[1] + dy) in sites
        )
        rng = np.random.default_rng(seed)
        draws = rng.choice((-1, 1), size=len(edges))
        return cls(RANDOM, dict(zip(edges, draws)), seed)

    def adjacent(self, a, b):
        return (b[0] - a[0], b[1] - a[1]) in self.offsets

    def neighbors(self, site):
        return [(site[0] + dx, site[1] + dy) for dx, dy in self.offsets]

    def sign(self, a, b):
        if not self.adjacent(a, b):
            raise PatternMismatch(
                'Sites {} and {} are not lattice neighbors'.format(a, b)
            )
        a, b = _edge(a, b)
        if self._rule is not None:
            return self._rule(a, b)
        try:
            return self.signs[(a, b)]
        except KeyError:
            raise PatternMismatch(
                'Bond {} - {} is outside the random pattern'.format(a, b)
            )

    def plaquettes(self, width, height, origin=(0, 0)):
        """
        Elementary loops with their lower left corner in the box.
        """
        loops = []
        for x in range(origin[0], origin[0] + width):
            for y in range(origin[1], origin[1] + height):
                if self.geometry == SQUARE:
                    loops.append(((x, y), (x + 1, y), (x + 1, y + 1), (x, y + 1)))
                else:
                    loops.append(((x, y), (x + 1, y), (x, y + 1)))
                    loops.append(((x + 1, y), (x + 1, y + 1), (x, y + 1)))
        return loops

    def loop_sign(self, loop):
        sign = 1
        for a, b in zip(loop, loop[1:] + loop[:1]):
            sign *= self.sign(a, b)
        return sign

    def frustration(self, width=8, height=8, origin=(0, 0)):
        loops = self.plaquettes(width, height, origin)
        frustrated = sum(1 for loop in loops if self.loop_sign(loop) < 0)
        return Fraction(frustrated, len(loops))

    def _box(self):
        if self.pattern != RANDOM:
            return 8, 8, (0, 0)
        sites = [site for edge in self.signs for site in edge]
        x0 = min(x for x, _ in sites)
        y0 = min(y for _, y in sites)
        return (
            max(x for x, _ in sites) - x0,
            max(y for _, y in sites) - y0,
            (x0, y0),
        )

    def check(self):
        """
        Certify the pattern constraints by plaquette enumeration.

        Every pattern needs a frustrated loop, the half frustrated one has
        exactly half of its plaquettes frustrated and the one-in-four ones
        have one bond of one kind and three of the other in every plaquette.

        Returns:
            Fraction: Frustrated fraction of the checked box.
        """

        width, height, origin = self._box()
        fraction = self.frustration(width, height, origin)
        if fraction == 0:
            raise PatternMismatch(
                'Pattern {} has no frustrated loop'.format(self.pattern)
            )
        if self.pattern == HALF_FRUSTRATED and fraction != Fraction(1, 2):
            raise PatternMismatch(
                'Pattern {} has {} frustrated plaquettes'.format(
                    self.pattern,
                    fraction,
                )
            )
        if self.pattern in (SIMULATED_SQUARE, DIRECT):
            for loop in self.plaquettes(width, height, origin):
                signs = [
                    self.sign(a, b) for a, b in zip(loop, loop[1:] + loop[:1])
                ]
                if signs.count(-1) not in (1, 3):
                    raise PatternMismatch(
                        'Plaquette {} of pattern {} has {} '
                        'antiferromagnetic bonds'.format(
                            loop[0],
                            self.pattern,
                            signs.count(-1),
                        )
                    )
        return fraction

    def to_dict(self):
        data = {'pattern': self.pattern, 'geometry': self.geometry}
        if self.pattern == RANDOM:
            data['seed'] = self.seed
            data['signs'] = [
                [list(a), list(b), sign]
                for (a, b), sign in sorted(self.signs.items())
            ]
        return data

    @classmethod
    def from_dict(cls, data):
        try:
            signs = None
            if 'signs' in data:
                signs = {
                    (tuple(a), tuple(b)): sign for a, b, sign in data['signs']
                }
            return cls(data['pattern'], signs, data.get('seed'))
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError('Invalid lattice pattern data: {}'.format(e))


def _lattice_edges(spec, sites):
    sites = set(sites)
    return sorted(
        _edge(site, neighbor)
        for site in sites for neighbor in spec.neighbors(site)
        if neighbor in sites and site < neighbor
    )


def _instance_threshold(threshold, values):
    """
    Scale J of a physical instance, lowered to the weakest realized
    coupling so defective bonds can still be represented.
    """
    magnitudes = [abs(value) for value in values if value != 0]
    return min([threshold] + magnitudes)


class HardwareProgram:
    """
    Local field program of a lattice with fixed couplings.

    Arguments:
        spec (LatticeSpec): Coupling pattern of the lattice.
        roles (dict): Site -> role of every site of the lattice region.
        fields (dict): Site -> longitudinal field.
        deleted (iterable): Deleted sites.
        clusters (list): Active sites of each graph vertex, the first one
            is the representative.
        links (list): (site, site) couplings between clusters.
        tau (dict): Gauge sign of every active site.
        constant (number): Energy offset to the canonical form.
        magnitude (number): Nominal coupling magnitude.
        threshold (number): Energy scale J of the encoded Hamiltonian.
        couplings (dict): Optional (site, site) -> realized coupling that
            overrides the nominal value.
        defective (iterable): Sites implicated by coupling defects.

    Attributes and properties:
        sites (list): Sorted lattice sites, their index is the spin id.
        active (list): Sorted non deleted sites.
    """

    def __init__(
        self,
        spec,
        roles,
        fields,
        deleted,
        clusters,
        links,
        tau,
        constant=0,
        magnitude=1,
        threshold=1,
        couplings=None,
        defective=(),
    ):
        self.spec = spec
        self.roles = {tuple(site): role for site, role in roles.items()}
        self.sites = sorted(self.roles)
        self.index = {site: i for i, site in enumerate(self.sites)}
        self.fields = {tuple(site): h for site, h in fields.items()}
        self.deleted = set(map(tuple, deleted))
        self.clusters = [list(map(tuple, sites)) for sites in clusters]
        self.links = [_edge(a, b) for a, b in links]
        self.tau = {tuple(site): sign for site, sign in tau.items()}
        self.constant = constant
        self.magnitude = magnitude
        self.threshold = threshold
        self.couplings = {
            _edge(a, b): value for (a, b), value in (couplings or {}).items()
        }
        self.defective = set(map(tuple, defective))

    @property
    def active(self):
        return [site for site in self.sites if site not in self.deleted]

    def coupling(self, a, b):
        edge = _edge(a, b)
        if edge in self.couplings:
            return self.couplings[edge]
        return self.spec.sign(a, b) * self.magnitude

    def edges(self):
        return _lattice_edges(self.spec, self.sites)

    def cluster_of(self):
        return {
            site: vertex
            for vertex, sites in enumerate(self.clusters)
            for site in sites
        }

    def decode_map(self):
        """
        Representative site -> (cluster, gauge sign).
        """
        return {
            sites[0]: (vertex, self.tau[sites[0]])
            for vertex, sites in enumerate(self.clusters)
        }

    def to_instance(self):
        """
        Ising instance of the whole lattice region.
        """
        couplings = [
            (self.index[a], self.index[b], self.coupling(a, b))
            for a, b in self.edges()
        ]
        return IsingInstance(
            len(self.sites),
            couplings,
            [self.fields.get(site, 0) for site in self.sites],
            _instance_threshold(self.threshold, [J for _, _, J in couplings]),
            self.constant,
            [[self.index[site] for site in sites] for sites in self.clusters],
            [self.tau.get(site, 1) for site in self.sites],
            [self.index[site] for site in self.deleted],
        )

    def decode(self, config):
        return decode(self.to_instance(), config)

    def dimensions(self):
        if not self.sites:
            return {'width': 0, 'height': 0, 'origin': [0, 0]}
        xs = [x for x, _ in self.sites]
        ys = [y for _, y in self.sites]
        return {
            'width': max(xs) - min(xs) + 1,
            'height': max(ys) - min(ys) + 1,
            'origin': [min(xs), min(ys)],
        }

    def to_dict(self):
        data = {
            'lattice': self.spec.to_dict(),
            'dimensions': self.dimensions(),
            'magnitude': from_number(self.magnitude),
            'threshold': from_number(self.threshold),
            'constant': from_number(self.constant),
            'sites': [
                {
                    'coord': list(site),
                    'role': self.roles[site],
                    'field': from_number(self.fields.get(site, 0)),
                }
                for site in self.sites
            ],
            'deleted': [list(site) for site in sorted(self.deleted)],
            'clusters': [
                [list(site) for site in sites] for sites in self.clusters
            ],
            'links': [[list(a), list(b)] for a, b in self.links],
            'decode': [
                {'site': list(site), 'cluster': vertex, 'tau': sign}
                for site, (vertex, sign) in self.decode_map().items()
            ],
            'tau': [
                [list(site), sign] for site, sign in sorted(self.tau.items())
            ],
        }
        if self.couplings:
            data['couplings'] = [
                [list(a), list(b), from_number(value)]
                for (a, b), value in sorted(self.couplings.items())
            ]
        if self.defective:
            data['defective'] = [list(site) for site in sorted(self.defective)]
        return data

    @classmethod
    def from_dict(cls, data):
        try:
            sites = data['sites']
            return cls(
                LatticeSpec.from_dict(data['lattice']),
                {tuple(site['coord']): site['role'] for site in sites},
                {
                    tuple(site['coord']): to_number(site['field'])
                    for site in sites
                },
                [tuple(site) for site in data['deleted']],
                data['clusters'],
                data['links'],
                {tuple(site): sign for site, sign in data['tau']},
                to_number(data.get('constant', 0)),
                to_number(data.get('magnitude', 1)),
                to_number(data.get('threshold', 1)),
                {
                    (tuple(a), tuple(b)): to_number(value)
                    for a, b, value in data.get('couplings', ())
                },
                [tuple(site) for site in data.get('defective', ())],
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError('Invalid hardware program data: {}'.format(e))

    def __repr__(self):
        return '<HardwareProgram pattern={} sites={} active={}>'.format(
            self.spec.pattern,
            len(self.sites),
            len(self.active),
        )


def delete_qubits(inst, spins):
    """
    Remove several spins from an instance by polarizing them.

    Each deleted spin i gets the field J + sum_k |J_ik|, which forces
    s_i = +1 in every ground state, and every neighbor k that stays gets
    h_k - J_ik so the coupling to the pinned spin cancels out. Neighbors
    that are already deleted keep their field, so the result doesn't depend
    on the deletion order.

    Arguments:
        inst (IsingInstance): Instance to modify.
        spins (iterable): Spin ids to delete.

    Returns:
        IsingInstance: With the marginal ground states of the instance
            without those spins.
    """

    spins = list(spins)
    removing = set(spins)
    for spin in spins:
        if not 0 <= spin < inst.n_spins:
            raise ConfigError('Spin {} does not exist'.format(spin))
        if spin in inst.deleted or spins.count(spin) > 1:
            raise AlreadyDeleted(
                'Spin {} is already deleted'.format(spin),
                witness={'spin': spin},
            )

    fields = list(inst.fields)
    constant = inst.constant
    for spin in removing:
        fields[spin] = inst.threshold + sum(
            abs(inst.coupling(spin, neighbor))
            for neighbor in inst.neighbors(spin)
        )
        constant += fields[spin]

    deleted = inst.deleted | removing
    for i, k, J in inst.couplings:
        if i not in removing and k not in removing:
            continue
        if i in deleted and k in deleted:
            constant += J
        elif i in removing:
            fields[k] -= J
        else:
            fields[i] -= J

    return IsingInstance(
        inst.n_spins,
        inst.couplings,
        fields,
        inst.threshold,
        constant,
        inst.clusters,
        inst.tau,
        deleted,
    )


def delete_qubit(inst, spin):
    """
    Remove a spin from an instance by polarizing it.

    The deleted spin is +1 in every ground state and the marginal ground
    states of the rest are those of the instance without the spin and its
    couplings.
    """
    return delete_qubits(inst, [spin])


def _assemble(
    spec,
    roles,
    owner,
    representatives,
    magnitude=1,
    threshold=1,
    couplings=None,
    variant='representative',
    defective=(),
):
    """
    Program where the owned sites encode the cluster Hamiltonian and every
    other site of the region is deleted.

    Arguments:
        owner (dict): Active site -> graph vertex.
        representatives (list): Representative site of each vertex.
    """

    couplings = {
        _edge(a, b): value for (a, b), value in (couplings or {}).items()
    }

    def value(a, b):
        return couplings.get(_edge(a, b), spec.sign(a, b) * magnitude)

    clusters = [
        [representative] + sorted(
            site for site, vertex in owner.items()
            if vertex == index and site != representative
        )
        for index, representative in enumerate(representatives)
    ]
    spin = {
        site: i
        for i, site in enumerate(site for sites in clusters for site in sites)
    }
    intra = []
    inter = []
    links = []
    for a, b in _lattice_edges(spec, spin):
        if owner[a] == owner[b]:
            intra.append((spin[a], spin[b], value(a, b)))
        else:
            inter.append((spin[a], spin[b], value(a, b)))
            links.append((a, b))

    model = ClusterModel(
        [[spin[site] for site in sites] for sites in clusters],
        intra,
        inter,
    )
    try:
        model = orient_tau(model)
        encoded = build_cluster_hamiltonian(model, threshold, variant)
    except (ConfigError, GaugeViolation, ThresholdViolation, TreeViolation) \
            as e:
        raise PatternMismatch(
            'Layout does not fit pattern {}: {}'.format(
                spec.pattern,
                e.message,
            ),
            witness=e.witness,
        )

    sites = sorted(roles)
    index = {site: i for i, site in enumerate(sites)}
    physical = [
        (index[a], index[b], value(a, b))
        for a, b in _lattice_edges(spec, sites)
    ]
    fields = [0] * len(sites)
    for site, i in spin.items():
        fields[index[site]] = encoded.fields[i]
    inst = IsingInstance(
        len(sites),
        physical,
        fields,
        _instance_threshold(threshold, [J for _, _, J in physical]),
        encoded.constant,
    )
    inst = delete_qubits(
        inst,
        [index[site] for site in sites if site not in spin],
    )

    return HardwareProgram(
        spec,
        roles,
        {site: inst.fields[index[site]] for site in sites},
        [site for site in sites if site not in spin],
        clusters,
        links,
        {site: model.tau[i] for site, i in spin.items()},
        inst.constant,
        magnitude,
        threshold,
        couplings,
        defective,
    )


def _cell_origin(site, side):
    q, r = site
    return (4 * (q + side) + 2 * r, 2 * r)


def _link_control(a, b, side):
    """
    Control site of the simulated link a - b.
    """
    direction = (b[0] - a[0], b[1] - a[1])
    if direction in CELL_CONTROLS:
        owner, offset = a, CELL_CONTROLS[direction]
    elif (-direction[0], -direction[1]) in CELL_CONTROLS:
        owner, offset = b, CELL_CONTROLS[(-direction[0], -direction[1])]
    else:
        raise PatternMismatch(
            'Sites {} and {} are not triangular neighbors'.format(a, b)
        )
    x0, y0 = _cell_origin(owner, side)
    return owner, (x0 + offset[0], y0 + offset[1])


def compile_simulated_triangular(
    layout,
    magnitude=1,
    threshold=1,
    full=False,
    variant='representative',
):
    """
    Compile a triangular layout onto the half frustrated square lattice.

    Every simulated site becomes a cell of 8 qubits: the working qubit, two
    auxiliary ones, three controls for its east, north and north west links
    and two deleted ones. A link is on when its control belongs to a
    cluster and off when the control is deleted; the paths through the
    controls are always effectively antiferromagnetic.

    Arguments:
        layout (ClusterLayout): Triangular layout.
        magnitude (number): Coupling magnitude of the lattice.
        threshold (number): Energy scale J.
        full (bool): Include the cells of the unused sites of the triangle,
            all deleted.
        variant (str): Degeneracy breaking variant of the reduction.

    Returns:
        HardwareProgram
    """

    if layout.geometry != TRIANGULAR:
        raise PatternMismatch('Layout is not triangular')
    spec = LatticeSpec(HALF_FRUSTRATED)
    spec.check()

    lattice = TriLattice(layout.side)
    cluster_of = layout.cluster_of()
    outside = sorted(site for site in cluster_of if not lattice.contains(site))
    if outside:
        raise PatternMismatch(
            'Sites {} exceed the triangle of side {}'.format(
                outside,
                layout.side,
            ),
            witness={'sites': [list(site) for site in outside]},
        )

    cells = lattice.sites() if full else sorted(cluster_of)
    roles = {}
    for cell in cells:
        x0, y0 = _cell_origin(cell, layout.side)
        for (dx, dy), role in CELL_ROLES.items():
            roles[(x0 + dx, y0 + dy)] = role

    owner = {}
    for site, vertex in cluster_of.items():
        x0, y0 = _cell_origin(site, layout.side)
        for dx in range(3):
            owner[(x0 + dx, y0)] = vertex
    for a, b, _ in layout.links:
        cell, control = _link_control(a, b, layout.side)
        owner[control] = cluster_of[cell]

    representatives = []
    for sites in layout.clusters:
        x0, y0 = _cell_origin(sites[0], layout.side)
        representatives.append((x0 + 1, y0))

    program = _assemble(
        spec,
        roles,
        owner,
        representatives,
        magnitude,
        threshold,
        variant=variant,
    )
    log.info(
        'Compiled {} simulated sites into {} qubits, {} deleted'.format(
            len(cells),
            len(program.sites),
            len(program.deleted),
        )
    )
    return program


def _working_site(site):
    return (PITCH * site[0] + WORKING_OFFSET, PITCH * site[1] + WORKING_OFFSET)


def _fabric(working, horizontal):
    """
    Tail, (name, route, near count) options and head of the fabric that
    leaves a working site eastwards or northwards.
    """
    x, y = working

    def place(offsets):
        if horizontal:
            return [(x + dx, y + dy) for dx, dy in offsets]
        return [(x + dy, y + dx) for dx, dy in offsets]

    routes = [(name, place(route), near) for name, route, near in FABRIC_ROUTES]
    return place(FABRIC_TAIL), routes, place(FABRIC_HEAD)


def _path_sign(spec, path):
    sign = 1
    for a, b in zip(path, path[1:]):
        sign *= spec.sign(a, b)
    return sign


def compile_simulated_square(
    layout,
    magnitude=1,
    threshold=1,
    full=False,
    variant='representative',
):
    """
    Compile a square layout onto a fully frustrated square lattice that
    simulates a lattice with programmable link signs.

    Simulated sites sit PITCH sites apart. Each simulated link is a fabric
    with two routes that differ in sign, each one crossed by a control
    qubit: deleting both controls severs the link, deleting one of them
    leaves the other route, ferromagnetic or antiferromagnetic depending on
    which one was deleted.

    Arguments:
        layout (ClusterLayout): Square layout, ferromagnetic links become
            ferromagnetic simulated links and antiferromagnetic ones
            antiferromagnetic simulated links.
        magnitude (number): Coupling magnitude of the lattice.
        threshold (number): Energy scale J.
        full (bool): Include the cells of the unused sites of the square.
        variant (str): Degeneracy breaking variant of the reduction.

    Returns:
        HardwareProgram
    """

    if layout.geometry != SQUARE:
        raise PatternMismatch('Layout is not square')
    spec = LatticeSpec(SIMULATED_SQUARE)
    spec.check()

    cluster_of = layout.cluster_of()
    if full:
        cells = [
            (x, y)
            for x in range(layout.side + 1) for y in range(layout.side + 1)
        ]
    else:
        cells = sorted(cluster_of)
    roles = {}
    for x, y in cells:
        for dx in range(PITCH):
            for dy in range(PITCH):
                roles[(PITCH * x + dx, PITCH * y + dy)] = DELETED
    owner = {}
    for site, vertex in cluster_of.items():
        roles[_working_site(site)] = WORKING
        owner[_working_site(site)] = vertex

    kinds = {_edge(a, b): kind for a, b, kind in layout.links}
    for site in sorted(cluster_of):
        for step in ((1, 0), (0, 1)):
            other = (site[0] + step[0], site[1] + step[1])
            if other not in cluster_of:
                continue
            start, end = _working_site(site), _working_site(other)
            tail, routes, head = _fabric(start, step == (1, 0))
            kind = kinds.get(_edge(site, other))
            wanted = {FERRO: 1, ANTIFERRO: -1}.get(kind)

            for fabric_site in tail + head:
                roles[fabric_site] = AUXILIARY
            for fabric_site in tail:
                owner[fabric_site] = cluster_of[site]
            for fabric_site in head:
                owner[fabric_site] = cluster_of[other]
            for _, route, near in routes:
                path = [start] + tail + route + head + [end]
                keep = _path_sign(spec, path) == wanted
                for position, fabric_site in enumerate(route):
                    control = position == near - 1
                    roles[fabric_site] = CONTROL if control else AUXILIARY
                    if control and not keep:
                        continue
                    owner[fabric_site] = cluster_of[
                        site if position < near else other
                    ]

    program = _assemble(
        spec,
        roles,
        owner,
        [_working_site(sites[0]) for sites in layout.clusters],
        magnitude,
        threshold,
        variant=variant,
    )
    log.info(
        'Compiled {} simulated sites into {} qubits, {} deleted'.format(
            len(cells),
            len(program.sites),
            len(program.deleted),
        )
    )
    return program


def compile_direct_square(
    g,
    magnitude=1,
    threshold=1,
    prune=True,
    variant='representative',
):
    """
    Embed a graph directly in the square lattice where every plaquette has
    one antiferromagnetic bond and three ferromagnetic ones.

    The embedding picks, for every new link, the route whose effective
    coupling is antiferromagnetic. Unused sites of the bounding square are
    deleted; the ones next to a cluster are the controls that keep the
    unwanted bonds off.

    Returns:
        HardwareProgram: Inside a square of side at most 6 (N - 1).
    """

    spec = LatticeSpec(DIRECT)
    spec.check()
    return compile_direct_layout(
        embed_square(g, spec.sign, prune),
        magnitude,
        threshold,
        variant,
    )


def compile_direct_layout(
    layout,
    magnitude=1,
    threshold=1,
    variant='representative',
):
    """
    Compile a square layout embedded against the direct pattern signs.
    """

    if layout.geometry != SQUARE:
        raise PatternMismatch('Layout is not square')
    spec = LatticeSpec(DIRECT)
    used = layout.cluster_of()
    xs = [x for x, _ in used]
    ys = [y for _, y in used]
    roles = {}
    for x in range(min(xs), max(xs) + 1):
        for y in range(min(ys), max(ys) + 1):
            roles[(x, y)] = DELETED
    for site in used:
        for neighbor in spec.neighbors(site):
            if neighbor in roles and neighbor not in used:
                roles[neighbor] = CONTROL
    for sites in layout.clusters:
        roles[sites[0]] = WORKING
        for site in sites[1:]:
            roles[site] = AUXILIARY

    program = _assemble(
        spec,
        roles,
        used,
        [sites[0] for sites in layout.clusters],
        magnitude,
        threshold,
        variant=variant,
    )
    log.info(
        'Embedded {} vertices directly in {} qubits, {} deleted'.format(
            len(layout.clusters),
            len(program.sites),
            len(program.deleted),
        )
    )
    return program


def _active_graph(program, within=None):
    active = set(program.active)
    if within is not None:
        active &= set(within)
    graph = nx.Graph()
    graph.add_nodes_from(sorted(active))
    graph.add_edges_from(
        (site, neighbor)
        for site in sorted(active)
        for neighbor in program.spec.neighbors(site)
        if neighbor in active
    )
    return graph


def effective_coupling(program, a, b, radius=2, budget=24, within=None):
    """
    Effective coupling between two active sites.

    The patch holds a shortest active path between them and the active
    sites up to radius steps away. With both spins clamped to each of their
    four joint values the free spins are minimized exhaustively, without
    fields, and

        J_eff = (E(+-) + E(-+) - E(++) - E(--)) / 4

    Arguments:
        within (iterable): Optional sites the patch is restricted to.

    Returns:
        number: Positive if ferromagnetic, negative if antiferromagnetic,
            zero if severed.
    """

    a, b = tuple(a), tuple(b)
    graph = _active_graph(program, within)
    for site in (a, b):
        if site not in graph:
            raise ConfigError('Site {} is not an active site'.format(site))

    try:
        path = nx.shortest_path(graph, a, b)
    except nx.NetworkXNoPath:
        return 0
    patch = set()
    for site in path:
        patch.update(
            nx.single_source_shortest_path_length(graph, site, cutoff=radius)
        )
    if len(patch) - 2 > budget:
        raise PatchTooLarge(
            'Patch of {} - {} has {} free spins, budget is {}'.format(
                a,
                b,
                len(patch) - 2,
                budget,
            ),
            witness={'sites': [list(a), list(b)]},
        )

    sites = sorted(patch)
    index = {site: i for i, site in enumerate(sites)}
    couplings = [
        (index[s], index[t], program.coupling(s, t))
        for s, t in _lattice_edges(program.spec, sites)
    ]
    inst = IsingInstance(
        len(sites),
        couplings,
        [0] * len(sites),
        _instance_threshold(program.threshold, [J for _, _, J in couplings]),
    )
    energies = {}
    for clamp_a in (1, -1):
        for clamp_b in (1, -1):
            solution = ising_ground(
                inst,
                budget,
                fixed={index[a]: clamp_a, index[b]: clamp_b},
            )
            energies[(clamp_a, clamp_b)] = solution.ground_energy
    value = (
        energies[(1, -1)] + energies[(-1, 1)]
        - energies[(1, 1)] - energies[(-1, -1)]
    )
    if isinstance(value, float):
        return value / 4
    return Fraction(value) / 4


def certify_effective_coupling(program, a, b, radius=2, budget=24, within=None):
    """
    Classify the effective coupling of two sites as FERRO, ANTIFERRO or
    SEVERED by clamped enumeration.
    """
    value = effective_coupling(program, a, b, radius, budget, within)
    if value > FLOAT_TOLERANCE:
        return FERRO
    if value < -FLOAT_TOLERANCE:
        return ANTIFERRO
    return SEVERED


def _nearest_working(program, site, sites):
    """
    Closest working site of a cluster, its representative if none.
    """
    distances = nx.single_source_shortest_path_length(
        _active_graph(program, sites),
        site,
    )
    working = [
        (distance, current)
        for current, distance in distances.items()
        if program.roles[current] == WORKING
    ]
    if working:
        return min(working)[1]
    return sites[0]


def _certify_link(program, link, radius, budget):
    a, b = link
    cluster_of = program.cluster_of()
    first = program.clusters[cluster_of[a]]
    second = program.clusters[cluster_of[b]]
    start = _nearest_working(program, a, first)
    end = _nearest_working(program, b, second)
    # Along a gauge consistent tree path the product of the couplings is
    # -tau_start tau_end
    expected = ANTIFERRO if program.tau[start] * program.tau[end] > 0 \
        else FERRO
    result = {
        'link': [list(a), list(b)],
        'sites': [list(start), list(end)],
        'expected': expected,
    }
    try:
        observed = certify_effective_coupling(
            program,
            start,
            end,
            radius,
            budget,
            within=first + second,
        )
    except PatchTooLarge as error:
        result.update(observed=None, passed=None, detail=error.message)
        return result
    result.update(observed=observed, passed=observed == expected)
    return result


def certify_links(program, radius=2, budget=24, workers=1):
    """
    Certify that every link between clusters joins their working sites
    with the effective sign the gauge requires.

    Returns:
        list: One dict per link with the expected and observed effective
            coupling, passed is None when the patch exceeds the budget.
    """

    if workers > 1 and len(program.links) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return list(
                executor.map(
                    lambda link: _certify_link(program, link, radius, budget),
                    program.links,
                )
            )
    return [
        _certify_link(program, link, radius, budget) for link in program.links
    ]


def program_stats(program):
    """
    Size summary of a program.
    """
    roles = list(program.roles.values())
    stats = {
        'pattern': program.spec.pattern,
        'sites': len(program.sites),
        'active': len(program.active),
        'deleted': len(program.deleted),
        'clusters': len(program.clusters),
        'links': len(program.links),
        'roles': {role: roles.count(role) for role in ROLES},
    }
    stats.update(program.dimensions())
    return stats
