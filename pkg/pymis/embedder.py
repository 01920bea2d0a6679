"""
Module to embed planar graphs into triangular and square lattices as
clusters of spins.

Triangular sites use axial coordinates (q, r). Row r of the bounding
triangle of side L holds the sites q = -r..0, so the triangle corners are
(0, 0), (-L, L) and (0, L) and the eligible vertices live on the top row.
Square sites use (x, y) coordinates with the eligible vertices on the top
row of the bounding square.

Classes:
    TriLattice: Bounded triangular lattice.
    ClusterLayout: Clusters of sites that encode the graph vertices.

Functions:
    vertex_order: Insertion order that keeps the unplaced vertices outside
        the embedded subgraph.
    check_vertex_order: Violations of the insertion order constraints.
    embed_planar: Iterative embedding of a planar graph.
    embed_square: Iterative embedding into a square lattice.
    layout_stats: Size summary of a layout.
"""

from networkx.algorithms.planar_drawing import (
    get_canonical_ordering,
    triangulate_embedding,
)
from pymis.errors import ConfigError, EmbeddingOverflow
from pymis.graphs import Graph, is_planar
from pymis.models import ClusterModel

import logging
import math
import networkx as nx

log = logging.getLogger(__name__)

NEIGHBOR_OFFSETS = ((1, 0), (-1, 0), (0, 1), (0, -1), (-1, 1), (1, -1))
SQUARE_OFFSETS = ((1, 0), (-1, 0), (0, 1), (0, -1))
TRIANGULAR = 'triangular'
SQUARE = 'square'
GEOMETRIES = (TRIANGULAR, SQUARE)
FERRO = 'ferro'
ANTIFERRO = 'antiferro'


class TriLattice:
    """
    Bounded triangular lattice of side L.

    Arguments:
        side (int): Side L of the bounding triangle.
    """

    def __init__(self, side):
        self.side = side

    def contains(self, site):
        q, r = site
        return 0 <= r <= self.side and -r <= q <= 0

    def neighbors(self, site):
        q, r = site
        return [
            (q + dq, r + dr) for dq, dr in NEIGHBOR_OFFSETS
            if self.contains((q + dq, r + dr))
        ]

    def sites(self):
        return [
            (q, r) for r in range(self.side + 1) for q in range(-r, 1)
        ]

    def __len__(self):
        return (self.side + 1) * (self.side + 2) // 2


def adjacent(a, b):
    return (b[0] - a[0], b[1] - a[1]) in NEIGHBOR_OFFSETS


class ClusterLayout:
    """
    Clusters of lattice sites that encode the vertices of a graph.

    Every cluster is a tree of sites joined by ferromagnetic links and every
    graph edge is a single antiferromagnetic link between two clusters.

    Triangular layouts use axial (q, r) sites and square ones (x, y) sites.
    Layouts built against a fixed sign pattern carry the gauge sign of each
    site, the rest have every sign +1.

    Arguments:
        side (int): Side of the bounding triangle or square.
        clusters (list): Sites of each vertex, first one is the
            representative.
        links (list): (site, site, FERRO or ANTIFERRO) lattice links.
        eligible (list): (vertex, site) of the eligible perimeter sites.
        order (list): Vertex insertion order.
        sides (list): Side of the bounding shape after each insertion.
        geometry (str): TRIANGULAR or SQUARE.
        tau (dict): Optional site -> gauge sign.
        switches (list): (vertex, neighbor, option) link routes chosen by
            the square builder.

    Public methods:
        spin_ids: Site -> spin id map.
        to_cluster_model: Cluster model of the layout.
        to_dict: JSON serializable representation.
        from_dict: Build from the JSON representation.
    """

    def __init__(
        self,
        side,
        clusters,
        links,
        eligible=(),
        order=(),
        sides=(),
        geometry=TRIANGULAR,
        tau=None,
        switches=(),
    ):
        if geometry not in GEOMETRIES:
            raise ConfigError('Unknown lattice geometry {}'.format(geometry))
        self.side = side
        self.geometry = geometry
        self.clusters = [list(map(tuple, sites)) for sites in clusters]
        self.links = [(tuple(a), tuple(b), kind) for a, b, kind in links]
        self.eligible = [(vertex, tuple(site)) for vertex, site in eligible]
        self.order = list(order)
        self.sides = list(sides)
        self.tau = {tuple(site): sign for site, sign in (tau or {}).items()}
        self.switches = [tuple(switch) for switch in switches]

    @property
    def n_sites(self):
        return sum(len(sites) for sites in self.clusters)

    def site_tau(self, site):
        return self.tau.get(site, 1)

    def cluster_of(self):
        return {
            site: vertex
            for vertex, sites in enumerate(self.clusters)
            for site in sites
        }

    def spin_ids(self):
        spin_ids = {}
        for sites in self.clusters:
            for site in sites:
                spin_ids[site] = len(spin_ids)
        return spin_ids

    def to_cluster_model(self, ferro=1, antiferro=-1):
        """
        Cluster model of the layout with the given coupling strengths.
        """
        spin_ids = self.spin_ids()
        intra = []
        inter = []
        for a, b, kind in self.links:
            if kind == FERRO:
                intra.append((spin_ids[a], spin_ids[b], ferro))
            else:
                inter.append((spin_ids[a], spin_ids[b], antiferro))
        return ClusterModel(
            [[spin_ids[site] for site in sites] for sites in self.clusters],
            intra,
            inter,
            [1] * len(spin_ids),
        )

    def _coordinates(self, site):
        keys = ('q', 'r') if self.geometry == TRIANGULAR else ('x', 'y')
        return dict(zip(keys, site))

    def to_dict(self):
        cluster_of = self.cluster_of()
        data = {
            'geometry': self.geometry,
            'side': self.side,
            'sites': [
                dict(
                    self._coordinates(site),
                    cluster=cluster_of[site],
                    tau=self.site_tau(site),
                )
                for sites in self.clusters for site in sites
            ],
            'clusters': [[list(site) for site in sites] for sites in self.clusters],
            'links': [
                [list(a), list(b), kind] for a, b, kind in self.links
            ],
            'eligible': [
                [vertex, list(site)] for vertex, site in self.eligible
            ],
            'order': self.order,
            'sides': self.sides,
        }
        if self.switches:
            data['switches'] = [list(switch) for switch in self.switches]
        return data

    @classmethod
    def from_dict(cls, data):
        try:
            geometry = data.get('geometry', TRIANGULAR)
            keys = ('q', 'r') if geometry == TRIANGULAR else ('x', 'y')
            tau = {
                (site[keys[0]], site[keys[1]]): site.get('tau', 1)
                for site in data.get('sites', ())
            }
            return cls(
                data['side'],
                data['clusters'],
                data['links'],
                data.get('eligible', ()),
                data.get('order', ()),
                data.get('sides', ()),
                geometry,
                tau,
                data.get('switches', ()),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError('Invalid layout data: {}'.format(e))


def _drawing_positions(g, embedding):
    # Same triangulation and canonical ordering as _canonical_insertions
    positions = nx.combinatorial_embedding_to_pos(
        embedding,
        fully_triangulate=True,
    )
    return {v: positions[v] for v in range(g.n_vertices)}


def _prefix_outer_walk(g, placed, positions):
    """
    Boundary walk of the outer face of the drawing of G[placed].
    """
    if len(placed) < 3:
        return None
    rotation = {}
    for v in sorted(placed):
        neighbors = [u for u in g.adjacency[v] if u in placed]
        # Decreasing angle is clockwise order
        neighbors.sort(
            key=lambda u: -math.atan2(
                positions[u][1] - positions[v][1],
                positions[u][0] - positions[v][0],
            )
        )
        rotation[v] = neighbors
    prefix = nx.PlanarEmbedding()
    prefix.set_data(rotation)

    best = None
    best_area = -1
    visited = set()
    for u, v in sorted(prefix.edges()):
        if (u, v) in visited:
            continue
        walk = prefix.traverse_face(u, v, mark_half_edges=visited)
        area = abs(_signed_area(walk, positions))
        if area > best_area:
            best, best_area = walk, area
    return best


def _signed_area(walk, positions):
    area = 0
    for a, b in zip(walk, walk[1:] + walk[:1]):
        area += positions[a][0] * positions[b][1] - positions[b][0] * positions[a][1]
    return area


def _winding_number(walk, positions, point):
    winding = 0
    px, py = point
    for a, b in zip(walk, walk[1:] + walk[:1]):
        (ax, ay), (bx, by) = positions[a], positions[b]
        side = (bx - ax) * (py - ay) - (px - ax) * (by - ay)
        if ay <= py < by and side > 0:
            winding += 1
        elif by <= py < ay and side < 0:
            winding -= 1
    return winding


def _outside(g, placed, pending, positions):
    walk = _prefix_outer_walk(g, placed, positions)
    if walk is None:
        return True
    return all(
        _winding_number(walk, positions, positions[v]) == 0 for v in pending
    )


def check_vertex_order(g, order, embedding=None):
    """
    Violations of the insertion order constraints.

    Every vertex but the first must be adjacent to an earlier one, and after
    each insertion the vertices still to be placed must lie in the outer
    face of the drawn prefix, so no face closes over them.

    Returns:
        list: (position, vertex, reason) tuples, empty for a valid order.
    """

    if embedding is None:
        embedding = is_planar(g)[1]
    positions = _drawing_positions(g, embedding)
    violations = []
    placed = set()
    for position, vertex in enumerate(order):
        if placed and not g.adjacency[vertex] & placed:
            violations.append((position, vertex, 'not adjacent'))
        placed.add(vertex)
        pending = [v for v in range(g.n_vertices) if v not in placed]
        if not _outside(g, placed, pending, positions):
            violations.append((position, vertex, 'encloses pending vertices'))
    return violations


def vertex_order(g, embedding=None):
    """
    Insertion order that keeps the unplaced vertices outside the embedded
    subgraph.

    The order is peeled from the back: the last vertex is the largest one
    on the outer face of the drawing whose removal leaves the rest
    connected, the one before it comes off the outer face of what remains,
    and so on. Removing vertices only grows the outer face, so the peeled
    vertices stay outside every later prefix. The result is certified with
    check_vertex_order.

    Arguments:
        g (Graph): Connected planar graph.
        embedding (networkx.PlanarEmbedding): Embedding of g, computed if
            not given.

    Returns:
        list: Vertex permutation.

    Raises:
        EmbeddingOverflow: When the drawing of the embedding nests a face
            that no order can fill before closing it.
    """

    if g.n_vertices == 0:
        return []
    if not g.is_connected():
        raise ConfigError('Insertion orders need a connected graph')
    if embedding is None:
        planar, embedding = is_planar(g)
        if not planar:
            raise ConfigError('Graph is not planar')
    positions = _drawing_positions(g, embedding)
    graph = g.to_networkx()

    remaining = set(range(g.n_vertices))
    peeled = []
    while len(remaining) > 1:
        for vertex in sorted(remaining, reverse=True):
            rest = remaining - {vertex}
            if nx.is_connected(graph.subgraph(rest)) and \
                    _outside(g, rest, [vertex], positions):
                break
        else:
            raise EmbeddingOverflow(
                'No vertex of {} can be peeled off the outer face'.format(
                    sorted(remaining),
                ),
                stage='embed',
                witness={'remaining': sorted(remaining)},
            )
        peeled.append(vertex)
        remaining = rest

    order = sorted(remaining) + peeled[::-1]
    violations = check_vertex_order(g, order, embedding)
    if violations:
        raise EmbeddingOverflow(
            'Insertion order {} breaks its constraints'.format(order),
            stage='embed',
            witness={'violations': [list(v) for v in violations]},
        )
    log.debug('Insertion order {}'.format(order))
    return order


class _LayoutBuilder:
    """
    Incremental construction of a ClusterLayout.

    The frontier holds the eligible vertices, left to right, with their
    head site on the top row of the triangle.
    """

    def __init__(self, g):
        self.g = g
        self.side = 0
        self.occupied = {}
        self.clusters = [[] for _ in range(g.n_vertices)]
        self.links = []
        self.frontier = []
        self.order = []
        self.sides = []

    def place(self, vertex, site, parent=None):
        if site in self.occupied:
            raise EmbeddingOverflow(
                'Site {} is already used by vertex {}'.format(
                    site,
                    self.occupied[site],
                )
            )
        self.occupied[site] = vertex
        self.clusters[vertex].append(site)
        if parent is not None:
            self.links.append((parent, site, FERRO))
        return site

    def link(self, u, v, site_u, site_v):
        if self.g.has_edge(u, v):
            if not adjacent(site_u, site_v):
                raise EmbeddingOverflow(
                    'Sites {} and {} are not neighbors'.format(site_u, site_v)
                )
            self.links.append((site_u, site_v, ANTIFERRO))

    def start(self, v1, v2):
        self.place(v1, (0, 0))
        if v2 is None:
            self.frontier = [(v1, (0, 0))]
            self.record(v1)
            return
        if self.g.n_vertices == 2:
            self.side = 1
            self.place(v2, (0, 1))
            self.link(v1, v2, (0, 0), (0, 1))
            self.frontier = []
            self.record(v1, v2)
            return

        self.side = 2
        left = self.place(v1, (-1, 1), (0, 0))
        self.link(v1, v2, left, (0, 1))
        left = self.place(v1, (-2, 2), left)
        right = self.place(v2, (0, 1))
        right = self.place(v2, (0, 2), right)
        self.frontier = [(v1, left), (v2, right)]
        self.record(v1, v2)

    def insert(self, vertex, contour):
        """
        Insert a vertex adjacent to the contiguous frontier run contour.
        """
        index = {v: i for i, (v, _) in enumerate(self.frontier)}
        try:
            positions = [index[v] for v in contour]
        except KeyError as e:
            raise EmbeddingOverflow(
                'Vertex {} is not eligible for {}'.format(e, vertex)
            )
        p, q = positions[0], positions[-1]
        if positions != list(range(p, q + 1)) or q - p < 1:
            raise EmbeddingOverflow(
                'Neighbors of vertex {} are not contiguous on the '
                'perimeter'.format(vertex)
            )

        top = self.side
        wp, (qp, _) = self.frontier[p]
        wq, (qq, _) = self.frontier[q]
        frontier = []

        # Copies of the left side move up-left, of the right side up-right
        for u, (qu, r) in self.frontier[:p + 1]:
            site = self.place(u, (qu - 1, r + 1), (qu, r))
            frontier.append((u, self.place(u, (qu - 2, r + 2), site)))

        run = []
        for column in range(qp, qq):
            parent = run[-1] if run else None
            run.append(self.place(vertex, (column, top + 1), parent))
        # Hanging the head off the second run site keeps every head on an
        # even column, so the links admit a two sublattice gauge
        head = self.place(vertex, (qp, top + 2), run[1])

        right = []
        for u, (qu, r) in self.frontier[q:]:
            site = self.place(u, (qu, r + 1), (qu, r))
            right.append((u, self.place(u, (qu, r + 2), site)))

        self.link(vertex, wp, (qp, top + 1), (qp, top))
        for u, (qu, r) in self.frontier[p + 1:q]:
            self.link(vertex, u, (qu, top + 1), (qu, r))
        self.link(vertex, wq, (qq - 1, top + 1), (qq, top + 1))

        self.frontier = frontier + [(vertex, head)] + right
        self.side = top + 2
        self.record(vertex)

    def hang(self, vertex, neighbor):
        """
        Attach a vertex whose only neighbor is an eligible vertex.

        The vertex takes the smallest free site of the triangle next to the
        neighbor's cluster. Without one, every head climbs a single row in
        its own column and the vertex sits next to the neighbor's new head.
        """
        lattice = TriLattice(self.side)
        free = sorted(
            (site, anchor)
            for anchor in self.clusters[neighbor]
            for site in lattice.neighbors(anchor)
            if site not in self.occupied
        )
        if free:
            site, anchor = free[0]
        else:
            heads = dict(self.frontier)
            if neighbor not in heads:
                raise EmbeddingOverflow(
                    'Vertex {} is not eligible for {}'.format(neighbor, vertex)
                )
            top = self.side
            self.frontier = [
                (u, self.place(u, (q, top + 1), (q, r)))
                for u, (q, r) in self.frontier
            ]
            self.side = top + 1
            anchor = (heads[neighbor][0], top + 1)
            column = anchor[0] + 1 if anchor[0] < 0 else anchor[0] - 1
            site = (column, top + 1)
        self.place(vertex, site)
        self.link(vertex, neighbor, site, anchor)
        self.record(vertex)

    def record(self, *vertices):
        self.order.extend(vertices)
        self.sides.append(self.side)
        self.check()

    def check(self):
        """
        Eligible heads on the top row, spaced at least two sites apart.
        """
        lattice = TriLattice(self.side)
        for site in self.occupied:
            if not lattice.contains(site):
                raise EmbeddingOverflow(
                    'Site {} outside of the triangle of side {}'.format(
                        site,
                        self.side,
                    )
                )
        if not self.frontier:
            return
        heads = [site for _, site in self.frontier]
        if any(r != self.side for _, r in heads):
            raise EmbeddingOverflow('Eligible site off the top row')
        columns = [q for q, _ in heads]
        spacing = 1 if self.side == 1 else 2
        if any(b - a < spacing for a, b in zip(columns, columns[1:])):
            raise EmbeddingOverflow(
                'Eligible sites closer than {}: {}'.format(spacing, columns)
            )

    def prune(self):
        """
        Remove leaf sites that carry no link to other clusters.
        """
        inter = set()
        for a, b, kind in self.links:
            if kind == ANTIFERRO:
                inter.update((a, b))
        changed = True
        while changed:
            changed = False
            degree = {}
            for a, b, kind in self.links:
                if kind == FERRO:
                    degree[a] = degree.get(a, 0) + 1
                    degree[b] = degree.get(b, 0) + 1
            for vertex, sites in enumerate(self.clusters):
                if len(sites) < 2:
                    continue
                for site in list(sites):
                    if site in inter or degree.get(site, 0) > 1:
                        continue
                    sites.remove(site)
                    del self.occupied[site]
                    self.links = [
                        link for link in self.links if site not in link[:2]
                    ]
                    changed = True
                    break

    def layout(self):
        return ClusterLayout(
            self.side,
            self.clusters,
            self.links,
            [
                (vertex, site) for vertex, site in self.frontier
                if site in self.occupied
            ],
            self.order,
            self.sides,
        )


def embed_planar(g, prune=True):
    """
    Iterative embedding of a planar graph into a triangular lattice.

    Vertices of degree one hang off their neighbor and are set aside. The
    rest, the core, are inserted in the canonical order of a triangulation
    of the core, which keeps the neighbors of each new vertex contiguous on
    the perimeter, and the order is certified to never close a face over a
    pending vertex. Every core insertion adds two rows to the triangle:
    copies of the eligible vertices on each side of the new vertex move
    outwards, the new vertex takes the freed row and links
    antiferromagnetically to its neighbors. The hanging vertices follow
    their neighbor and add at most one row each.

    Arguments:
        g (Graph): Planar graph. Disconnected graphs are joined by the
            triangulation edges, which never become links.
        prune (bool): Remove the leaf sites without links to other clusters.

    Returns:
        ClusterLayout: With side at most 2(N - 1) and at most N(2N - 1)
            sites.
    """

    if g.n_vertices == 0:
        raise ConfigError('Cannot embed an empty graph', stage='embed')
    planar, _ = is_planar(g)
    if not planar:
        raise ConfigError('Graph is not planar', stage='embed')

    hanging = _hanging_vertices(g)
    leaves = {leaf for hung in hanging.values() for leaf in hung}
    members = [v for v in range(g.n_vertices) if v not in leaves]
    index = {v: i for i, v in enumerate(members)}
    core = Graph(
        len(members),
        [(index[u], index[v]) for u, v in g.edges if u in index and v in index],
    )
    core_embedding = is_planar(core)[1]
    start, insertions = _canonical_insertions(core, core_embedding)

    core_order = [v for v in start if v is not None]
    core_order += [vertex for vertex, _ in insertions]
    enclosing = [
        violation
        for violation in check_vertex_order(core, core_order, core_embedding)
        if violation[2] != 'not adjacent'
    ]
    if enclosing:
        raise EmbeddingOverflow(
            'Insertion order {} closes a face over a pending vertex'.format(
                [members[v] for v in core_order],
            ),
            stage='embed',
            witness={'violations': [
                [position, members[v], reason]
                for position, v, reason in enclosing
            ]},
        )

    builder = _LayoutBuilder(g)
    v1, v2 = (None if v is None else members[v] for v in start)
    builder.start(v1, v2)
    for w in (v1, v2):
        for leaf in hanging.get(w, ()):
            builder.hang(leaf, w)
    for vertex, contour in insertions:
        builder.insert(members[vertex], [members[u] for u in contour])
        for leaf in hanging.get(members[vertex], ()):
            builder.hang(leaf, members[vertex])

    if prune:
        builder.prune()
    layout = builder.layout()
    log.info(
        'Embedded {} vertices in a triangle of side {} with {} sites'.format(
            g.n_vertices,
            layout.side,
            layout.n_sites,
        )
    )
    return layout


def square_adjacent(a, b):
    return (b[0] - a[0], b[1] - a[1]) in SQUARE_OFFSETS


class _SquareBuilder(_LayoutBuilder):
    """
    Incremental construction of a ClusterLayout on a square lattice.

    The frontier heads live on the top row, at least six columns apart.
    Each insertion adds six rows: the frontier copies climb four rows and
    move three columns outwards, the new vertex runs along the third new
    row and its head climbs from three columns right of the left neighbor.

    When a sign function is given every link has two routes, straight and
    detour, that enclose an odd number of plaquettes. On a lattice with all
    the plaquettes frustrated their signs differ, so exactly one of them
    leaves the link effectively antiferromagnetic.
    """

    spacing = 6

    def __init__(self, g, sign=None):
        super().__init__(g)
        self.sign = sign
        self.tau = {}
        self.switches = []
        self.top = 0

    def _sign(self, a, b):
        return self.sign(a, b) if self.sign is not None else 1

    def place(self, vertex, site, parent=None):
        if site in self.occupied:
            raise EmbeddingOverflow(
                'Site {} is already used by vertex {}'.format(
                    site,
                    self.occupied[site],
                )
            )
        self.occupied[site] = vertex
        self.clusters[vertex].append(site)
        if parent is None:
            self.tau[site] = 1
        else:
            self.links.append((parent, site, FERRO))
            self.tau[site] = self.tau[parent] * self._sign(parent, site)
        return site

    def chain(self, vertex, sites, parent):
        for site in sites:
            parent = self.place(vertex, site, parent)
        return parent

    def _route_tau(self, route):
        tau = {}
        for _, site, parent in route:
            if site in self.occupied:
                tau[site] = self.tau[site]
            elif parent is None:
                tau[site] = 1
            else:
                sign = tau.get(parent, self.tau.get(parent))
                tau[site] = sign * self._sign(parent, site)
        return tau

    def connect(self, u, v, options):
        """
        Realize the link u - v with the first antiferromagnetic route.

        Arguments:
            options (list): (name, route, (site, site)) candidates, where
                route lists the (vertex, site, parent) placements.
        """
        if not self.g.has_edge(u, v):
            return
        for name, route, (a, b) in options:
            tau = self._route_tau(route)
            sign_a = tau.get(a, self.tau.get(a))
            sign_b = tau.get(b, self.tau.get(b))
            if self.sign is not None and \
                    self._sign(a, b) * sign_a * sign_b > 0:
                continue
            for vertex, site, parent in route:
                owner = self.occupied.get(site)
                if owner is None:
                    self.place(vertex, site, parent)
                elif owner != vertex:
                    raise EmbeddingOverflow(
                        'Site {} is already used by vertex {}'.format(
                            site,
                            owner,
                        )
                    )
            self.links.append((a, b, ANTIFERRO))
            self.switches.append((u, v, name))
            return
        raise EmbeddingOverflow(
            'No route makes the link {} - {} antiferromagnetic'.format(u, v),
            witness={'edge': [u, v]},
        )

    def start(self, v1, v2):
        self.place(v1, (0, 0))
        if v2 is None:
            self.record(v1)
            return
        if self.g.n_vertices == 2:
            if not self.g.has_edge(v1, v2):
                self.place(v2, (2, 0))
            self.connect(v1, v2, [
                ('straight', [(v2, (1, 0), None)], ((1, 0), (0, 0))),
                ('straight', [(v2, (0, 1), None)], ((0, 1), (0, 0))),
                (
                    'detour',
                    [(v2, (1, 1), None), (v2, (1, 0), (1, 1))],
                    ((1, 0), (0, 0)),
                ),
                (
                    'detour',
                    [(v2, (1, 1), None), (v2, (0, 1), (1, 1))],
                    ((0, 1), (0, 0)),
                ),
            ])
            self.record(v1, v2)
            return

        self.place(v2, (self.spacing, 0))
        self.connect(v1, v2, [
            (
                'straight',
                [
                    (v1, (1, 0), (0, 0)),
                    (v1, (2, 0), (1, 0)),
                    (v1, (3, 0), (2, 0)),
                    (v2, (5, 0), (6, 0)),
                    (v2, (4, 0), (5, 0)),
                ],
                ((3, 0), (4, 0)),
            ),
            (
                'detour',
                [
                    (v1, (1, 0), (0, 0)),
                    (v1, (1, -1), (1, 0)),
                    (v1, (2, -1), (1, -1)),
                    (v2, (5, 0), (6, 0)),
                    (v2, (4, 0), (5, 0)),
                    (v2, (4, -1), (4, 0)),
                    (v2, (3, -1), (4, -1)),
                ],
                ((2, -1), (3, -1)),
            ),
        ])
        self.frontier = [(v1, (0, 0)), (v2, (self.spacing, 0))]
        self.record(v1, v2)

    def _climb(self, vertex, column, shift):
        top = self.top
        parent = self.chain(
            vertex,
            [(column, top + row) for row in range(1, 5)],
            (column, top),
        )
        parent = self.chain(
            vertex,
            [(column + shift * step, top + 4) for step in range(1, 4)],
            parent,
        )
        return self.chain(
            vertex,
            [(column + 3 * shift, top + 5), (column + 3 * shift, top + 6)],
            parent,
        )

    def _run(self, vertex, start, stop, row):
        """
        Placements of a straight run from column start + 1 to stop.
        """
        return [
            (vertex, (column, row), (column - 1, row))
            for column in range(start + 1, stop + 1)
        ]

    def insert(self, vertex, contour):
        """
        Insert a vertex adjacent to the contiguous frontier run contour.
        """
        index = {v: i for i, (v, _) in enumerate(self.frontier)}
        try:
            positions = [index[v] for v in contour]
        except KeyError as e:
            raise EmbeddingOverflow(
                'Vertex {} is not eligible for {}'.format(e, vertex)
            )
        p, q = positions[0], positions[-1]
        if positions != list(range(p, q + 1)) or q - p < 1:
            raise EmbeddingOverflow(
                'Neighbors of vertex {} are not contiguous on the '
                'perimeter'.format(vertex)
            )

        top = self.top
        wp, (xp, _) = self.frontier[p]
        wq, (xq, _) = self.frontier[q]

        left = [
            (u, self._climb(u, x, -1)) for u, (x, _) in self.frontier[:p + 1]
        ]
        right = [
            (u, self._climb(u, x, 1)) for u, (x, _) in self.frontier[q:]
        ]

        root = self.place(vertex, (xp + 3, top + 3))
        head = self.chain(
            vertex,
            [(xp + 3, top + 4), (xp + 3, top + 5), (xp + 3, top + 6)],
            root,
        )

        self.connect(vertex, wp, [
            (
                'straight',
                [
                    (vertex, (xp + 2, top + 3), root),
                    (vertex, (xp + 1, top + 3), (xp + 2, top + 3)),
                ],
                ((xp + 1, top + 3), (xp, top + 3)),
            ),
            (
                'detour',
                [
                    (vertex, (xp + 3, top + 2), root),
                    (vertex, (xp + 2, top + 2), (xp + 3, top + 2)),
                    (vertex, (xp + 1, top + 2), (xp + 2, top + 2)),
                ],
                ((xp + 1, top + 2), (xp, top + 2)),
            ),
        ])

        anchor = xp + 3
        for u, (x, _) in self.frontier[p + 1:q]:
            if not self.g.has_edge(vertex, u):
                continue
            straight = [
                (u, (x, top + 1), (x, top)),
                (u, (x, top + 2), (x, top + 1)),
            ] + self._run(vertex, anchor, x, top + 3)
            # The detour climbs one column right of the head
            detour = [
                (u, (x + 1, top), (x, top)),
                (u, (x + 1, top + 1), (x + 1, top)),
                (u, (x + 1, top + 2), (x + 1, top + 1)),
            ] + self._run(vertex, anchor, x + 1, top + 3)
            self.connect(vertex, u, [
                ('straight', straight, ((x, top + 3), (x, top + 2))),
                ('detour', detour, ((x + 1, top + 3), (x + 1, top + 2))),
            ])
            anchor = x + 1 if (x + 1, top + 3) in self.occupied else x

        detour = self._run(vertex, anchor, xq - 3, top + 3) + [
            (vertex, (xq - 3, top + 2), (xq - 3, top + 3)),
            (vertex, (xq - 2, top + 2), (xq - 3, top + 2)),
            (vertex, (xq - 1, top + 2), (xq - 2, top + 2)),
        ]
        self.connect(vertex, wq, [
            (
                'straight',
                self._run(vertex, anchor, xq - 1, top + 3),
                ((xq - 1, top + 3), (xq, top + 3)),
            ),
            ('detour', detour, ((xq - 1, top + 2), (xq, top + 2))),
        ])

        self.frontier = left + [(vertex, head)] + right
        self.top = top + 6
        self.record(vertex)

    def extent(self):
        xs = [x for x, _ in self.occupied]
        ys = [y for _, y in self.occupied]
        return max(max(xs) - min(xs), max(ys) - min(ys))

    def record(self, *vertices):
        previous = self.sides[-1] if self.sides else 0
        self.side = self.extent()
        if self.side - previous > self.spacing:
            raise EmbeddingOverflow(
                'Side grew from {} to {}'.format(previous, self.side)
            )
        super().record(*vertices)

    def check(self):
        """
        Heads on the top row at least six columns apart, and no lattice
        bond between used sites other than the declared links.
        """
        heads = [site for _, site in self.frontier]
        if any(y != self.top for _, y in heads):
            raise EmbeddingOverflow('Eligible site off the top row')
        columns = [x for x, _ in heads]
        if any(b - a < self.spacing for a, b in zip(columns, columns[1:])):
            raise EmbeddingOverflow(
                'Eligible sites closer than {}: {}'.format(
                    self.spacing,
                    columns,
                )
            )
        declared = {frozenset((a, b)): kind for a, b, kind in self.links}
        for a, b, _ in self.links:
            if not square_adjacent(a, b):
                raise EmbeddingOverflow(
                    'Sites {} and {} are not neighbors'.format(a, b)
                )
        for (x, y), vertex in self.occupied.items():
            for neighbor in ((x + 1, y), (x, y + 1)):
                if neighbor not in self.occupied:
                    continue
                kind = declared.get(frozenset(((x, y), neighbor)))
                same = self.occupied[neighbor] == vertex
                if kind != (FERRO if same else ANTIFERRO):
                    raise EmbeddingOverflow(
                        'Undeclared bond between {} and {}'.format(
                            (x, y),
                            neighbor,
                        ),
                        witness={'sites': [[x, y], list(neighbor)]},
                    )

    def layout(self):
        # Even offsets keep the sublattice of every site
        x0 = min(x for x, _ in self.occupied)
        y0 = min(y for _, y in self.occupied)
        x0 -= x0 % 2
        y0 -= y0 % 2

        def shift(site):
            return (site[0] - x0, site[1] - y0)

        tau = {}
        for sites in self.clusters:
            # Gauge relative to the representative left after pruning
            sign = self.tau[sites[0]]
            for site in sites:
                tau[shift(site)] = self.tau[site] * sign
        return ClusterLayout(
            self.extent(),
            [[shift(site) for site in sites] for sites in self.clusters],
            [(shift(a), shift(b), kind) for a, b, kind in self.links],
            [
                (vertex, shift(site)) for vertex, site in self.frontier
                if site in self.occupied
            ],
            self.order,
            self.sides,
            SQUARE,
            tau if self.sign is not None else None,
            self.switches,
        )


def _hanging_vertices(g):
    """
    Degree one vertices whose neighbor has a higher degree, by neighbor.
    """
    hanging = {}
    for v in range(g.n_vertices):
        if g.degree(v) != 1:
            continue
        (w,) = g.adjacency[v]
        if g.degree(w) > 1:
            hanging.setdefault(w, []).append(v)
    return hanging


def _canonical_insertions(g, embedding):
    """
    Start pair and (vertex, contour) insertions of the canonical ordering
    of a full triangulation of the embedding.
    """
    if g.n_vertices == 1:
        return (0, None), []
    if g.n_vertices == 2:
        return (0, 1), []
    triangulation, outer_face = triangulate_embedding(embedding, True)
    ordering = get_canonical_ordering(triangulation, outer_face)
    return (ordering[0][0], ordering[1][0]), ordering[2:]


def _insertion_order(g, embedding, builder):
    (v1, v2), insertions = _canonical_insertions(g, embedding)
    builder.start(v1, v2)
    for vertex, contour in insertions:
        builder.insert(vertex, contour)


def embed_square(g, sign=None, prune=True):
    """
    Iterative embedding of a planar graph into a square lattice.

    Follows the insertion order of embed_planar with six new rows per
    vertex, so the side grows by at most 6 per insertion and the layout
    fits in 36 N^2 sites.

    Arguments:
        g (Graph): Planar graph.
        sign (callable): Optional (site, site) -> +1 or -1 fixed coupling
            sign of the target lattice. Each link then takes the route that
            keeps it effectively antiferromagnetic.
        prune (bool): Remove the leaf sites without links to other clusters.

    Returns:
        ClusterLayout: Square layout with the gauge of every site.
    """

    if g.n_vertices == 0:
        raise ConfigError('Cannot embed an empty graph', stage='embed')
    planar, embedding = is_planar(g)
    if not planar:
        raise ConfigError('Graph is not planar', stage='embed')

    builder = _SquareBuilder(g, sign)
    _insertion_order(g, embedding, builder)
    if prune:
        builder.prune()
    layout = builder.layout()
    log.info(
        'Embedded {} vertices in a square of side {} with {} sites'.format(
            g.n_vertices,
            layout.side,
            layout.n_sites,
        )
    )
    return layout


def layout_stats(layout):
    """
    Size summary of a layout.
    """
    return {
        'side': layout.side,
        'sites': layout.n_sites,
        'clusters': len(layout.clusters),
        'max_cluster_size': max(
            (len(sites) for sites in layout.clusters),
            default=0,
        ),
    }
