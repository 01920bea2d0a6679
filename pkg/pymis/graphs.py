"""
Module to store the graph model, planarity handling and the crossover
planarization.

Classes:
    Graph: Simple undirected graph on vertices 0..N-1.
    Drawing: Straight line drawing of a graph.
    CrossingRecord: Crossing replaced by a crossover gadget.

Functions:
    is_planar: Test planarity and extract the combinatorial embedding.
    faces: Faces of a planar embedding.
    draw_planar: Straight line grid drawing of a planar graph.
    find_crossings: Interior intersections of the edges of a drawing.
    certify_gadget: Brute force certification of a crossing gadget.
    certify_crossover: Certification of the crossover gadget.
    planarize: Replace every crossing of a drawing with a crossover gadget.
    project: Restrict an independent set of a planarized graph to the
        original vertices.
    random_connected_graph: Random connected graph with a spanning tree.
"""

from fractions import Fraction
from functools import lru_cache
from pymis.errors import (
    CertificationFailure,
    ConfigError,
    DegenerateDrawing,
    GadgetOverlap,
)
from pymis.oracle import mis_size

import itertools
import json
import logging
import networkx as nx

log = logging.getLogger(__name__)

# Gadgets keep their terminals 0..3 in cyclic order around the outer face:
# 0 and 2 replace the ends of one crossing edge, 1 and 3 the ends of the
# other one. Internal vertices are 4 onwards.

# Soft crossing cell: occupying a pair of opposite terminals costs one
# internal vertex.
CELL_VERTICES = 15
CELL_EDGES = (
    (0, 14), (1, 9), (1, 12), (1, 13), (2, 10), (3, 7), (3, 8), (3, 11),
    (4, 6), (4, 9), (4, 12), (4, 13), (5, 7), (5, 10), (5, 13), (6, 7),
    (6, 8), (6, 11), (7, 8), (8, 11), (9, 12), (9, 13), (11, 12), (11, 14),
    (12, 14),
)
CELL_INCREMENT = 4

# Crossover: two parallel wires per crossing edge, four cells where they
# meet. Each wire runs terminal, cell, junction pair, cell, terminal.
# Junction vertices are 4..11, as (first, second) pairs per wire.
CROSSOVER_JUNCTIONS = ((4, 5), (6, 7), (8, 9), (10, 11))
CROSSOVER_CELLS = (
    # (north, east, south, west) of every cell
    (0, 5, 6, 3),
    (0, 1, 8, 4),
    (7, 11, 2, 3),
    (9, 1, 2, 10),
)
CROSSOVER_INCREMENT = 20


def _compose_crossover():
    edges = list(CROSSOVER_JUNCTIONS)
    next_vertex = 4 + 2 * len(CROSSOVER_JUNCTIONS)
    for terminals in CROSSOVER_CELLS:
        mapping = list(terminals) + list(
            range(next_vertex, next_vertex + CELL_VERTICES - 4)
        )
        edges.extend((mapping[a], mapping[b]) for a, b in CELL_EDGES)
        next_vertex += CELL_VERTICES - 4
    return next_vertex, tuple(sorted(
        (min(u, v), max(u, v)) for u, v in edges
    ))


CROSSOVER_VERTICES, CROSSOVER_EDGES = _compose_crossover()


class Graph:
    """
    Simple undirected graph on vertices 0..N-1.

    Arguments:
        n_vertices (int): Number of vertices N.
        edges (iterable): Vertex pairs.

    Public methods:
        neighbors: Sorted neighbors of a vertex.
        degree: Number of neighbors of a vertex.
        has_edge: Check if two vertices are adjacent.
        is_connected: Check connectivity.
        to_networkx: Convert to a networkx graph.
        to_dict: JSON serializable representation.
        from_dict: Build from the JSON representation.
        from_dimacs: Build from a DIMACS like edge list.
        load: Build from a graph file.

    Attributes and properties:
        n_vertices (int): N.
        edges (tuple): Sorted (u, v) pairs with u < v.
        adjacency (list): Set of neighbors of each vertex.
    """

    def __init__(self, n_vertices, edges=()):
        self.n_vertices = n_vertices
        normalized = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ConfigError('Self loop on vertex {}'.format(u))
            if not (0 <= u < n_vertices and 0 <= v < n_vertices):
                raise ConfigError(
                    'Edge ({}, {}) out of the vertex range'.format(u, v)
                )
            edge = (min(u, v), max(u, v))
            if edge in normalized:
                raise ConfigError('Duplicate edge {}'.format(edge))
            normalized.add(edge)
        self.edges = tuple(sorted(normalized))
        self.adjacency = [set() for _ in range(n_vertices)]
        for u, v in self.edges:
            self.adjacency[u].add(v)
            self.adjacency[v].add(u)

    @property
    def n_edges(self):
        return len(self.edges)

    def neighbors(self, vertex):
        return sorted(self.adjacency[vertex])

    def degree(self, vertex):
        return len(self.adjacency[vertex])

    def has_edge(self, u, v):
        return v in self.adjacency[u]

    def is_connected(self):
        if self.n_vertices == 0:
            return True
        return nx.is_connected(self.to_networkx())

    def to_networkx(self):
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n_vertices))
        graph.add_edges_from(self.edges)
        return graph

    def to_dict(self):
        return {
            'n': self.n_vertices,
            'edges': [list(edge) for edge in self.edges],
        }

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(data['n'], data['edges'])
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError('Invalid graph data: {}'.format(e))

    @classmethod
    def from_dimacs(cls, text):
        """
        Build from a DIMACS like edge list: header `p mis N M` and
        `e u v` lines with 1-indexed vertices. `c` lines are comments.
        """

        n_vertices = None
        declared = None
        edges = []
        for number, line in enumerate(text.splitlines(), start=1):
            fields = line.split()
            if not fields or fields[0] == 'c':
                continue
            try:
                if fields[0] == 'p':
                    n_vertices, declared = int(fields[2]), int(fields[3])
                elif fields[0] == 'e':
                    edges.append((int(fields[1]) - 1, int(fields[2]) - 1))
                else:
                    raise ValueError('unknown line type')
            except (IndexError, ValueError):
                raise ConfigError(
                    'Invalid DIMACS line {}: {}'.format(number, line)
                )
        if n_vertices is None:
            raise ConfigError('DIMACS input without a `p mis N M` header')
        if declared != len(edges):
            log.warning(
                'DIMACS header declares {} edges, found {}'.format(
                    declared,
                    len(edges),
                )
            )
        return cls(n_vertices, edges)

    @classmethod
    def load(cls, path):
        """
        Build the graph and the optional drawing stored in a graph file.

        Returns:
            tuple: (Graph, Drawing or None)
        """

        try:
            with open(path, 'r') as f:
                text = f.read()
        except OSError:
            raise ConfigError('Error opening graph file {}'.format(path))

        if text.lstrip().startswith('{'):
            try:
                data = json.loads(text)
            except json.JSONDecodeError as e:
                raise ConfigError('Invalid JSON graph {}: {}'.format(path, e))
            if 'graph' in data:
                data = data['graph']
            graph = cls.from_dict(data)
            drawing = None
            if data.get('coords') is not None:
                drawing = Drawing(data['coords'])
            return graph, drawing
        return cls.from_dimacs(text), None

    def __eq__(self, other):
        return (
            isinstance(other, Graph) and
            self.n_vertices == other.n_vertices and
            self.edges == other.edges
        )

    def __repr__(self):
        return '<Graph N={} M={}>'.format(self.n_vertices, self.n_edges)


class Drawing:
    """
    Straight line drawing of a graph.

    Coordinates are stored as exact fractions so crossing detection doesn't
    depend on floating point rounding.

    Arguments:
        coords (list): (x, y) position of every vertex.
    """

    def __init__(self, coords):
        self.coords = [
            (_exact(x), _exact(y)) for x, y in coords
        ]

    def __getitem__(self, vertex):
        return self.coords[vertex]

    def __len__(self):
        return len(self.coords)

    def to_list(self):
        return [[_number(x), _number(y)] for x, y in self.coords]


def _exact(value):
    return Fraction(value)


def _number(value):
    if value.denominator == 1:
        return value.numerator
    return float(value)


class CrossingRecord:
    """
    Crossing replaced by a crossover gadget.

    Arguments:
        edges (tuple): The two crossing edges, lexicographically ordered.
        point (tuple): Intersection point.
        terminals (tuple): Vertices attached to the gadget terminals
            0..3, in cyclic order.
        gadget_vertices (list): Ids of the inserted internal vertices.
    """

    def __init__(self, edges, point, terminals=None, gadget_vertices=None):
        self.edges = edges
        self.point = point
        self.terminals = terminals
        self.gadget_vertices = gadget_vertices or []

    def to_dict(self):
        return {
            'edges': [list(edge) for edge in self.edges],
            'point': [_number(coordinate) for coordinate in self.point],
            'terminals': list(self.terminals) if self.terminals else None,
            'gadget_vertices': list(self.gadget_vertices),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            tuple(tuple(edge) for edge in data['edges']),
            tuple(_exact(coordinate) for coordinate in data['point']),
            tuple(data['terminals']) if data['terminals'] else None,
            data['gadget_vertices'],
        )


def is_planar(g):
    """
    Test planarity and extract the combinatorial embedding.

    Returns:
        tuple: (bool, networkx.PlanarEmbedding or None)
    """
    planar, embedding = nx.check_planarity(g.to_networkx())
    if not planar:
        return False, None
    return True, embedding


def faces(embedding):
    """
    Faces of a planar embedding as lists of vertices, each face once.
    """
    visited = set()
    result = []
    for u, v in sorted(embedding.edges()):
        if (u, v) in visited:
            continue
        face = embedding.traverse_face(u, v, mark_half_edges=visited)
        result.append(face)
    return result


def draw_planar(g):
    """
    Straight line drawing of a planar graph on an integer grid.
    """
    planar, embedding = is_planar(g)
    if not planar:
        raise ConfigError('Graph is not planar, a drawing must be given')
    if g.n_vertices == 0:
        return Drawing([])
    if g.n_vertices == 1:
        return Drawing([(0, 0)])
    positions = nx.combinatorial_embedding_to_pos(embedding)
    return Drawing([positions[v] for v in range(g.n_vertices)])


def _orientation(a, b, c):
    value = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    return (value > 0) - (value < 0)


def _on_segment(p, a, b):
    """
    Check if p lies on the closed segment ab, p assumed collinear.
    """
    return (
        min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and
        min(a[1], b[1]) <= p[1] <= max(a[1], b[1])
    )


def _intersection(a, b, c, d):
    """
    Interior intersection point of segments ab and cd, or None.
    """
    if not (
        _orientation(a, b, c) * _orientation(a, b, d) < 0 and
        _orientation(c, d, a) * _orientation(c, d, b) < 0
    ):
        return None
    denominator = (b[0] - a[0]) * (d[1] - c[1]) - (b[1] - a[1]) * (d[0] - c[0])
    t = (
        (c[0] - a[0]) * (d[1] - c[1]) - (c[1] - a[1]) * (d[0] - c[0])
    ) / denominator
    return (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))


def _check_general_position(g, d):
    if len(d) != g.n_vertices:
        raise ConfigError(
            'Drawing has {} positions for {} vertices'.format(
                len(d),
                g.n_vertices,
            )
        )
    positions = {}
    for vertex, point in enumerate(d.coords):
        if point in positions:
            raise DegenerateDrawing(
                'Vertices {} and {} share position {}'.format(
                    positions[point],
                    vertex,
                    d.to_list()[vertex],
                )
            )
        positions[point] = vertex

    for u, v in g.edges:
        for vertex in range(g.n_vertices):
            if vertex in (u, v):
                continue
            point = d[vertex]
            if _orientation(d[u], d[v], point) == 0 and \
                    _on_segment(point, d[u], d[v]):
                raise DegenerateDrawing(
                    'Vertex {} lies on edge ({}, {})'.format(vertex, u, v),
                    witness={'vertex': vertex, 'edge': [u, v]},
                )


def find_crossings(g, d):
    """
    Interior intersections of the edges of a drawing.

    Arguments:
        g (Graph): Drawn graph.
        d (Drawing): Straight line drawing in general position.

    Returns:
        list: CrossingRecord without gadget data, ordered lexicographically
            by the crossing edges.
    """

    _check_general_position(g, d)

    crossings = []
    edges_at_point = {}
    for first, second in itertools.combinations(g.edges, 2):
        if set(first) & set(second):
            continue
        point = _intersection(d[first[0]], d[first[1]], d[second[0]], d[second[1]])
        if point is None:
            continue
        crossings.append(CrossingRecord((first, second), point))
        edges_at_point.setdefault(point, set()).update((first, second))

    for point, edges in edges_at_point.items():
        if len(edges) > 2:
            raise DegenerateDrawing(
                '{} edges meet at point {}'.format(
                    len(edges),
                    [_number(coordinate) for coordinate in point],
                ),
                witness={'edges': [list(edge) for edge in sorted(edges)]},
            )

    log.debug('Found {} crossings'.format(len(crossings)))
    return crossings


def _terminal_profile(n_vertices, edges):
    """
    MIS of the internal gadget vertices for every subset of occupied
    terminals. Index bit t of the subset means terminal t is occupied.
    """
    internal = n_vertices - 4
    masks = [0] * internal
    terminal_masks = [0] * 4
    for u, v in edges:
        if u < 4 and v < 4:
            raise CertificationFailure(
                'Gadget terminals {} and {} are adjacent'.format(u, v),
                stage='planarize',
            )
        if u < 4:
            terminal_masks[u] |= 1 << (v - 4)
        elif v < 4:
            terminal_masks[v] |= 1 << (u - 4)
        else:
            masks[u - 4] |= 1 << (v - 4)
            masks[v - 4] |= 1 << (u - 4)

    everything = (1 << internal) - 1
    profile = []
    for subset in range(16):
        blocked = 0
        for terminal in range(4):
            if subset >> terminal & 1:
                blocked |= terminal_masks[terminal]
        profile.append(mis_size(masks, everything & ~blocked))
    return profile


def _opposite_pairs(subset):
    return int(subset & 0b0101 == 0b0101) + int(subset & 0b1010 == 0b1010)


def certify_gadget(n_vertices, edges, increment, penalties):
    """
    Brute force certification of a four terminal crossing gadget.

    The gadget must be planar with the terminals on the outer face in
    cyclic order. With c internal vertices in its maximum independent set,
    the occupied terminals T must leave exactly c internal vertices when
    T holds no opposite pair, and at most c - penalties[k] when it holds
    k opposite pairs.

    Arguments:
        n_vertices (int): Gadget vertices, terminals included.
        edges (tuple): Gadget edges.
        increment (int): Expected MIS increment c.
        penalties (tuple): Minimum cost of one and of both opposite pairs.

    Returns:
        list: MIS of the internal vertices for every terminal subset.
    """

    # A hub joined to the terminals plus the terminal cycle keeps the
    # graph planar only if the terminals lie on the outer face in order.
    hub = n_vertices
    framed = Graph(
        n_vertices + 1,
        list(edges) +
        [(terminal, hub) for terminal in range(4)] +
        [(terminal, (terminal + 1) % 4) for terminal in range(4)],
    )
    if not is_planar(framed)[0]:
        raise CertificationFailure(
            'Gadget terminals are not on the outer face in order',
            stage='planarize',
        )

    profile = _terminal_profile(n_vertices, edges)
    for subset, value in enumerate(profile):
        opposite = _opposite_pairs(subset)
        if opposite == 0:
            failed = value != increment
        else:
            failed = value > increment - penalties[opposite - 1]
        if failed:
            raise CertificationFailure(
                'Gadget leaves {} internal vertices with terminals {} '
                'occupied, increment is {}'.format(
                    value,
                    [t for t in range(4) if subset >> t & 1],
                    increment,
                ),
                stage='planarize',
                witness={'profile': profile},
            )
    return profile


@lru_cache(maxsize=None)
def certify_crossover():
    """
    Certify the crossover gadget and the cell it is built from.

    The crossover adds exactly CROSSOVER_INCREMENT to the MIS of the graph,
    while occupying the two ends of a crossing edge costs two internal
    vertices and occupying both pairs costs three, so opposite terminals
    are never both in a maximum independent set.

    Returns:
        int: Certified MIS increment.
    """
    certify_gadget(CELL_VERTICES, CELL_EDGES, CELL_INCREMENT, (1, 2))
    profile = certify_gadget(
        CROSSOVER_VERTICES,
        CROSSOVER_EDGES,
        CROSSOVER_INCREMENT,
        (2, 3),
    )
    log.debug('Certified crossover gadget, profile {}'.format(profile))
    return CROSSOVER_INCREMENT


def planarize(g, d=None):
    """
    Replace every crossing of a drawing with a crossover gadget.

    The original vertices keep their ids, gadget internal vertices are
    appended after them in crossing order.

    Arguments:
        g (Graph): Graph to planarize.
        d (Drawing): Straight line drawing, optional when g is planar.

    Returns:
        tuple: (planar Graph, list of CrossingRecord, cardinality offset)
    """

    if d is None:
        if not is_planar(g)[0]:
            raise ConfigError(
                'Graph is not planar and no drawing was given',
                stage='planarize',
            )
        return Graph(g.n_vertices, g.edges), [], 0

    crossings = find_crossings(g, d)
    if not crossings:
        return Graph(g.n_vertices, g.edges), [], 0

    crossed = {}
    for index, crossing in enumerate(crossings):
        for edge in crossing.edges:
            if edge in crossed:
                raise GadgetOverlap(
                    'Edge {} is crossed more than once'.format(list(edge)),
                    witness={
                        'edge': list(edge),
                        'crossings': [crossed[edge], index],
                    },
                )
            crossed[edge] = index

    increment = certify_crossover()

    edges = [edge for edge in g.edges if edge not in crossed]
    next_vertex = g.n_vertices
    for crossing in crossings:
        (u, v), (x, y) = crossing.edges
        # Opposite terminals alternate around the crossing point in both
        # orientations, so the mirrored gadget fits either way.
        crossing.terminals = (u, x, v, y)
        crossing.gadget_vertices = list(
            range(next_vertex, next_vertex + CROSSOVER_VERTICES - 4)
        )
        mapping = list(crossing.terminals) + crossing.gadget_vertices
        edges.extend((mapping[a], mapping[b]) for a, b in CROSSOVER_EDGES)
        next_vertex += CROSSOVER_VERTICES - 4

    planar = Graph(next_vertex, edges)
    if not is_planar(planar)[0]:
        raise GadgetOverlap('Planarized graph is not planar')

    offset = increment * len(crossings)
    log.info(
        'Replaced {} crossings, {} vertices added, MIS offset {}'.format(
            len(crossings),
            next_vertex - g.n_vertices,
            offset,
        )
    )
    return planar, crossings, offset


def project(vertices, n_original):
    """
    Restrict an independent set of a planarized graph to the original
    vertices.
    """
    return sorted(v for v in vertices if v < n_original)


def random_connected_graph(n_vertices, edge_probability, rng, planar=False):
    """
    Random connected graph: a random spanning tree plus every other pair
    with probability edge_probability.

    Arguments:
        n_vertices (int): Number of vertices.
        edge_probability (float): Probability of each extra edge.
        rng (numpy.random.Generator): Random stream.
        planar (bool): Skip the extra edges that break planarity.
    """

    edges = [
        (int(rng.integers(vertex)), vertex)
        for vertex in range(1, n_vertices)
    ]
    tree = set(edges)
    graph = nx.Graph(edges)
    graph.add_nodes_from(range(n_vertices))
    for u, v in itertools.combinations(range(n_vertices), 2):
        if (u, v) in tree or rng.random() >= edge_probability:
            continue
        graph.add_edge(u, v)
        if planar and not nx.check_planarity(graph)[0]:
            graph.remove_edge(u, v)
            continue
        edges.append((u, v))
    return Graph(n_vertices, edges)
