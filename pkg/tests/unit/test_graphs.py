from fractions import Fraction
from pymis.errors import (
    CertificationFailure,
    ConfigError,
    DegenerateDrawing,
    GadgetOverlap,
)
from pymis.graphs import (
    CELL_EDGES,
    CELL_VERTICES,
    CROSSOVER_INCREMENT,
    CROSSOVER_VERTICES,
    CrossingRecord,
    Drawing,
    Graph,
    certify_crossover,
    certify_gadget,
    draw_planar,
    find_crossings,
    is_planar,
    planarize,
    project,
    random_connected_graph,
)
from pymis.oracle import mis_exact
from tests import factories
from tests.conftest import K5_COORDS

import json
import numpy as np
import pytest


class TestGraph:

    def test_edges_are_normalized_and_sorted(self):
        g = Graph(3, [(2, 1), (1, 0)])

        assert g.edges == ((0, 1), (1, 2))
        assert g.neighbors(1) == [0, 2]
        assert g.degree(0) == 1
        assert g.has_edge(2, 1)
        assert g.n_edges == 2

    @pytest.mark.parametrize(
        'edges',
        [
            [(1, 1)],
            [(0, 3)],
            [(0, 1), (1, 0)],
        ]
    )
    def test_invalid_edges_raise_error(self, edges):
        with pytest.raises(ConfigError):
            Graph(3, edges)

    def test_connectivity(self):
        assert Graph(3, [(0, 1), (1, 2)]).is_connected()
        assert not Graph(3, [(0, 1)]).is_connected()

    def test_from_dimacs_uses_one_indexed_vertices(self):
        g = Graph.from_dimacs('c comment\np mis 3 2\ne 1 2\ne 2 3\n')

        assert g == Graph(3, [(0, 1), (1, 2)])

    def test_from_dimacs_without_header_raises_error(self):
        with pytest.raises(ConfigError, match='header'):
            Graph.from_dimacs('e 1 2\n')

    def test_from_dimacs_with_invalid_line_raises_error(self):
        with pytest.raises(ConfigError, match='line 2'):
            Graph.from_dimacs('p mis 2 1\nx 1 2\n')

    def test_load_dimacs_file(self, path_file):
        g, drawing = Graph.load(path_file)

        assert g.n_vertices == 3
        assert drawing is None

    def test_load_json_file_with_drawing(self, k5_file):
        g, drawing = Graph.load(k5_file)

        assert g == factories.complete_graph(5)
        assert drawing.to_list() == K5_COORDS

    def test_load_missing_file_raises_error(self):
        with pytest.raises(ConfigError):
            Graph.load('missing.json')

    def test_load_invalid_json_raises_error(self, tmp_path):
        path = tmp_path / 'broken.json'
        path.write_text('{"n": ')

        with pytest.raises(ConfigError):
            Graph.load(str(path))

    def test_dict_representation_rebuilds_the_graph(self):
        g = factories.GraphFactory.create()

        assert Graph.from_dict(json.loads(json.dumps(g.to_dict()))) == g


class TestDrawing:

    def test_coordinates_are_exact(self):
        drawing = Drawing([[0.5, '1/3']])

        assert drawing[0] == (Fraction(1, 2), Fraction(1, 3))

    def test_decimal_strings_are_exact(self):
        drawing = Drawing([['0.1', 2], [-3, '-2.25']])

        assert drawing[0] == (Fraction(1, 10), 2)
        assert drawing[1] == (-3, Fraction(-9, 4))

    def test_integer_coordinates_serialize_as_integers(self):
        assert Drawing([[1, 2]]).to_list() == [[1, 2]]

    def test_draw_planar_has_no_crossings(self):
        g = factories.complete_graph(4)

        drawing = draw_planar(g)

        assert len(drawing) == 4
        assert find_crossings(g, drawing) == []

    def test_draw_planar_rejects_non_planar_graphs(self):
        with pytest.raises(ConfigError):
            draw_planar(factories.complete_graph(5))


class TestFindCrossings:

    def test_k5_drawing_has_one_crossing(self):
        crossings = find_crossings(
            factories.complete_graph(5),
            Drawing(K5_COORDS),
        )

        assert len(crossings) == 1
        assert crossings[0].edges == ((0, 4), (1, 3))
        assert crossings[0].point == (5, Fraction(5, 2))

    def test_shared_position_is_degenerate(self):
        with pytest.raises(DegenerateDrawing):
            find_crossings(Graph(2, [(0, 1)]), Drawing([[0, 0], [0, 0]]))

    def test_vertex_on_edge_is_degenerate(self):
        with pytest.raises(DegenerateDrawing) as error:
            find_crossings(
                Graph(3, [(0, 1)]),
                Drawing([[0, 0], [2, 0], [1, 0]]),
            )

        assert error.value.witness == {'vertex': 2, 'edge': [0, 1]}

    def test_three_edges_through_a_point_are_degenerate(self):
        g = Graph(6, [(0, 1), (2, 3), (4, 5)])
        drawing = Drawing(
            [[-2, 0], [2, 0], [0, -2], [0, 2], [-2, -2], [2, 2]]
        )

        with pytest.raises(DegenerateDrawing):
            find_crossings(g, drawing)

    def test_drawing_of_other_size_raises_error(self):
        with pytest.raises(ConfigError):
            find_crossings(Graph(3, [(0, 1)]), Drawing([[0, 0], [1, 0]]))


class TestGadgets:

    def test_crossover_is_certified(self):
        assert certify_crossover() == CROSSOVER_INCREMENT

    def test_gadget_with_wrong_increment_fails(self):
        with pytest.raises(CertificationFailure) as error:
            certify_gadget(CELL_VERTICES, CELL_EDGES, 5, (1, 2))

        assert len(error.value.witness['profile']) == 16

    def test_gadget_with_adjacent_terminals_fails(self):
        with pytest.raises(CertificationFailure):
            certify_gadget(5, ((0, 2), (0, 4)), 1, (1, 2))


class TestPlanarize:

    def test_planar_graph_without_drawing_is_kept(self):
        g = factories.PlanarGraphFactory.create()

        planar, crossings, offset = planarize(g)

        assert planar == g
        assert crossings == []
        assert offset == 0

    def test_non_planar_graph_needs_a_drawing(self):
        with pytest.raises(ConfigError):
            planarize(factories.complete_graph(5))

    def test_k5_gets_one_crossover(self):
        g = factories.complete_graph(5)

        planar, crossings, offset = planarize(g, Drawing(K5_COORDS))

        assert planar.n_vertices == 5 + CROSSOVER_VERTICES - 4
        assert offset == CROSSOVER_INCREMENT
        assert is_planar(planar)[0]
        assert not planar.has_edge(0, 4)
        assert not planar.has_edge(1, 3)
        assert crossings[0].terminals == (0, 1, 4, 3)
        assert crossings[0].gadget_vertices == list(
            range(5, planar.n_vertices)
        )

    def test_k5_planarization_keeps_the_offset(self):
        g = factories.complete_graph(5)

        planar, _, offset = planarize(g, Drawing(K5_COORDS))

        assert mis_exact(planar).size == mis_exact(g).size + offset

    def test_edge_crossed_twice_raises_overlap(self):
        g = Graph(6, [(0, 1), (2, 3), (4, 5)])
        drawing = Drawing(
            [[0, 0], [10, 0], [3, -1], [3, 1], [7, -1], [7, 1]]
        )

        with pytest.raises(GadgetOverlap) as error:
            planarize(g, drawing)

        assert error.value.witness['edge'] == [0, 1]

    def test_crossing_record_dict_representation(self):
        _, crossings, _ = planarize(
            factories.complete_graph(5),
            Drawing(K5_COORDS),
        )

        record = CrossingRecord.from_dict(crossings[0].to_dict())

        assert record.edges == crossings[0].edges
        assert record.terminals == crossings[0].terminals

    def test_project_keeps_the_original_vertices(self):
        assert project([7, 0, 50, 3], 5) == [0, 3]


class TestRandomConnectedGraph:

    @pytest.mark.parametrize('n_vertices', [1, 2, 6, 9])
    def test_graph_is_connected(self, n_vertices):
        g = random_connected_graph(
            n_vertices,
            0.3,
            np.random.default_rng(n_vertices),
        )

        assert g.n_vertices == n_vertices
        assert g.is_connected()

    def test_same_seed_gives_the_same_graph(self):
        first = random_connected_graph(8, 0.5, np.random.default_rng(3))
        second = random_connected_graph(8, 0.5, np.random.default_rng(3))

        assert first == second

    def test_planar_graphs_skip_crossing_edges(self):
        g = random_connected_graph(
            8,
            1,
            np.random.default_rng(0),
            planar=True,
        )

        assert is_planar(g)[0]
        assert g.n_edges == 3 * 8 - 6
