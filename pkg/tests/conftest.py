from pymis.graphs import Graph

import json
import os
import pytest

os.environ['PYMIS_CONFIG'] = 'assets/config.yaml'

# It needs to be after the environmental variable
from tests import factories  # noqa: E402,F401

# Triangle with two interior points, the only straight line drawing of K5
# with a single crossing up to deformation.
K5_COORDS = [[0, 0], [10, 0], [5, 10], [4, 3], [6, 3]]

# Sides {0, 1, 2} and {3, 4, 5}, the only crossing is (0, 3) with (1, 5).
K33_EDGES = [(a, b) for a in range(3) for b in range(3, 6)]
K33_COORDS = [[0, 0], [4, 0], [2, 4], [2, 1], [7, -2], [-2, 2]]


def _write_graph(directory, name, g, coords=None):
    data = g.to_dict()
    if coords is not None:
        data['coords'] = coords
    path = os.path.join(str(directory), name)
    with open(path, 'w') as f:
        json.dump(data, f)
    return path


@pytest.fixture(scope='function')
def output_dir(tmp_path):
    '''
    Fixture to set up a clean artifact directory.
    '''
    directory = tmp_path / 'artifacts'
    return str(directory)


@pytest.fixture(scope='function')
def k4_file(tmp_path):
    '''
    Fixture with the path of a K4 graph file.
    '''
    return _write_graph(tmp_path, 'k4.json', factories.complete_graph(4))


@pytest.fixture(scope='function')
def k5_file(tmp_path):
    '''
    Fixture with the path of a K5 graph file with a one crossing drawing.
    '''
    return _write_graph(
        tmp_path,
        'k5.json',
        factories.complete_graph(5),
        K5_COORDS,
    )


@pytest.fixture(scope='function')
def k33_file(tmp_path):
    '''
    Fixture with the path of a K3,3 graph file with a one crossing drawing.
    '''
    return _write_graph(
        tmp_path,
        'k33.json',
        Graph(6, K33_EDGES),
        K33_COORDS,
    )


@pytest.fixture(scope='function')
def path_file(tmp_path):
    '''
    Fixture with the path of a three vertex path in DIMACS format.
    '''
    path = tmp_path / 'path.dimacs'
    path.write_text('c path\np mis 3 2\ne 1 2\ne 2 3\n')
    return str(path)


@pytest.fixture(scope='function')
def edge_graph():
    return Graph(2, [(0, 1)])
