"""
Module to store the bucket elimination solver the exact oracles fall back
to past their enumeration budgets.

Classes:
    EliminationSolution: Minimum, next level and optimal assignments.

Functions:
    elimination_order: Variable order peeled from a tree decomposition.
    eliminate: Minimize a pairwise energy over binary variables.
"""

from networkx.algorithms.approximation import treewidth_min_fill_in
from pymis.errors import BudgetExceeded

import logging
import networkx as nx
import numpy as np

log = logging.getLogger(__name__)

ENUMERATION_LIMIT = 1 << 17


class EliminationSolution:
    """
    Result of a bucket elimination.

    Arguments:
        minimum (float): Lowest energy.
        next_level (float or None): Lowest energy strictly above the
            minimum, None if every assignment is optimal.
        assignments (list or None): Every optimal assignment as a tuple of
            0/1 values, None when they weren't requested.
        width (int): Width of the elimination order.
    """

    def __init__(self, minimum, next_level, assignments, width):
        self.minimum = minimum
        self.next_level = next_level
        self.assignments = assignments
        self.width = width


def elimination_order(graph):
    """
    Variable elimination order of a graph and its width.

    Leaf bags of the min fill in tree decomposition are peeled one at a
    time, the vertices a leaf doesn't share with its neighbor bag are
    eliminated with it, so no bucket is wider than the decomposition.

    Arguments:
        graph (networkx.Graph): Interaction graph.

    Returns:
        tuple: (list of vertices, width)
    """

    if graph.number_of_nodes() == 0:
        return [], 0

    width, decomposition = treewidth_min_fill_in(graph)
    tree = nx.Graph(decomposition)
    order = []
    eliminated = set()
    while tree.number_of_nodes():
        bag = next(node for node in tree if tree.degree(node) <= 1)
        shared = set()
        for neighbor in tree.neighbors(bag):
            shared |= neighbor
        for vertex in sorted(bag - shared - eliminated):
            order.append(vertex)
            eliminated.add(vertex)
        tree.remove_node(bag)
    order.extend(sorted(set(graph) - eliminated))
    return order, max(width, 0)


def _expand(scope, values, target):
    """
    View of a factor table broadcastable over a wider sorted scope.
    """
    return np.reshape(
        values,
        [2 if variable in scope else 1 for variable in target],
    )


def _minimize(low, high, axis, tolerance):
    """
    Lowest and next distinct value of a bucket once a variable is
    minimized out.
    """
    low_0, low_1 = np.take(low, 0, axis), np.take(low, 1, axis)
    high_0, high_1 = np.take(high, 0, axis), np.take(high, 1, axis)
    best = np.minimum(low_0, low_1)
    candidates = np.stack([low_0, low_1, high_0, high_1])
    above = np.where(candidates > best + tolerance, candidates, np.inf)
    return best, above.min(axis=0)


def eliminate(
    n_variables,
    unary,
    pairwise,
    width=10,
    tolerance=0.0,
    all_assignments=True,
    limit=ENUMERATION_LIMIT,
):
    """
    Minimize sum_i unary[i][x_i] + sum_ik pairwise[i, k][x_i][x_k] over
    binary assignments by bucket elimination.

    Every factor carries its lowest and its next distinct value, which
    add up as (a + b, min(a + b', a' + b)) when two factors share no
    eliminated variable, so the first level above the minimum comes out
    of the same pass. The optimal assignments are the ones that keep
    every bucket at its minimum, listed by backtracking in reverse
    elimination order.

    Arguments:
        n_variables (int): Number of binary variables.
        unary (array): (n_variables, 2) costs of every value.
        pairwise (dict): (i, k) -> (2, 2) costs indexed [x_i][x_k].
        width (int): Largest elimination width allowed.
        tolerance (float): Values closer than this share a level.
        all_assignments (bool): List the optimal assignments.
        limit (int): Maximum number of optimal assignments.

    Returns:
        EliminationSolution
    """

    graph = nx.Graph()
    graph.add_nodes_from(range(n_variables))
    factors = [
        ((i,), np.asarray(unary[i], dtype=float), np.full(2, np.inf))
        for i in range(n_variables)
    ]
    for (i, k), table in pairwise.items():
        table = np.asarray(table, dtype=float)
        if i > k:
            i, k, table = k, i, table.T
        graph.add_edge(i, k)
        factors.append(((i, k), table, np.full((2, 2), np.inf)))

    order, order_width = elimination_order(graph)
    if order_width > width:
        raise BudgetExceeded(
            'Elimination width is {}, budget is {}'.format(order_width, width),
            stage='oracle',
        )
    log.debug('Eliminating {} variables with width {}'.format(
        n_variables,
        order_width,
    ))

    buckets = []
    for variable in order:
        bucket = [factor for factor in factors if variable in factor[0]]
        factors = [factor for factor in factors if variable not in factor[0]]
        scope = tuple(sorted(set().union(*(factor[0] for factor in bucket))))
        low = np.zeros([2] * len(scope))
        high = np.full([2] * len(scope), np.inf)
        for factor_scope, factor_low, factor_high in bucket:
            factor_low = _expand(factor_scope, factor_low, scope)
            factor_high = _expand(factor_scope, factor_high, scope)
            low, high = (
                low + factor_low,
                np.minimum(low + factor_high, high + factor_low),
            )
        axis = scope.index(variable)
        buckets.append((variable, scope, low))
        low, high = _minimize(low, high, axis, tolerance)
        factors.append((scope[:axis] + scope[axis + 1:], low, high))

    # Only constants are left, one per connected component
    minimum, next_level = 0.0, np.inf
    for _, low, high in factors:
        minimum, next_level = (
            minimum + float(low),
            min(minimum + float(high), next_level + float(low)),
        )

    assignments = None
    if all_assignments:
        assignments = _optimal_assignments(
            n_variables,
            buckets,
            tolerance,
            limit,
        )
    return EliminationSolution(
        minimum,
        None if np.isinf(next_level) else next_level,
        assignments,
        order_width,
    )


def _optimal_assignments(n_variables, buckets, tolerance, limit):
    """
    Every assignment that keeps all the buckets at their minimum.
    """

    assignment = np.zeros(n_variables, dtype=np.int64)
    if not buckets:
        return [tuple(assignment)]

    def options(position):
        variable, scope, low = buckets[position]
        row = low[tuple(
            slice(None) if other == variable else assignment[other]
            for other in scope
        )]
        best = row.min()
        return [value for value in (0, 1) if row[value] <= best + tolerance]

    found = []
    choices = [None] * len(buckets)
    position = len(buckets) - 1
    choices[position] = options(position)
    while position < len(buckets):
        if not choices[position]:
            position += 1
            continue
        assignment[buckets[position][0]] = choices[position].pop()
        if position > 0:
            position -= 1
            choices[position] = options(position)
            continue
        found.append(tuple(int(value) for value in assignment))
        if len(found) > limit:
            raise BudgetExceeded(
                'More than {} optimal assignments'.format(limit),
                stage='oracle',
            )
    return found
