"""
Module to translate maximum independent set instances into classical
Ising Hamiltonians.

Vertices in the independent set are encoded as spins s = -1.

Functions:
    mis_to_ising: Plain one spin per vertex reduction.
    decode: Vertex set encoded by a spin configuration.
    decode_cluster: Coarse grained cluster spins of a configuration.
    infer_tau: Propagate the gauge signs along the cluster trees.
    orient_tau: Gauge with every link antiferromagnetic, flipping clusters.
    check_cluster_model: Check the tree and gauge invariants.
    build_cluster_hamiltonian: Reduction of a cluster model.
    energy: Energy of a configuration.
    energy_breakdown: H1 + H2 + V decomposition of a configuration.
"""

from fractions import Fraction
from pymis.errors import (
    ConfigError,
    GaugeViolation,
    InterClusterSignConflict,
    SignViolation,
    ThresholdViolation,
    TreeViolation,
)
from pymis.models import ClusterModel, EnergyBreakdown, IsingInstance

import logging
import networkx as nx

log = logging.getLogger(__name__)

VARIANTS = ('representative', 'distributed')


def _check_threshold(couplings, threshold):
    if threshold <= 0:
        raise ThresholdViolation('Threshold J must be positive')
    for a, b, J in couplings:
        if abs(J) < threshold:
            raise ThresholdViolation(
                'Threshold {} is bigger than |J| = {} on ({}, {})'.format(
                    threshold,
                    abs(J),
                    a,
                    b,
                ),
                witness={'coupling': [a, b]},
            )


def mis_to_ising(g, couplings=None, threshold=1):
    """
    Plain one spin per vertex reduction.

    Every edge becomes an antiferromagnetic coupling J_ik < 0 and the
    fields are h_i = sum_k |J_ik| - J, so the energy is, up to the
    constant sum |J_ik|:

        sum |J_ik| (1 - s_i)(1 - s_k) + J sum s_i

    Arguments:
        g (Graph): Graph to encode.
        couplings (dict): Optional (u, v) -> J_uv < 0, default -1.
        threshold (number): Degeneracy breaking scale J <= min |J_ik|.

    Returns:
        IsingInstance: Its ground states are the maximum independent sets,
            with a classical gap of at least 2J.
    """

    couplings = couplings or {}
    triplets = []
    for u, v in g.edges:
        J = couplings.get((u, v), couplings.get((v, u), -1))
        if J >= 0:
            raise SignViolation(
                'Coupling ({}, {}) = {} is not antiferromagnetic'.format(
                    u,
                    v,
                    J,
                ),
                witness={'edge': [u, v]},
            )
        triplets.append((u, v, J))
    _check_threshold(triplets, threshold)

    fields = [-threshold] * g.n_vertices
    for u, v, J in triplets:
        fields[u] += abs(J)
        fields[v] += abs(J)

    return IsingInstance(
        g.n_vertices,
        triplets,
        fields,
        threshold,
        constant=sum(abs(J) for _, _, J in triplets),
    )


def decode_cluster(inst, config):
    """
    Coarse grained spin S_i = tau_i0 s_i0 of each cluster.
    """
    return [
        (inst.tau[members[0]] if inst.tau else 1) * config[members[0]]
        for members in inst.clusters
    ]


def decode(inst, config):
    """
    Vertex set encoded by a spin configuration.

    Plain instances return {i : s_i = -1}, cluster instances
    {i : S_i = -1}. Spins of deleted hardware sites are ignored.
    """
    if len(config) != inst.n_spins:
        raise ValueError(
            'Configuration has {} spins, instance has {}'.format(
                len(config),
                inst.n_spins,
            )
        )
    if inst.clusters is None:
        return {i for i, s in enumerate(config) if s == -1}
    return {
        i for i, S in enumerate(decode_cluster(inst, config)) if S == -1
    }


def _cluster_trees(cm):
    """
    Graph of the intra cluster couplings, checking they form a spanning
    tree of every cluster.
    """
    graph = nx.Graph()
    graph.add_nodes_from(range(cm.n_spins))
    for a, b, J in cm.intra:
        if cm.cluster_of[a] != cm.cluster_of[b]:
            raise TreeViolation(
                'Intra cluster coupling ({}, {}) joins two clusters'.format(
                    a,
                    b,
                )
            )
        if J == 0:
            raise SignViolation(
                'Intra cluster coupling ({}, {}) is zero'.format(a, b)
            )
        graph.add_edge(a, b, J=J)

    edges_per_cluster = [0] * len(cm.clusters)
    for a, _, _ in cm.intra:
        edges_per_cluster[cm.cluster_of[a]] += 1

    for index, members in enumerate(cm.clusters):
        if not members:
            raise TreeViolation('Cluster {} is empty'.format(index))
        if not nx.is_tree(graph.subgraph(members)) or \
                edges_per_cluster[index] != len(members) - 1:
            raise TreeViolation(
                'Cluster {} is not a connected tree'.format(index),
                witness={'cluster': index},
            )
    return graph


def _check_inter(cm, tau):
    linked = set()
    for a, b, J in cm.inter:
        pair = tuple(sorted((cm.cluster_of[a], cm.cluster_of[b])))
        if pair[0] == pair[1]:
            raise TreeViolation(
                'Inter cluster coupling ({}, {}) inside a cluster'.format(
                    a,
                    b,
                )
            )
        if pair in linked:
            raise ConfigError(
                'Clusters {} and {} have more than one link'.format(*pair)
            )
        linked.add(pair)
        if J * tau[a] * tau[b] >= 0:
            raise InterClusterSignConflict(
                'Link ({}, {}) is effectively ferromagnetic'.format(a, b),
                witness={'edge': [a, b], 'clusters': list(pair)},
            )


def _propagate_tau(cm):
    trees = _cluster_trees(cm)
    tau = [0] * cm.n_spins
    for members in cm.clusters:
        tau[members[0]] = 1
        for spin, neighbor in nx.bfs_edges(trees, members[0]):
            J = trees[spin][neighbor]['J']
            tau[neighbor] = tau[spin] * (1 if J > 0 else -1)
    return tau


def infer_tau(cm):
    """
    Propagate the gauge signs along the cluster trees.

    The representative spin of every cluster gets tau = +1 and each tree
    coupling fixes the sign of its other end so that J tau_a tau_b > 0.

    Returns:
        ClusterModel: Copy of the model with the inferred gauge.
    """

    tau = _propagate_tau(cm)
    _check_inter(cm, tau)
    return cm.with_tau(tau)


def orient_tau(cm):
    """
    Gauge where every link is antiferromagnetic, flipping whole clusters.

    The tree propagation fixes the gauge of each cluster up to a global
    sign. Those signs are chosen along the links, starting from +1 on the
    lowest cluster of each connected component, so representatives may end
    with tau = -1.

    Raises:
        InterClusterSignConflict: if a cycle of links leaves no consistent
            choice.
    """

    tau = _propagate_tau(cm)
    links = nx.Graph()
    links.add_nodes_from(range(len(cm.clusters)))
    for a, b, J in cm.inter:
        # Relative flip making the link antiferromagnetic
        links.add_edge(
            cm.cluster_of[a],
            cm.cluster_of[b],
            flip=1 if J * tau[a] * tau[b] < 0 else -1,
        )

    orientation = [0] * len(cm.clusters)
    for component in nx.connected_components(links):
        start = min(component)
        orientation[start] = 1
        for cluster, neighbor in nx.bfs_edges(links, start):
            flip = links[cluster][neighbor]['flip']
            orientation[neighbor] = orientation[cluster] * flip

    tau = [
        sign * orientation[cluster]
        for sign, cluster in zip(tau, cm.cluster_of)
    ]
    _check_inter(cm, tau)
    return cm.with_tau(tau)


def check_cluster_model(cm):
    """
    Check the tree and gauge invariants of a cluster model with gauge.
    """
    _cluster_trees(cm)
    if cm.tau is None or len(cm.tau) != cm.n_spins:
        raise GaugeViolation('Cluster model has no gauge for every spin')
    for a, b, J in cm.intra:
        if J * cm.tau[a] * cm.tau[b] <= 0:
            raise GaugeViolation(
                'Intra cluster coupling ({}, {}) breaks the gauge'.format(
                    a,
                    b,
                ),
                witness={'edge': [a, b]},
            )
    try:
        _check_inter(cm, cm.tau)
    except InterClusterSignConflict as e:
        raise GaugeViolation(e.message, witness=e.witness)


def _perturbation(cm, threshold, variant):
    """
    Spin -> coefficient c so that V = sum c s.
    """
    if variant not in VARIANTS:
        raise ConfigError('Unknown reduction variant {}'.format(variant))
    half = Fraction(threshold) / 2
    coefficients = {}
    for members in cm.clusters:
        if variant == 'representative':
            coefficients[members[0]] = half * cm.tau[members[0]]
        else:
            for spin in members:
                coefficients[spin] = half * cm.tau[spin] / len(members)
    return coefficients


def build_cluster_hamiltonian(cm, threshold=1, variant='representative'):
    """
    Reduction of a cluster model.

    The fields are chosen so the energy equals H1 + H2 + V up to the
    constant sum |J| over every coupling, where

        H1 = sum_intra |J| (1 - tau_a tau_b s_a s_b)
        H2 = sum_inter |J| (1 - tau_a s_a)(1 - tau_b s_b)

    and V is (J/2) sum_i tau_i0 s_i0 for the representative variant or
    (J/2) sum_ia tau_ia s_ia / n_i for the distributed one.

    Arguments:
        cm (ClusterModel): Model to encode, the gauge is inferred if
            missing.
        threshold (number): Scale J <= min |J|.
        variant (str): 'representative' or 'distributed'.

    Returns:
        IsingInstance: Its ground states decode to the maximum independent
            sets, with a classical gap of at least J.
    """

    if cm.tau is None:
        cm = infer_tau(cm)
    check_cluster_model(cm)
    _check_threshold(cm.intra + cm.inter, threshold)

    fields = [Fraction(0)] * cm.n_spins
    for a, b, J in cm.inter:
        fields[a] += abs(J) * cm.tau[a]
        fields[b] += abs(J) * cm.tau[b]
    for spin, coefficient in _perturbation(cm, threshold, variant).items():
        fields[spin] -= coefficient

    log.debug(
        'Built cluster Hamiltonian with {} spins in {} clusters'.format(
            cm.n_spins,
            len(cm.clusters),
        )
    )
    return IsingInstance(
        cm.n_spins,
        cm.intra + cm.inter,
        [_simplify(h) for h in fields],
        threshold,
        constant=sum(abs(J) for _, _, J in cm.intra + cm.inter),
        clusters=cm.clusters,
        tau=cm.tau,
    )


def _simplify(value):
    if isinstance(value, Fraction) and value.denominator == 1:
        return value.numerator
    return value


def energy(inst, config):
    """
    Energy of a configuration, without the additive constant.
    """
    return inst.energy(config)


def energy_breakdown(cm, threshold, config, variant='representative'):
    """
    H1 + H2 + V decomposition of a configuration.

    Returns:
        EnergyBreakdown: with the constant that separates the total from
            the stored Hamiltonian energy.
    """

    if cm.tau is None:
        cm = infer_tau(cm)
    tau = cm.tau
    h1 = sum(
        abs(J) * (1 - tau[a] * tau[b] * config[a] * config[b])
        for a, b, J in cm.intra
    )
    h2 = sum(
        abs(J) * (1 - tau[a] * config[a]) * (1 - tau[b] * config[b])
        for a, b, J in cm.inter
    )
    v = sum(
        coefficient * config[spin]
        for spin, coefficient in _perturbation(cm, threshold, variant).items()
    )
    stored = build_cluster_hamiltonian(cm, threshold, variant).energy(config)
    return EnergyBreakdown(
        h1,
        h2,
        _simplify(v),
        _simplify(h1 + h2 + v - stored),
    )


def random_magnitudes(g, threshold, rng, spread=3):
    """
    Antiferromagnetic couplings with magnitudes drawn in
    [J, spread * J].
    """
    return {
        edge: -float(rng.uniform(threshold, spread * threshold))
        for edge in g.edges
    }
