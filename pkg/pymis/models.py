"""
Module to store the models.

Classes:
    IsingInstance: Classical Ising Hamiltonian.
    ClusterModel: Spins grouped into clusters that encode graph vertices.
    EnergyBreakdown: Decomposition of a cluster model energy.

Functions:
    to_number: Parse an energy value from its JSON representation.
    from_number: JSON representation of an energy value.
"""

from fractions import Fraction
from pymis.errors import ConfigError, ThresholdViolation

import numpy as np


def to_number(value):
    """
    Parse an energy value. Rationals are stored as 'p/q' strings.
    """
    if isinstance(value, str):
        return Fraction(value)
    return value


def from_number(value):
    """
    JSON representation of an energy value.
    """
    if value is None:
        return None
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return value.numerator
        return '{}/{}'.format(value.numerator, value.denominator)
    return value


class IsingInstance:
    """
    Classical Ising Hamiltonian E(s) = -sum J_ik s_i s_k - sum h_i s_i.

    Arguments:
        n_spins (int): Number of spins.
        couplings (iterable): (i, k, J_ik) triplets.
        fields (list): Longitudinal field h_i of each spin.
        threshold (number): Energy scale J, every coupling must have
            |J_ik| >= J.
        constant (number): Additive constant dropped from the stored
            Hamiltonian, so that energy + constant is the energy of the
            canonical form.
        clusters (list): Optional spin ids of each graph vertex, first one
            is the representative spin.
        tau (list): Optional gauge sign of each spin.
        deleted (iterable): Spins removed from the hardware lattice.

    Public methods:
        energy: Energy of a spin configuration.
        coupling: Coupling between two spins.
        neighbors: Coupled spins of a spin.
        to_dict: JSON serializable representation.
        from_dict: Build from the JSON representation.
    """

    def __init__(
        self,
        n_spins,
        couplings,
        fields,
        threshold,
        constant=0,
        clusters=None,
        tau=None,
        deleted=(),
    ):
        self.n_spins = n_spins
        self.threshold = threshold
        self.constant = constant
        self.clusters = clusters
        self.tau = tau
        self.deleted = frozenset(deleted)

        merged = {}
        for i, k, J in couplings:
            if i == k:
                raise ConfigError('Self coupling on spin {}'.format(i))
            if J == 0:
                continue
            pair = (min(i, k), max(i, k))
            merged[pair] = merged.get(pair, 0) + J
        self.couplings = tuple(
            (i, k, J) for (i, k), J in sorted(merged.items())
        )

        if len(fields) != n_spins:
            raise ConfigError(
                '{} fields given for {} spins'.format(len(fields), n_spins)
            )
        self.fields = list(fields)

        for i, k, J in self.couplings:
            if abs(J) < threshold:
                raise ThresholdViolation(
                    'Coupling ({}, {}) magnitude {} is below the '
                    'threshold {}'.format(
                        i,
                        k,
                        from_number(abs(J)),
                        from_number(threshold),
                    ),
                    witness={'coupling': [i, k]},
                )

        self._adjacency = [dict() for _ in range(n_spins)]
        for i, k, J in self.couplings:
            self._adjacency[i][k] = J
            self._adjacency[k][i] = J

    def coupling(self, i, k):
        return self._adjacency[i].get(k, 0)

    def neighbors(self, spin):
        return sorted(self._adjacency[spin])

    def energy(self, config):
        """
        Energy of a spin configuration, without the additive constant.
        """
        if len(config) != self.n_spins:
            raise ValueError(
                'Configuration has {} spins, instance has {}'.format(
                    len(config),
                    self.n_spins,
                )
            )
        value = 0
        for i, k, J in self.couplings:
            value -= J * config[i] * config[k]
        for h, s in zip(self.fields, config):
            value -= h * s
        return value

    def with_fields(self, fields, deleted=None):
        """
        Copy of the instance with other fields.
        """
        return IsingInstance(
            self.n_spins,
            self.couplings,
            fields,
            self.threshold,
            self.constant,
            self.clusters,
            self.tau,
            self.deleted if deleted is None else deleted,
        )

    def to_dict(self):
        data = {
            'spins': self.n_spins,
            'couplings': [
                [i, k, from_number(J)] for i, k, J in self.couplings
            ],
            'fields': [from_number(h) for h in self.fields],
            'threshold': from_number(self.threshold),
            'constant': from_number(self.constant),
        }
        if self.clusters is not None:
            data['clusters'] = [list(members) for members in self.clusters]
        if self.tau is not None:
            data['tau'] = list(self.tau)
        if self.deleted:
            data['deleted'] = sorted(self.deleted)
        return data

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(
                data['spins'],
                [(i, k, to_number(J)) for i, k, J in data['couplings']],
                [to_number(h) for h in data['fields']],
                to_number(data['threshold']),
                to_number(data.get('constant', 0)),
                data.get('clusters'),
                data.get('tau'),
                data.get('deleted', ()),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError('Invalid Ising instance data: {}'.format(e))

    def __repr__(self):
        return '<IsingInstance spins={} couplings={}>'.format(
            self.n_spins,
            len(self.couplings),
        )


class ClusterModel:
    """
    Spins grouped into clusters that encode graph vertices.

    Spins are numbered globally. Cluster i holds the spins clusters[i],
    the first one being its representative spin.

    Arguments:
        clusters (list): Spin ids of each cluster.
        intra (list): (a, b, J) couplings inside clusters, forming a tree
            on each cluster.
        inter (list): (a, b, J) couplings between clusters, at most one
            per pair of clusters.
        tau (list): Optional gauge sign of each spin.

    Attributes and properties:
        n_spins (int): Total number of spins.
        cluster_of (list): Cluster of each spin.
    """

    def __init__(self, clusters, intra, inter, tau=None):
        self.clusters = [list(members) for members in clusters]
        self.intra = [tuple(coupling) for coupling in intra]
        self.inter = [tuple(coupling) for coupling in inter]
        self.tau = list(tau) if tau is not None else None

        self.n_spins = sum(len(members) for members in self.clusters)
        self.cluster_of = [None] * self.n_spins
        for index, members in enumerate(self.clusters):
            for spin in members:
                if not 0 <= spin < self.n_spins or \
                        self.cluster_of[spin] is not None:
                    raise ConfigError(
                        'Spin {} is out of range or in two clusters'.format(
                            spin
                        )
                    )
                self.cluster_of[spin] = index

    @classmethod
    def singletons(cls, g, couplings=None):
        """
        Cluster model with one spin per vertex and gauge +1.
        """
        couplings = couplings or {}
        return cls(
            [[v] for v in range(g.n_vertices)],
            [],
            [(u, v, couplings.get((u, v), -1)) for u, v in g.edges],
            [1] * g.n_vertices,
        )

    def with_tau(self, tau):
        return ClusterModel(self.clusters, self.intra, self.inter, tau)

    def cluster_sizes(self):
        return [len(members) for members in self.clusters]

    def to_dict(self):
        return {
            'clusters': self.clusters,
            'intra': [[a, b, from_number(J)] for a, b, J in self.intra],
            'inter': [[a, b, from_number(J)] for a, b, J in self.inter],
            'tau': self.tau,
        }

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(
                data['clusters'],
                [(a, b, to_number(J)) for a, b, J in data['intra']],
                [(a, b, to_number(J)) for a, b, J in data['inter']],
                data.get('tau'),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError('Invalid cluster model data: {}'.format(e))


class EnergyBreakdown:
    """
    Decomposition H1 + H2 + V of a cluster model energy.

    Arguments:
        h1 (number): Intra cluster misalignment energy, nonnegative.
        h2 (number): Inter cluster conflict energy, nonnegative.
        v (number): Degeneracy breaking term.
        constant (number): total minus the stored Hamiltonian energy.
    """

    def __init__(self, h1, h2, v, constant):
        self.h1 = h1
        self.h2 = h2
        self.v = v
        self.constant = constant

    @property
    def total(self):
        return self.h1 + self.h2 + self.v

    def to_dict(self):
        return {
            'H1': from_number(self.h1),
            'H2': from_number(self.h2),
            'V': from_number(self.v),
            'total': from_number(self.total),
            'constant': from_number(self.constant),
        }
