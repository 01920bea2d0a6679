from fractions import Fraction
from pymis.errors import BudgetExceeded
from pymis.graphs import Graph
from pymis.models import IsingInstance
from pymis.oracle import (
    Certificate,
    StageCheck,
    ising_ground,
    is_independent,
    mis_containing,
    mis_exact,
    mis_exhaustive,
    verify_pipeline,
)
from pymis.reduction import decode, mis_to_ising
from tests import factories

import itertools
import networkx as nx
import pytest


def brute_force_levels(inst):
    energies = sorted(
        set(
            inst.energy(config)
            for config in itertools.product((1, -1), repeat=inst.n_spins)
        )
    )
    return energies[0], energies[1] if len(energies) > 1 else None


class TestIsingGround:

    def test_single_spin(self):
        inst = IsingInstance(1, [], [1], 1)

        solution = ising_ground(inst)

        assert solution.ground_energy == -1
        assert solution.ground_configs == [(1,)]
        assert solution.first_excited == 1
        assert solution.gap == 2

    def test_flat_spectrum_has_no_excited_level(self):
        inst = IsingInstance(2, [], [0, 0], 1)

        solution = ising_ground(inst)

        assert solution.degeneracy == 4
        assert solution.first_excited is None
        assert solution.gap == 0

    def test_levels_match_brute_force(self):
        inst = factories.IsingInstanceFactory.create()

        solution = ising_ground(inst)

        ground, excited = brute_force_levels(inst)
        assert solution.ground_energy == ground
        assert solution.first_excited == excited
        for config in solution.ground_configs:
            assert inst.energy(config) == ground

    def test_rational_levels_are_exact(self):
        inst = IsingInstance(2, [(0, 1, Fraction(3, 2))], [Fraction(1, 3), 0], 1)

        solution = ising_ground(inst)

        assert solution.ground_energy == Fraction(-11, 6)
        assert isinstance(solution.first_excited, Fraction)

    def test_workers_give_the_same_solution(self):
        inst = factories.IsingInstanceFactory.create(n_spins=18)

        single = ising_ground(inst)
        threaded = ising_ground(inst, workers=3)

        assert threaded.ground_energy == single.ground_energy
        assert threaded.ground_configs == single.ground_configs
        assert threaded.first_excited == single.first_excited

    def test_fixed_spins_are_clamped(self):
        inst = IsingInstance(2, [(0, 1, -1)], [1, 1], 1)

        solution = ising_ground(inst, fixed={0: -1})

        assert all(config[0] == -1 for config in solution.ground_configs)
        assert solution.ground_configs == [(-1, 1)]

    def test_budget_exceeded(self):
        inst = IsingInstance(5, [], [0] * 5, 1)

        with pytest.raises(BudgetExceeded):
            ising_ground(inst, budget=4)

    def test_fixed_spins_do_not_count_for_the_budget(self):
        inst = IsingInstance(5, [], [1] * 5, 1)

        solution = ising_ground(inst, budget=3, fixed={0: 1, 1: 1})

        assert solution.ground_configs == [(1,) * 5]

    @pytest.mark.parametrize('seed', range(10))
    def test_elimination_matches_enumeration(self, seed):
        inst = factories.IsingInstanceFactory.create(n_spins=8, seed=seed)

        enumerated = ising_ground(inst)
        eliminated = ising_ground(inst, budget=0, width=8)

        assert eliminated.ground_energy == enumerated.ground_energy
        assert eliminated.first_excited == enumerated.first_excited
        assert eliminated.ground_configs == enumerated.ground_configs

    def test_elimination_with_fixed_spins(self):
        inst = IsingInstance(
            3,
            [(0, 1, -1), (1, 2, Fraction(1, 2)), (0, 2, 1)],
            [1, 0, Fraction(-1, 2)],
            1,
        )

        enumerated = ising_ground(inst, fixed={1: -1})
        eliminated = ising_ground(inst, budget=1, fixed={1: -1}, width=2)

        assert eliminated.ground_energy == enumerated.ground_energy
        assert eliminated.first_excited == enumerated.first_excited
        assert eliminated.ground_configs == enumerated.ground_configs

    def test_elimination_reaches_past_the_spin_budget(self):
        # Antiferromagnetic chain of 40 spins, 2^40 configurations
        inst = IsingInstance(
            40,
            [(i, i + 1, -1) for i in range(39)],
            [0] * 40,
            1,
        )

        solution = ising_ground(inst, width=2)

        assert solution.ground_energy == -39
        assert solution.first_excited == -37
        # Ordered by enumeration index, bit k set means spin k is -1
        assert solution.ground_configs == [
            tuple(-(-1) ** i for i in range(40)),
            tuple((-1) ** i for i in range(40)),
        ]

    def test_solution_dict_representation(self):
        solution = ising_ground(IsingInstance(1, [], [Fraction(1, 2)], 1))

        assert solution.to_dict() == {
            'ground_energy': '-1/2',
            'first_excited': '1/2',
            'gap': 1,
            'ground_configs': [[1]],
        }


class TestMis:

    def test_exact_matches_exhaustive_search(self):
        g = factories.GraphFactory.create()

        exact = mis_exact(g, all_sets=True)
        exhaustive = mis_exhaustive(g)

        assert exact.size == exhaustive.size
        assert exact.sets == exhaustive.sets

    def test_sets_are_only_listed_on_request(self):
        result = mis_exact(factories.complete_graph(4))

        assert result.size == 1
        assert result.sets is None
        assert result.to_dict() == {'size': 1, 'sets': None}

    def test_path_has_a_single_maximum_set(self):
        result = mis_exact(Graph(3, [(0, 1), (1, 2)]), all_sets=True)

        assert result.sets == [(0, 2)]

    def test_petersen_graph(self):
        g = Graph(10, nx.petersen_graph().edges())

        exact = mis_exact(g, all_sets=True)

        assert exact.size == 4
        assert len(exact.sets) == 5
        assert exact.sets == mis_exhaustive(g).sets

    def test_complete_bipartite_graph(self):
        g = Graph(6, [(i, k) for i in range(3) for k in range(3, 6)])

        assert mis_exact(g, all_sets=True).sets == [(0, 1, 2), (3, 4, 5)]

    def test_graph_without_vertices(self):
        assert mis_exact(Graph(0)).size == 0

    def test_vertex_budget(self):
        with pytest.raises(BudgetExceeded):
            mis_exact(Graph(5), budget=4)

    def test_enumeration_budget(self):
        with pytest.raises(BudgetExceeded):
            mis_exact(Graph(5), all_sets=True, enumerate_budget=4)

    @pytest.mark.parametrize('seed', range(10))
    def test_elimination_matches_branch_and_bound(self, seed):
        g = factories.GraphFactory.create(n_vertices=9, seed=seed)

        searched = mis_exact(g, all_sets=True)
        eliminated = mis_exact(
            g,
            all_sets=True,
            budget=0,
            enumerate_budget=0,
            width=8,
        )

        assert eliminated.size == searched.size
        assert eliminated.sets == searched.sets

    def test_elimination_past_the_vertex_budget(self):
        # Cycle of 60 vertices, width 2
        g = Graph(60, [(i, (i + 1) % 60) for i in range(60)])

        assert mis_exact(g, width=2).size == 30
        assert mis_exact(g, all_sets=True, width=2).sets == [
            tuple(range(0, 60, 2)),
            tuple(range(1, 60, 2)),
        ]

    def test_default_vertex_budget(self):
        with pytest.raises(BudgetExceeded):
            mis_exact(Graph(41))

        assert mis_exact(Graph(40)).size == 40

    def test_mis_containing(self):
        g = Graph(4, [(0, 1), (1, 2), (2, 3)])

        assert mis_containing(g, [1]) == 2
        assert mis_containing(g, [0]) == 2
        assert mis_containing(g, [0, 1]) is None

    def test_is_independent(self):
        g = Graph(3, [(0, 1)])

        assert is_independent(g, [0, 2])
        assert not is_independent(g, [0, 1])


class TestCertificate:

    def test_skipped_checks_do_not_fail(self):
        certificate = Certificate()

        certificate.add('reduce', 'gap', True)
        certificate.add('embed', 'gap', None)

        assert certificate.passed
        assert certificate.budget_exceeded
        assert not certificate.certified
        assert certificate.to_dict()['certified'] is False

    def test_failed_check_fails_the_certificate(self):
        certificate = Certificate()

        certificate.add('reduce', 'gap', False, 'gap 0', witness={'gap': 0})

        assert not certificate.passed
        assert certificate.to_dict()['checks'][0]['witness'] == {'gap': 0}
        assert not certificate.certified

    def test_every_check_passing_certifies(self):
        certificate = Certificate()

        certificate.add('reduce', 'ground_states', True)
        certificate.add('reduce', 'gap', True)

        assert certificate.certified
        assert certificate.to_dict()['certified'] is True


class TestVerifyPipeline:

    def setup_check(self, g, inst, gap_bound, pinned=()):
        return StageCheck(
            'reduce',
            inst,
            lambda s: decode(inst, s),
            gap_bound,
            pinned,
        )

    def test_reduction_of_random_graph_passes(self):
        g = factories.GraphFactory.create()
        inst = mis_to_ising(g)

        certificate = verify_pipeline(g, [self.setup_check(g, inst, 2)])

        assert certificate.passed
        assert not certificate.budget_exceeded
        assert [check['check'] for check in certificate.checks] == \
            ['ground_states', 'gap']

    def test_gap_below_bound_fails(self):
        g = Graph(2, [(0, 1)])
        inst = mis_to_ising(g)

        certificate = verify_pipeline(g, [self.setup_check(g, inst, 3)])

        assert not certificate.passed
        assert certificate.checks[-1]['check'] == 'gap'

    def test_wrong_instance_gives_a_witness(self):
        g = Graph(3, [(0, 1), (1, 2)])
        # Missing the coupling of the second edge
        inst = IsingInstance(3, [(0, 1, -1)], [0, 0, -1], 1)

        certificate = verify_pipeline(g, [self.setup_check(g, inst, 1)])

        ground_states = certificate.checks[0]
        assert ground_states['passed'] is False
        assert 'config' in ground_states['witness']

    def test_missing_maximum_set_fails(self):
        g = Graph(2, [(0, 1)])
        # Only vertex 0 is favoured
        inst = IsingInstance(2, [(0, 1, -1)], [0, 1], 1)

        certificate = verify_pipeline(g, [self.setup_check(g, inst, 1)])

        assert certificate.checks[0]['passed'] is False
        assert certificate.checks[0]['witness'] == {'missing': [1]}

    def test_pinned_sites_need_a_dominant_field(self):
        g = Graph(1)
        inst = IsingInstance(2, [(0, 1, -1)], [-1, 2], 1)

        certificate = verify_pipeline(
            g,
            [self.setup_check(g, inst, 1, pinned=[1])],
        )

        deletion = certificate.checks[0]
        assert deletion['check'] == 'deletion'
        assert deletion['passed'] is True
        assert certificate.passed

    def test_over_budget_stages_are_skipped(self):
        g = factories.GraphFactory.create(n_vertices=6)
        inst = mis_to_ising(g)

        certificate = verify_pipeline(
            g,
            [self.setup_check(g, inst, 2)],
            budget=4,
        )

        assert certificate.passed
        assert certificate.budget_exceeded
        assert certificate.checks[0]['passed'] is None
        assert not certificate.certified

    def test_elimination_certifies_past_the_spin_budget(self):
        g = Graph(30, [(i, i + 1) for i in range(29)])
        inst = mis_to_ising(g)

        certificate = verify_pipeline(
            g,
            [self.setup_check(g, inst, 2)],
            width=4,
        )

        assert certificate.certified
        assert certificate.checks[0]['detail'] == \
            '16 ground states decode to the 16 maximum sets'
