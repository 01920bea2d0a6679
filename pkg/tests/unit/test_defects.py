from fractions import Fraction
from pymis.defects import (
    WEAK_COUPLING,
    WRONG_SIGN,
    DefectMap,
    classify_defects,
    defect_sweep,
    is_monotone,
    reroute,
    route_layout,
)
from pymis.embedder import SQUARE, ClusterLayout, embed_planar, embed_square
from pymis.errors import ConfigError, PatternMismatch, RoutingFailed
from pymis.hardware import (
    DIRECT,
    LatticeSpec,
    certify_links,
    compile_direct_layout,
    compile_direct_square,
    compile_simulated_triangular,
)
from pymis.oracle import StageCheck, verify_pipeline
from pymis.reduction import decode

import math
import pytest


class TestClassifyDefects:

    def test_wrong_sign_and_weak_couplings(self):
        realized = {
            ((0, 1), (0, 0)): 1,
            ((1, 0), (0, 0)): Fraction(1, 2),
        }

        defects = classify_defects(LatticeSpec(DIRECT), realized, 1)

        assert [record.kind for record in defects.records] == \
            [WRONG_SIGN, WEAK_COUPLING]
        assert defects.sites == {(0, 0)}
        assert len(defects) == 2

    def test_coupling_can_have_both_defects(self):
        realized = {((0, 0), (1, 0)): Fraction(-1, 2)}

        defects = classify_defects(LatticeSpec(DIRECT), realized, 1)

        assert [record.kind for record in defects.records] == \
            [WRONG_SIGN, WEAK_COUPLING]

    def test_nominal_couplings_have_no_defects(self):
        realized = {((0, 0), (0, 1)): -1, ((0, 0), (1, 0)): 2}

        assert len(classify_defects(LatticeSpec(DIRECT), realized, 1)) == 0

    def test_dict_representation(self):
        defects = classify_defects(
            LatticeSpec(DIRECT),
            {((0, 0), (0, 1)): Fraction(-1, 4)},
            1,
        )

        assert defects.to_dict() == {
            'defects': [{
                'edge': [[0, 0], [0, 1]],
                'kind': WEAK_COUPLING,
                'site': [0, 0],
                'value': '-1/4',
            }],
            'sites': [[0, 0]],
        }


class TestDefectMapParse:

    @pytest.fixture(autouse=True)
    def setup(self, edge_graph):
        self.program = compile_direct_square(edge_graph)

    def test_spin_ids_and_coordinates(self):
        by_id = DefectMap.parse(
            [{'edge': [1, 0], 'value': '1/2'}],
            self.program,
        )
        by_site = DefectMap.parse(
            [{'edge': [[0, 1], [0, 0]], 'value': 0.5}],
            self.program,
        )

        assert by_id == {((0, 0), (0, 1)): Fraction(1, 2)}
        assert by_site == {((0, 0), (0, 1)): 0.5}

    @pytest.mark.parametrize(
        'entries',
        [
            [{'edge': [0, 5], 'value': 1}],
            [{'edge': [0, 1]}],
            [{'value': 1}],
        ]
    )
    def test_invalid_entries_raise_error(self, entries):
        with pytest.raises(ConfigError):
            DefectMap.parse(entries, self.program)


class TestReroute:

    def test_program_without_defects_is_kept(self, edge_graph):
        program = compile_direct_square(edge_graph)

        assert reroute(program, DefectMap()) is program

    def test_defect_between_deleted_sites(self, edge_graph):
        program = compile_simulated_triangular(embed_planar(edge_graph))
        assert {(4, 1), (5, 1)} <= program.deleted
        defects = classify_defects(
            program.spec,
            {((4, 1), (5, 1)): -program.coupling((4, 1), (5, 1))},
            program.threshold,
        )

        rerouted = reroute(program, defects)

        assert (4, 1) in rerouted.defective
        assert (4, 1) not in rerouted.active
        assert rerouted.clusters == program.clusters
        assert all(
            result['passed'] is not False
            for result in certify_links(rerouted)
        )
        inst = rerouted.to_instance()
        certificate = verify_pipeline(edge_graph, [StageCheck(
            'route',
            inst,
            lambda s: decode(inst, s),
            inst.threshold,
            [rerouted.index[site] for site in rerouted.deleted],
        )])
        assert certificate.passed


    def row_program(self):
        # Two clusters of two sites in a row, the link is the middle bond
        layout = ClusterLayout(
            4,
            [[(0, 0), (1, 0)], [(2, 0), (3, 0)]],
            [],
            geometry=SQUARE,
        )
        program = compile_direct_layout(layout)
        defects = classify_defects(
            program.spec,
            {((1, 0), (2, 0)): -program.coupling((1, 0), (2, 0))},
            program.threshold,
        )
        return program, defects

    def test_broken_link_detours_outside_the_program_box(self, edge_graph):
        program, defects = self.row_program()
        assert program.links == [((1, 0), (2, 0))]
        assert defects.sites == {(1, 0)}

        rerouted = reroute(program, defects, certify=True)

        assert (1, 0) not in rerouted.active
        # Three new sites for the one that was lost
        assert len(rerouted.active) == len(program.active) + 2
        assert any(y != 0 for _, y in rerouted.active)
        assert [sites[0] for sites in rerouted.clusters] == [(0, 0), (2, 0)]
        inst = rerouted.to_instance()
        certificate = verify_pipeline(edge_graph, [StageCheck(
            'route',
            inst,
            lambda s: decode(inst, s),
            inst.threshold,
            [rerouted.index[site] for site in rerouted.deleted],
        )])
        assert certificate.certified

    def test_no_margin_keeps_paths_in_the_program_box(self):
        program, defects = self.row_program()

        with pytest.raises(RoutingFailed):
            reroute(program, defects, margin=0)

    def test_most_bonds_defective_fails_to_route(self):
        program, _ = self.row_program()
        bonds = sorted(
            ((x, y), neighbor)
            for x in range(-1, 5) for y in range(-1, 2)
            for neighbor in ((x + 1, y), (x, y + 1))
            if neighbor[0] <= 4 and neighbor[1] <= 1
        )
        # Column x = 1 is cut off first, the rest in lattice order
        wall = [((1, y), (2, y)) for y in range(-1, 2)]
        damaged = wall + [bond for bond in bonds if bond not in wall]
        damaged = damaged[:math.ceil(0.6 * len(bonds))]
        defects = classify_defects(
            program.spec,
            {
                (a, b): -program.spec.sign(a, b) * program.magnitude
                for a, b in damaged
            },
            program.threshold,
        )

        assert len(bonds) == 27
        assert {(1, -1), (1, 0), (1, 1)} <= defects.sites
        with pytest.raises(RoutingFailed):
            reroute(program, defects, margin=1)


class TestRouteLayout:

    def test_edge_on_the_direct_pattern(self, edge_graph):
        program = route_layout(
            embed_square(edge_graph),
            spec=LatticeSpec(DIRECT),
        )

        assert len(program.clusters) == 2
        assert (4, 4) in program.clusters[0]
        assert len(program.links) == 1
        assert all(
            result['passed'] is not False
            for result in certify_links(program)
        )

    def test_triangular_layout_raises_error(self, edge_graph):
        with pytest.raises(PatternMismatch):
            route_layout(embed_planar(edge_graph))

    def test_small_pitch_raises_error(self, edge_graph):
        with pytest.raises(ConfigError):
            route_layout(embed_square(edge_graph), pitch=1)


class TestDefectSweep:

    @pytest.fixture(autouse=True)
    def setup(self, edge_graph):
        self.program = compile_direct_square(edge_graph)

    def test_no_defects_always_succeed(self):
        assert defect_sweep(self.program, [0.0], 3) == [(0.0, 3, 3, 1.0)]

    def test_every_bond_defective_always_fails(self):
        rows = defect_sweep(self.program, [0.0, 0.5, 1.0], 4, seed=2)

        assert rows[0][3] == 1.0
        assert rows[-1][3] == 0.0
        assert is_monotone(rows)

    def test_same_seed_gives_the_same_rows(self):
        first = defect_sweep(self.program, [0.0, 0.5, 1.0], 5, seed=3)
        second = defect_sweep(
            self.program,
            [0.0, 0.5, 1.0],
            5,
            seed=3,
            workers=2,
        )

        assert first == second

    def test_sweep_of_a_hundred_trials(self, pytestconfig):
        densities = [0.0, 0.05, 0.6, 1.0]

        rows = defect_sweep(self.program, densities, 100, seed=5)

        assert rows == defect_sweep(
            self.program,
            densities,
            100,
            seed=5,
            workers=4,
        )
        assert [row[:2] for row in rows] == [(d, 100) for d in densities]
        assert rows[0][3] == 1.0
        assert rows[-1][3] == 0.0
        assert is_monotone(rows)
        # Rate at five percent is pinned by the first run
        recorded = pytestconfig.cache.get('pymis/defect_sweep_rate', None)
        if recorded is None:
            pytestconfig.cache.set('pymis/defect_sweep_rate', rows[1][3])
        else:
            assert rows[1][3] == recorded

    @pytest.mark.parametrize(
        'densities,trials',
        [
            ([-0.1], 1),
            ([1.5], 1),
            ([0.5], 0),
        ]
    )
    def test_invalid_settings_raise_error(self, densities, trials):
        with pytest.raises(ConfigError):
            defect_sweep(self.program, densities, trials)


class TestIsMonotone:

    def test_decreasing_rates(self):
        assert is_monotone([(0.2, 4, 1, 0.25), (0.0, 4, 4, 1.0)])

    def test_increasing_rates(self):
        assert not is_monotone([(0.0, 4, 2, 0.5), (0.5, 4, 3, 0.75)])
