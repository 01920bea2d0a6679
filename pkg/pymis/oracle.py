"""
Module to store the exact classical oracles used to certify every stage.

Classes:
    GroundSolution: Exact ground states of an Ising instance.
    MisResult: Exact maximum independent set solution.
    StageCheck: Stage output to be verified against the exact MIS.
    Certificate: Collection of pass/fail checks with witnesses.

Functions:
    ising_ground: Exact ground state search of an Ising instance.
    mis_exact: Exact maximum independent set.
    mis_exhaustive: Subset enumeration maximum independent set.
    verify_pipeline: Certify the stage outputs of a pipeline run.
"""

from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from functools import reduce
from math import gcd
from pymis.elimination import eliminate
from pymis.errors import BudgetExceeded, PymisError
from pymis.models import from_number

import logging
import numpy as np

log = logging.getLogger(__name__)

FLOAT_TOLERANCE = 1e-12
BLOCK_BITS = 16


class GroundSolution:
    """
    Exact ground states of an Ising instance.

    Arguments:
        ground_energy (number): Minimum energy.
        ground_configs (list): Spin configurations (tuples of +1/-1)
            sharing the minimum energy, ordered by enumeration index.
        first_excited (number or None): Lowest energy strictly above the
            ground level, None if the spectrum is flat.

    Attributes and properties:
        gap (number): Classical gap, 0 on flat spectra.
        degeneracy (int): Number of ground configurations.
    """

    def __init__(self, ground_energy, ground_configs, first_excited):
        self.ground_energy = ground_energy
        self.ground_configs = ground_configs
        self.first_excited = first_excited

    @property
    def gap(self):
        if self.first_excited is None:
            return 0
        return self.first_excited - self.ground_energy

    @property
    def degeneracy(self):
        return len(self.ground_configs)

    def to_dict(self):
        return {
            'ground_energy': from_number(self.ground_energy),
            'first_excited': from_number(self.first_excited),
            'gap': from_number(self.gap),
            'ground_configs': [list(config) for config in self.ground_configs],
        }


class MisResult:
    """
    Exact maximum independent set solution.

    Arguments:
        size (int): Maximum cardinality.
        sets (list or None): All the maximum independent sets as sorted
            tuples, None when they weren't requested.
    """

    def __init__(self, size, sets=None):
        self.size = size
        self.sets = sets

    def to_dict(self):
        return {
            'size': self.size,
            'sets': None if self.sets is None else [
                list(mis) for mis in self.sets
            ],
        }


def _is_rational(value):
    return isinstance(value, (int, Fraction, np.integer))


def _lcm(a, b):
    return a * b // gcd(a, b)


class _EnergyKernel:
    """
    Vectorized energy evaluation over blocks of spin configurations.

    Rational inputs are scaled to integers by the least common multiple of
    their denominators so degeneracy detection is exact. Anything else is
    evaluated in floating point and compared with FLOAT_TOLERANCE.

    Bit k of a configuration index set means free spin k is -1.
    """

    def __init__(self, inst, fixed=None):
        fixed = dict(fixed or {})
        self.n_spins = inst.n_spins
        self.fixed = fixed
        self.free = [i for i in range(inst.n_spins) if i not in fixed]

        values = [J for _, _, J in inst.couplings] + list(inst.fields)
        self.exact = all(_is_rational(value) for value in values)
        if self.exact:
            self.scale = reduce(
                _lcm,
                [Fraction(value).denominator for value in values],
                1,
            )
            dtype = np.int64
            convert = lambda value: int(Fraction(value) * self.scale)
        else:
            self.scale = 1
            dtype = np.float64
            convert = float

        self.rows = np.array([i for i, _, _ in inst.couplings], dtype=np.int64)
        self.cols = np.array([k for _, k, _ in inst.couplings], dtype=np.int64)
        self.weights = np.array(
            [convert(J) for _, _, J in inst.couplings],
            dtype=dtype,
        )
        self.fields = np.array([convert(h) for h in inst.fields], dtype=dtype)
        self.dtype = dtype

    @property
    def n_configs(self):
        return 1 << len(self.free)

    def spins(self, start, stop):
        """
        Spin matrix (configs x spins) for the configuration index range.
        """
        indexes = np.arange(start, stop, dtype=np.int64)
        spins = np.ones((stop - start, self.n_spins), dtype=np.int64)
        for bit, site in enumerate(self.free):
            spins[:, site] = 1 - 2 * ((indexes >> bit) & 1)
        for site, value in self.fixed.items():
            spins[:, site] = value
        return spins

    def energies(self, spins):
        spins = spins.astype(self.dtype)
        energy = -(spins @ self.fields)
        if len(self.weights):
            energy = energy - (
                spins[:, self.rows] * spins[:, self.cols]
            ) @ self.weights
        return energy

    def unscale(self, value):
        if value is None:
            return None
        if self.exact:
            return Fraction(int(value), self.scale)
        return float(value)


def _block_levels(kernel, start, stop):
    """
    Ground level, ground configurations and next level of one block.
    """
    spins = kernel.spins(start, stop)
    energy = kernel.energies(spins)
    ground = energy.min()
    if kernel.exact:
        at_ground = energy == ground
    else:
        at_ground = np.abs(energy - ground) <= FLOAT_TOLERANCE
    above = energy[~at_ground]
    excited = above.min() if len(above) else None
    configs = [tuple(int(s) for s in row) for row in spins[at_ground]]
    return ground, configs, excited


def _merge_levels(first, second, exact):
    """
    Associative merge of two (ground, configs, excited) block summaries.
    """

    def same(a, b):
        if exact:
            return a == b
        return abs(a - b) <= FLOAT_TOLERANCE

    ground_a, configs_a, excited_a = first
    ground_b, configs_b, excited_b = second
    if same(ground_a, ground_b):
        candidates = [e for e in (excited_a, excited_b) if e is not None]
        return (
            ground_a,
            configs_a + configs_b,
            min(candidates) if candidates else None,
        )
    if ground_b < ground_a:
        ground_a, configs_a, excited_a, ground_b, excited_b = \
            ground_b, configs_b, excited_b, ground_a, excited_a
    candidates = [ground_b] + ([excited_a] if excited_a is not None else [])
    return ground_a, configs_a, min(candidates)


def _eliminated_ground(kernel, width):
    """
    Ground states by bucket elimination over the free spins.

    Bit value 1 of a variable means spin -1, clamped spins fold into the
    fields of their neighbors and into a constant.
    """

    position = {site: k for k, site in enumerate(kernel.free)}
    fields = kernel.fields.astype(float)
    unary = np.array([[-fields[site], fields[site]] for site in kernel.free])
    unary = unary.reshape(len(kernel.free), 2)
    offset = -sum(fields[site] * value for site, value in kernel.fixed.items())
    pairwise = {}
    for i, k, J in zip(kernel.rows, kernel.cols, kernel.weights.astype(float)):
        i, k = int(i), int(k)
        if i in kernel.fixed and k in kernel.fixed:
            offset -= J * kernel.fixed[i] * kernel.fixed[k]
        elif i in kernel.fixed or k in kernel.fixed:
            site, clamp = (k, i) if i in kernel.fixed else (i, k)
            shift = J * kernel.fixed[clamp]
            unary[position[site]] += (-shift, shift)
        else:
            key = tuple(sorted((position[i], position[k])))
            pairwise[key] = pairwise.get(key, 0) + np.array(
                [[-J, J], [J, -J]]
            )

    solution = eliminate(
        len(kernel.free),
        unary,
        pairwise,
        width=width,
        tolerance=0.0 if kernel.exact else FLOAT_TOLERANCE,
    )
    configs = []
    for assignment in sorted(
        solution.assignments,
        key=lambda bits: sum(bit << k for k, bit in enumerate(bits)),
    ):
        spins = [1] * kernel.n_spins
        for site, value in kernel.fixed.items():
            spins[site] = value
        for k, site in enumerate(kernel.free):
            spins[site] = 1 - 2 * assignment[k]
        configs.append(tuple(spins))

    excited = solution.next_level
    if kernel.exact:
        ground = round(solution.minimum + offset)
        excited = None if excited is None else round(excited + offset)
    else:
        ground = solution.minimum + offset
        excited = None if excited is None else excited + offset
    return GroundSolution(
        kernel.unscale(ground),
        configs,
        kernel.unscale(excited),
    )


def ising_ground(inst, budget=24, fixed=None, workers=1, width=0):
    """
    Exact ground state search of an Ising instance.

    Up to budget free spins every configuration is enumerated, past it the
    instance is solved by bucket elimination if its interaction graph has
    an elimination order no wider than width.

    The energy convention is E(s) = -sum J_ik s_i s_k - sum h_i s_i, the
    stored additive constant of the instance is not included.

    Arguments:
        inst (IsingInstance): Instance to solve.
        budget (int): Maximum number of free spins of the enumeration.
        fixed (dict): Optional site -> spin value clamps.
        workers (int): Threads used to evaluate configuration blocks.
        width (int): Largest elimination width, 0 disables elimination.

    Returns:
        GroundSolution: Ground level, all the degenerate ground
            configurations and the first excited level.
    """

    kernel = _EnergyKernel(inst, fixed)
    if len(kernel.free) > budget:
        if width > 0:
            return _eliminated_ground(kernel, width)
        raise BudgetExceeded(
            'Instance has {} free spins, oracle budget is {}'.format(
                len(kernel.free),
                budget,
            )
        )

    block = 1 << BLOCK_BITS
    bounds = [
        (start, min(start + block, kernel.n_configs))
        for start in range(0, kernel.n_configs, block)
    ]
    log.debug(
        'Enumerating {} configurations in {} blocks'.format(
            kernel.n_configs,
            len(bounds),
        )
    )

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            summaries = list(
                executor.map(lambda b: _block_levels(kernel, *b), bounds)
            )
    else:
        summaries = [_block_levels(kernel, *b) for b in bounds]

    ground, configs, excited = reduce(
        lambda a, b: _merge_levels(a, b, kernel.exact),
        summaries,
    )
    return GroundSolution(
        kernel.unscale(ground),
        configs,
        kernel.unscale(excited),
    )


def _adjacency_masks(g):
    masks = [0] * g.n_vertices
    for u, v in g.edges:
        masks[u] |= 1 << v
        masks[v] |= 1 << u
    return masks


def _mask_vertices(mask):
    vertices = []
    while mask:
        lsb = mask & -mask
        vertices.append(lsb.bit_length() - 1)
        mask -= lsb
    return vertices


def _popcount(mask):
    return bin(mask).count('1')


def _component(masks, mask):
    """
    Vertices of mask connected to its lowest vertex.
    """
    component = mask & -mask
    frontier = component
    while frontier:
        reached = 0
        for vertex in _mask_vertices(frontier):
            reached |= masks[vertex]
        frontier = reached & mask & ~component
        component |= frontier
    return component


def mis_size(masks, mask):
    """
    Size of the maximum independent set of the subgraph induced by mask.

    Vertices of degree 0 or 1 are always taken, connected components are
    solved apart and otherwise the search branches on the vertex of
    highest degree.

    Arguments:
        masks (list): Adjacency bitmask of every vertex, without itself.
        mask (int): Bitmask of the vertices of the subgraph.
    """
    cache = {}

    def solve(mask):
        if mask == 0:
            return 0
        if mask in cache:
            return cache[mask]

        branch, branch_degree = None, -1
        for vertex in _mask_vertices(mask):
            degree = _popcount(masks[vertex] & mask)
            if degree <= 1:
                result = 1 + solve(mask & ~masks[vertex] & ~(1 << vertex))
                cache[mask] = result
                return result
            if degree > branch_degree:
                branch, branch_degree = vertex, degree

        component = _component(masks, mask)
        if component != mask:
            result = solve(component) + solve(mask & ~component)
        else:
            rest = mask & ~(1 << branch)
            result = max(solve(rest), 1 + solve(rest & ~masks[branch]))
        cache[mask] = result
        return result

    return solve(mask)


def _eliminated_mis(g, all_sets, width):
    """
    Maximum independent sets by bucket elimination.

    Taking a vertex is worth -1 and taking both ends of an edge costs more
    than the whole graph could give back.
    """

    n = g.n_vertices
    unary = np.tile([0.0, -1.0], (n, 1))
    conflict = np.array([[0.0, 0.0], [0.0, n + 1.0]])
    pairwise = {(min(u, v), max(u, v)): conflict for u, v in g.edges}
    solution = eliminate(
        n,
        unary,
        pairwise,
        width=width,
        all_assignments=all_sets,
    )
    size = -int(round(solution.minimum))
    if not all_sets:
        return MisResult(size)
    return MisResult(size, sorted(
        tuple(v for v in range(n) if assignment[v])
        for assignment in solution.assignments
    ))


def mis_exact(g, all_sets=False, budget=40, enumerate_budget=20, width=0):
    """
    Exact maximum independent set on bitsets.

    The size alone comes from the reduction search of mis_size, every
    maximum set is listed by branch and bound. Graphs past the budgets are
    solved by bucket elimination if an elimination order no wider than
    width exists.

    Arguments:
        g (Graph): Graph to solve.
        all_sets (bool): Return every maximum independent set.
        budget (int): Maximum number of vertices.
        enumerate_budget (int): Maximum number of vertices when all the
            sets are requested.
        width (int): Largest elimination width, 0 disables elimination.

    Returns:
        MisResult
    """

    n = g.n_vertices
    if n > budget or (all_sets and n > enumerate_budget):
        if width > 0:
            return _eliminated_mis(g, all_sets, width)
        raise BudgetExceeded(
            'Graph has {} vertices, budget is {}'.format(
                n,
                enumerate_budget if all_sets else budget,
            ),
            stage='oracle',
        )
    masks = _adjacency_masks(g)
    size = mis_size(masks, (1 << n) - 1)
    if not all_sets:
        return MisResult(size)

    found = []

    def dfs(mask, current):
        if len(current) + _popcount(mask) < size:
            return
        if mask == 0:
            found.append(tuple(sorted(current)))
            return

        # Branch on the vertex with most neighbors left
        vertex = max(
            _mask_vertices(mask),
            key=lambda v: _popcount(masks[v] & mask),
        )
        neighbors = masks[vertex] & mask
        current.append(vertex)
        dfs(mask & ~neighbors & ~(1 << vertex), current)
        current.pop()
        if neighbors:
            dfs(mask & ~(1 << vertex), current)

    dfs((1 << n) - 1, [])
    return MisResult(size, sorted(found))


def mis_exhaustive(g):
    """
    Maximum independent sets by enumeration of every vertex subset.
    """
    n = g.n_vertices
    masks = _adjacency_masks(g)
    best = 0
    sets = []
    for subset in range(1 << n):
        vertices = _mask_vertices(subset)
        if any(masks[v] & subset for v in vertices):
            continue
        if len(vertices) > best:
            best = len(vertices)
            sets = []
        if len(vertices) == best:
            sets.append(tuple(vertices))
    return MisResult(best, sorted(sets))


def mis_containing(g, vertices, budget=40):
    """
    Size of the largest independent set that holds the given vertices, None
    if they aren't independent.
    """
    if g.n_vertices > budget:
        raise BudgetExceeded(
            'Graph has {} vertices, budget is {}'.format(g.n_vertices, budget),
            stage='oracle',
        )
    masks = _adjacency_masks(g)
    forced = 0
    blocked = 0
    for vertex in vertices:
        forced |= 1 << vertex
        blocked |= masks[vertex]
    if forced & blocked:
        return None
    rest = ((1 << g.n_vertices) - 1) & ~forced & ~blocked
    return len(set(vertices)) + mis_size(masks, rest)


def is_independent(g, vertices):
    vertices = set(vertices)
    return not any(u in vertices and v in vertices for u, v in g.edges)


class StageCheck:
    """
    Stage output to be verified against the exact MIS of a graph.

    Arguments:
        stage (str): Stage name.
        instance (IsingInstance): Hamiltonian produced by the stage.
        decode (callable): SpinConfig -> set of graph vertices.
        gap_bound (number): Minimum classical gap the stage guarantees.
        pinned (iterable): Sites that must be +1 in every ground state,
            certified by field dominance and clamped during enumeration.
    """

    def __init__(self, stage, instance, decode, gap_bound, pinned=()):
        self.stage = stage
        self.instance = instance
        self.decode = decode
        self.gap_bound = gap_bound
        self.pinned = sorted(pinned)


class Certificate:
    """
    Collection of pass/fail checks with witnesses.

    Public methods:
        add: Register a check result.
        to_dict: JSON serializable report.

    Attributes and properties:
        checks (list): Registered checks.
        passed (bool): True if no check failed.
        budget_exceeded (bool): True if some check was skipped because of
            the oracle budget.
        certified (bool): True if every check ran and passed, a skipped
            check leaves the run uncertified even when nothing failed.
    """

    def __init__(self):
        self.checks = []

    def add(self, stage, check, passed, detail='', witness=None, code=None):
        self.checks.append(
            {
                'stage': stage,
                'check': check,
                'passed': passed,
                'detail': detail,
                'witness': witness,
                'code': code,
            }
        )
        if passed is False:
            log.error('Check {} of stage {} failed: {}'.format(
                check,
                stage,
                detail,
            ))
        else:
            log.debug('Check {} of stage {}: {}'.format(check, stage, detail))

    @property
    def passed(self):
        return all(check['passed'] is not False for check in self.checks)

    @property
    def budget_exceeded(self):
        return any(check['passed'] is None for check in self.checks)

    @property
    def certified(self):
        return self.passed and not self.budget_exceeded

    def to_dict(self):
        return {
            'passed': self.passed,
            'certified': self.certified,
            'checks': self.checks,
        }


def _pin_certificate(inst, site):
    """
    Return the margin by which the field of site dominates its couplings.

    A positive margin means s_site = +1 lowers the energy for every
    configuration of the rest of the spins.
    """
    coupling_sum = sum(
        abs(J) for i, k, J in inst.couplings if site in (i, k)
    )
    return inst.fields[site] - coupling_sum


def verify_pipeline(g, checks, budget=24, mis=None, workers=1, width=0):
    """
    Certify the stage outputs of a pipeline run.

    For every stage it asserts that the decoded ground states are exactly
    the maximum independent sets of the graph, that the classical gap
    reaches the stage bound and that pinned sites are forced to +1.

    Arguments:
        g (Graph): Graph whose MIS the stages encode.
        checks (list): StageCheck objects.
        budget (int): Oracle spin budget.
        mis (MisResult): Precomputed exact solution with all sets.
        workers (int): Threads used by the enumeration.
        width (int): Largest elimination width past the spin budget, 0
            disables elimination.

    Returns:
        Certificate
    """

    certificate = Certificate()
    try:
        mis = mis or mis_exact(
            g,
            all_sets=True,
            enumerate_budget=budget,
            width=width,
        )
    except BudgetExceeded as error:
        certificate.add('oracle', 'mis', None, error.message, code=error.code)
        return certificate
    expected = set(frozenset(s) for s in mis.sets)

    for check in checks:
        inst = check.instance
        fixed = {}
        for site in check.pinned:
            margin = _pin_certificate(inst, site)
            passed = margin > 0
            certificate.add(
                check.stage,
                'deletion',
                passed,
                'site {} field margin {}'.format(site, margin),
                witness=None if passed else {'site': site},
            )
            fixed[site] = 1

        try:
            solution = ising_ground(
                inst,
                budget=budget,
                fixed=fixed,
                workers=workers,
                width=width,
            )
        except PymisError as error:
            certificate.add(
                check.stage,
                'ground_states',
                None,
                error.message,
                code=error.code,
            )
            continue

        decoded = {}
        for config in solution.ground_configs:
            decoded.setdefault(frozenset(check.decode(config)), config)

        spurious = [
            (vertices, config) for vertices, config in decoded.items()
            if vertices not in expected
        ]
        missing = expected - set(decoded)
        if spurious:
            vertices, config = spurious[0]
            certificate.add(
                check.stage,
                'ground_states',
                False,
                'ground state decodes to {} which is not a maximum '
                'independent set'.format(sorted(vertices)),
                witness={'config': list(config), 'decoded': sorted(vertices)},
            )
        elif missing:
            certificate.add(
                check.stage,
                'ground_states',
                False,
                'maximum independent set {} has no ground state'.format(
                    sorted(next(iter(missing)))
                ),
                witness={'missing': sorted(next(iter(missing)))},
            )
        else:
            certificate.add(
                check.stage,
                'ground_states',
                True,
                '{} ground states decode to the {} maximum sets'.format(
                    solution.degeneracy,
                    len(expected),
                ),
            )

        if solution.first_excited is None:
            gap_ok = False
        else:
            gap_ok = solution.gap >= check.gap_bound - FLOAT_TOLERANCE
        certificate.add(
            check.stage,
            'gap',
            gap_ok,
            'classical gap {} against bound {}'.format(
                from_number(solution.gap),
                from_number(check.gap_bound),
            ),
        )
    return certificate
