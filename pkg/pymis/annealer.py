"""
Module to simulate the transverse field Ising Hamiltonian

    H(Gamma) = E(s) - Gamma sum_i sigma^x_i

on small instances, where E(s) is the classical energy of an IsingInstance.

The basis state with index b has spin i equal to -1 when the bit i of b is
set, so the diagonal of the operator is the list of classical energies in
enumeration order.

Classes:
    QuantumHamiltonian: Matrix free transverse field operator.
    SpectrumResult: Gap curve of a sweep over the transverse field.
    Schedule: Time dependence of the transverse field.
    EvolutionResult: Final state of an annealing run.
    EnsembleResult: Minimum gap statistics over an instance ensemble.

Functions:
    build_hamiltonian: Transverse field operator of an instance.
    gap_sweep: Lowest two levels over a transverse field grid.
    evolve: Adiabatic evolution from the uniform superposition.
    ensemble_experiment: Compare the mean of the minimum gaps with the
        minimum of the mean gap.
    random_instance_generator: Generator of random MIS instances.
"""

from concurrent.futures import ThreadPoolExecutor
from pymis.errors import (
    BudgetExceeded,
    ConfigError,
    ConvergenceFailure,
    StepTooLarge,
)
from pymis.graphs import random_connected_graph
from pymis.reduction import mis_to_ising, random_magnitudes
from scipy.linalg import eigh
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import (
    ArpackNoConvergence,
    LinearOperator,
    eigsh,
    expm_multiply,
)

import logging
import math
import numpy as np

log = logging.getLogger(__name__)

MAX_SPECTRUM_SPINS = 20
MAX_EVOLUTION_SPINS = 14
DENSE_SPINS = 12
DENSE_EVOLUTION_SPINS = 8
DEGENERACY_TOLERANCE = 1e-9
EIGEN_TOLERANCE = 1e-12
DRIFT_BOUND = 1e-9
REFINE_STEPS = 40
PROFILES = ('linear', 'quadratic')


def classical_energies(inst):
    """
    Classical energy of every basis state, ordered by enumeration index.
    """

    index = np.arange(1 << inst.n_spins, dtype=np.int64)
    spins = [
        1 - 2 * ((index >> spin) & 1).astype(np.int8)
        for spin in range(inst.n_spins)
    ]
    energies = np.zeros(len(index))
    for i, k, J in inst.couplings:
        energies -= float(J) * spins[i] * spins[k]
    for spin, h in enumerate(inst.fields):
        if h:
            energies -= float(h) * spins[spin]
    return energies


def _flip(vector, bit):
    """
    Vector with the amplitudes of the basis states b and b ^ (1 << bit)
    swapped.
    """

    blocks = vector.reshape(-1, 2, 1 << bit)
    return blocks[:, ::-1, :].reshape(-1)


def _levels(values, tolerance=DEGENERACY_TOLERANCE):
    """
    Lowest level and first level above it out of sorted eigenvalues.
    """

    ground = values[0]
    for value in values[1:]:
        if value > ground + tolerance:
            return ground, value
    return ground, None


def default_gamma0(inst):
    """
    Initial transverse field, ten times the biggest energy scale of the
    instance.
    """

    scale = max(
        [abs(float(J)) for _, _, J in inst.couplings]
        + [abs(float(h)) for h in inst.fields]
        + [0.0]
    )
    return 10 * scale if scale > 0 else 1.0


class QuantumHamiltonian:
    """
    Matrix free transverse field operator of an Ising instance.

    Arguments:
        inst (IsingInstance): Classical part.
        gamma (float): Transverse field strength.
        diagonal (array): Precomputed classical energies.

    Public methods:
        matvec: Apply the operator to a vector.
        operator: scipy LinearOperator view.
        sparse: CSR matrix.
        dense: Dense matrix.
        lowest_levels: Ground level and first level above it.
    """

    def __init__(self, inst, gamma, diagonal=None):
        if inst.n_spins > MAX_SPECTRUM_SPINS:
            raise BudgetExceeded(
                'Spectra are limited to {} spins, instance has {}'.format(
                    MAX_SPECTRUM_SPINS,
                    inst.n_spins,
                ),
                stage='anneal',
            )
        if gamma < 0:
            raise ConfigError('Transverse field must be non negative')
        self.n_spins = inst.n_spins
        self.gamma = float(gamma)
        self.dimension = 1 << inst.n_spins
        self.diagonal = (
            classical_energies(inst) if diagonal is None else diagonal
        )

    def matvec(self, vector):
        vector = np.asarray(vector).reshape(-1)
        result = self.diagonal * vector
        if self.gamma:
            for bit in range(self.n_spins):
                result -= self.gamma * _flip(vector, bit)
        return result

    def operator(self):
        return LinearOperator(
            (self.dimension, self.dimension),
            matvec=self.matvec,
            rmatvec=self.matvec,
            dtype=float,
        )

    def sparse(self):
        index = np.arange(self.dimension)
        rows = [index]
        columns = [index]
        values = [self.diagonal]
        for bit in range(self.n_spins):
            rows.append(index)
            columns.append(index ^ (1 << bit))
            values.append(np.full(self.dimension, -self.gamma))
        return coo_matrix(
            (
                np.concatenate(values),
                (np.concatenate(rows), np.concatenate(columns)),
            ),
            shape=(self.dimension, self.dimension),
        ).tocsr()

    def dense(self):
        return self.sparse().toarray()

    def lowest_levels(self, tolerance=DEGENERACY_TOLERANCE):
        """
        Ground level E0 and the first level above E0 + tolerance.

        Returns:
            tuple: (E0, E1), E1 is None if the spectrum is flat.
        """

        if self.gamma == 0 or self.n_spins == 0:
            return _levels(np.unique(self.diagonal), tolerance)
        if self.n_spins <= DENSE_SPINS:
            return _levels(eigh(self.dense(), eigvals_only=True), tolerance)

        # Deflate by asking for more eigenpairs while the lowest ones
        # belong to the same level.
        k = 2
        start = np.random.default_rng(0).uniform(-1, 1, self.dimension)
        while True:
            try:
                values = eigsh(
                    self.operator(),
                    k=k,
                    which='SA',
                    tol=EIGEN_TOLERANCE,
                    v0=start,
                    return_eigenvectors=False,
                )
            except ArpackNoConvergence:
                raise ConvergenceFailure(
                    'Eigensolver did not converge at gamma {}'.format(
                        self.gamma
                    ),
                    witness={'gamma': self.gamma},
                )
            ground, excited = _levels(np.sort(values), tolerance)
            if excited is not None or k >= min(self.dimension - 1, 16):
                return ground, excited
            k *= 2


def build_hamiltonian(inst, gamma):
    """
    Transverse field operator of an instance.

    Raises:
        BudgetExceeded: If the instance has more than 20 spins.
    """

    return QuantumHamiltonian(inst, gamma)


class SpectrumResult:
    """
    Gap curve of a sweep over the transverse field.

    Arguments:
        gammas (list): Grid from gamma0 down to 0.
        ground (list): Lowest eigenvalue at each point.
        excited (list): First level above the ground level at each point.
        g_min (float): Minimum gap, refined around the grid minimum.
        gamma_star (float): Transverse field of the minimum gap.

    Attributes and properties:
        gaps (list): Gap at each grid point.
        grid_min (float): Minimum gap over the grid.
        grid_argmin (float): Grid point of the minimum gap.
    """

    def __init__(self, gammas, ground, excited, g_min=None, gamma_star=None):
        self.gammas = list(gammas)
        self.ground = list(ground)
        self.excited = list(excited)
        self.gaps = [
            0.0 if e1 is None else max(e1 - e0, 0.0)
            for e0, e1 in zip(self.ground, self.excited)
        ]
        position = int(np.argmin(self.gaps))
        self.grid_min = self.gaps[position]
        self.grid_argmin = self.gammas[position]
        self.g_min = self.grid_min if g_min is None else g_min
        self.gamma_star = self.grid_argmin if gamma_star is None \
            else gamma_star

    def rows(self):
        return [
            (gamma, e0, e1, gap)
            for gamma, e0, e1, gap in zip(
                self.gammas,
                self.ground,
                self.excited,
                self.gaps,
            )
        ]

    def to_dict(self):
        return {
            'gammas': self.gammas,
            'ground': self.ground,
            'excited': self.excited,
            'gaps': self.gaps,
            'g_min': self.g_min,
            'gamma_star': self.gamma_star,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            data['gammas'],
            data['ground'],
            data['excited'],
            data.get('g_min'),
            data.get('gamma_star'),
        )


def _gap(inst, diagonal, gamma, tolerance):
    ground, excited = QuantumHamiltonian(
        inst,
        gamma,
        diagonal,
    ).lowest_levels(tolerance)
    return ground, excited


def _refine(inst, diagonal, low, high, tolerance):
    """
    Trisection search of the gap minimum inside [low, high].
    """

    def gap(gamma):
        ground, excited = _gap(inst, diagonal, gamma, tolerance)
        return 0.0 if excited is None else excited - ground

    for _ in range(REFINE_STEPS):
        first = low + (high - low) / 3
        second = high - (high - low) / 3
        if gap(first) <= gap(second):
            high = second
        else:
            low = first
    middle = (low + high) / 2
    return gap(middle), middle


def gap_sweep(
    inst,
    gamma0=None,
    points=41,
    workers=1,
    refine=True,
    tolerance=DEGENERACY_TOLERANCE,
):
    """
    Lowest two levels of the transverse field Hamiltonian over a grid that
    descends from gamma0 to 0.

    Arguments:
        inst (IsingInstance): Classical problem.
        gamma0 (float): Initial transverse field, default_gamma0 if None.
        points (int): Grid points, at least 2.
        workers (int): Grid points evaluated concurrently.
        refine (bool): Refine the grid minimum with a trisection search.
        tolerance (float): Degeneracy tolerance of the levels.

    Returns:
        SpectrumResult

    Raises:
        BudgetExceeded: If the instance has more than 20 spins.
        ConvergenceFailure: If the eigensolver fails at some grid point.
    """

    if points < 2:
        raise ConfigError('A gap sweep needs at least 2 grid points')
    if inst.n_spins > MAX_SPECTRUM_SPINS:
        raise BudgetExceeded(
            'Spectra are limited to {} spins, instance has {}'.format(
                MAX_SPECTRUM_SPINS,
                inst.n_spins,
            ),
            stage='anneal',
        )
    gamma0 = default_gamma0(inst) if gamma0 is None else float(gamma0)
    gammas = [float(gamma) for gamma in np.linspace(gamma0, 0, points)]
    diagonal = classical_energies(inst)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        levels = list(executor.map(
            lambda gamma: _gap(inst, diagonal, gamma, tolerance),
            gammas,
        ))
    result = SpectrumResult(
        gammas,
        [float(e0) for e0, _ in levels],
        [None if e1 is None else float(e1) for _, e1 in levels],
    )

    if refine and result.grid_argmin > 0:
        position = result.gammas.index(result.grid_argmin)
        high = result.gammas[max(position - 1, 0)]
        low = result.gammas[min(position + 1, points - 1)]
        value, gamma = _refine(inst, diagonal, low, high, tolerance)
        if value < result.grid_min:
            result.g_min = value
            result.gamma_star = gamma

    log.debug('Gap sweep of {} spins: g_min {} at gamma {}'.format(
        inst.n_spins,
        result.g_min,
        result.gamma_star,
    ))
    return result


class Schedule:
    """
    Time dependence of the transverse field.

    Arguments:
        total_time (float): Annealing time T.
        gamma0 (float): Transverse field at t = 0.
        profile (str): 'linear' Gamma0 (1 - t/T) or 'quadratic'
            Gamma0 (1 - t/T)^2.
        step (float): Integration step, chosen from the error estimate if
            None.
    """

    def __init__(self, total_time, gamma0, profile='linear', step=None):
        if total_time < 0:
            raise ConfigError('Annealing time must be non negative')
        if gamma0 < 0:
            raise ConfigError('Initial transverse field must be non negative')
        if profile not in PROFILES:
            raise ConfigError('Unknown schedule profile {}'.format(profile))
        if step is not None and step <= 0:
            raise ConfigError('Integration step must be positive')
        self.total_time = float(total_time)
        self.gamma0 = float(gamma0)
        self.profile = profile
        self.step = step

    def max_rate(self):
        """
        Fastest change of the transverse field per unit time.
        """
        if self.total_time == 0:
            return 0.0
        factor = 2 if self.profile == 'quadratic' else 1
        return factor * self.gamma0 / self.total_time

    def gamma(self, t):
        if self.total_time == 0:
            return 0.0
        remaining = min(max(1 - t / self.total_time, 0.0), 1.0)
        if self.profile == 'quadratic':
            remaining = remaining ** 2
        return self.gamma0 * remaining

    def to_dict(self):
        return {
            'total_time': self.total_time,
            'gamma0': self.gamma0,
            'profile': self.profile,
            'step': self.step,
        }


class EvolutionResult:
    """
    Final state of an annealing run.

    Arguments:
        state (array): Final state vector.
        overlap (float): Squared overlap with the classical ground subspace.
        steps (int): Integration steps.
        drift (float): Deviation of the final norm from 1.
        ground_dimension (int): Degeneracy of the classical ground level.
    """

    def __init__(self, state, overlap, steps, drift, ground_dimension):
        self.state = state
        self.overlap = overlap
        self.steps = steps
        self.drift = drift
        self.ground_dimension = ground_dimension

    def to_dict(self):
        return {
            'overlap': self.overlap,
            'steps': self.steps,
            'drift': self.drift,
            'ground_dimension': self.ground_dimension,
        }


def _flip_energy(inst):
    """
    Biggest energy change of a single spin flip.
    """

    weights = [abs(float(h)) for h in inst.fields]
    for i, k, J in inst.couplings:
        weights[i] += abs(float(J))
        weights[k] += abs(float(J))
    return 2 * max(weights, default=0.0)


def _step_size(inst, schedule, tolerance):
    """
    Step of the exponential midpoint rule whose commutator error estimate
    stays below tolerance per unit time.

    The local error is bounded by dt^3 |[H, dH/dt]| / 12 and
    |[H, dH/dt]| <= rate n dE, with dE the biggest single flip energy
    change and rate the fastest change of the transverse field.
    """

    scale = schedule.max_rate() * inst.n_spins * _flip_energy(inst)
    if scale == 0:
        return schedule.total_time
    return math.sqrt(12 * tolerance / scale)


def _propagator(hamiltonian, dt):
    values, vectors = eigh(hamiltonian.dense())
    return (vectors * np.exp(-1j * dt * values)) @ vectors.conj().T


def evolve(inst, schedule, tolerance=1e-6, drift_bound=DRIFT_BOUND):
    """
    Adiabatic evolution from the ground state of the driver.

    The state starts in the uniform superposition, every spin pointing
    along +x, and each step applies the exact propagator of the
    Hamiltonian at the middle of the step.

    Arguments:
        inst (IsingInstance): Classical problem.
        schedule (Schedule): Transverse field profile.
        tolerance (float): Commutator error budget per unit time.
        drift_bound (float): Maximum deviation of the norm from 1.

    Returns:
        EvolutionResult

    Raises:
        BudgetExceeded: If the instance has more than 14 spins.
        StepTooLarge: If the run loses unitarity beyond drift_bound.
    """

    if inst.n_spins > MAX_EVOLUTION_SPINS:
        raise BudgetExceeded(
            'Time evolution is limited to {} spins, instance has {}'.format(
                MAX_EVOLUTION_SPINS,
                inst.n_spins,
            ),
            stage='anneal',
        )
    diagonal = classical_energies(inst)
    dimension = len(diagonal)
    state = np.full(dimension, 1 / math.sqrt(dimension), dtype=complex)

    steps = 0
    if schedule.total_time > 0:
        step = schedule.step or _step_size(inst, schedule, tolerance)
        steps = max(1, math.ceil(schedule.total_time / step))
        dt = schedule.total_time / steps
        for j in range(steps):
            hamiltonian = QuantumHamiltonian(
                inst,
                schedule.gamma((j + 0.5) * dt),
                diagonal,
            )
            if inst.n_spins <= DENSE_EVOLUTION_SPINS:
                state = _propagator(hamiltonian, dt) @ state
            else:
                state = expm_multiply(-1j * dt * hamiltonian.sparse(), state)

    probabilities = np.abs(state) ** 2
    drift = abs(float(np.sum(probabilities)) - 1)
    if drift > drift_bound:
        raise StepTooLarge(
            'Norm drifted by {} after {} steps'.format(drift, steps),
            witness={'drift': drift, 'steps': steps},
        )
    ground = diagonal <= diagonal.min() + DEGENERACY_TOLERANCE
    overlap = float(np.sum(probabilities[ground]))
    log.debug('Evolution of {} spins over {} steps: overlap {}'.format(
        inst.n_spins,
        steps,
        overlap,
    ))
    return EvolutionResult(
        state,
        overlap,
        steps,
        drift,
        int(np.count_nonzero(ground)),
    )


class EnsembleResult:
    """
    Minimum gap statistics over an instance ensemble.

    Arguments:
        gammas (list): Common transverse field grid.
        gaps (array): Gap curve of every instance, one row per instance.
        bins (int): Bins of the minimum location histogram.

    Attributes and properties:
        minima (list): Grid minimum of every instance gap.
        gamma_stars (list): Grid location of every instance minimum.
        mean_of_min (float): Ensemble mean of the minimum gaps.
        min_of_mean (float): Minimum over the grid of the mean gap.
        ordering_holds (bool): mean_of_min <= min_of_mean.
        histogram (dict): Counts and edges of the gamma_stars histogram.
    """

    def __init__(self, gammas, gaps, bins=10):
        self.gammas = list(gammas)
        self.gaps = np.asarray(gaps, dtype=float)
        positions = np.argmin(self.gaps, axis=1)
        self.minima = [float(value) for value in self.gaps.min(axis=1)]
        self.gamma_stars = [self.gammas[p] for p in positions]
        self.mean_of_min = float(np.mean(self.gaps.min(axis=1)))
        self.mean_gap = self.gaps.mean(axis=0)
        self.min_of_mean = float(self.mean_gap.min())

        top = max(self.gammas) if max(self.gammas) > 0 else 1.0
        counts, edges = np.histogram(
            self.gamma_stars,
            bins=bins,
            range=(0, top),
        )
        self.histogram = {
            'counts': [int(count) for count in counts],
            'edges': [float(edge) for edge in edges],
        }

    @property
    def ordering_holds(self):
        return self.mean_of_min <= self.min_of_mean + 1e-12

    def rows(self):
        return [
            (index, gamma_star, minimum)
            for index, (gamma_star, minimum) in enumerate(
                zip(self.gamma_stars, self.minima)
            )
        ]

    def to_dict(self):
        return {
            'instances': len(self.minima),
            'gammas': self.gammas,
            'mean_gap': [float(value) for value in self.mean_gap],
            'g_min': self.minima,
            'gamma_star': self.gamma_stars,
            'mean_of_min': self.mean_of_min,
            'min_of_mean': self.min_of_mean,
            'ordering_holds': self.ordering_holds,
            'histogram': self.histogram,
        }


def ensemble_experiment(
    generator,
    count,
    gamma0=None,
    points=41,
    seed=0,
    workers=1,
):
    """
    Compare the ensemble mean of the minimum gaps with the minimum over the
    transverse field of the mean gap curve.

    The first can never exceed the second, as the minimum of every curve
    lies below its value at the minimum of the mean.

    Arguments:
        generator (callable): numpy Generator -> IsingInstance.
        count (int): Ensemble size.
        gamma0 (float): Top of the common grid, the biggest default_gamma0
            of the ensemble if None.
        points (int): Grid points.
        seed (int): Seed of the per instance random streams.
        workers (int): Instances swept concurrently.

    Returns:
        EnsembleResult
    """

    if count < 1:
        raise ConfigError('Ensembles need at least one instance')
    streams = np.random.SeedSequence(seed).spawn(count)
    instances = [
        generator(np.random.default_rng(stream)) for stream in streams
    ]
    if gamma0 is None:
        gamma0 = max(default_gamma0(inst) for inst in instances)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        sweeps = list(executor.map(
            lambda inst: gap_sweep(inst, gamma0, points, refine=False),
            instances,
        ))
    result = EnsembleResult(
        sweeps[0].gammas,
        [sweep.gaps for sweep in sweeps],
        bins=min(10, points),
    )
    log.info(
        'Ensemble of {} instances: mean of minima {}, minimum of mean '
        '{}'.format(count, result.mean_of_min, result.min_of_mean)
    )
    return result


def random_instance_generator(vertices, edge_probability=0.5, threshold=1):
    """
    Generator of MIS Ising instances on random connected graphs.

    Arguments:
        vertices (int): Graph size.
        edge_probability (float): Erdos Renyi edge probability.
        threshold (number): Coupling threshold J.

    Returns:
        callable: numpy Generator -> IsingInstance.
    """

    def generator(rng):
        g = random_connected_graph(vertices, edge_probability, rng)
        return mis_to_ising(
            g,
            random_magnitudes(g, threshold, rng),
            threshold,
        )

    return generator

