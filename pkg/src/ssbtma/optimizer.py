"""Differential-evolution search over the per-element duty parameters sigma_n.

The cost of a candidate Sigma = [sigma_1 ... sigma_N] is

    W_sll * H(SLL - SLL_ref) * (SLL - SLL_ref)**2 / SLL_ref**2 + W_loss * loss

where SLL is the sidelobe level of the +1st harmonic pattern and ``loss`` is
1 - eta_dual or 1 - eta_single depending on the beam mode. Phases and
switching times always follow from the closed-form steering solve, so every
candidate keeps both beams on target.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidArgument, MetricsUndefined, UnsupportedSteering
from .geometry import ArrayGeometry, CarrierConfig
from .modulation import (BeamMode, BeamTask, ExcitationWeights, check_sigma,
                         joint_coefficients, solve_steering, steering_solution)
from .pattern import (PatternMetrics, angle_grid, harmonic_pattern, pattern_metrics,
                      peak_magnitude, steering_matrix)
from .power import (PowerReport, TmaDesign, power_report, steered_design, total_power_arrays,
                    useful_minus3_arrays, useful_plus1_arrays)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DeConfig:
    """DE hyperparameters and cost weights. Defaults reproduce the 16-element study."""

    population: int = 80
    mutation: float = 0.4
    crossover: float = 0.5
    max_generations: int = 500
    w_sll: float = 1.0
    w_loss: float = 10.0
    sll_ref: float = -30.0
    seed: int = 1
    grid_step: float = 0.02
    # Cost assigned to candidates that radiate nothing.
    degenerate_cost: float = 1e6

    def __post_init__(self):
        if int(self.population) != self.population or self.population < 4:
            raise InvalidArgument("population must be an integer >= 4")
        if not self.mutation > 0:
            raise InvalidArgument("mutation constant must be positive")
        if not 0.0 <= self.crossover <= 1.0:
            raise InvalidArgument("crossover constant must lie in [0, 1]")
        if int(self.max_generations) != self.max_generations or self.max_generations < 0:
            raise InvalidArgument("max_generations must be a non-negative integer")
        if not self.sll_ref < 0:
            raise InvalidArgument("sll_ref must be negative dB")
        if self.w_sll < 0 or self.w_loss < 0:
            raise InvalidArgument("cost weights must be non-negative")


@dataclass(eq=False)
class DeResult:
    best_sigma: np.ndarray
    best_cost: float
    cost_trace: np.ndarray
    task: BeamTask
    geometry: ArrayGeometry
    amplitudes: np.ndarray
    config: DeConfig
    carrier: CarrierConfig = CarrierConfig()
    report: Optional[PowerReport] = None
    metrics_plus1: Optional[PatternMetrics] = None
    metrics_minus3: Optional[PatternMetrics] = None

    @property
    def design(self) -> TmaDesign:
        return steered_design(self.geometry, self.task, self.best_sigma, self.amplitudes, self.carrier)


def _fnbw_edges(mag: np.ndarray, i: int):
    """Indices of the first local minima left and right of index ``i``."""
    drops_left = np.flatnonzero(mag[:i] > mag[1:i + 1])
    left = int(drops_left[-1]) + 1 if drops_left.size else 0
    rises_right = np.flatnonzero(mag[i + 1:] > mag[i:-1])
    right = i + int(rises_right[0]) if rises_right.size else mag.size - 1
    return left, right


def _sll_db(mag: np.ndarray) -> float:
    """Fast SLL (dB re own peak) used inside the DE loop; grid-resolution only."""
    i = int(np.argmax(mag))
    peak = mag[i]
    if i == 0 or i == mag.size - 1 or not peak > 0.0:
        raise MetricsUndefined("pattern has no interior peak")
    left, right = _fnbw_edges(mag, i)
    side = 0.0
    if left > 0:
        side = max(side, float(mag[:left].max()))
    if right < mag.size - 1:
        side = max(side, float(mag[right + 1:].max()))
    return 20.0 * math.log10(side / peak) if side > 0.0 else -math.inf


class CostModel:
    """Evaluates the cost of whole populations for one task and array.

    The angle grid, its steering matrix and the pair kernel are computed once.
    """

    def __init__(self, task: BeamTask, geometry: ArrayGeometry, amplitudes, config: DeConfig):
        if not geometry.on_z_axis:
            raise UnsupportedSteering("the optimizer relies on the z-axis steering solve")
        self.task = task
        self.geometry = geometry
        self.amplitudes = np.asarray(amplitudes, dtype=float)
        if self.amplitudes.shape != (geometry.n_elements,):
            raise InvalidArgument("amplitudes length must match the element count")
        self.config = config
        self.grid = angle_grid(config.grid_step)
        self._steer = steering_matrix(geometry.positions, self.grid).T.copy()
        self._kernel = geometry.kernel_matrix()

    def components(self, population):
        """Return ``(sll_db, loss, degenerate)`` arrays for a (P, N) population."""
        pop = np.atleast_2d(np.asarray(population, dtype=float))
        phases, xi_on, xi_off = steering_solution(self.geometry.z, self.task.theta_plus1,
                                                  self.task.theta_minus3, pop)
        A = self.amplitudes * np.exp(1j * phases)
        total = total_power_arrays(A, xi_on, xi_off, self._kernel)
        useful = useful_plus1_arrays(A, xi_on, xi_off, self._kernel)
        if self.task.mode is BeamMode.DUAL:
            useful = useful + useful_minus3_arrays(A, xi_on, xi_off, self._kernel)
        degenerate = ~(total > 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            loss = np.where(degenerate, 1.0, 1.0 - useful / np.where(degenerate, 1.0, total))

        fields = np.abs((A * joint_coefficients(xi_on, xi_off, 1)) @ self._steer)
        sll = np.empty(pop.shape[0])
        for p in range(pop.shape[0]):
            if degenerate[p]:
                sll[p] = math.inf
                continue
            try:
                sll[p] = _sll_db(fields[p])
            except MetricsUndefined:
                degenerate[p] = True
                sll[p] = math.inf
        return sll, loss, degenerate

    def __call__(self, population) -> np.ndarray:
        cfg = self.config
        sll, loss, degenerate = self.components(population)
        excess = np.where(degenerate, 0.0, sll - cfg.sll_ref)
        # H(0) = 0; irrelevant since the squared term vanishes there too.
        psi = np.where(excess > 0.0, excess ** 2, 0.0) / cfg.sll_ref ** 2
        cost = cfg.w_sll * psi + cfg.w_loss * loss
        return np.where(degenerate, cfg.degenerate_cost, cost)


def cost(sigma, task: BeamTask, geometry: ArrayGeometry, amplitudes, config: DeConfig = DeConfig()) -> float:
    """Cost of a single candidate; see the module docstring."""
    sigma = check_sigma(sigma, geometry.n_elements)
    return float(CostModel(task, geometry, amplitudes, config)(sigma[None, :])[0])


def reflect_into_unit(x: np.ndarray) -> np.ndarray:
    """Fold values back into [0, 1] by mirror reflection at both bounds."""
    x = np.mod(x, 2.0)
    return np.where(x > 1.0, 2.0 - x, x)


def _donors(rng: np.random.Generator, n: int) -> np.ndarray:
    """Three mutually distinct donor indices per target, none equal to the target."""
    picks = np.argsort(rng.random((n, n - 1)), axis=1)[:, :3]
    target = np.arange(n)[:, None]
    return picks + (picks >= target)


def de_optimize(task: BeamTask, geometry: ArrayGeometry, amplitudes,
                config: DeConfig = DeConfig(), carrier: CarrierConfig = CarrierConfig(),
                callback=None) -> DeResult:
    """Minimize the cost with DE/rand/1/bin.

    Initial sigmas are uniform on [0, 1]; mutants are reflected back into
    [0, 1]; selection is greedy (a trial replaces its target when its cost is
    no worse). All randomness for a generation is drawn from one generator in
    a fixed order, so results depend only on ``config.seed``.

    Parameters
    ----------
    callback : callable, optional
        Called as ``callback(generation, best_cost)`` after each generation.
    """
    model = CostModel(task, geometry, amplitudes, config)
    n_pop, dim = int(config.population), geometry.n_elements
    rng = np.random.default_rng(config.seed)

    pop = rng.random((n_pop, dim))
    costs = model(pop)
    trace = [float(costs.min())]
    for gen in range(int(config.max_generations)):
        donors = _donors(rng, n_pop)
        mutant = pop[donors[:, 0]] + config.mutation * (pop[donors[:, 1]] - pop[donors[:, 2]])
        mutant = reflect_into_unit(mutant)
        cross = rng.random((n_pop, dim)) < config.crossover
        cross[np.arange(n_pop), rng.integers(dim, size=n_pop)] = True
        trial = np.where(cross, mutant, pop)
        trial_costs = model(trial)
        better = trial_costs <= costs
        pop[better] = trial[better]
        costs[better] = trial_costs[better]
        trace.append(float(costs.min()))
        if callback is not None:
            callback(gen + 1, trace[-1])
        if (gen + 1) % 100 == 0:
            log.debug("generation %d best cost %.6g", gen + 1, trace[-1])

    best = int(np.argmin(costs))
    result = DeResult(
        best_sigma=pop[best].copy(),
        best_cost=float(costs[best]),
        cost_trace=np.array(trace),
        task=task,
        geometry=geometry,
        amplitudes=np.asarray(amplitudes, dtype=float),
        config=config,
        carrier=carrier,
    )
    design = result.design
    result.report = power_report(design)
    result.metrics_plus1, result.metrics_minus3 = design_metrics(design, config.grid_step)
    return result


def design_metrics(design: TmaDesign, grid_step: float = 0.02):
    """Metrics of the +1st and -3rd patterns, both referenced to the +1st peak."""
    grid = angle_grid(grid_step)
    p1 = harmonic_pattern(design, 1, grid)
    p3 = harmonic_pattern(design, -3, grid)
    ref = peak_magnitude(p1)
    return pattern_metrics(p1, ref), pattern_metrics(p3, ref)


def reconfigure(result: DeResult, new_task: BeamTask):
    """Re-steer an optimized design to new beam directions without re-running DE.

    The duties (hence the power budget) are kept; only phases and pulse
    positions move.
    """
    phases, schedule = solve_steering(result.geometry, new_task, result.best_sigma)
    return ExcitationWeights(result.amplitudes, phases), schedule
