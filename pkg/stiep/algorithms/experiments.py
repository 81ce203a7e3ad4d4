"""
Experiment families of the benchmark harness

- scaling:      spectra of random stochastic matrices, both models from the same start point, n varies
- fixed-n:      disk spectra with a prescribed number t of conjugate pairs, fixed iteration budget,
                the iterate with the smallest eigenvalue distance is kept
- t-statistics: number of conjugate pairs of random stochastic matrices

Every (n, t, sample) task draws from its own generator seeded by (seed, n, t, sample_id), so the rows do not
depend on the worker count or on completion order.
"""

# Importing Python libraries
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import logging
import math
import numpy as np

# Importing project components
from stiep.algorithms.gmprp import SolverConfig, gmprp_solve, init_point
from stiep.components.model import ModelKind, recover_stochastic
from stiep.components.spectra import sample_disk_spectrum, sample_stochastic, spectrum_distance, spectrum_of_matrix
from stiep.errors import BadArguments, StiepError

logger = logging.getLogger(__name__)

FAMILIES = ("scaling", "fixed-n", "t-statistics")

# Iteration budget of the fixed-n family
FIXED_N_ITERATIONS = 3000

RESULT_COLUMNS = (
    "family",
    "model",
    "n",
    "t",
    "sample_id",
    "status",
    "iterations",
    "wall_time_s",
    "final_residual",
    "eig_distance",
    "min_eig_distance",
    "min_eig_distance_iter",
    "function_evaluations",
)


@dataclass
class ExperimentSpec:
    """One sweep: which family, which sizes and pair counts, how many samples and which models."""

    family: str
    sizes: tuple
    t_values: tuple = ()
    samples: int = 10
    seed: int = 0
    models: tuple = ("I", "II")
    overrides: dict = field(default_factory=dict)
    workers: int = 1

    def __post_init__(self):
        self.sizes = tuple(int(n) for n in self.sizes)
        self.t_values = tuple(int(t) for t in self.t_values)
        self.models = tuple(ModelKind.parse(model).value for model in self.models)

        if self.family not in FAMILIES:
            raise BadArguments(f"unknown experiment family '{self.family}' (expected one of {FAMILIES})")
        if self.samples < 1:
            raise BadArguments(f"samples must be at least 1, got {self.samples}")
        if not self.sizes:
            raise BadArguments("sizes must not be empty")
        if self.family != "t-statistics" and not self.models:
            raise BadArguments("at least one model is required")
        if self.family == "fixed-n":
            if len(self.sizes) != 1:
                raise BadArguments(f"the fixed-n family needs exactly one n, got {self.sizes}")
            n = self.sizes[0]
            if not self.t_values or any(t < 1 or t > (n - 1) // 2 for t in self.t_values):
                raise BadArguments(f"fixed-n needs pair counts 1 ≤ t ≤ {(n - 1) // 2}, got {self.t_values}")


@dataclass
class ResultRow:
    family: str
    model: str
    n: int
    t: int
    sample_id: int
    status: str
    iterations: int = 0
    wall_time_s: float = math.nan
    final_residual: float = math.nan
    eig_distance: float = math.nan
    min_eig_distance: float = math.nan
    min_eig_distance_iter: int = -1
    function_evaluations: int = 0

    def to_dict(self) -> dict:
        return {column: getattr(self, column) for column in RESULT_COLUMNS}


class MinDistanceTracker:
    """Solver callback keeping the iterate whose recovered matrix is closest in spectrum."""

    def __init__(self, spectrum):
        self.spectrum = spectrum
        self.best_distance = math.inf
        self.best_iteration = -1
        self.best_matrix = None

    def __call__(self, k: int, x, value: float):
        matrix = recover_stochastic(x)
        distance = spectrum_distance(self.spectrum, matrix)
        if distance < self.best_distance:
            self.best_distance = distance
            self.best_iteration = k
            self.best_matrix = matrix


def task_generator(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for one task, derived from the sweep seed and the task key."""
    return np.random.default_rng(np.random.SeedSequence([seed, *key]))


# ============================================================================
# TASK WORKERS (top-level so that they pickle into worker processes)
# ============================================================================


def _solve_row(family: str, model: str, spectrum, x0, sample_id: int, overrides: dict, tracker: MinDistanceTracker = None) -> ResultRow:
    try:
        config = SolverConfig.for_model(model, **overrides)
        result = gmprp_solve(spectrum, x0, config, callback=tracker)
        row = ResultRow(
            family=family,
            model=model,
            n=spectrum.n,
            t=spectrum.t,
            sample_id=sample_id,
            status=result.status.value,
            iterations=result.trace.iterations,
            wall_time_s=result.wall_time_s,
            final_residual=result.final_residual,
            eig_distance=spectrum_distance(spectrum, result.matrix),
            function_evaluations=result.evaluations,
        )
    except StiepError as error:
        logger.warning("[BENCH] %s model %s n=%d sample %d failed: %s", family, model, spectrum.n, sample_id, error)
        return ResultRow(family=family, model=model, n=spectrum.n, t=spectrum.t, sample_id=sample_id, status=type(error).__name__)

    if tracker is not None:
        row.min_eig_distance = tracker.best_distance
        row.min_eig_distance_iter = tracker.best_iteration
    return row


def _scaling_task(task: dict) -> list:
    rng = task_generator(task["seed"], task["n"], task["sample_id"])
    spectrum = spectrum_of_matrix(sample_stochastic(task["n"], rng))
    x0 = init_point(spectrum, rng)
    return [_solve_row("scaling", model, spectrum, x0, task["sample_id"], task["overrides"]) for model in task["models"]]


def _fixed_n_task(task: dict) -> list:
    rng = task_generator(task["seed"], task["n"], task["t"], task["sample_id"])
    spectrum = sample_disk_spectrum(task["n"], task["t"], rng)
    x0 = init_point(spectrum, rng)
    overrides = {"max_iter": FIXED_N_ITERATIONS, **task["overrides"], "stop_on_residual": False}

    rows = []
    for model in task["models"]:
        rows.append(_solve_row("fixed-n", model, spectrum, x0, task["sample_id"], overrides, MinDistanceTracker(spectrum)))
    return rows


def _t_statistics_task(task: dict) -> list:
    rng = task_generator(task["seed"], task["n"], task["sample_id"])
    spectrum = spectrum_of_matrix(sample_stochastic(task["n"], rng))
    return [ResultRow(family="t-statistics", model="-", n=task["n"], t=spectrum.t, sample_id=task["sample_id"], status="ok")]


def _execute(worker, tasks: list, workers: int) -> list:
    """Runs the tasks in order (in-process for one worker) and flattens the row batches."""
    if workers <= 1 or len(tasks) <= 1:
        batches = [worker(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            # executor.map preserves task order
            batches = list(executor.map(worker, tasks))
    return [row for batch in batches for row in batch]


# ============================================================================
# FAMILIES
# ============================================================================


def _tasks(spec: ExperimentSpec, t_values: tuple) -> list:
    return [
        {"seed": spec.seed, "n": n, "t": t, "sample_id": sample_id, "models": spec.models, "overrides": dict(spec.overrides)}
        for n in spec.sizes
        for t in t_values
        for sample_id in range(spec.samples)
    ]


def run_scaling(spec: ExperimentSpec) -> list:
    """Solves spectra of random stochastic matrices with every requested model from a shared start point."""
    if spec.family != "scaling":
        raise BadArguments(f"run_scaling needs the scaling family, got '{spec.family}'")
    logger.info("[BENCH] scaling sizes=%s samples=%d models=%s", spec.sizes, spec.samples, spec.models)
    return _execute(_scaling_task, _tasks(spec, (0,)), spec.workers)


def run_fixed_n(spec: ExperimentSpec) -> list:
    """Runs disk spectra for each t without residual stopping and records the closest iterate."""
    if spec.family != "fixed-n":
        raise BadArguments(f"run_fixed_n needs the fixed-n family, got '{spec.family}'")
    logger.info("[BENCH] fixed-n n=%d t=%s samples=%d models=%s", spec.sizes[0], spec.t_values, spec.samples, spec.models)
    return _execute(_fixed_n_task, _tasks(spec, spec.t_values), spec.workers)


def run_t_statistics(spec: ExperimentSpec) -> list:
    """Counts conjugate pairs in the spectra of random stochastic matrices."""
    if spec.family != "t-statistics":
        raise BadArguments(f"run_t_statistics needs the t-statistics family, got '{spec.family}'")
    logger.info("[BENCH] t-statistics sizes=%s samples=%d", spec.sizes, spec.samples)
    return _execute(_t_statistics_task, _tasks(spec, (0,)), spec.workers)


def run_experiment(spec: ExperimentSpec) -> list:
    runners = {"scaling": run_scaling, "fixed-n": run_fixed_n, "t-statistics": run_t_statistics}
    return runners[spec.family](spec)
