"""
Geometric Modified Polak-Ribière-Polyak conjugate gradient (GMPRP)

Direction update:
- y = g⁺ − 𝒯g, d̃ = 𝒯d
- β = ⟨g⁺, y⟩/‖g‖², θ = ⟨g⁺, d̃⟩/‖g‖²
- d⁺ = −g⁺ + βd̃ − θy, which gives ⟨g⁺, d⁺⟩ = −‖g⁺‖² regardless of the step size

Line search:
- Initial trial from a finite-difference curvature estimate (or a Gauss-Newton estimate)
- Backtracking by τ until F(R(αd)) − F(x) < −δα²‖d‖²
- Additional Step: if the first trial is accepted, grow by 1/τ while the test still passes

Debug checks (enabled via the STIEP_DEBUG_CHECKS=1 environment variable or SolverConfig.debug_checks):
- Descent identity |⟨g⁺, d⁺⟩ + ‖g⁺‖²|/(1+‖g⁺‖²) ≤ 1e-10 every iteration
- Summability Σα²‖d‖² ≤ (F(x⁰) − F(xᵏ))/δ
"""

# Importing Python libraries
from dataclasses import asdict, dataclass, field
from enum import Enum
import logging
import math
import os
import time
import numpy as np
from scipy import optimize

# Importing project components
from stiep.components.manifold import RETRACTION_MODES, TRANSPORT_MODES, ProductManifold, ProductPoint, ProductTangent
from stiep.components.matrix_kernel import real_schur
from stiep.components.model import ModelKind, eval_objective, gauss_newton_denominator, grad_objective, hess_vec_approx, level_bound_diagnostics, recover_stochastic, residual
from stiep.components.spectra import Spectrum, build_D, sample_stochastic, spectrum_distance
from stiep.errors import DegenerateStep, DiagnosticFailure, InvalidConfig, NotDescent

logger = logging.getLogger(__name__)

# ============================================================================
# CONSTANTS
# ============================================================================

DESCENT_IDENTITY_TOLERANCE = 1e-10
SUMMABILITY_SLACK = 1e-12

# Fallback step and floors of the curvature-based initial step, per model
MODEL_FALLBACKS = {
    ModelKind.ISOSPECTRAL: {"alpha_star": 1.4, "hess_dir_floor": 1e-5, "curvature_floor": 1e-12},
    ModelKind.SL2EXTENDED: {"alpha_star": 1.6, "hess_dir_floor": 1e-5, "curvature_floor": 1e-10},
}

INIT_STEP_MODES = ("newton", "gauss-newton")
LINE_SEARCH_MODES = ("quadratic", "armijo", "exact")
BETA_RULES = ("mprp", "fletcher-reeves")
FLOOR_METRICS = ("metric", "euclidean")

TRACE_COLUMNS = ("k", "F", "residual", "grad_norm", "alpha", "beta", "theta", "ls_updates", "additional_used")


def _debug_checks_from_environment() -> bool:
    return os.environ.get("STIEP_DEBUG_CHECKS", "0") == "1"


class SolverStatus(Enum):
    RESIDUAL_MET = "ResidualMet"
    GRAD_VANISHED = "GradVanished"
    MAX_ITER = "MaxIter"
    LINE_SEARCH_STALL = "LineSearchStall"

    @property
    def converged(self) -> bool:
        return self in (SolverStatus.RESIDUAL_MET, SolverStatus.GRAD_VANISHED)


# ============================================================================
# CONFIGURATION AND TRACES
# ============================================================================


@dataclass
class SolverConfig:
    """Line-search constants, geometry selections, tolerances and iteration caps of one solve."""

    model: ModelKind = ModelKind.SL2EXTENDED
    delta: float = 1e-4
    tau: float = 0.5
    alpha_star: float = 1.6
    hess_dir_floor: float = 1e-5
    curvature_floor: float = 1e-10
    residual_tol: float = 1e-12
    grad_tol: float = 1e-14
    max_iter: int = 10000
    max_ls_updates: int = 60
    max_growth: int = 60
    retraction_mode: str = "qr"
    transport_mode: str = "projection"
    init_step_mode: str = "newton"
    additional_step_enabled: bool = True
    line_search_mode: str = "quadratic"
    beta_rule: str = "mprp"
    floor_metric: str = "metric"
    stop_on_residual: bool = True
    freeze_pairs: bool = False
    debug_checks: bool = field(default_factory=_debug_checks_from_environment)
    seed: int = 0

    def __post_init__(self):
        self.model = ModelKind.parse(self.model)

        if not 0.0 < self.tau < 1.0:
            raise InvalidConfig(f"tau must lie in (0, 1), got {self.tau}")
        if not 0.0 < self.delta < 1.0:
            raise InvalidConfig(f"delta must lie in (0, 1), got {self.delta}")
        if self.alpha_star <= 0.0:
            raise InvalidConfig(f"alpha_star must be positive, got {self.alpha_star}")
        if self.max_iter < 0 or self.max_ls_updates < 0 or self.max_growth < 0:
            raise InvalidConfig("iteration caps must be non-negative")

        choices = {
            "retraction_mode": RETRACTION_MODES,
            "transport_mode": TRANSPORT_MODES,
            "init_step_mode": INIT_STEP_MODES,
            "line_search_mode": LINE_SEARCH_MODES,
            "beta_rule": BETA_RULES,
            "floor_metric": FLOOR_METRICS,
        }
        for name, allowed in choices.items():
            if getattr(self, name) not in allowed:
                raise InvalidConfig(f"{name} must be one of {allowed}, got '{getattr(self, name)}'")

    @classmethod
    def for_model(cls, model, **overrides) -> "SolverConfig":
        """Config with the model's fallback step and floors; explicit overrides win."""
        kind = ModelKind.parse(model)
        return cls(model=kind, **{**MODEL_FALLBACKS[kind], **overrides})

    def to_dict(self) -> dict:
        settings = asdict(self)
        settings["model"] = self.model.value
        return settings


@dataclass
class IterationRecord:
    k: int
    F: float
    residual: float
    grad_norm: float
    alpha: float = math.nan
    beta: float = math.nan
    theta: float = math.nan
    ls_updates: int = 0
    additional_used: bool = False
    evaluations: int = 0
    descent_check: float = 0.0
    step_norm_sq: float = 0.0


@dataclass
class IterationTrace:
    """Per-iteration records plus the running diagnostics of one solve."""

    records: list = field(default_factory=list)
    status: SolverStatus = None
    decrease_sum: float = 0.0
    level_bounds: dict = field(default_factory=dict)

    def append(self, record: IterationRecord):
        self.records.append(record)

    def observe_level_bounds(self, x: ProductPoint):
        for name, value in level_bound_diagnostics(x).items():
            self.level_bounds[name] = max(self.level_bounds.get(name, 0.0), value)

    @property
    def iterations(self) -> int:
        return max(len(self.records) - 1, 0)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(record, name) for record in self.records])

    def to_rows(self) -> list:
        return [{column: getattr(record, column) for column in TRACE_COLUMNS} for record in self.records]


@dataclass
class SolveResult:
    point: ProductPoint
    trace: IterationTrace
    matrix: np.ndarray
    status: SolverStatus
    wall_time_s: float
    evaluations: int

    @property
    def final_residual(self) -> float:
        return self.trace.records[-1].residual

    def summary(self, spectrum: Spectrum = None) -> dict:
        """Terminal summary; the eigenvalue distance is computed only when the spectrum is supplied."""
        return {
            "status": self.status.value,
            "iterations": self.trace.iterations,
            "wall_time_s": self.wall_time_s,
            "final_residual": self.final_residual,
            "eig_distance": spectrum_distance(spectrum, self.matrix) if spectrum is not None else None,
            "function_evaluations": self.evaluations,
            "level_bounds": dict(self.trace.level_bounds),
        }


@dataclass
class LineSearchResult:
    alpha: float
    updates: int
    additional_used: bool
    point: ProductPoint
    value: float
    cache: object
    evaluations: int
    stalled: bool = False


# ============================================================================
# INITIALIZATION AND STEP SIZES
# ============================================================================


def init_point(spectrum: Spectrum, rng: np.random.Generator) -> ProductPoint:
    """Start point from the real Schur form of a random stochastic matrix.

    S⁰ = √(row-normalized uniform matrix), (Q⁰, V̂) = schur(S⁰∘S⁰), V⁰ = W∘V̂, a⁰ = 1, b⁰ = 0.
    """
    manifold = ProductManifold.for_spectrum(spectrum)
    S = np.sqrt(sample_stochastic(spectrum.n, rng))
    Q, T = real_schur(S * S)
    return ProductPoint(S=S, Q=Q, V=manifold.mask * T, a=np.ones(spectrum.t), b=np.zeros(spectrum.t))


def _floor_inner(manifold: ProductManifold, x: ProductPoint, xi: ProductTangent, eta: ProductTangent, config: SolverConfig) -> float:
    if config.floor_metric == "euclidean":
        return manifold.ambient_inner(xi, eta)
    return manifold.inner(x, xi, eta)


def _gradient(x: ProductPoint, spectrum: Spectrum, config: SolverConfig, cache, manifold: ProductManifold) -> ProductTangent:
    gradient = grad_objective(x, spectrum, config.model, cache, manifold)
    if config.freeze_pairs:
        return ProductTangent(gradient.S, gradient.Q, gradient.V, np.zeros_like(gradient.a), np.zeros_like(gradient.b))
    return gradient


def initial_stepsize(
    x: ProductPoint,
    d: ProductTangent,
    g: ProductTangent,
    spectrum: Spectrum,
    config: SolverConfig,
    manifold: ProductManifold = None,
    D: np.ndarray = None,
) -> float:
    """First trial step |⟨d, g⟩/⟨d, Hd⟩| (or |⟨d, g⟩|/‖Df[d]‖² in Gauss-Newton mode), α* on the floors.

    Raises:
        NotDescent: If ⟨g, d⟩ ≥ 0.
    """
    if manifold is None:
        manifold = ProductManifold.for_spectrum(spectrum)
    if D is None:
        D = build_D(spectrum)

    slope = manifold.inner(x, g, d)
    if not slope < 0.0:
        raise NotDescent(f"direction is not a descent direction (⟨g, d⟩ = {slope:.3e})")

    direction_norm = math.sqrt(max(_floor_inner(manifold, x, d, d, config), 0.0))
    if direction_norm < config.hess_dir_floor:
        return config.alpha_star

    if config.init_step_mode == "gauss-newton":
        denominator = gauss_newton_denominator(x, d, spectrum, config.model, config.retraction_mode, manifold, D)
        if denominator < config.curvature_floor:
            return config.alpha_star
        return abs(slope) / denominator

    curvature_direction = hess_vec_approx(
        x,
        d,
        spectrum,
        config.model,
        retraction=config.retraction_mode,
        transport=config.transport_mode,
        manifold=manifold,
        D=D,
        gradient=g,
    )
    curvature = _floor_inner(manifold, x, d, curvature_direction, config)
    if abs(curvature) < config.curvature_floor:
        return config.alpha_star
    return abs(slope / curvature)


# ============================================================================
# LINE SEARCH
# ============================================================================


def _exact_line_search(x, d, value, spectrum, config, manifold, D, alpha0) -> LineSearchResult:
    """Bounded Brent minimization of α ↦ F(R_x(αd)) after doubling the bracket."""
    evaluations = 0

    def along(alpha: float) -> float:
        nonlocal evaluations
        try:
            z = manifold.retract(x, d * alpha, config.retraction_mode)
        except DegenerateStep:
            return math.inf
        evaluations += 1
        return eval_objective(z, spectrum, config.model, D)[0]

    upper = alpha0
    for _ in range(config.max_growth):
        if not along(2.0 * upper) < along(upper):
            break
        upper *= 2.0

    result = optimize.minimize_scalar(along, bounds=(0.0, 2.0 * upper), method="bounded", options={"xatol": 1e-12, "maxiter": 500})
    alpha = float(result.x)
    z = manifold.retract(x, d * alpha, config.retraction_mode)
    candidate, cache = eval_objective(z, spectrum, config.model, D)
    evaluations += 1

    if not candidate < value:
        return LineSearchResult(alpha, 0, False, x, value, None, evaluations, stalled=True)
    return LineSearchResult(alpha, 0, False, z, candidate, cache, evaluations)


def line_search(
    x: ProductPoint,
    d: ProductTangent,
    g: ProductTangent,
    spectrum: Spectrum,
    config: SolverConfig,
    value: float = None,
    manifold: ProductManifold = None,
    D: np.ndarray = None,
) -> LineSearchResult:
    """Backtracking line search with the Additional Step.

    Returns:
        LineSearchResult: Accepted step, number of step-size updates, whether the Additional Step ran, the
        accepted point with its value and cache; stalled=True when max_ls_updates reductions did not pass.
    """
    if manifold is None:
        manifold = ProductManifold.for_spectrum(spectrum)
    if D is None:
        D = build_D(spectrum)
    if value is None:
        value = eval_objective(x, spectrum, config.model, D)[0]

    alpha = initial_stepsize(x, d, g, spectrum, config, manifold, D)
    if config.line_search_mode == "exact":
        return _exact_line_search(x, d, value, spectrum, config, manifold, D, alpha)

    direction_norm_sq = manifold.inner(x, d, d)
    slope = manifold.inner(x, g, d)
    evaluations = 0

    def trial(step: float):
        nonlocal evaluations
        try:
            z = manifold.retract(x, d * step, config.retraction_mode)
        except DegenerateStep:
            return None
        candidate, cache = eval_objective(z, spectrum, config.model, D)
        evaluations += 1

        if config.line_search_mode == "armijo":
            accepted = candidate - value <= config.delta * step * slope
        else:
            accepted = candidate - value < -config.delta * step**2 * direction_norm_sq
        return (z, candidate, cache) if accepted else None

    updates = 0
    accepted = trial(alpha)
    while accepted is None:
        if updates >= config.max_ls_updates:
            logger.debug("[LINE_SEARCH] stalled after %d updates (alpha=%.3e)", updates, alpha)
            return LineSearchResult(alpha, updates, False, x, value, None, evaluations, stalled=True)
        alpha *= config.tau
        updates += 1
        accepted = trial(alpha)

    additional_used = False
    if updates == 0 and config.additional_step_enabled:
        additional_used = True
        for _ in range(config.max_growth):
            grown = trial(alpha / config.tau)
            updates += 1
            if grown is None:
                break
            alpha /= config.tau
            accepted = grown

    z, candidate, cache = accepted
    return LineSearchResult(alpha, updates, additional_used, z, candidate, cache, evaluations)


# ============================================================================
# SOLVER
# ============================================================================


def descent_identity_check(g_next: ProductTangent, d_next: ProductTangent, x_next: ProductPoint, manifold: ProductManifold) -> float:
    """Returns |⟨g, d⟩ + ‖g‖²|/(1 + ‖g‖²) at x_next."""
    squared = manifold.inner(x_next, g_next, g_next)
    return abs(manifold.inner(x_next, g_next, d_next) + squared) / (1.0 + squared)


def gmprp_solve(spectrum: Spectrum, x0: ProductPoint, config: SolverConfig = None, callback=None) -> SolveResult:
    """Runs GMPRP from x0 until a stopping rule fires.

    Args:
        spectrum (Spectrum): Prescribed spectrum.
        x0 (ProductPoint): Start point valid for the spectrum's (s, t).
        config (SolverConfig): Solver settings; defaults to SolverConfig().
        callback (callable): Optional callback(k, x, value) invoked after every accepted iteration and at k = 0.

    Returns:
        SolveResult: Final point, trace, recovered stochastic matrix S∘S and terminal status.
    """
    if config is None:
        config = SolverConfig()

    manifold = ProductManifold.for_spectrum(spectrum)
    D = build_D(spectrum)
    start_time = time.perf_counter()

    x = x0
    value, cache = eval_objective(x, spectrum, config.model, D)
    evaluations = 1
    g = _gradient(x, spectrum, config, cache, manifold)
    g_norm_sq = manifold.inner(x, g, g)
    d = -g

    trace = IterationTrace()
    trace.append(IterationRecord(k=0, F=value, residual=residual(value), grad_norm=math.sqrt(g_norm_sq), evaluations=1))
    trace.observe_level_bounds(x)
    initial_value = value
    if callback is not None:
        callback(0, x, value)

    k = 0
    while True:
        if config.stop_on_residual and residual(value) < config.residual_tol:
            trace.status = SolverStatus.RESIDUAL_MET
            break
        if math.sqrt(g_norm_sq) < config.grad_tol:
            trace.status = SolverStatus.GRAD_VANISHED
            break
        if k >= config.max_iter:
            trace.status = SolverStatus.MAX_ITER
            break

        search = line_search(x, d, g, spectrum, config, value, manifold, D)
        evaluations += search.evaluations
        if search.stalled:
            trace.status = SolverStatus.LINE_SEARCH_STALL
            break

        step = d * search.alpha
        step_norm_sq = search.alpha**2 * manifold.inner(x, d, d)
        x_next, value_next = search.point, search.value
        g_next = _gradient(x_next, spectrum, config, search.cache, manifold)

        g_carried = manifold.transport(x, step, g, config.transport_mode, config.retraction_mode, target=x_next)
        d_carried = manifold.transport(x, step, d, config.transport_mode, config.retraction_mode, target=x_next)
        y = g_next - g_carried

        if config.beta_rule == "fletcher-reeves":
            beta = manifold.inner(x_next, g_next, g_next) / g_norm_sq
            theta = 0.0
        else:
            beta = manifold.inner(x_next, g_next, y) / g_norm_sq
            theta = manifold.inner(x_next, g_next, d_carried) / g_norm_sq
        d_next = -g_next + d_carried * beta - y * theta

        check = descent_identity_check(g_next, d_next, x_next, manifold)
        if config.beta_rule == "fletcher-reeves" and not manifold.inner(x_next, g_next, d_next) < 0.0:
            d_next = -g_next

        k += 1
        trace.decrease_sum += step_norm_sq
        trace.observe_level_bounds(x_next)
        g_norm_sq = manifold.inner(x_next, g_next, g_next)
        trace.append(
            IterationRecord(
                k=k,
                F=value_next,
                residual=residual(value_next),
                grad_norm=math.sqrt(g_norm_sq),
                alpha=search.alpha,
                beta=beta,
                theta=theta,
                ls_updates=search.updates,
                additional_used=search.additional_used,
                evaluations=search.evaluations,
                descent_check=check,
                step_norm_sq=step_norm_sq,
            )
        )

        logger.debug("[LEVEL_BOUNDS] k=%d %s", k, _format_bounds(trace.level_bounds))
        if not all(math.isfinite(bound) for bound in trace.level_bounds.values()):
            logger.warning("[LEVEL_BOUNDS] non-finite iterate bound at k=%d: %s", k, trace.level_bounds)
            if config.debug_checks:
                raise DiagnosticFailure(f"iterate left every bounded sublevel set at k={k}")

        if config.debug_checks:
            _assert_iteration_diagnostics(trace, initial_value, value_next, config)

        logger.debug(
            "[GMPRP] k=%d F=%.6e residual=%.3e |g|=%.3e alpha=%.3e beta=%.3e theta=%.3e ls=%d",
            k,
            value_next,
            residual(value_next),
            math.sqrt(g_norm_sq),
            search.alpha,
            beta,
            theta,
            search.updates,
        )

        x, value, g, d = x_next, value_next, g_next, d_next
        if callback is not None:
            callback(k, x, value)

    wall_time = time.perf_counter() - start_time
    logger.info("[GMPRP] %s after %d iterations (residual %.3e, %.2fs)", trace.status.value, trace.iterations, residual(value), wall_time)
    logger.info("[LEVEL_BOUNDS] running max over %d iterates: %s", trace.iterations + 1, _format_bounds(trace.level_bounds))
    return SolveResult(point=x, trace=trace, matrix=recover_stochastic(x), status=trace.status, wall_time_s=wall_time, evaluations=evaluations)


def _format_bounds(bounds: dict) -> str:
    return " ".join(f"{name}={value:.3e}" for name, value in bounds.items())


def _assert_iteration_diagnostics(trace: IterationTrace, initial_value: float, value: float, config: SolverConfig):
    record = trace.records[-1]
    if config.beta_rule == "mprp" and record.descent_check > DESCENT_IDENTITY_TOLERANCE:
        raise DiagnosticFailure(f"descent identity violated at k={record.k}: {record.descent_check:.3e}")

    bound = (initial_value - value) / config.delta
    if config.line_search_mode == "quadratic" and trace.decrease_sum > bound + SUMMABILITY_SLACK * (1.0 + initial_value / config.delta):
        raise DiagnosticFailure(f"summability bound violated at k={record.k}: {trace.decrease_sum:.6e} > {bound:.6e}")
