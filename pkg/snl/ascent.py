#!/usr/bin/env python3
"""
Dual ascent over the positive definite cone and the proximal step built on it.

The cone is open and the supremum of the dual often sits on its boundary
(at σ = ς = 0 for exact distances), so the ascent follows the central path
of Π^d + τ·d·log det(G_n + μI) while τ shrinks. A step is accepted only if
it keeps G + μI positive definite and passes an Armijo test on Π^d itself,
so the dual trace never decreases. Directions are Newton (default) or plain
gradient.
"""

import logging
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import numpy as np
import scipy.linalg as la

from .dual import (
    DENSE_NEWTON_LIMIT,
    CoefficientTables,
    ConeBarrier,
    DualEvaluation,
    DualPoint,
    build_tables,
    canonical_image,
    cone_barrier,
    evaluate_dual,
    newton_direction,
    node_matrix,
    residual_gradient,
)
from .errors import (
    ConeInfeasibleError,
    DimensionMismatchError,
    InvalidConfigError,
    NoInteriorStartError,
    NonsingularityError,
)
from .factor import DENSE_LIMIT, dominates, shifted, smallest_eigenvalue
from .instance import DELTA_STREAM, ProblemInstance, seeded_stream, unanchored_sensors
from .primal import PerturbationVector, PositionVector, as_position_vector, eval_objective, eval_perturbed_objective

logger = logging.getLogger(__name__)

DELTA_MODES = ("uniform", "seeded-random", "user")
DIRECTIONS = ("newton", "gradient")

CRITICAL = "critical"
STALLED = "stalled"
MAX_ITERS = "max-iters"
TRIVIAL = "trivial"

# anchor duals are multiplied by 10 at most this many times looking for a start
START_ESCALATIONS = 6

# the barrier is spent once τ·n·d drops below this fraction of the gap tolerance
BARRIER_FLOOR = 1e-3

# accepted steps shorter than this fraction of the direction raise τ again
SHORT_STEP = 1.0 / 16.0


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of the dual ascent and the perturbation ladder."""

    delta_magnitude: float = 0.005
    delta_mode: str = "uniform"
    delta_values: Optional[Tuple[float, ...]] = None
    force_delta: bool = False
    grad_tol: float = 1e-8
    gap_tol: float = 1e-14
    max_iters: int = 500
    rho0: float = 1.0
    rho_decay: float = 0.5
    mu_ratio: float = 0.5
    rho_max: float = 1e6
    pd_margin_floor: float = 1e-9
    outer_max: int = 30
    outer_tol: float = 1e-6
    armijo: float = 1e-4
    min_step: float = 2.0 ** -50
    barrier0: float = 0.1
    barrier_decay: float = 0.1
    direction: str = "newton"
    seed: int = 0

    def __post_init__(self):
        if self.delta_values is not None:
            object.__setattr__(self, "delta_values", tuple(float(v) for v in self.delta_values))
        if not math.isfinite(self.delta_magnitude) or self.delta_magnitude < 0:
            raise InvalidConfigError(f"delta_magnitude must be >= 0, got {self.delta_magnitude}")
        if self.delta_mode not in DELTA_MODES:
            raise InvalidConfigError(f"delta_mode must be one of {DELTA_MODES}, got {self.delta_mode!r}")
        if self.delta_mode == "user" and self.delta_values is None:
            raise InvalidConfigError("delta_mode 'user' needs delta_values")
        if self.direction not in DIRECTIONS:
            raise InvalidConfigError(f"direction must be one of {DIRECTIONS}, got {self.direction!r}")
        if not 0 < self.rho_decay < 1:
            raise InvalidConfigError(f"rho_decay must lie in (0, 1), got {self.rho_decay}")
        if not 0 < self.mu_ratio < 1:
            raise InvalidConfigError(f"mu_ratio must lie in (0, 1), got {self.mu_ratio}")
        if not 0 < self.rho0 <= self.rho_max:
            raise InvalidConfigError(f"need 0 < rho0 <= rho_max, got rho0={self.rho0}, rho_max={self.rho_max}")
        for name in ("grad_tol", "gap_tol", "pd_margin_floor", "outer_tol", "min_step", "barrier0"):
            if not getattr(self, name) > 0:
                raise InvalidConfigError(f"{name} must be > 0, got {getattr(self, name)}")
        if not 0 < self.barrier_decay < 1:
            raise InvalidConfigError(f"barrier_decay must lie in (0, 1), got {self.barrier_decay}")
        if not 0 < self.armijo < 0.5:
            raise InvalidConfigError(f"armijo must lie in (0, 0.5), got {self.armijo}")
        if self.max_iters < 0 or self.outer_max < 1:
            raise InvalidConfigError("max_iters must be >= 0 and outer_max >= 1")

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        if self.delta_values is not None:
            data["delta_values"] = list(self.delta_values)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SolverConfig":
        """
        Rebuild a configuration written by to_dict.

        Raises:
            InvalidConfigError: On unknown keys or invalid values
        """
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidConfigError(f"unknown solver config keys: {sorted(unknown)}")
        return cls(**data)


def make_delta(inst: ProblemInstance, cfg: SolverConfig) -> Optional[PerturbationVector]:
    """
    Linear perturbation δ for the configured mode.

    Returns:
        δ of length n·d, or None when the perturbation is zero

    Raises:
        DimensionMismatchError: If user values do not have length n·d
    """
    if cfg.delta_mode == "user":
        values = np.asarray(cfg.delta_values, dtype=float)
        if values.shape[0] != inst.n_vars:
            raise DimensionMismatchError(f"delta_values has length {values.shape[0]}, instance needs {inst.n_vars}")
        return None if not np.any(values) else values
    if cfg.delta_magnitude == 0:
        return None
    if cfg.delta_mode == "uniform":
        return np.full(inst.n_vars, cfg.delta_magnitude)
    return seeded_stream(cfg.seed, DELTA_STREAM).uniform(0.0, cfg.delta_magnitude, size=inst.n_vars)


class TraceEntry(NamedTuple):
    """One accepted ascent iterate."""

    iteration: int
    value: float
    grad_norm: float
    margin: float


@dataclass
class AscentResult:
    """Final dual point of an ascent, its trace and how it ended."""

    dual: DualPoint
    trace: List[TraceEntry] = field(default_factory=list)
    status: str = CRITICAL
    evaluation: Optional[DualEvaluation] = None
    gradient_norm: float = 0.0
    best_positions: Optional[np.ndarray] = None
    best_objective: float = math.inf

    def __iter__(self):
        yield self.dual
        yield self.trace

    @property
    def iterations(self) -> int:
        """Accepted steps taken."""
        return max(len(self.trace) - 1, 0)

    @property
    def positions(self) -> Optional[np.ndarray]:
        """ȳ recovered at the final dual point."""
        return None if self.evaluation is None else self.evaluation.positions

    @property
    def value(self) -> Optional[float]:
        return None if self.evaluation is None else self.evaluation.value


def in_relaxed_cone(inst: ProblemInstance, dual: DualPoint, mu: float, floor: float) -> bool:
    """Whether G(σ, ς) + μI ⪰ floor·I, decided on the n × n node matrix."""
    nodes = node_matrix(inst, dual)
    if inst.n_sensors <= DENSE_LIMIT:
        nodes = nodes.toarray()
    return dominates(shifted(nodes, mu), floor)


def interior_start(inst: ProblemInstance, cfg: SolverConfig, mu: float = 0.0) -> DualPoint:
    """
    Strictly feasible start: σ = 1 on sensor edges, ς = 1 on anchor edges,
    anchor duals escalated by 10 while G + μI misses the margin floor.

    Raises:
        NoInteriorStartError: If no escalation reaches the floor
    """
    anchor_value = 1.0
    for _ in range(START_ESCALATIONS + 1):
        start = DualPoint.filled(inst, 1.0, anchor_value)
        if in_relaxed_cone(inst, start, mu, cfg.pd_margin_floor):
            return start
        anchor_value *= 10.0
    unanchored = unanchored_sensors(inst)
    raise NoInteriorStartError(
        f"no strictly feasible dual start; sensors without an anchored path: {unanchored}",
        unanchored=unanchored,
    )


def _ascent_direction(
    inst: ProblemInstance,
    cfg: SolverConfig,
    evaluation: DualEvaluation,
    gradient: np.ndarray,
    barrier: ConeBarrier,
    tau: float,
) -> Tuple[np.ndarray, float]:
    """Direction for Π^d + τ·barrier and its Newton decrement."""
    h = gradient + tau * barrier.gradient
    if cfg.direction == "gradient":
        return h, float(h @ h)
    try:
        direction = newton_direction(inst, evaluation, h, barrier=barrier, tau=tau)
    except (la.LinAlgError, RuntimeError) as e:
        logger.debug("newton system failed (%s); using the gradient", e)
        return h, float(h @ h)
    decrement = float(h @ direction)
    if not np.all(np.isfinite(direction)) or decrement <= 0:
        return h, float(h @ h)
    return direction, decrement


def _line_search(
    inst: ProblemInstance,
    tables: CoefficientTables,
    cfg: SolverConfig,
    dual: DualPoint,
    evaluation: DualEvaluation,
    direction: np.ndarray,
    slope: float,
    delta: Optional[PerturbationVector],
    rho: float,
    mu: float,
    center: Optional[PositionVector],
) -> Optional[Tuple[DualPoint, DualEvaluation, float]]:
    base = dual.flat()
    alpha = 1.0
    while alpha >= cfg.min_step:
        trial = DualPoint.from_flat(inst, base + alpha * direction)
        if np.all(np.isfinite(trial.flat())) and in_relaxed_cone(inst, trial, mu, 0.0):
            try:
                trial_eval = evaluate_dual(inst, tables, trial, delta, rho=rho, center=center)
            except NonsingularityError:
                trial_eval = None
            if trial_eval is not None and trial_eval.value >= evaluation.value + cfg.armijo * alpha * slope:
                return trial, trial_eval, alpha
        alpha *= 0.5
    return None


def _pair_gap(
    inst: ProblemInstance,
    evaluation: DualEvaluation,
    delta: Optional[PerturbationVector],
    rho: float,
    center: Optional[PositionVector],
) -> float:
    primal = eval_perturbed_objective(inst, evaluation.positions, delta)
    if rho:
        offset = evaluation.positions - center
        primal += 0.5 * rho * float(offset @ offset)
    return primal - evaluation.value


def ascend(
    inst: ProblemInstance,
    tables: CoefficientTables,
    cfg: SolverConfig,
    start: DualPoint,
    delta: Optional[PerturbationVector] = None,
    rho: float = 0.0,
    mu: float = 0.0,
    center: Optional[PositionVector] = None,
) -> AscentResult:
    """
    Monotone barrier ascent of the (proximal) dual from a feasible start.

    τ starts at barrier0·(1 + gap₀)/(n·d) and is cut by barrier_decay when
    the barrier Newton decrement drops below τ, when the direction stops
    ascending Π^d, or when the line search finds no acceptable step. A short
    accepted step raises it again, up to its starting value.

    Args:
        inst: problem instance
        tables: coefficient tables of inst
        cfg: solver configuration
        start: dual point with G + μI ≻ 0
        delta: linear perturbation
        rho: proximal weight (0 for the plain dual)
        mu: cone relaxation (0 for S_a⁺)
        center: proximal center y_k

    Returns:
        AscentResult with status critical (gradient below grad_tol, or duality
        gap below gap_tol, both relative to 1 + |Π^d|), stalled (barrier spent
        with a gap left) or max-iters
    """
    dual = start
    evaluation = evaluate_dual(inst, tables, dual, delta, rho=rho, center=center)
    gradient = residual_gradient(inst, tables, dual, evaluation.positions)
    result = AscentResult(dual=dual, status=MAX_ITERS)
    nu = float(inst.n_vars)
    full = inst.n_edges <= DENSE_NEWTON_LIMIT and evaluation.assembled.dense
    tau_start = cfg.barrier0 * (1.0 + max(_pair_gap(inst, evaluation, delta, rho, center), 0.0)) / nu
    tau = tau_start

    for iteration in range(cfg.max_iters + 1):
        g = gradient.flat()
        grad_norm = float(np.max(np.abs(g))) if g.size else 0.0
        margin = smallest_eigenvalue(evaluation.assembled.G) + mu
        result.trace.append(TraceEntry(iteration, evaluation.value, grad_norm, margin))
        objective = eval_objective(inst, evaluation.positions)
        if objective < result.best_objective:
            result.best_objective = objective
            result.best_positions = evaluation.positions.copy()
        scale = 1.0 + abs(evaluation.value)
        gap = _pair_gap(inst, evaluation, delta, rho, center)
        logger.debug(
            "iter %d: dual %.12e, |g| %.3e, gap %.3e, margin %.3e, tau %.1e",
            iteration, evaluation.value, grad_norm, gap, margin, tau,
        )

        if grad_norm <= cfg.grad_tol * scale or gap <= cfg.gap_tol * scale:
            result.status = CRITICAL
            break
        if iteration == cfg.max_iters:
            result.status = MAX_ITERS
            break

        try:
            barrier = cone_barrier(inst, dual, mu, full=full)
        except ConeInfeasibleError as e:
            logger.debug("no barrier at the current point: %s", e)
            result.status = STALLED
            break
        step = None
        while step is None and tau * nu > BARRIER_FLOOR * cfg.gap_tol * scale:
            direction, decrement = _ascent_direction(inst, cfg, evaluation, g, barrier, tau)
            slope = float(g @ direction)
            if slope > 0:
                step = _line_search(inst, tables, cfg, dual, evaluation, direction, slope, delta, rho, mu, center)
            if step is None or decrement <= tau:
                tau *= cfg.barrier_decay
        if step is None:
            logger.debug("barrier spent with gap %.3e; no interior critical point", gap)
            result.status = STALLED
            break
        dual, evaluation, alpha = step
        if alpha < SHORT_STEP:
            tau = min(tau / cfg.barrier_decay, tau_start)
        gradient = residual_gradient(inst, tables, dual, evaluation.positions)

    result.dual = dual
    result.evaluation = evaluation
    result.gradient_norm = result.trace[-1].grad_norm
    return result


def maximize_dual(
    inst: ProblemInstance,
    cfg: Optional[SolverConfig] = None,
    delta: Optional[PerturbationVector] = None,
) -> AscentResult:
    """
    Maximize Π^d (Π^d_δ when delta is given) over S_a⁺.

    Unpacks as (dual, trace).

    Args:
        inst: problem instance
        cfg: solver configuration
        delta: linear perturbation

    Returns:
        AscentResult; status ``critical`` certifies an interior critical point

    Raises:
        NoInteriorStartError: If no strictly feasible start exists
    """
    cfg = cfg or SolverConfig()
    if inst.n_edges == 0:
        return AscentResult(dual=DualPoint.filled(inst, 0.0, 0.0), status=TRIVIAL)
    if delta is not None:
        delta = as_position_vector(inst, delta, name="delta")
    tables = build_tables(inst)
    result = ascend(inst, tables, cfg, interior_start(inst, cfg), delta)
    logger.info("dual ascent ended %s after %d steps (|g| %.3e)", result.status, result.iterations, result.gradient_norm)
    return result


@dataclass
class QuadraticStep:
    """Result of one proximal subproblem. Unpacks as (positions, dual)."""

    positions: np.ndarray
    dual: DualPoint
    ascent: AscentResult
    rho: float
    mu: float
    center: np.ndarray

    def __iter__(self):
        yield self.positions
        yield self.dual

    @property
    def interior(self) -> bool:
        """Whether the subproblem dual has a critical point in the relaxed cone."""
        return self.ascent.status == CRITICAL


def _relaxed_start(
    inst: ProblemInstance,
    cfg: SolverConfig,
    candidates: List[DualPoint],
    mu: float,
) -> DualPoint:
    base = DualPoint.filled(inst, 1.0, 1.0)
    for candidate in candidates:
        if in_relaxed_cone(inst, candidate, mu, cfg.pd_margin_floor):
            return candidate
    for candidate in candidates:
        for theta in (0.5, 0.75, 0.875, 0.9375):
            blended = candidate.blend(base, theta)
            if in_relaxed_cone(inst, blended, mu, cfg.pd_margin_floor):
                return blended
    return interior_start(inst, cfg, mu=mu)


def solve_quadratic_step(
    inst: ProblemInstance,
    cfg: SolverConfig,
    y_k: PositionVector,
    rho: float,
    mu: float,
    delta: Optional[PerturbationVector] = None,
    start: Optional[DualPoint] = None,
) -> QuadraticStep:
    """
    Solve the proximally regularized saddle problem around y_k.

    The inner minimization is (G + ρI)y = F + δ + ρy_k; the dual ascent runs
    over the relaxed cone G + μI ⪰ 0.

    Args:
        inst: problem instance
        cfg: solver configuration
        y_k: proximal center
        rho: proximal weight
        mu: cone relaxation, 0 < mu < rho
        delta: linear perturbation
        start: optional warm start (the previous step's dual)

    Returns:
        QuadraticStep with the recovered positions and dual

    Raises:
        InvalidConfigError: If not rho > mu > 0
    """
    if not rho > mu > 0:
        raise InvalidConfigError(f"need rho > mu > 0, got rho={rho}, mu={mu}")
    y_k = as_position_vector(inst, y_k, name="y_k")
    if delta is not None:
        delta = as_position_vector(inst, delta, name="delta")
    tables = build_tables(inst)
    candidates = ([start] if start is not None else []) + [canonical_image(inst, y_k)]
    initial = _relaxed_start(inst, cfg, candidates, mu)
    result = ascend(inst, tables, cfg, initial, delta, rho=rho, mu=mu, center=y_k)
    logger.debug("proximal step rho=%.3e mu=%.3e ended %s after %d steps", rho, mu, result.status, result.iterations)
    return QuadraticStep(
        positions=result.positions,
        dual=result.dual,
        ascent=result,
        rho=rho,
        mu=mu,
        center=y_k,
    )
