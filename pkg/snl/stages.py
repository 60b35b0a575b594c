#!/usr/bin/env python3
"""
Stages of the perturbation ladder.
Each stage implements its own way of looking for an interior critical point.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from .ascent import CRITICAL, MAX_ITERS, AscentResult, SolverConfig, maximize_dual, solve_quadratic_step
from .dual import CoefficientTables, DualPoint
from .errors import InvalidConfigError
from .instance import ProblemInstance
from .primal import PerturbationVector, eval_objective, eval_perturbed_objective

logger = logging.getLogger(__name__)

# interior proximal steps taken at a restored ρ before it decays again
HOLD_STEPS = 3


@dataclass
class StageOutcome:
    """What one stage produced: a certified pair on success, its last pair otherwise."""

    stage: str
    success: bool
    positions: Optional[np.ndarray] = None
    dual: Optional[DualPoint] = None
    dual_value: Optional[float] = None
    gradient_norm: Optional[float] = None
    delta: Optional[np.ndarray] = None
    rho: float = 0.0
    mu: float = 0.0
    y_anchor: Optional[np.ndarray] = None
    iterations: int = 0
    exhausted: bool = False
    details: Dict[str, Any] = field(default_factory=dict)

    def primal_value(self, inst: ProblemInstance) -> Optional[float]:
        """Objective of the problem this stage certifies, at its positions."""
        if self.positions is None:
            return None
        value = eval_perturbed_objective(inst, self.positions, self.delta)
        if self.rho:
            offset = self.positions - self.y_anchor
            value = math.fsum([value, 0.5 * self.rho * float(offset @ offset)])
        return value

    def gap(self, inst: ProblemInstance) -> float:
        """Primal minus dual value (inf when the pair is incomplete)."""
        primal = self.primal_value(inst)
        if primal is None or self.dual_value is None:
            return math.inf
        return primal - self.dual_value


class LadderContext:
    """State shared by the stages of one solve."""

    def __init__(self, inst: ProblemInstance, cfg: SolverConfig, tables: CoefficientTables, delta: Optional[PerturbationVector]):
        self.inst = inst
        self.cfg = cfg
        self.tables = tables
        self.delta = delta
        self.best_positions: Optional[np.ndarray] = None
        self.best_objective = math.inf
        self.pinned: Optional[np.ndarray] = None

    def offer(self, positions: Optional[np.ndarray], objective: Optional[float] = None) -> None:
        """Keep positions if they have the lowest unperturbed objective so far."""
        if positions is None:
            return
        if objective is None:
            objective = eval_objective(self.inst, positions)
        if objective < self.best_objective:
            self.best_objective = objective
            self.best_positions = np.array(positions, dtype=float, copy=True)

    def pin(self, positions: np.ndarray) -> None:
        """Start later stages from these positions instead of the best iterate."""
        self.pinned = np.array(positions, dtype=float, copy=True)

    def starting_positions(self) -> np.ndarray:
        """Pinned positions, else the best positions so far, else every sensor at the anchor centroid."""
        if self.pinned is not None:
            return self.pinned.copy()
        if self.best_positions is not None:
            return self.best_positions.copy()
        centroid = self.inst.anchors.mean(axis=0) if self.inst.n_anchors else np.zeros(self.inst.dim)
        return np.tile(centroid, self.inst.n_sensors)


class PerturbationStage(ABC):
    """Abstract base class for ladder stages."""

    name = "stage"

    @abstractmethod
    def run(self, context: LadderContext) -> StageOutcome:
        """
        Look for an interior critical point.

        Args:
            context: shared solve state

        Returns:
            StageOutcome
        """
        pass


class AscentStage(PerturbationStage):
    """Single dual ascent over S_a⁺ with a fixed δ."""

    def __init__(self, delta: Optional[PerturbationVector] = None):
        self.delta = delta

    def run(self, context: LadderContext) -> StageOutcome:
        result: AscentResult = maximize_dual(context.inst, context.cfg, self.delta)
        context.offer(result.best_positions, result.best_objective)
        return StageOutcome(
            stage=self.name,
            success=result.status == CRITICAL,
            positions=result.positions,
            dual=result.dual,
            dual_value=result.value,
            gradient_norm=result.gradient_norm,
            delta=self.delta,
            iterations=result.iterations,
            exhausted=result.status == MAX_ITERS,
            details={"ascent": result.status},
        )


class UnperturbedStage(AscentStage):
    """Maximize Π^d with δ = 0."""

    name = "none"

    def __init__(self):
        super().__init__(None)


class LinearStage(AscentStage):
    """Maximize Π^d_δ for the configured linear perturbation."""

    name = "linear"


class QuadraticStage(PerturbationStage):
    """
    Proximal outer loop: y_{k+1} from the saddle problem around y_k.

    ρ is restored (ρ / rho_decay) after a step without an interior critical
    point and then held for HOLD_STEPS interior steps before decaying again.
    Convergence only counts once ρ is back at or below rho0.
    """

    name = "quadratic"

    def __init__(self, delta: Optional[PerturbationVector] = None):
        self.delta = delta

    def run(self, context: LadderContext) -> StageOutcome:
        inst, cfg = context.inst, context.cfg
        y_k = context.starting_positions()
        rho = cfg.rho0
        hold = 0
        warm: Optional[DualPoint] = None
        last = None
        iterations = 0
        steps: List[float] = []

        for outer in range(cfg.outer_max):
            mu = cfg.mu_ratio * rho
            step = solve_quadratic_step(inst, cfg, y_k, rho, mu, self.delta, start=warm)
            iterations += step.ascent.iterations
            if not step.interior:
                logger.debug("outer %d: no interior point at rho=%.3e, restoring", outer, rho)
                rho /= cfg.rho_decay
                hold = HOLD_STEPS
                warm = None
                if rho > cfg.rho_max:
                    break
                continue

            last = step
            context.offer(step.positions)
            move = float(np.linalg.norm(step.positions - y_k))
            steps.append(move)
            logger.debug("outer %d: rho=%.3e |y_{k+1} − y_k| = %.3e", outer, rho, move)
            if move <= cfg.outer_tol * (1.0 + float(np.linalg.norm(step.positions))):
                if rho > cfg.rho0:
                    logger.warning("proximal iteration settled at rho=%.3e > rho0; no unperturbed certificate", rho)
                    return self._outcome(step, False, iterations, steps)
                return self._outcome(step, True, iterations, steps)
            y_k = step.positions
            warm = step.dual
            if hold:
                hold -= 1
            if not hold:
                rho *= cfg.rho_decay

        logger.warning("quadratic stage stopped after %d outer iterations without converging", cfg.outer_max)
        if last is None:
            return StageOutcome(stage=self.name, success=False, delta=self.delta, iterations=iterations,
                                details={"outer_steps": steps})
        return self._outcome(last, False, iterations, steps, exhausted=True)

    def _outcome(self, step, success: bool, iterations: int, steps: List[float], exhausted: bool = False) -> StageOutcome:
        return StageOutcome(
            stage=self.name,
            success=success,
            positions=step.positions,
            dual=step.dual,
            dual_value=step.ascent.value,
            gradient_norm=step.ascent.gradient_norm,
            delta=self.delta,
            rho=step.rho,
            mu=step.mu,
            y_anchor=step.center,
            iterations=iterations,
            exhausted=exhausted,
            details={"outer_steps": steps},
        )


def create_stage(name: str, delta: Optional[PerturbationVector] = None) -> PerturbationStage:
    """
    Factory function to create a ladder stage.

    Args:
        name: "none", "linear" or "quadratic"
        delta: linear perturbation used by the stage

    Returns:
        PerturbationStage instance

    Raises:
        InvalidConfigError: If the name is unknown, or linear without δ
    """
    if name == "none":
        return UnperturbedStage()
    elif name == "linear":
        if delta is None:
            raise InvalidConfigError("linear stage needs a nonzero delta")
        return LinearStage(delta)
    elif name == "quadratic":
        return QuadraticStage(delta)
    else:
        raise InvalidConfigError(f"Unknown stage: {name}")


def build_ladder(cfg: SolverConfig, delta: Optional[PerturbationVector]) -> List[PerturbationStage]:
    """
    Stages to try in order.

    A forced δ skips the unperturbed attempt and stays on through the
    quadratic stage; otherwise the quadratic stage runs unperturbed.
    """
    if cfg.force_delta and delta is not None:
        return [create_stage("linear", delta), create_stage("quadratic", delta)]
    ladder = [create_stage("none")]
    if delta is not None:
        ladder.append(create_stage("linear", delta))
    ladder.append(create_stage("quadratic"))
    return ladder
