#!/usr/bin/env python3
"""
Perturbation-ladder solver and offline verification of its certificates.

solve() runs the ladder (unperturbed, linear δ, proximal) until a stage finds
an interior critical point (a linear success under an automatic δ is kept
only if the proximal stage fails); verify() recomputes the certificate from a report.
"""

import logging
import math
import time
from typing import Optional

import numpy as np

from .ascent import SolverConfig, make_delta, maximize_dual, solve_quadratic_step  # noqa: F401
from .dual import assemble, build_tables, cone_membership, eval_total_complementary, evaluate_dual
from .errors import NoInteriorStartError, SNLError
from .instance import GroundTruth, ProblemInstance
from .primal import eval_objective, eval_perturbed_objective, rmsd
from .report import (
    CRITICAL_POINT,
    MAX_ITERS,
    NO_INTERIOR,
    PERTURBED_SOLUTION,
    TRIVIAL,
    CheckResult,
    SolveReport,
    VerificationRecord,
)
from .stages import LadderContext, StageOutcome, build_ladder

logger = logging.getLogger(__name__)


def _report_from(
    inst: ProblemInstance,
    cfg: SolverConfig,
    outcome: StageOutcome,
    status: str,
    truth: Optional[GroundTruth],
    iterations: int,
    diagnostics: dict,
) -> SolveReport:
    positions = outcome.positions
    return SolveReport(
        status=status,
        stage=outcome.stage,
        dim=inst.dim,
        positions=positions,
        dual_opt=outcome.dual,
        primal_value=outcome.primal_value(inst),
        dual_value=outcome.dual_value,
        objective=None if positions is None else eval_objective(inst, positions),
        rmsd=None if truth is None or positions is None else rmsd(truth, positions),
        iterations=iterations,
        gradient_norm=outcome.gradient_norm,
        delta=outcome.delta,
        rho=outcome.rho,
        mu=outcome.mu,
        y_anchor=outcome.y_anchor,
        config=cfg.to_dict(),
        diagnostics=diagnostics,
    )


def solve(
    inst: ProblemInstance,
    cfg: Optional[SolverConfig] = None,
    truth: Optional[GroundTruth] = None,
) -> SolveReport:
    """
    Localize the sensors of an instance.

    Args:
        inst: problem instance
        cfg: solver configuration (defaults when omitted)
        truth: optional ground truth, used only for the RMSD

    Returns:
        SolveReport; when every stage is exhausted the report carries the
        stage pair with the smallest gap and status no-interior-critical-point
        (or max-iters when the last stage ran out of iterations)
    """
    cfg = cfg or SolverConfig()
    started = time.perf_counter()
    if truth is not None:
        truth.check_matches(inst)

    if inst.n_edges == 0:
        logger.info("instance has no measured pairs; nothing to solve")
        return SolveReport(status=TRIVIAL, stage="none", dim=inst.dim, config=cfg.to_dict(),
                           wall_time_s=time.perf_counter() - started)

    delta = make_delta(inst, cfg)
    context = LadderContext(inst, cfg, build_tables(inst), delta)
    outcomes = []
    history = []
    iterations = 0
    # with an automatic δ a linear success is provisional and the quadratic stage runs unperturbed from it
    provisional_linear = not cfg.force_delta and cfg.delta_mode != "user"
    provisional: Optional[StageOutcome] = None
    try:
        for stage in build_ladder(cfg, delta):
            logger.info("trying stage %s", stage.name)
            outcome = stage.run(context)
            outcomes.append(outcome)
            iterations += outcome.iterations
            history.append({"stage": stage.name, "success": outcome.success, **outcome.details})
            if outcome.success and stage.name == "linear" and provisional_linear:
                logger.info("linear stage certified the perturbed problem; refining without δ")
                provisional = outcome
                context.pin(outcome.positions)
                continue
            if outcome.success:
                break
            logger.info("stage %s found no interior critical point", stage.name)
    except NoInteriorStartError as e:
        logger.warning("no interior start: %s", e)
        return SolveReport(
            status=NO_INTERIOR,
            stage="none",
            dim=inst.dim,
            iterations=iterations,
            config=cfg.to_dict(),
            diagnostics={"unanchored": e.unanchored, "stages": history},
            wall_time_s=time.perf_counter() - started,
        )

    diagnostics = {"stages": history}
    final = outcomes[-1]
    if final.success:
        status = CRITICAL_POINT if final.stage == "none" else PERTURBED_SOLUTION
        report = _report_from(inst, cfg, final, status, truth, iterations, diagnostics)
    elif provisional is not None:
        logger.info("quadratic stage did not converge; keeping the linear-stage certificate")
        report = _report_from(inst, cfg, provisional, PERTURBED_SOLUTION, truth, iterations, diagnostics)
    else:
        best = min(outcomes, key=lambda o: o.gap(inst))
        status = MAX_ITERS if final.exhausted else NO_INTERIOR
        logger.warning("all stages exhausted; reporting the %s stage pair with the smallest gap", best.stage)
        report = _report_from(inst, cfg, best, status, truth, iterations, diagnostics)
    report.wall_time_s = time.perf_counter() - started
    logger.info("solve finished: %r", report)
    return report


def verify(inst: ProblemInstance, report: SolveReport, tol: float = 1e-6) -> VerificationRecord:
    """
    Recompute the certificate behind a report.

    Checks, each relative to 1 + |primal|:
      gap: primal objective minus dual value
      complementary: primal, total complementary and dual values agree
      linear_residual: ‖(G + ρI)ȳ − (F + δ + ρy_k)‖ ≤ 1e−8·(1 + ‖F‖)
      cone: G + μI ⪰ 0

    Args:
        inst: problem instance the report was produced for
        report: solve report
        tol: tolerance of the value checks

    Returns:
        VerificationRecord (never raises on numerical failure)
    """
    if report.status == TRIVIAL:
        return VerificationRecord([], note="trivial instance")
    if report.positions is None or report.dual_opt is None:
        return VerificationRecord(
            [CheckResult("certificate", False, math.inf, tol)],
            note="report carries no primal-dual pair",
        )

    y = report.positions
    dual = report.dual_opt
    tables = build_tables(inst)
    center = report.y_anchor if report.rho else None
    try:
        evaluation = evaluate_dual(inst, tables, dual, report.delta, rho=report.rho, center=center)
        xi = eval_total_complementary(inst, tables, y, dual, report.delta, rho=report.rho, center=center)
        primal = eval_perturbed_objective(inst, y, report.delta)
    except (SNLError, ValueError) as e:
        return VerificationRecord([CheckResult("certificate", False, math.inf, tol)], note=str(e))

    if report.rho:
        offset = y - center
        primal += 0.5 * report.rho * float(offset @ offset)
    scale = 1.0 + abs(primal)
    gap = abs(primal - evaluation.value)
    spread = max(abs(primal - xi), abs(xi - evaluation.value))

    asm = assemble(inst, dual, report.delta)
    rhs = asm.F + (report.rho * center if report.rho else 0.0)
    lhs = asm.G @ y + report.rho * y
    residual = float(np.linalg.norm(lhs - rhs))
    residual_tol = 1e-8 * (1.0 + float(np.linalg.norm(asm.F)))

    cone = cone_membership(asm.G, mu=report.mu, floor=0.0)
    checks = [
        CheckResult("gap", gap <= tol * scale, gap, tol * scale),
        CheckResult("complementary", spread <= tol * scale, spread, tol * scale),
        CheckResult("linear_residual", residual <= residual_tol, residual, residual_tol),
        CheckResult("cone", cone.member, cone.margin, 0.0),
    ]
    record = VerificationRecord(checks)
    if not record.passed:
        logger.warning("verification failed: %s", ", ".join(record.failed()))
    return record
