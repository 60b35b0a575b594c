#!/usr/bin/env python3
"""
Closed-form oracle for the double-well problem with a linear term,

    Π(x) = ½α(½‖x‖² − λ)² − xᵀf,    Π^d(ς) = −‖f‖²/(2ς) − ½α⁻¹ς² − λς,

whose critical points are x = f/ς for the real roots of the dual algebraic
equation (α⁻¹ς + λ)ς² = ½‖f‖².
"""

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .errors import InvalidConfigError, NonFiniteError, PoleError

GLOBAL_MIN = "global-min"
LOCAL_MIN = "local-min"
LOCAL_MAX = "local-max"
BOUNDARY = "boundary"
INDETERMINATE = "indeterminate (n>1)"
DEGENERATE = "degenerate"


@dataclass(frozen=True)
class ScalarProblem:
    """Parameters α, λ and the linear term f ∈ R^n."""

    alpha: float
    lam: float
    f: np.ndarray

    def __post_init__(self):
        f = np.atleast_1d(np.asarray(self.f, dtype=float)).reshape(-1)
        if not np.all(np.isfinite(f)):
            raise NonFiniteError("f must be finite")
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise InvalidConfigError(f"alpha must be > 0, got {self.alpha}")
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise InvalidConfigError(f"lambda must be > 0, got {self.lam}")
        object.__setattr__(self, "f", f)

    @property
    def n(self) -> int:
        return self.f.shape[0]

    @property
    def f_norm2(self) -> float:
        return float(self.f @ self.f)


@dataclass
class ScalarCriticalSet:
    """Dual roots ς₁ ≥ ς₂ ≥ ς₃, their primal points and triality labels."""

    roots: List[float]
    points: List[Optional[np.ndarray]]
    classes: List[str]

    def global_minimizer(self) -> Optional[np.ndarray]:
        """The primal point of the positive root, if there is one."""
        for point, label in zip(self.points, self.classes):
            if label == GLOBAL_MIN:
                return point
        return None


def cubic_residual(p: ScalarProblem, sigma: float) -> float:
    """ς³ + αλς² − ½α‖f‖², the dual algebraic equation times α."""
    return sigma ** 3 + p.alpha * p.lam * sigma ** 2 - 0.5 * p.alpha * p.f_norm2


def _polish(b: float, d: float, root: float) -> float:
    value = root ** 3 + b * root ** 2 + d
    slope = 3.0 * root ** 2 + 2.0 * b * root
    if slope == 0:
        return root
    return root - value / slope


def _real_roots(b: float, d: float) -> List[float]:
    # x³ + b x² + d = 0 through x = t − b/3: t³ + pt + q = 0
    p = -b * b / 3.0
    q = 2.0 * b ** 3 / 27.0 + d
    if 4.0 * b ** 3 / 27.0 + d > 0:
        radius = 2.0 * math.sqrt(-p / 3.0)
        angle = math.acos(max(-1.0, min(1.0, 3.0 * q / (p * radius))))
        roots = [radius * math.cos((angle - 2.0 * math.pi * k) / 3.0) - b / 3.0 for k in range(3)]
    else:
        disc = math.sqrt(max(q * q / 4.0 + p ** 3 / 27.0, 0.0))
        roots = [math.copysign(abs(-q / 2.0 + disc) ** (1 / 3), -q / 2.0 + disc)
                 + math.copysign(abs(-q / 2.0 - disc) ** (1 / 3), -q / 2.0 - disc) - b / 3.0]
    return sorted((_polish(b, d, r) for r in roots), reverse=True)


def solve_cubic_dual(p: ScalarProblem) -> ScalarCriticalSet:
    """
    All real roots of (α⁻¹ς + λ)ς² = ½‖f‖² with their triality labels.

    A positive root gives the global minimizer. Of the negative roots the
    larger is a local minimizer in one dimension (indeterminate for n > 1)
    and the smaller a local maximizer. f = 0 gives the boundary double root
    0 and ς₃ = −αλ exactly.

    Args:
        p: scalar problem

    Returns:
        ScalarCriticalSet ordered ς₁ ≥ ς₂ ≥ ς₃
    """
    b = p.alpha * p.lam
    if p.f_norm2 == 0:
        return ScalarCriticalSet(
            roots=[0.0, 0.0, -b],
            points=[None, None, np.zeros(p.n)],
            classes=[BOUNDARY, BOUNDARY, LOCAL_MAX],
        )

    d = -0.5 * p.alpha * p.f_norm2
    roots = _real_roots(b, d)
    classes = []
    for index, root in enumerate(roots):
        if root > 0:
            classes.append(GLOBAL_MIN)
        elif len(roots) == 3 and math.isclose(roots[1], roots[2], rel_tol=1e-9):
            classes.append(DEGENERATE)
        elif index == 1:
            classes.append(LOCAL_MIN if p.n == 1 else INDETERMINATE)
        else:
            classes.append(LOCAL_MAX)
    points = [p.f / root for root in roots]
    return ScalarCriticalSet(roots=roots, points=points, classes=classes)


def eval_scalar_primal(p: ScalarProblem, x) -> float:
    """Π(x) = ½α(½‖x‖² − λ)² − xᵀf."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    well = 0.5 * float(x @ x) - p.lam
    return 0.5 * p.alpha * well ** 2 - float(x @ p.f)


def scalar_primal_gradient(p: ScalarProblem, x) -> np.ndarray:
    """∇Π(x) = α(½‖x‖² − λ)x − f."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return p.alpha * (0.5 * float(x @ x) - p.lam) * x - p.f


def eval_scalar_dual(p: ScalarProblem, sigma: float) -> float:
    """
    Π^d(ς) = −‖f‖²/(2ς) − ½α⁻¹ς² − λς.

    Raises:
        PoleError: If sigma is 0
    """
    if sigma == 0:
        raise PoleError("the dual function has a pole at ς = 0")
    return -p.f_norm2 / (2.0 * sigma) - 0.5 * sigma ** 2 / p.alpha - p.lam * sigma


def from_symmetric_pair(a: float, b: float, delta_x: float, weight: float = 1.0) -> ScalarProblem:
    """
    Scalar problem of one sensor on the bisector of anchors (0, ±a).

    With both distances b, weight q and perturbation δ = (δ_x, 0), the sensor
    objective restricted to the axis x = (t, 0) is ½·8q(½t² − λ)² − δ_x t with
    λ = ½(b² − a²).
    """
    return ScalarProblem(alpha=8.0 * weight, lam=0.5 * (b * b - a * a), f=np.array([delta_x]))
