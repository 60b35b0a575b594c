#!/usr/bin/env python3
"""
Canonical dual of the localization objective.

For dual variables σ on the sensor edges and ς on the anchor edges:

    G(σ, ς)  block (i, i) = 2(Σ_j σ_ij + Σ_k ς_ik)·I_d, block (i, j) = −2σ_ij·I_d
    F(ς)     entry (i, α) = Σ_k 2 a_k^α ς_ik  (+ δ when perturbed)
    Π^d      = −½FᵀG⁻¹F − ½Σw⁻¹σ² − ½Σq⁻¹ς² − Σd²σ + Σ(‖a_k‖² − e²)ς

The proximal variant replaces G by G + ρI and F by F + ρ·y_k and adds ½ρ‖y_k‖².
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConeInfeasibleError, DimensionMismatchError, NonFiniteError
from .factor import (
    DENSE_LIMIT,
    Matrix,
    SymmetricFactor,
    create_factor,
    dominates,
    pd_tolerance,
    shifted,
    smallest_eigenvalue,
    symmetric_splu,
)
from .instance import ProblemInstance
from .primal import (
    PerturbationVector,
    PositionVector,
    as_position_vector,
    edge_differences,
    eval_perturbed_objective,
    squared_residuals,
)

logger = logging.getLogger(__name__)

# above this many edges the Newton system keeps the Woodbury form
DENSE_NEWTON_LIMIT = 1500


@dataclass(frozen=True, eq=False)
class DualPoint:
    """Dual variables σ_ij over the sensor edges and ς_ik over the anchor edges."""

    sigma_d: np.ndarray
    sigma_e: np.ndarray

    def flat(self) -> np.ndarray:
        """Concatenation [σ, ς]."""
        return np.concatenate([self.sigma_d, self.sigma_e])

    @classmethod
    def from_flat(cls, inst: ProblemInstance, vector) -> "DualPoint":
        vector = np.asarray(vector, dtype=float).reshape(-1)
        if vector.shape[0] != inst.n_edges:
            raise DimensionMismatchError(f"dual has length {vector.shape[0]}, instance needs {inst.n_edges}")
        return cls(vector[: inst.n_sensor_edges].copy(), vector[inst.n_sensor_edges:].copy())

    @classmethod
    def filled(cls, inst: ProblemInstance, sensor_value: float, anchor_value: float) -> "DualPoint":
        return cls(np.full(inst.n_sensor_edges, float(sensor_value)), np.full(inst.n_anchor_edges, float(anchor_value)))

    def blend(self, other: "DualPoint", theta: float) -> "DualPoint":
        """(1 − θ)·self + θ·other."""
        return DualPoint(
            (1.0 - theta) * self.sigma_d + theta * other.sigma_d,
            (1.0 - theta) * self.sigma_e + theta * other.sigma_e,
        )

    def to_dict(self):
        return {"sigma_d": self.sigma_d.tolist(), "sigma_e": self.sigma_e.tolist()}

    @classmethod
    def from_dict(cls, data) -> "DualPoint":
        return cls(np.asarray(data["sigma_d"], dtype=float), np.asarray(data["sigma_e"], dtype=float))


def as_dual_point(inst: ProblemInstance, dual: DualPoint) -> DualPoint:
    """
    Check a dual point against the instance.

    Raises:
        DimensionMismatchError: If the lengths do not match |A_d| and |A_e|
        NonFiniteError: If any entry is not finite
    """
    if dual.sigma_d.shape != (inst.n_sensor_edges,) or dual.sigma_e.shape != (inst.n_anchor_edges,):
        raise DimensionMismatchError(
            f"dual sized ({dual.sigma_d.shape[0]}, {dual.sigma_e.shape[0]}), "
            f"instance needs ({inst.n_sensor_edges}, {inst.n_anchor_edges})"
        )
    if not (np.all(np.isfinite(dual.sigma_d)) and np.all(np.isfinite(dual.sigma_e))):
        raise NonFiniteError("dual point has non-finite entries")
    return dual


def canonical_image(inst: ProblemInstance, y: PositionVector) -> DualPoint:
    """
    Dual point paired with a placement by the canonical duality relations.

    σ_ij = w_ij(‖x_i − x_j‖² − d_ij²), ς_ik = q_ik(‖x_i − a_k‖² − e_ik²).
    """
    sensor_res, anchor_res = squared_residuals(inst, as_position_vector(inst, y))
    return DualPoint(inst.sensor_weight * sensor_res, inst.anchor_weight * anchor_res)


@dataclass(frozen=True)
class CoefficientTables:
    """Per-edge coefficient vectors of the dual function."""

    d2: np.ndarray
    e2: np.ndarray
    a_norm2: np.ndarray
    w_inv: np.ndarray
    q_inv: np.ndarray


def build_tables(inst: ProblemInstance) -> CoefficientTables:
    """Coefficient tables (d², e², ‖a_k‖² per anchor edge, 1/w, 1/q) of an instance."""
    anchors = inst.anchors[inst.anchor_k]
    return CoefficientTables(
        d2=inst.sensor_dist ** 2,
        e2=inst.anchor_dist ** 2,
        a_norm2=np.einsum("ed,ed->e", anchors, anchors),
        w_inv=1.0 / inst.sensor_weight,
        q_inv=1.0 / inst.anchor_weight,
    )


class AssembledDual:
    """Value of G(σ, ς) and F(ς) (+ δ) at one dual point."""

    def __init__(self, G: Matrix, F: np.ndarray):
        self.G = G
        self.F = np.asarray(F, dtype=float)
        self._factor: Optional[SymmetricFactor] = None

    @property
    def dense(self) -> bool:
        return not sp.issparse(self.G)

    def factor(self) -> SymmetricFactor:
        """Positive definite factor of G, computed once."""
        if self._factor is None:
            self._factor = create_factor(self.G, require_pd=True)
        return self._factor


def edge_incidence(inst: ProblemInstance) -> sp.csc_matrix:
    """
    Node-by-edge incidence B, n × (|A_d| + |A_e|).

    Column (i, j) is e_i − e_j, column (i, k) is e_i, so G = 2·B·diag(σ, ς)·Bᵀ ⊗ I_d.
    """
    n_sensor, n_anchor = inst.n_sensor_edges, inst.n_anchor_edges
    rows = np.concatenate([inst.sensor_i, inst.sensor_j, inst.anchor_i])
    cols = np.concatenate([np.arange(n_sensor), np.arange(n_sensor), n_sensor + np.arange(n_anchor)])
    values = np.concatenate([np.ones(n_sensor), -np.ones(n_sensor), np.ones(n_anchor)])
    return sp.csc_matrix((values, (rows, cols)), shape=(inst.n_sensors, inst.n_edges))


def node_matrix(inst: ProblemInstance, dual: DualPoint) -> sp.csr_matrix:
    """The n × n matrix G_n with G(σ, ς) = G_n ⊗ I_d, filled symmetrically."""
    n = inst.n_sensors
    sigma, varsigma = dual.sigma_d, dual.sigma_e
    node_weight = np.zeros(n)
    np.add.at(node_weight, inst.sensor_i, sigma)
    np.add.at(node_weight, inst.sensor_j, sigma)
    np.add.at(node_weight, inst.anchor_i, varsigma)

    rows = np.concatenate([np.arange(n), inst.sensor_i, inst.sensor_j])
    cols = np.concatenate([np.arange(n), inst.sensor_j, inst.sensor_i])
    values = np.concatenate([2.0 * node_weight, -2.0 * sigma, -2.0 * sigma])
    return sp.coo_matrix((values, (rows, cols)), shape=(n, n)).tocsr()


def assemble(inst: ProblemInstance, dual: DualPoint, delta: Optional[PerturbationVector] = None) -> AssembledDual:
    """
    Assemble G(σ, ς) and F(ς) directly from the block rule.

    G is the node matrix expanded with ⊗ I_d, so it is exactly symmetric.
    Dense storage is used up to DENSE_LIMIT unknowns.

    Args:
        inst: problem instance
        dual: dual point sized to the instance
        delta: optional linear perturbation added to F

    Returns:
        AssembledDual
    """
    dual = as_dual_point(inst, dual)
    n, d = inst.n_sensors, inst.dim
    nodes = node_matrix(inst, dual)
    if inst.n_vars <= DENSE_LIMIT:
        G = np.kron(nodes.toarray(), np.eye(d))
    else:
        G = sp.kron(nodes, sp.identity(d), format="csc")

    F = np.zeros((n, d))
    np.add.at(F, inst.anchor_i, 2.0 * dual.sigma_e[:, None] * inst.anchors[inst.anchor_k])
    F = F.reshape(-1)
    if delta is not None:
        F = F + as_position_vector(inst, delta, name="delta")
    return AssembledDual(G, F)


@dataclass(frozen=True)
class ConeStatus:
    """Outcome of a cone membership test for G + μI."""

    member: bool
    margin: float
    shift_used: float


def cone_membership(G: Matrix, mu: float = 0.0, floor: Optional[float] = None) -> ConeStatus:
    """
    Test G + μI ⪰ τ·I by attempted factorization of G + (μ − τ)I.

    Args:
        G: symmetric matrix
        mu: relaxation shift (0 for the strict cone S_a⁺)
        floor: tolerance τ; defaults to τ_pd = 1e−10·(1 + max |diag G|)

    Returns:
        ConeStatus with the smallest eigenvalue of G + μI as margin

    Raises:
        NonFiniteError: If G has non-finite entries
    """
    data = G.data if sp.issparse(G) else G
    if not np.all(np.isfinite(data)):
        raise NonFiniteError("G has non-finite entries")
    tolerance = pd_tolerance(G) if floor is None else floor
    member = dominates(shifted(G, mu), tolerance)
    margin = smallest_eigenvalue(G) + mu
    return ConeStatus(member=member, margin=margin, shift_used=mu)


@dataclass
class DualEvaluation:
    """Dual value with the recovered placement ȳ and the data behind it."""

    value: float
    positions: np.ndarray
    trusted: bool
    assembled: AssembledDual
    rho: float = 0.0


def _dual_tail(tables: CoefficientTables, dual: DualPoint) -> float:
    sigma, varsigma = dual.sigma_d, dual.sigma_e
    return math.fsum(
        np.concatenate([
            -0.5 * tables.w_inv * sigma ** 2,
            -0.5 * tables.q_inv * varsigma ** 2,
            -tables.d2 * sigma,
            (tables.a_norm2 - tables.e2) * varsigma,
        ]).tolist()
    )


def evaluate_dual(
    inst: ProblemInstance,
    tables: CoefficientTables,
    dual: DualPoint,
    delta: Optional[PerturbationVector] = None,
    rho: float = 0.0,
    center: Optional[PositionVector] = None,
) -> DualEvaluation:
    """
    Evaluate the (optionally proximal) dual and recover ȳ in one solve.

    Args:
        inst: problem instance
        tables: coefficient tables of inst
        dual: dual point
        delta: linear perturbation
        rho: proximal weight ρ >= 0
        center: proximal center y_k (required when rho > 0)

    Returns:
        DualEvaluation; ``trusted`` is False when the system is near singular

    Raises:
        NonsingularityError: If G + ρI is singular
    """
    asm = assemble(inst, dual, delta)
    matrix = shifted(asm.G, rho)
    rhs = asm.F
    proximal_constant = 0.0
    if rho:
        center = as_position_vector(inst, center, name="center")
        rhs = rhs + rho * center
        proximal_constant = 0.5 * rho * float(center @ center)
    factor = create_factor(matrix, require_pd=False)
    positions = factor.solve(rhs)
    value = math.fsum([-0.5 * float(rhs @ positions), proximal_constant, _dual_tail(tables, dual)])
    if not factor.trusted:
        logger.debug("dual evaluated at a near-singular G; value flagged untrusted")
    return DualEvaluation(value=value, positions=positions, trusted=factor.trusted, assembled=asm, rho=rho)


def eval_dual(
    inst: ProblemInstance,
    tables: CoefficientTables,
    dual: DualPoint,
    delta: Optional[PerturbationVector] = None,
) -> float:
    """
    Canonical dual value Π^d(σ, ς) (Π^d_δ when delta is given).

    Raises:
        NonsingularityError: If G is singular
    """
    return evaluate_dual(inst, tables, dual, delta).value


def eval_proximal_dual(
    inst: ProblemInstance,
    tables: CoefficientTables,
    dual: DualPoint,
    rho: float,
    center: PositionVector,
    delta: Optional[PerturbationVector] = None,
) -> float:
    """Proximal dual Π^d_ρ(σ, ς; y_k) of the quadratically perturbed problem."""
    return evaluate_dual(inst, tables, dual, delta, rho=rho, center=center).value


def residual_gradient(inst: ProblemInstance, tables: CoefficientTables, dual: DualPoint, positions: np.ndarray) -> DualPoint:
    """
    Envelope gradient of the dual at the recovered placement ȳ.

    ∂/∂σ_ij = ‖x̄_i − x̄_j‖² − d_ij² − σ_ij/w_ij, ∂/∂ς_ik = ‖x̄_i − a_k‖² − e_ik² − ς_ik/q_ik.
    """
    sensor_res, anchor_res = squared_residuals(inst, positions)
    return DualPoint(sensor_res - tables.w_inv * dual.sigma_d, anchor_res - tables.q_inv * dual.sigma_e)


def eval_dual_gradient(
    inst: ProblemInstance,
    tables: CoefficientTables,
    dual: DualPoint,
    delta: Optional[PerturbationVector] = None,
) -> DualPoint:
    """
    Gradient of Π^d by the envelope formula at ȳ = G⁻¹F.

    Raises:
        NonsingularityError: If G is singular
    """
    evaluation = evaluate_dual(inst, tables, dual, delta)
    return residual_gradient(inst, tables, dual, evaluation.positions)


def recover_primal(asm: AssembledDual) -> PositionVector:
    """
    Solve G ȳ = F with a symmetric positive definite factorization.

    Raises:
        ConeInfeasibleError: If G is indefinite beyond tolerance
        NonsingularityError: If G is singular
    """
    return asm.factor().solve(asm.F)


def eval_total_complementary(
    inst: ProblemInstance,
    tables: CoefficientTables,
    y: PositionVector,
    dual: DualPoint,
    delta: Optional[PerturbationVector] = None,
    rho: float = 0.0,
    center: Optional[PositionVector] = None,
) -> float:
    """
    Total complementary function
    Ξ(y, σ, ς) = ½yᵀGy − Fᵀy − ½Σw⁻¹σ² − ½Σq⁻¹ς² − Σd²σ + Σ(‖a_k‖² − e²)ς,
    plus ½ρ‖y − y_k‖² for the proximal variant.
    """
    y = as_position_vector(inst, y)
    asm = assemble(inst, dual, delta)
    parts = [0.5 * float(y @ (asm.G @ y)), -float(asm.F @ y), _dual_tail(tables, dual)]
    if rho:
        offset = y - as_position_vector(inst, center, name="center")
        parts.append(0.5 * rho * float(offset @ offset))
    return math.fsum(parts)


def duality_gap(
    inst: ProblemInstance,
    y: PositionVector,
    dual: DualPoint,
    delta: Optional[PerturbationVector] = None,
) -> float:
    """Π_δ(y) − Π^d_δ(σ, ς); nonnegative for dual points in S_a⁺."""
    return eval_perturbed_objective(inst, y, delta) - eval_dual(inst, build_tables(inst), dual, delta)


def edge_matrix(inst: ProblemInstance, positions: np.ndarray) -> sp.csc_matrix:
    """
    Sparse (n·d) × (|A_d| + |A_e|) matrix C of edge difference vectors at ȳ.

    Column (i, j) holds x̄_i − x̄_j at sensor i and its negative at sensor j;
    column (i, k) holds x̄_i − a_k at sensor i.
    """
    d = inst.dim
    sensor_diff, anchor_diff = edge_differences(inst, positions)
    n_sensor = inst.n_sensor_edges
    offsets = np.arange(d)
    rows = np.concatenate([
        (inst.sensor_i[:, None] * d + offsets).reshape(-1),
        (inst.sensor_j[:, None] * d + offsets).reshape(-1),
        (inst.anchor_i[:, None] * d + offsets).reshape(-1),
    ])
    cols = np.concatenate([
        np.repeat(np.arange(n_sensor), d),
        np.repeat(np.arange(n_sensor), d),
        np.repeat(n_sensor + np.arange(inst.n_anchor_edges), d),
    ])
    values = np.concatenate([sensor_diff.reshape(-1), -sensor_diff.reshape(-1), anchor_diff.reshape(-1)])
    return sp.csc_matrix((values, (rows, cols)), shape=(inst.n_vars, inst.n_edges))


@dataclass(frozen=True, eq=False)
class ConeBarrier:
    """
    Log-determinant barrier d·log det(G_n + μI) of the relaxed cone at a dual point.

    With P = Bᵀ(G_n + μI)⁻¹B its gradient over [σ, ς] is 2d·diag(P) and its
    Hessian is −4d·(P ∘ P).
    """

    logdet: float
    leverage: np.ndarray
    coupling: Optional[np.ndarray] = None
    dim: int = 2

    @property
    def gradient(self) -> np.ndarray:
        return 2.0 * self.dim * self.leverage


def cone_barrier(inst: ProblemInstance, dual: DualPoint, mu: float = 0.0, full: bool = True) -> ConeBarrier:
    """
    Evaluate the cone barrier at a dual point.

    Args:
        inst: problem instance
        dual: dual point with G + μI ≻ 0
        mu: cone relaxation
        full: also form the full edge coupling matrix P (m × m)

    Returns:
        ConeBarrier

    Raises:
        ConeInfeasibleError: If G_n + μI is not positive definite
    """
    incidence = edge_incidence(inst)
    nodes = shifted(node_matrix(inst, dual), mu)
    if inst.n_sensors <= DENSE_LIMIT:
        nodes = nodes.toarray()
        try:
            factor = la.cho_factor(nodes, lower=True, check_finite=False)
        except la.LinAlgError:
            margin = smallest_eigenvalue(nodes)
            raise ConeInfeasibleError(f"G + μI is not positive definite (margin {margin:.3e})", margin=margin)
        dense_incidence = incidence.toarray()
        solved = la.cho_solve(factor, dense_incidence, check_finite=False)
        logdet = 2.0 * float(np.sum(np.log(np.diag(factor[0]))))
    else:
        lu = None
        try:
            lu = symmetric_splu(nodes)
        except RuntimeError:
            pass
        pivots = None if lu is None else lu.U.diagonal()
        if pivots is None or not np.all(pivots > 0):
            margin = smallest_eigenvalue(nodes)
            raise ConeInfeasibleError(f"G + μI is not positive definite (margin {margin:.3e})", margin=margin)
        dense_incidence = incidence.toarray()
        solved = lu.solve(dense_incidence)
        logdet = float(np.sum(np.log(pivots)))
    leverage = np.einsum("ne,ne->e", dense_incidence, solved)
    coupling = dense_incidence.T @ solved if full else None
    return ConeBarrier(logdet=inst.dim * logdet, leverage=leverage, coupling=coupling, dim=inst.dim)


def newton_direction(
    inst: ProblemInstance,
    evaluation: DualEvaluation,
    gradient,
    barrier: Optional[ConeBarrier] = None,
    tau: float = 0.0,
) -> np.ndarray:
    """
    Newton ascent direction p = (−H)⁻¹g for the dual, or for Π^d + τ·barrier.

    The dual Hessian is H = −4·Cᵀ(G + ρI)⁻¹C − diag(1/w, 1/q). With
    D⁻¹ = diag(w, q) and M = (G + ρI)/4 + C D⁻¹ Cᵀ, Woodbury gives
    p = D⁻¹g − D⁻¹Cᵀ M⁻¹ C D⁻¹g, one (n·d)×(n·d) solve per direction.

    The barrier adds 4dτ·(P ∘ P) to −H. When the barrier carries the full
    coupling matrix and G is dense the m × m system is solved directly;
    otherwise only the diagonal of P ∘ P enters D and Woodbury is kept.

    Args:
        inst: problem instance
        evaluation: dual evaluation at the current point
        gradient: ascent gradient, a DualPoint or a flat vector over [σ, ς]
        barrier: cone barrier at the current point
        tau: barrier weight

    Returns:
        Flat direction over [σ, ς]
    """
    g = gradient.flat() if isinstance(gradient, DualPoint) else np.asarray(gradient, dtype=float)
    C = edge_matrix(inst, evaluation.positions)
    weights = np.concatenate([inst.sensor_weight, inst.anchor_weight])
    kernel = shifted(evaluation.assembled.G, evaluation.rho)
    if barrier is not None and tau > 0:
        curvature = 4.0 * inst.dim * tau
        if barrier.coupling is not None and not sp.issparse(kernel):
            dense_C = C.toarray()
            kernel_factor = la.cho_factor(kernel, lower=True, check_finite=False)
            hessian = 4.0 * (dense_C.T @ la.cho_solve(kernel_factor, dense_C, check_finite=False))
            hessian += curvature * barrier.coupling ** 2
            hessian[np.diag_indices_from(hessian)] += 1.0 / weights
            return la.cho_solve(la.cho_factor(hessian, lower=True, check_finite=False), g, check_finite=False)
        weights = 1.0 / (1.0 / weights + curvature * barrier.leverage ** 2)

    scaled = weights * g
    coupling = (C.multiply(weights[None, :]) @ C.T)
    if sp.issparse(kernel):
        M = (kernel * 0.25 + coupling).tocsc()
        correction = spla.splu(M).solve(C @ scaled)
    else:
        M = 0.25 * kernel + coupling.toarray()
        correction = la.cho_solve(la.cho_factor(M, lower=True, check_finite=False), C @ scaled, check_finite=False)
    return scaled - weights * (C.T @ correction)
