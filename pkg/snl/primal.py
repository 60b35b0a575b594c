#!/usr/bin/env python3
"""
Primal least-squares objective, gradient, perturbed variant and quality metrics.

Positions travel as flat float arrays y = [x_1^1..x_1^d, ..., x_n^1..x_n^d].
The canonical measures ξ_ij = ‖x_i − x_j‖² and ε_ik = ‖x_i‖² − 2a_kᵀx_i are
computed by indexing; the nd×nd operator matrices are never built.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .errors import DimensionMismatchError
from .instance import GroundTruth, ProblemInstance

PositionVector = np.ndarray
PerturbationVector = np.ndarray


def as_position_vector(inst: ProblemInstance, y, name: str = "y") -> PositionVector:
    """
    Validate and copy a position-shaped vector.

    Raises:
        DimensionMismatchError: If the length is not n·d or entries are not finite
    """
    array = np.asarray(y, dtype=float).reshape(-1)
    if array.shape[0] != inst.n_vars:
        raise DimensionMismatchError(f"{name} has length {array.shape[0]}, instance needs {inst.n_vars}")
    if not np.all(np.isfinite(array)):
        raise DimensionMismatchError(f"{name} has non-finite entries")
    return array


def positions_matrix(inst: ProblemInstance, y: PositionVector) -> np.ndarray:
    """View y as an (n, d) matrix of sensor positions."""
    return np.asarray(y, dtype=float).reshape(inst.n_sensors, inst.dim)


def edge_differences(inst: ProblemInstance, y: PositionVector) -> Tuple[np.ndarray, np.ndarray]:
    """
    Difference vectors on every measured pair.

    Returns:
        (x_i − x_j over A_d, x_i − a_k over A_e), shapes (|A_d|, d) and (|A_e|, d)
    """
    x = positions_matrix(inst, y)
    sensor_diff = x[inst.sensor_i] - x[inst.sensor_j]
    anchor_diff = x[inst.anchor_i] - inst.anchors[inst.anchor_k]
    return sensor_diff, anchor_diff


def canonical_measures(inst: ProblemInstance, y: PositionVector) -> Tuple[np.ndarray, np.ndarray]:
    """
    Canonical measures of a placement.

    Returns:
        (ξ_ij = ‖x_i − x_j‖², ε_ik = ‖x_i‖² − 2a_kᵀx_i)
    """
    y = as_position_vector(inst, y)
    x = positions_matrix(inst, y)
    sensor_diff, _ = edge_differences(inst, y)
    xi = np.einsum("ed,ed->e", sensor_diff, sensor_diff)
    xa = x[inst.anchor_i]
    eps = np.einsum("ed,ed->e", xa, xa) - 2.0 * np.einsum("ed,ed->e", inst.anchors[inst.anchor_k], xa)
    return xi, eps


def squared_residuals(inst: ProblemInstance, y: PositionVector) -> Tuple[np.ndarray, np.ndarray]:
    """
    Squared-distance residuals ‖x_i − x_j‖² − d_ij² and ‖x_i − a_k‖² − e_ik².
    """
    sensor_diff, anchor_diff = edge_differences(inst, y)
    sensor_res = np.einsum("ed,ed->e", sensor_diff, sensor_diff) - inst.sensor_dist ** 2
    anchor_res = np.einsum("ed,ed->e", anchor_diff, anchor_diff) - inst.anchor_dist ** 2
    return sensor_res, anchor_res


def eval_objective(inst: ProblemInstance, y: PositionVector) -> float:
    """
    Primal objective Π(y) = Σ ½w(‖x_i−x_j‖²−d²)² + Σ ½q(‖x_i−a_k‖²−e²)².

    The edge terms are accumulated with compensated summation.

    Raises:
        DimensionMismatchError: If y does not match the instance
    """
    y = as_position_vector(inst, y)
    sensor_res, anchor_res = squared_residuals(inst, y)
    terms = np.concatenate([0.5 * inst.sensor_weight * sensor_res ** 2, 0.5 * inst.anchor_weight * anchor_res ** 2])
    return math.fsum(terms.tolist())


def eval_gradient(inst: ProblemInstance, y: PositionVector) -> np.ndarray:
    """
    Gradient of Π, summed over the edges incident to each sensor.

    ∂Π/∂x_i = Σ_j 2w_ij r_ij (x_i − x_j) + Σ_k 2q_ik r_ik (x_i − a_k),
    with r the squared-distance residuals.
    """
    y = as_position_vector(inst, y)
    sensor_diff, anchor_diff = edge_differences(inst, y)
    sensor_res, anchor_res = squared_residuals(inst, y)

    sensor_force = (2.0 * inst.sensor_weight * sensor_res)[:, None] * sensor_diff
    anchor_force = (2.0 * inst.anchor_weight * anchor_res)[:, None] * anchor_diff
    grad = np.zeros((inst.n_sensors, inst.dim))
    np.add.at(grad, inst.sensor_i, sensor_force)
    np.add.at(grad, inst.sensor_j, -sensor_force)
    np.add.at(grad, inst.anchor_i, anchor_force)
    return grad.reshape(-1)


def eval_perturbed_objective(inst: ProblemInstance, y: PositionVector, delta: Optional[PerturbationVector] = None) -> float:
    """
    Linearly perturbed objective Π_δ(y) = Π(y) − δᵀy.

    A missing delta is the zero perturbation.
    """
    y = as_position_vector(inst, y)
    if delta is None:
        return eval_objective(inst, y)
    delta = as_position_vector(inst, delta, name="delta")
    return math.fsum([eval_objective(inst, y), -math.fsum((delta * y).tolist())])


def rmsd(truth: GroundTruth, computed: PositionVector) -> float:
    """
    Root mean square distance (1/n Σ‖x̂_i − x̄_i‖²)^½.

    Raises:
        DimensionMismatchError: If the sizes differ
    """
    expected = truth.positions
    computed = np.asarray(computed, dtype=float).reshape(-1)
    if computed.shape[0] != expected.size:
        raise DimensionMismatchError(f"computed positions have length {computed.shape[0]}, truth has {expected.size}")
    offsets = computed.reshape(expected.shape) - expected
    return math.sqrt(math.fsum(np.einsum("nd,nd->n", offsets, offsets).tolist()) / expected.shape[0])


@dataclass(frozen=True)
class EdgeResidual:
    """Achieved versus measured distance on one edge (1-based endpoints)."""

    kind: str
    first: int
    second: int
    measured: float
    achieved: float

    @property
    def residual(self) -> float:
        """Achieved minus measured distance."""
        return self.achieved - self.measured

    def label(self) -> str:
        if self.kind == "sensor":
            return f"‖x{self.first} − x{self.second}‖"
        return f"‖x{self.first} − a{self.second}‖"


def residual_report(inst: ProblemInstance, y: PositionVector) -> List[EdgeResidual]:
    """
    Per-edge achieved distances, sensor edges first, in instance order.

    Raises:
        DimensionMismatchError: If y does not match the instance
    """
    y = as_position_vector(inst, y)
    sensor_diff, anchor_diff = edge_differences(inst, y)
    sensor_len = np.linalg.norm(sensor_diff, axis=1)
    anchor_len = np.linalg.norm(anchor_diff, axis=1)
    rows = [
        EdgeResidual("sensor", int(i) + 1, int(j) + 1, float(d), float(length))
        for i, j, d, length in zip(inst.sensor_i, inst.sensor_j, inst.sensor_dist, sensor_len)
    ]
    rows.extend(
        EdgeResidual("anchor", int(i) + 1, int(k) + 1, float(e), float(length))
        for i, k, e, length in zip(inst.anchor_i, inst.anchor_k, inst.anchor_dist, anchor_len)
    )
    return rows
