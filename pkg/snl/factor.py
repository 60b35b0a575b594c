#!/usr/bin/env python3
"""
Symmetric factorizations behind every G(σ, ς) solve.

Dense storage is used up to DENSE_LIMIT unknowns and scipy.sparse above it;
both sides honour the same contract through the SymmetricFactor interface.
Positive definiteness is always decided by a factorization: Cholesky on the
dense side, a symmetric-mode sparse LU read through Sylvester's law of
inertia on the sparse side.
"""

import logging
import warnings
from abc import ABC, abstractmethod
from typing import Optional, Union

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConeInfeasibleError, NonsingularityError

logger = logging.getLogger(__name__)

DENSE_LIMIT = 4096

Matrix = Union[np.ndarray, sp.spmatrix]


def pd_tolerance(matrix: Matrix) -> float:
    """PD tolerance τ_pd = 1e−10·(1 + max |diag|)."""
    diag = matrix.diagonal()
    return 1e-10 * (1.0 + (float(np.max(np.abs(diag))) if diag.size else 0.0))


def shifted(matrix: Matrix, shift: float) -> Matrix:
    """matrix + shift·I without touching the input."""
    if shift == 0:
        return matrix
    if sp.issparse(matrix):
        return (matrix + shift * sp.identity(matrix.shape[0], format="csc")).tocsc()
    out = np.array(matrix, dtype=float, copy=True)
    out[np.diag_indices_from(out)] += shift
    return out


def smallest_eigenvalue(matrix: Matrix) -> float:
    """
    Smallest eigenvalue of a symmetric matrix (0 for an empty one).

    Sparse matrices go through ARPACK; when it does not converge the
    eigenvalues it did find are used, and failing those the dense solver.
    """
    size = matrix.shape[0]
    if size == 0:
        return 0.0
    if sp.issparse(matrix):
        try:
            value = spla.eigsh(matrix.tocsc(), k=1, which="SA", return_eigenvectors=False)
            return float(value[0])
        except spla.ArpackNoConvergence as e:
            if e.eigenvalues is not None and len(e.eigenvalues):
                logger.debug("ARPACK did not converge; using its partial eigenvalues")
                return float(np.min(e.eigenvalues))
            logger.debug("ARPACK did not converge; falling back to the dense solver")
            matrix = matrix.toarray()
    return float(la.eigvalsh(matrix, subset_by_index=[0, 0])[0])


def symmetric_splu(matrix: sp.spmatrix) -> Optional[spla.SuperLU]:
    """
    Sparse LU in symmetric mode with diagonal pivots only.

    Returns:
        The factor when no row pivoting was needed (so U's diagonal holds the
        LDLᵀ pivots of a symmetric permutation), None otherwise

    Raises:
        RuntimeError: If the matrix is exactly singular
    """
    lu = spla.splu(
        matrix.tocsc(),
        permc_spec="MMD_AT_PLUS_A",
        diag_pivot_thresh=0.0,
        options={"SymmetricMode": True},
    )
    if not np.array_equal(lu.perm_r, lu.perm_c):
        return None
    return lu


def dominates(matrix: Matrix, floor: float) -> bool:
    """
    Whether matrix ⪰ floor·I, decided by attempting to factor matrix − floor·I.

    On the sparse side the pivots of a symmetric LU must all be positive; if
    SuperLU had to pivot off the diagonal the eigenvalue route decides.
    """
    if matrix.shape[0] == 0:
        return False
    candidate = shifted(matrix, -floor)
    if sp.issparse(candidate):
        try:
            lu = symmetric_splu(candidate)
        except RuntimeError:
            return False
        if lu is None:
            return smallest_eigenvalue(matrix) >= floor
        return bool(np.all(lu.U.diagonal() > 0))
    try:
        la.cho_factor(candidate, lower=True, check_finite=False)
    except la.LinAlgError:
        return False
    return True


def singular_error(matrix: Matrix, detail: str) -> NonsingularityError:
    """NonsingularityError carrying the smallest eigenvalue of matrix as margin."""
    try:
        margin = smallest_eigenvalue(matrix)
    except (la.LinAlgError, ValueError):
        margin = None
    return NonsingularityError(f"G is singular: {detail}", margin=margin)


class SymmetricFactor(ABC):
    """A reusable factorization of a symmetric matrix."""

    def __init__(self, matrix: Matrix):
        self.size = matrix.shape[0]
        self.trusted = True

    @property
    @abstractmethod
    def positive_definite(self) -> bool:
        """Whether the factored matrix is known to be positive definite."""

    @abstractmethod
    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """
        Solve matrix · x = rhs.

        Args:
            rhs: vector or matrix of right-hand sides

        Returns:
            Solution with the shape of rhs
        """


class CholeskyFactor(SymmetricFactor):
    """Dense Cholesky factor of a positive definite matrix."""

    def __init__(self, matrix: np.ndarray):
        super().__init__(matrix)
        self._factor = la.cho_factor(matrix, lower=True, check_finite=False)
        self.trusted = dominates(matrix, pd_tolerance(matrix))

    @property
    def positive_definite(self) -> bool:
        return True

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return la.cho_solve(self._factor, rhs, check_finite=False)


class IndefiniteFactor(SymmetricFactor):
    """Dense LU factor for nonsingular G outside the cone."""

    def __init__(self, matrix: np.ndarray):
        super().__init__(matrix)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", la.LinAlgWarning)
            try:
                self._lu = la.lu_factor(matrix, check_finite=False)
            except la.LinAlgError as e:
                raise singular_error(matrix, str(e))
        # lu_factor only warns on an exact zero pivot
        if np.any(np.diag(self._lu[0]) == 0):
            raise singular_error(matrix, "zero pivot")
        if any(issubclass(w.category, la.LinAlgWarning) for w in caught):
            self.trusted = False

    @property
    def positive_definite(self) -> bool:
        return False

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return la.lu_solve(self._lu, rhs, check_finite=False)


class SparseFactor(SymmetricFactor):
    """Sparse LU factor used above DENSE_LIMIT unknowns."""

    def __init__(self, matrix: sp.spmatrix, positive_definite: bool):
        super().__init__(matrix)
        try:
            self._lu = spla.splu(matrix.tocsc())
        except RuntimeError as e:
            raise singular_error(matrix, str(e))
        self._pd = positive_definite

    @property
    def positive_definite(self) -> bool:
        return self._pd

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return self._lu.solve(np.asarray(rhs, dtype=float))


def create_factor(matrix: Matrix, require_pd: bool = True) -> SymmetricFactor:
    """
    Factory choosing the factorization for a symmetric matrix.

    Args:
        matrix: dense ndarray or scipy sparse matrix
        require_pd: raise unless the matrix is positive definite

    Returns:
        SymmetricFactor instance

    Raises:
        ConeInfeasibleError: If require_pd and the matrix is not positive definite
        NonsingularityError: If the matrix is singular
    """
    if matrix.shape[0] == 0:
        raise NonsingularityError("G is empty")
    tolerance = pd_tolerance(matrix)
    if sp.issparse(matrix):
        positive = dominates(matrix, tolerance)
        if positive:
            return SparseFactor(matrix, positive_definite=True)
        margin = smallest_eigenvalue(matrix)
        if require_pd:
            raise ConeInfeasibleError(f"G is not positive definite (margin {margin:.3e})", margin=margin)
        factor = SparseFactor(matrix, positive_definite=False)
        factor.trusted = abs(margin) >= tolerance
        return factor

    try:
        return CholeskyFactor(matrix)
    except la.LinAlgError:
        if require_pd:
            margin = smallest_eigenvalue(matrix)
            raise ConeInfeasibleError(f"G is not positive definite (margin {margin:.3e})", margin=margin)
    return IndefiniteFactor(matrix)
