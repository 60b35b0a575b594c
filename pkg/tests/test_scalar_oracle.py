#!/usr/bin/env python3
"""
Tests for the closed-form double-well oracle.
"""

import numpy as np
import pytest

from snl.errors import InvalidConfigError, NonFiniteError, PoleError
from snl.scalar_oracle import (
    BOUNDARY,
    GLOBAL_MIN,
    INDETERMINATE,
    LOCAL_MAX,
    LOCAL_MIN,
    ScalarProblem,
    cubic_residual,
    eval_scalar_dual,
    eval_scalar_primal,
    from_symmetric_pair,
    scalar_primal_gradient,
    solve_cubic_dual,
)


class TestScalarProblem:
    """Test parameter validation."""

    @pytest.mark.parametrize("alpha,lam", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (float("nan"), 1.0)])
    def test_invalid_parameters(self, alpha, lam):
        """Test that alpha and lambda must be positive."""
        with pytest.raises(InvalidConfigError):
            ScalarProblem(alpha, lam, [1.0])

    def test_non_finite_f(self):
        """Test that f must be finite."""
        with pytest.raises(NonFiniteError):
            ScalarProblem(1.0, 1.0, [float("inf")])

    def test_scalar_f_promoted(self):
        """Test that a scalar f becomes a 1-vector."""
        p = ScalarProblem(1.0, 2.0, 0.5)

        assert p.n == 1
        assert p.f_norm2 == 0.25


class TestSolveCubicDual:
    """Test the roots of the dual algebraic equation."""

    def test_three_roots(self):
        """Test α = 1, λ = 2, f = 0.5 against hand-computed roots."""
        p = ScalarProblem(1.0, 2.0, [0.5])
        result = solve_cubic_dual(p)

        assert result.roots == pytest.approx([0.236417, -0.268701, -1.967716], abs=1e-4)
        assert result.classes == [GLOBAL_MIN, LOCAL_MIN, LOCAL_MAX]
        for root in result.roots:
            assert abs(cubic_residual(p, root)) <= 1e-12

    def test_global_minimizer_values(self):
        """Test x₁ = f/ς₁ and Π(x₁) = Π^d(ς₁)."""
        p = ScalarProblem(1.0, 2.0, [0.5])
        result = solve_cubic_dual(p)
        x1 = result.global_minimizer()

        assert x1[0] == pytest.approx(2.11491, abs=1e-5)
        assert eval_scalar_primal(p, x1) == pytest.approx(-1.02951, abs=1e-5)
        assert eval_scalar_dual(p, result.roots[0]) == pytest.approx(eval_scalar_primal(p, x1), abs=1e-12)

    def test_points_are_critical(self):
        """Test that every root gives a stationary point of Π."""
        p = ScalarProblem(2.0, 1.5, [0.3])
        result = solve_cubic_dual(p)

        for point in result.points:
            assert np.allclose(scalar_primal_gradient(p, point), 0.0, atol=1e-10)

    def test_global_minimizer_is_lowest(self):
        """Test that the positive root gives the lowest primal value on a grid."""
        p = ScalarProblem(1.0, 2.0, [0.5])
        best = eval_scalar_primal(p, solve_cubic_dual(p).global_minimizer())

        for x in np.linspace(-4.0, 4.0, 801):
            assert eval_scalar_primal(p, [x]) >= best - 1e-12

    def test_single_root(self):
        """Test a large linear term leaving one real root."""
        result = solve_cubic_dual(ScalarProblem(1.0, 0.1, [1.0]))

        assert len(result.roots) == 1
        assert result.roots[0] > 0
        assert result.classes == [GLOBAL_MIN]

    def test_zero_linear_term(self):
        """Test the boundary double root when f = 0."""
        result = solve_cubic_dual(ScalarProblem(2.0, 3.0, [0.0]))

        assert result.roots == [0.0, 0.0, -6.0]
        assert result.classes == [BOUNDARY, BOUNDARY, LOCAL_MAX]
        assert result.points[0] is None
        assert result.points[2].tolist() == [0.0]
        assert result.global_minimizer() is None

    def test_indeterminate_in_higher_dimension(self):
        """Test that the middle root is not labelled a local minimum for n > 1."""
        result = solve_cubic_dual(ScalarProblem(1.0, 2.0, [0.3, 0.4]))

        assert result.classes == [GLOBAL_MIN, INDETERMINATE, LOCAL_MAX]


class TestScalarDual:
    """Test the scalar dual function."""

    def test_pole(self):
        """Test that ς = 0 raises PoleError."""
        with pytest.raises(PoleError):
            eval_scalar_dual(ScalarProblem(1.0, 1.0, [1.0]), 0.0)

    def test_dual_below_primal(self):
        """Test Π^d(ς) ≤ Π(x) for positive ς."""
        p = ScalarProblem(1.0, 2.0, [0.5])

        for sigma in np.linspace(0.01, 3.0, 50):
            for x in np.linspace(-3.0, 3.0, 61):
                assert eval_scalar_dual(p, sigma) <= eval_scalar_primal(p, [x]) + 1e-12


class TestSymmetricPair:
    """Test the reduction of the symmetric anchor pair."""

    def test_parameters(self):
        """Test α = 8q and λ = ½(b² − a²)."""
        p = from_symmetric_pair(1.0, 2.0, 0.005, weight=2.0)

        assert p.alpha == 16.0
        assert p.lam == 1.5
        assert p.f.tolist() == [0.005]

    def test_minimizer_near_exact_placement(self):
        """Test that a small δ moves the minimizer just past √(b² − a²)."""
        x1 = solve_cubic_dual(from_symmetric_pair(1.0, 2.0, 0.005)).global_minimizer()

        assert x1[0] > np.sqrt(3.0)
        assert x1[0] == pytest.approx(np.sqrt(3.0), abs=1e-3)
