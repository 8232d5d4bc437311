import math

import numpy as np
import pytest
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from src.Core.errors import InputError, NoConvergenceError, NonPositiveOperatorError
from src.Models.scaling import ScalingPair
from src.Services.nystrom_core import build_factor, factor_operator
from src.Services.reference import cost_matrix, dense_sinkhorn_projection, densify_plan, entropic_objective
from src.Services.sinkhorn import (
    default_max_iters,
    marginal_violation,
    scaling_cost,
    sinkhorn_scale,
    smooth_marginal,
)


class CountingOperator(LinearOperator):
    """Wraps a dense matrix and counts operator applications."""

    def __init__(self, K):
        super().__init__(dtype=np.float64, shape=K.shape)
        self.K = K
        self.calls = 0

    def _matvec(self, x):
        self.calls += 1
        return self.K @ np.ravel(x)

    def _rmatvec(self, x):
        self.calls += 1
        return self.K.T @ np.ravel(x)


# ===================================================================
# Helpers
# ===================================================================

class TestHelpers:
    def test_default_max_iters(self):
        assert default_max_iters(0.5, 4) == 128 * math.ceil(math.log(64) / 0.5)
        assert default_max_iters(0.5, 4, eta=2.0, radius=1.0) == 128 * math.ceil((8 + math.log(64)) / 0.5)

    def test_smooth_marginal(self):
        p = np.array([1.0, 0.0, 0.0, 0.0])
        s = smooth_marginal(p, 0.4)
        assert s.sum() == pytest.approx(1.0, abs=1e-15)
        assert np.all(s > 0)
        assert s[1] == pytest.approx(0.05 / 4)

    def test_scaling_cost_is_objective_of_scaled_matrix(self, rng):
        n, eta = 6, 2.0
        K = rng.uniform(0.1, 1.0, (n, n))
        s = ScalingPair(u=rng.normal(size=n), v=rng.normal(size=n))
        P = np.exp(s.u)[:, None] * K * np.exp(s.v)[None, :]
        w = scaling_cost(s, P.sum(axis=1), P.sum(axis=0), eta)
        assert w == pytest.approx(entropic_objective(-np.log(K) / eta, P, eta), abs=1e-10)


# ===================================================================
# sinkhorn_scale
# ===================================================================

class TestSinkhornScale:
    def test_fixed_point(self, rng):
        n, delta = 5, 0.1
        p, q = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
        K = np.outer(smooth_marginal(p, delta), smooth_marginal(q, delta))
        res = sinkhorn_scale(K, p, q, delta)
        assert res.iterations == 0
        assert np.all(res.scalings.u == 0) and np.all(res.scalings.v == 0)
        assert res.w_hat == 0.0

    def test_all_ones_two_by_two(self):
        half = np.array([0.5, 0.5])
        res = sinkhorn_scale(np.ones((2, 2)), half, half, 0.1)
        assert res.w_hat == pytest.approx(-math.log(4.0), abs=1e-12)
        assert res.iterations == 1

    def test_converges_below_half_delta(self, rng):
        n, delta = 30, 1e-3
        K = rng.uniform(0.05, 1.0, (n, n))
        p, q = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
        res = sinkhorn_scale(K, p, q, delta, eta=3.0)
        assert res.final_violation <= delta / 2
        assert res.scalings.is_finite()
        recomputed = marginal_violation(aslinearoperator(K), res.scalings, res.p_target, res.q_target)
        assert recomputed == pytest.approx(res.final_violation, abs=1e-12)

    def test_one_application_per_iteration(self, rng):
        n = 12
        op = CountingOperator(rng.uniform(0.1, 1.0, (n, n)))
        res = sinkhorn_scale(op, rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n)), 1e-3)
        assert op.calls == res.iterations + 2

    def test_iteration_bound(self, rng):
        n, delta = 20, 1e-2
        K = rng.uniform(0.05, 1.0, (n, n))
        res = sinkhorn_scale(K, rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n)), delta)
        assert res.iterations <= 64 / delta * math.log(n / (delta * K.min()))

    def test_matrix_free_factor(self, rng):
        X = rng.uniform(size=(20, 2))
        F = build_factor(X, 1.0, np.arange(0, 20, 2))
        p, q = rng.dirichlet(np.ones(20)), rng.dirichlet(np.ones(20))
        free = sinkhorn_scale(factor_operator(F), p, q, 1e-2)
        dense = sinkhorn_scale(densify_plan(F), p, q, 1e-2)
        assert free.iterations == dense.iterations
        assert free.w_hat == pytest.approx(dense.w_hat, rel=1e-9)

    def test_fixed_iterations_never_raises(self, rng):
        n = 10
        K = rng.uniform(0.05, 1.0, (n, n))
        res = sinkhorn_scale(K, rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n)), 1e-6,
                             max_iters=1, fixed_iterations=3)
        assert res.iterations == 3

    def test_no_convergence(self, rng):
        n = 10
        K = rng.uniform(0.05, 1.0, (n, n))
        with pytest.raises(NoConvergenceError) as info:
            sinkhorn_scale(K, rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n)), 1e-6, max_iters=1)
        assert info.value.iterations == 1
        assert info.value.violation > 5e-7
        assert info.value.code == 4

    def test_nonpositive_row(self):
        K = np.array([[0.0, 0.0], [1.0, 1.0]])
        half = np.array([0.5, 0.5])
        with pytest.raises(NonPositiveOperatorError) as info:
            sinkhorn_scale(K, half, half, 0.1)
        assert info.value.context["side"] == "row"

    @pytest.mark.parametrize("delta", [0.0, 1.5])
    def test_delta_range(self, delta):
        half = np.array([0.5, 0.5])
        with pytest.raises(InputError):
            sinkhorn_scale(np.ones((2, 2)), half, half, delta)

    def test_shape_mismatch(self):
        with pytest.raises(InputError):
            sinkhorn_scale(np.ones((2, 2)), np.ones(3) / 3, np.ones(2) / 2, 0.1)


# ===================================================================
# Agreement with the dense projection
# ===================================================================

class TestAgainstDenseProjection:
    def test_tight_delta_matches_oracle(self, rng):
        n = 8
        K = rng.uniform(0.1, 1.0, (n, n))
        p, q = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
        res = sinkhorn_scale(K, p, q, 1e-9)
        P_tilde = np.exp(res.scalings.u)[:, None] * K * np.exp(res.scalings.v)[None, :]
        exact = dense_sinkhorn_projection(K, p, q, tol=1e-12).entries
        assert float(np.abs(P_tilde - exact).sum()) <= 1e-6

    @pytest.mark.parametrize("delta", [1e-1, 1e-2, 1e-3])
    def test_objective_stable_under_approximate_projection(self, rng, delta):
        n, eta = 10, 2.0
        X = rng.uniform(size=(n, 2))
        C = cost_matrix(X)
        K = np.exp(-eta * C)
        for _ in range(5):
            p, q = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
            res = sinkhorn_scale(K, p, q, delta, eta=eta)
            P_tilde = np.exp(res.scalings.u)[:, None] * K * np.exp(res.scalings.v)[None, :]
            P_tilde /= P_tilde.sum()
            off = float(np.abs(P_tilde.sum(axis=1) - p).sum() + np.abs(P_tilde.sum(axis=0) - q).sum())
            assert 0 < off <= delta
            projected = dense_sinkhorn_projection(K, p, q, tol=1e-12).entries
            gap = abs(entropic_objective(C, projected, eta) - entropic_objective(C, P_tilde, eta))
            assert gap <= off * C.max() + off * math.log(2 * n / off) / eta + 1e-9
