import numpy as np
import pytest

from src.Core.config import settings
from src.Core.errors import DegenerateLandmarksError, InputError, RankExhaustedError
from src.Models.spectrum import KernelParams
from src.Services.kernel import dense_kernel, effective_dimension, eigen_spectrum
from src.Services.nystrom import adaptive_nystrom, nystrom_fixed_rank
import src.Services.nystrom as nystrom_module
import src.Services.nystrom_core.leverage_scores as leverage_module
from src.Services.nystrom_core import (
    approximate_ridge_leverage_scores,
    build_factor,
    certificate_error,
    exact_ridge_leverage_scores,
    factor_diagonal,
    factor_matvec,
    factor_operator,
    sample_landmarks,
    sample_uniform_landmarks,
)
from src.Services.reference import densify_plan
from tests.conftest import messages


def _grid(k: int = 3, spacing: float = 0.5) -> np.ndarray:
    axis = np.arange(k) * spacing
    return np.array([[a, b] for a in axis for b in axis])


# ===================================================================
# Leverage scores
# ===================================================================

class TestLeverageScores:
    def test_identical_points(self, rng):
        n, lam = 8, 0.25
        scores = approximate_ridge_leverage_scores(np.zeros((n, 2)), 1.0, lam, rng)
        assert np.allclose(scores, 1.0 / (n * (1.0 + lam)))

    def test_exact_mode_matches_dense_formula(self, rng):
        X = rng.uniform(size=(30, 2))
        lam = 1e-3
        K = dense_kernel(X, KernelParams(eta=2.0))
        expected = np.diag(K @ np.linalg.inv(K + lam * 30 * np.eye(30)))
        got = approximate_ridge_leverage_scores(X, 2.0, lam, rng)
        assert np.allclose(got, expected, atol=1e-10)

    def test_recursive_upper_bounds_exact(self, rng):
        X = rng.uniform(size=(200, 2))
        lam = 1e-3
        exact = exact_ridge_leverage_scores(X, 3.0, lam * 200)
        approx = approximate_ridge_leverage_scores(X, 3.0, lam, rng, exact_cutoff=32)
        assert np.all(approx > 0)
        assert np.all(approx >= exact - 1e-8)

    def test_rejects_nonpositive_lambda(self, rng):
        with pytest.raises(InputError):
            approximate_ridge_leverage_scores(np.zeros((3, 1)), 1.0, 0.0, rng)

    def test_budget_caps_kept_set(self, rng, monkeypatch):
        sizes = []
        restricted = leverage_module._restricted_scores

        def recording(X, S, *args):
            sizes.append(S.shape[0])
            return restricted(X, S, *args)

        monkeypatch.setattr(leverage_module, "_restricted_scores", recording)
        X = rng.uniform(size=(400, 2))
        lam = 1e-3
        approx = approximate_ridge_leverage_scores(X, 3.0, lam, rng, exact_cutoff=32, budget=8)
        assert len(sizes) == 4
        assert max(sizes) <= 8
        assert np.all(approx >= exact_ridge_leverage_scores(X, 3.0, lam * 400) - 1e-8)
        assert np.all(approx <= 1.0)

    def test_rejects_zero_budget(self, rng):
        with pytest.raises(InputError):
            approximate_ridge_leverage_scores(rng.uniform(size=(40, 2)), 1.0, 1e-3, rng, exact_cutoff=8, budget=0)

    @pytest.mark.parametrize("lam", [1e-2, 1e-4])
    def test_exact_sum_tracks_effective_dimension(self, rng, lam):
        X = rng.uniform(size=(60, 2))
        d_eff = effective_dimension(eigen_spectrum(dense_kernel(X, KernelParams(eta=2.0))), lam)
        total = float(approximate_ridge_leverage_scores(X, 2.0, lam, rng).sum())
        assert d_eff / 3 <= total <= 3 * d_eff


# ===================================================================
# Landmarks
# ===================================================================

class TestLandmarks:
    def test_distinct_sorted(self, rng):
        idx = sample_landmarks(rng.uniform(0.1, 1.0, 50), 12, rng)
        assert idx.shape == (12,)
        assert np.unique(idx).size == 12
        assert np.all(np.diff(idx) > 0)

    def test_full_rank_returns_everything(self, rng):
        assert np.array_equal(sample_landmarks(np.ones(6), 6, rng), np.arange(6))

    def test_deterministic_under_seed(self):
        scores = np.linspace(0.1, 1.0, 40)
        a = sample_landmarks(scores, 10, np.random.default_rng(5))
        b = sample_landmarks(scores, 10, np.random.default_rng(5))
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("scores,r", [(np.ones(3), 4), (np.ones(3), 0), (np.array([1.0, 0.0, 1.0]), 2)])
    def test_invalid_requests(self, rng, scores, r):
        with pytest.raises(InputError):
            sample_landmarks(scores, r, rng)

    def test_uniform(self, rng):
        idx = sample_uniform_landmarks(20, 5, rng)
        assert np.unique(idx).size == 5 and idx.max() < 20

    def test_dominant_score_is_almost_always_drawn(self, rng):
        scores = np.ones(50)
        scores[17] = 1e6
        hits = sum(17 in sample_landmarks(scores, 1, rng) for _ in range(1000))
        assert hits >= 990


# ===================================================================
# Factor
# ===================================================================

class TestFactor:
    def test_landmark_entries_and_cholesky(self):
        X = _grid()
        F = build_factor(X, 10.0, [0, 4, 8])
        assert np.all(F.V[[0, 4, 8], [0, 1, 2]] == 1.0)
        assert np.all(np.diag(F.L) > 0)
        assert F.jitter == 0.0
        assert F.rank == 3 and F.n == 9

    def test_full_rank_reproduces_kernel(self):
        X = _grid()
        F = build_factor(X, 10.0, np.arange(9))
        K = dense_kernel(X, KernelParams(eta=10.0))
        assert np.allclose(densify_plan(F), K, atol=1e-8)

    def test_matvec_matches_dense(self, rng):
        X = rng.uniform(size=(25, 2))
        F = build_factor(X, 5.0, [1, 7, 13, 20])
        K_tilde = densify_plan(F)
        w = rng.normal(size=25)
        assert np.allclose(factor_matvec(F, w), K_tilde @ w, atol=1e-12)
        assert np.allclose(factor_operator(F).rmatvec(w), K_tilde.T @ w, atol=1e-12)
        assert np.allclose(factor_diagonal(F), np.diag(K_tilde), atol=1e-12)

    def test_matvec_length_mismatch(self, rng):
        F = build_factor(rng.uniform(size=(5, 2)), 1.0, [0, 1])
        with pytest.raises(InputError):
            factor_matvec(F, np.ones(4))

    def test_certificate_is_entrywise_error(self, rng):
        X = rng.uniform(size=(40, 2))
        F = build_factor(X, 4.0, [2, 11, 19, 27, 33])
        assert F.jitter == 0.0
        gap = np.abs(dense_kernel(X, KernelParams(eta=4.0)) - densify_plan(F)).max()
        assert certificate_error(F) == pytest.approx(gap, abs=1e-8)

    def test_repeated_index(self, rng):
        with pytest.raises(InputError):
            build_factor(rng.uniform(size=(5, 2)), 1.0, [1, 1])

    def test_duplicate_points_take_jitter(self, captured_logs):
        X = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 1.0]])
        F = build_factor(X, 1.0, [0, 1])
        assert F.jitter > 0
        assert factor_diagonal(F).max() <= 1.0 + 1e-8
        assert messages(captured_logs, "jitter")

    def test_residual_is_psd(self, rng):
        X = rng.uniform(size=(40, 2))
        F = build_factor(X, 4.0, [3, 9, 14, 22, 31, 38])
        E = dense_kernel(X, KernelParams(eta=4.0)) - densify_plan(F)
        assert np.linalg.eigvalsh(0.5 * (E + E.T)).min() >= -40 * F.jitter - 1e-8

    def test_entrywise_and_operator_norms_sandwich(self, rng):
        X = rng.uniform(size=(30, 2))
        F = build_factor(X, 2.0, [0, 10, 20])
        E = dense_kernel(X, KernelParams(eta=2.0)) - densify_plan(F)
        entrywise = float(np.abs(E).max())
        operator = float(np.linalg.norm(E, 2))
        assert entrywise <= operator + 1e-12
        assert operator <= 30 * entrywise + 1e-12

    def test_matvec_is_symmetric(self, rng):
        F = build_factor(rng.uniform(size=(25, 2)), 3.0, [2, 5, 11, 19])
        u, w = rng.normal(size=25), rng.normal(size=25)
        assert float(u @ factor_matvec(F, w)) == pytest.approx(float(factor_matvec(F, u) @ w), abs=1e-12)

    def test_degenerate_when_ladder_exhausted(self, monkeypatch):
        monkeypatch.setattr(settings, "JITTER_LADDER", (0.0,))
        X = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 1.0]])
        with pytest.raises(DegenerateLandmarksError):
            build_factor(X, 1.0, [0, 1])


# ===================================================================
# Adaptive loop
# ===================================================================

class TestAdaptiveNystrom:
    def test_reaches_tolerance(self, rng, captured_logs):
        X = rng.uniform(size=(80, 2))
        res = adaptive_nystrom(X, 2.0, 1e-3, rng)
        assert res.err <= 1e-3
        assert res.rank == res.factor.rank
        assert res.rank in (2, 4, 8, 16, 32, 64, 80)
        assert res.rounds == len(messages(captured_logs, "[NYSTROM] round"))

    def test_scores_once_per_call(self, rng, monkeypatch):
        calls = []
        scorer = nystrom_module.approximate_ridge_leverage_scores

        def counting(*args, **kwargs):
            calls.append(args[2])
            return scorer(*args, **kwargs)

        monkeypatch.setattr(nystrom_module, "approximate_ridge_leverage_scores", counting)
        res = adaptive_nystrom(rng.uniform(size=(80, 2)), 2.0, 1e-3, rng)
        assert res.rounds > 1
        assert calls == [1e-3]

    def test_uniform_sampler(self, rng):
        res = adaptive_nystrom(rng.uniform(size=(60, 1)), 1.0, 1e-2, rng, sampler="uniform")
        assert res.err <= 1e-2

    def test_min_rank_starts_higher(self, rng):
        res = adaptive_nystrom(rng.uniform(size=(60, 2)), 1.0, 0.5, rng, min_rank=16)
        assert res.rank >= 16 and res.rounds == 1

    def test_rank_exhausted(self, rng):
        with pytest.raises(RankExhaustedError) as info:
            adaptive_nystrom(rng.uniform(size=(50, 2)), 5.0, 1e-12, rng, r_max=4)
        assert info.value.err > 1e-12
        assert info.value.rank == 4
        assert info.value.code == 3

    @pytest.mark.parametrize("kwargs", [{"tau": 0.0}, {"tau": 1e-3, "r_max": 51}])
    def test_invalid_arguments(self, rng, kwargs):
        with pytest.raises(InputError):
            adaptive_nystrom(rng.uniform(size=(50, 2)), 1.0, rng=rng, **kwargs)

    def test_fixed_rank(self, rng):
        res = nystrom_fixed_rank(rng.uniform(size=(30, 2)), 1.0, 6, rng)
        assert res.rank == 6 and res.rounds == 1
        assert res.err == pytest.approx(certificate_error(res.factor))
        with pytest.raises(InputError):
            nystrom_fixed_rank(rng.uniform(size=(5, 2)), 1.0, 6, rng)
