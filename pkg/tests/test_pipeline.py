import math

import numpy as np
import pytest

from src.Controller.deps import get_rng
from src.Core.config import SolverConfig
from src.Core.errors import (
    InputError,
    NonPositiveOperatorError,
    RankExhaustedError,
    RetryExhaustedError,
)
from src.Schemas.point_cloud import ProblemInstance
from src.Services import pipeline
from src.Services.pipeline import compute_eps_prime, nys_sink, nystrom_tolerance
from src.Services.reference import densify_plan, reference_w_eta
from src.Services.rounding import plan_marginals


def _config(inst, **overrides):
    return SolverConfig(eta=inst.eta, eps=inst.eps, **overrides)


def _feasibility(plan, inst):
    rows, cols = plan_marginals(plan)
    return float(np.abs(rows - inst.p).sum() + np.abs(cols - inst.q).sum())


class FlakySinkhorn:
    """Raises NonPositiveOperatorError for the first `failures` calls."""

    def __init__(self, failures):
        self.failures = failures
        self.calls = 0
        self.real = pipeline.sinkhorn_scale

    def __call__(self, *args, **kwargs):
        self.calls += 1
        if self.calls <= self.failures:
            raise NonPositiveOperatorError("injected", {"iteration": 1})
        return self.real(*args, **kwargs)


# ===================================================================
# Tolerances
# ===================================================================

class TestTolerances:
    def test_eps_prime_example(self):
        assert compute_eps_prime(1.0, 1.0, 2, 1.0) == pytest.approx(1 / (50 * (4 + math.log(2))), rel=1e-12)
        assert compute_eps_prime(1.0, 1.0, 2, 1.0) == pytest.approx(0.004261, abs=1e-6)

    def test_eps_prime_clamped(self):
        assert compute_eps_prime(1.0, 1000.0, 2, 0.0) == 1.0
        # log(n/(ηε)) < 0 with R = 0: the denominator is clamped at 50
        assert compute_eps_prime(0.5, 10.0, 2, 0.0) == pytest.approx(0.1)

    def test_tau(self):
        assert nystrom_tolerance(0.01, 2.0, 0.5) == pytest.approx(0.005 * math.exp(-2.0))


# ===================================================================
# nys_sink
# ===================================================================

class TestNysSink:
    def test_accuracy_and_feasibility(self, small_instance):
        plan, report = nys_sink(small_instance, get_rng(0, "nystrom"), _config(small_instance))
        w_ref, _ = reference_w_eta(small_instance)
        assert abs(report.w_hat - w_ref) <= small_instance.eps
        assert _feasibility(plan, small_instance) <= 1e-12
        assert report.marginal_violation <= 1e-12
        assert report.kernel_path == "nystrom"
        assert report.certificate_err <= report.tau
        assert report.final_violation <= report.eps_prime / 2
        assert report.warnings == []
        assert report.wall_times.total_ms >= report.wall_times.sinkhorn_ms

    def test_deterministic(self, small_instance):
        _, a = nys_sink(small_instance, get_rng(7, "nystrom"), _config(small_instance))
        _, b = nys_sink(small_instance, get_rng(7, "nystrom"), _config(small_instance))
        assert a.w_hat == b.w_hat and a.rank == b.rank and a.sinkhorn_iterations == b.sinkhorn_iterations

    def test_eta_outside_range_warns(self, small_instance, captured_logs):
        inst = small_instance.with_params(eta=0.5)
        plan, report = nys_sink(inst, get_rng(0, "nystrom"), _config(inst))
        assert any("outside [1, n" in w for w in report.warnings)
        assert any(r["msg_type"] == "warning" for r in captured_logs)
        assert _feasibility(plan, inst) <= 1e-12

    def test_fixed_rank(self, small_instance):
        _, report = nys_sink(small_instance, get_rng(0, "nystrom"), _config(small_instance, fixed_rank=8))
        assert report.rank == 8 and report.nystrom_rounds == 1

    def test_fixed_iterations(self, small_instance):
        plan, report = nys_sink(small_instance, get_rng(0, "nystrom"),
                                _config(small_instance, fixed_iterations=1))
        assert report.sinkhorn_iterations == 1
        assert _feasibility(plan, small_instance) <= 1e-12
        assert any("fixed iteration budget" in w for w in report.warnings)

    def test_identical_points(self):
        rng = get_rng(3, "instance")
        p, q = rng.dirichlet(np.ones(6)), rng.dirichlet(np.ones(6))
        inst = ProblemInstance(support=np.zeros((6, 2)), p=p, q=q, eta=1.0, eps=0.1, radius=0.0)
        plan, report = nys_sink(inst, get_rng(3, "nystrom"), _config(inst))
        entropy = -float(np.sum(p * np.log(p)) + np.sum(q * np.log(q)))
        assert abs(report.w_hat + entropy) <= inst.eps
        assert _feasibility(plan, inst) <= 1e-12
        assert np.allclose(densify_plan(plan), np.outer(p, q), atol=1e-3)

    def test_single_point(self):
        inst = ProblemInstance(support=np.zeros((1, 2)), p=[1.0], q=[1.0], eta=1.0, eps=0.1, radius=0.0)
        with pytest.raises(InputError) as info:
            nys_sink(inst, get_rng(0, "nystrom"), _config(inst))
        assert info.value.context["stage"] == "pipeline"


# ===================================================================
# Recovery paths
# ===================================================================

class TestRecovery:
    def test_retry_doubles_rank(self, small_instance, monkeypatch):
        flaky = FlakySinkhorn(1)
        monkeypatch.setattr(pipeline, "sinkhorn_scale", flaky)
        plan, report = nys_sink(small_instance, get_rng(0, "nystrom"), _config(small_instance))
        assert report.retries == 1
        assert flaky.calls == 2
        assert report.kernel_path == "nystrom"
        assert _feasibility(plan, small_instance) <= 1e-12

    def test_retries_exhausted_falls_back_to_dense(self, small_instance, monkeypatch):
        monkeypatch.setattr(pipeline, "sinkhorn_scale", FlakySinkhorn(2))
        _, report = nys_sink(small_instance, get_rng(0, "nystrom"), _config(small_instance, max_retries=1))
        assert report.kernel_path == "dense"
        assert report.rank == small_instance.m
        assert any("retries exhausted" in w for w in report.warnings)

    def test_retries_exhausted_above_cap(self, small_instance, monkeypatch):
        monkeypatch.setattr(pipeline, "sinkhorn_scale", FlakySinkhorn(10))
        with pytest.raises(RetryExhaustedError) as info:
            nys_sink(small_instance, get_rng(0, "nystrom"), _config(small_instance, max_retries=2, dense_cap=1))
        assert info.value.context["stage"] == "sinkhorn"
        assert info.value.code == 5

    def test_rank_exhausted_falls_back_to_dense(self, small_instance):
        inst = small_instance.with_params(eta=5.0)
        plan, report = nys_sink(inst, get_rng(0, "nystrom"), _config(inst, r_max=2))
        assert report.kernel_path == "dense"
        assert any("rank exhausted" in w for w in report.warnings)
        assert _feasibility(plan, inst) <= 1e-12

    def test_rank_exhausted_above_cap(self, small_instance):
        inst = small_instance.with_params(eta=5.0)
        with pytest.raises(RankExhaustedError) as info:
            nys_sink(inst, get_rng(0, "nystrom"), _config(inst, r_max=2, dense_cap=1))
        assert info.value.context["stage"] == "nystrom"
