# src/Services/property_suites.py
"""
Property Suites
===============

Seeded randomized checks of the inequalities and identities the solver
relies on. `validate` runs them all and prints a pass/fail table; the
acceptance tests call them with larger sample counts.

Suites (name → property):
- cost-perturbation:      |V_C(P) − V_C̃(P)| ≤ ‖C − C̃‖_∞
- entropy-continuity:     |H(P) − H(Q)| ≤ δ log(2n/δ), ‖P − Q‖₁ = δ
- objective-continuity:   |V_M(P) − V_M(Q)| ≤ δ‖M‖_∞ + η⁻¹δ log(2n/δ)
- bregman-remainder:      V_C(Q) − V_C(P) − ⟨∇V_C(P), Q − P⟩ = η⁻¹KL(Q‖P)
- log-ratio:              |log a − log b| ≤ |a − b| / min(a, b)
- scaling-cost-identity:  Ŵ = V_C̃(P̃) for C̃ = −η⁻¹ log K
- rounding-bound:         G ∈ M(p, q) and ‖G − F‖₁ ≤ ‖F1 − p‖₁ + ‖Fᵀ1 − q‖₁
- projection-lipschitz:   ‖Π(K) − Π(K̃)‖₁ ≤ ‖log K − log K̃‖_∞
- closed-form-2x2:        dense projection of [[1−ε, ε], [1−δ, δ]] matches the closed form
- nystrom-certificate:    1 − min K̃_ii = ‖K − K̃‖_∞ and ≤ τ
- feasibility:            solver plans satisfy the marginals to 1e-12

Each suite receives its own generator split from the master seed, so one
suite's sample count never changes another suite's draws.
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional

import numpy as np
from scipy.sparse.linalg import aslinearoperator

from src.Controller.deps import get_rng
from src.Core.log_stream import log_from_thread
from src.Models.scaling import ScalingPair
from src.Services.instance_generator import uniform_cloud, uniform_square_instance
from src.Services.kernel import dense_kernel
from src.Models.spectrum import KernelParams
from src.Services.nystrom import adaptive_nystrom
from src.Services.nystrom_core import factor_operator
from src.Services.pipeline import compute_eps_prime, nystrom_tolerance
from src.Services.reference import (
    densify_plan,
    dense_sinkhorn_projection,
    entropic_objective,
    kl_divergence,
    objective_gradient,
    shannon_entropy,
    sinkhorn_2x2_closed_form,
    two_by_two_kernel,
)
from src.Services.rounding import plan_marginals, round_to_polytope
from src.Services.sinkhorn import sinkhorn_scale

SLACK = 1e-9
FAULTS = ("skip_rounding",)


@dataclass(frozen=True)
class SuiteResult:
    name: str
    samples: int
    violations: int
    worst_excess: float

    @property
    def passed(self) -> bool:
        return self.violations == 0


class _Tally:
    def __init__(self, name: str):
        self.name = name
        self.samples = 0
        self.violations = 0
        self.worst = 0.0

    def check(self, lhs: float, rhs: float, slack: float = SLACK) -> None:
        self.samples += 1
        excess = lhs - rhs
        if not (excess <= slack):
            self.violations += 1
        if math.isnan(excess) or excess > self.worst:
            self.worst = excess if not math.isnan(excess) else math.inf

    def result(self) -> SuiteResult:
        return SuiteResult(self.name, self.samples, self.violations, self.worst)


def _simplex_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.dirichlet(np.ones(n * n)).reshape(n, n)


def _nearby(rng: np.random.Generator, P: np.ndarray, max_delta: float = 1.0) -> np.ndarray:
    R = _simplex_matrix(rng, P.shape[0])
    gap = float(np.abs(P - R).sum())
    target = rng.uniform(1e-6, max_delta)
    s = min(1.0, target / gap)
    return (1.0 - s) * P + s * R


# ==========================================================
# ENTROPIC OBJECTIVE
# ==========================================================

def cost_perturbation(rng: np.random.Generator, samples: int, fault: Optional[str] = None) -> SuiteResult:
    tally = _Tally("cost-perturbation")
    for _ in range(samples):
        n = int(rng.integers(2, 7))
        C = rng.uniform(0, 4, (n, n))
        C_tilde = C + rng.uniform(-0.5, 0.5, (n, n))
        P = _simplex_matrix(rng, n)
        eta = rng.uniform(0.5, 5.0)
        lhs = abs(entropic_objective(C, P, eta) - entropic_objective(C_tilde, P, eta))
        tally.check(lhs, float(np.abs(C - C_tilde).max()))
    return tally.result()


def entropy_continuity(rng: np.random.Generator, samples: int, fault: Optional[str] = None) -> SuiteResult:
    tally = _Tally("entropy-continuity")
    for _ in range(samples):
        n = int(rng.integers(2, 7))
        P = _simplex_matrix(rng, n)
        Q = _nearby(rng, P)
        delta = float(np.abs(P - Q).sum())
        tally.check(abs(shannon_entropy(P) - shannon_entropy(Q)), delta * math.log(2 * n / delta))
    return tally.result()


def objective_continuity(rng: np.random.Generator, samples: int, fault: Optional[str] = None) -> SuiteResult:
    tally = _Tally("objective-continuity")
    for _ in range(samples):
        n = int(rng.integers(2, 7))
        M = rng.uniform(-2, 2, (n, n))
        eta = rng.uniform(0.5, 5.0)
        P = _simplex_matrix(rng, n)
        Q = _nearby(rng, P)
        delta = float(np.abs(P - Q).sum())
        bound = delta * float(np.abs(M).max()) + delta * math.log(2 * n / delta) / eta
        tally.check(abs(entropic_objective(M, P, eta) - entropic_objective(M, Q, eta)), bound)
    return tally.result()


def bregman_remainder(rng: np.random.Generator, samples: int, fault: Optional[str] = None) -> SuiteResult:
    tally = _Tally("bregman-remainder")
    for _ in range(samples):
        n = int(rng.integers(2, 7))
        C = rng.uniform(0, 4, (n, n))
        eta = rng.uniform(0.5, 5.0)
        P = _simplex_matrix(rng, n) * 0.9 + 0.1 / (n * n)
        Q = _simplex_matrix(rng, n) * 0.9 + 0.1 / (n * n)
        lhs = (entropic_objective(C, Q, eta) - entropic_objective(C, P, eta)
               - float((objective_gradient(C, P, eta) * (Q - P)).sum()))
        gap = abs(lhs - kl_divergence(Q, P) / eta)
        tally.check(gap, 0.0)
    return tally.result()


def log_ratio(rng: np.random.Generator, samples: int, fault: Optional[str] = None) -> SuiteResult:
    tally = _Tally("log-ratio")
    for _ in range(samples):
        a, b = np.exp(rng.uniform(-10, 10, 2))
        tally.check(abs(math.log(a) - math.log(b)), abs(a - b) / min(a, b))
    return tally.result()


# ==========================================================
# SCALING AND ROUNDING
# ==========================================================

def scaling_cost_identity(rng: np.random.Generator, samples: int, fault: Optional[str] = None) -> SuiteResult:
    tally = _Tally("scaling-cost-identity")
    for _ in range(samples):
        n = int(rng.integers(2, 11))
        K = rng.uniform(0.05, 1.0, (n, n))
        eta = rng.uniform(0.5, 5.0)
        p, q = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
        res = sinkhorn_scale(K, p, q, delta=rng.uniform(1e-4, 0.5), eta=eta)
        P_tilde = np.exp(res.scalings.u)[:, None] * K * np.exp(res.scalings.v)[None, :]
        v_tilde = entropic_objective(-np.log(K) / eta, P_tilde, eta)
        tally.check(abs(res.w_hat - v_tilde), 0.0, slack=1e-10)
    return tally.result()


def rounding_bound(rng: np.random.Generator, samples: int, fault: Optional[str] = None) -> SuiteResult:
    tally = _Tally("rounding-bound")
    for _ in range(samples):
        n = 10
        p, q = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
        F = np.outer(p, q) * rng.uniform(0.5, 1.5, (n, n))
        plan = round_to_polytope(aslinearoperator(F), ScalingPair.identity(n), p, q)
        G = densify_plan(plan)
        rows, cols = plan_marginals(plan)
        feasibility = float(np.abs(rows - p).sum() + np.abs(cols - q).sum())
        violation = float(np.abs(F.sum(axis=1) - p).sum() + np.abs(F.sum(axis=0) - q).sum())
        tally.check(feasibility, 0.0, slack=1e-12)
        tally.check(float(np.abs(G - F).sum()), violation, slack=1e-12)
    return tally.result()


def projection_lipschitz(rng: np.random.Generator, samples: int, fault: Optional[str] = None) -> SuiteResult:
    tally = _Tally("projection-lipschitz")
    for k in range(samples):
        n = 8
        K = rng.uniform(0.1, 1.0, (n, n))
        t = (0.01, 0.05, 0.1)[k % 3]
        noise = rng.uniform(-1.0, 1.0, (n, n))
        K_tilde = K * np.exp(t * noise / np.abs(noise).max())
        p, q = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
        P = dense_sinkhorn_projection(K, p, q, tol=1e-10).entries
        P_tilde = dense_sinkhorn_projection(K_tilde, p, q, tol=1e-10).entries
        tally.check(float(np.abs(P - P_tilde).sum()), float(np.abs(np.log(K) - np.log(K_tilde)).max()), slack=1e-6)
    return tally.result()


def closed_form_2x2(rng: np.random.Generator, samples: int, fault: Optional[str] = None) -> SuiteResult:
    tally = _Tally("closed-form-2x2")
    half = np.array([0.5, 0.5])
    for _ in range(samples):
        eps, delta = rng.uniform(0.01, 0.99, 2)
        plan = dense_sinkhorn_projection(two_by_two_kernel(eps, delta), half, half, tol=1e-12).entries
        tally.check(abs(plan[0, 0] - sinkhorn_2x2_closed_form(eps, delta)), 0.0)
    return tally.result()


# ==========================================================
# NYSTRÖM AND END-TO-END
# ==========================================================

def nystrom_certificate(rng: np.random.Generator, samples: int, fault: Optional[str] = None) -> SuiteResult:
    tally = _Tally("nystrom-certificate")
    for _ in range(samples):
        n = int(rng.integers(10, 61))
        d = int(rng.integers(1, 4))
        eta = rng.uniform(0.5, 5.0)
        tau = (1e-2, 1e-3)[int(rng.integers(0, 2))]
        X = uniform_cloud(n, rng, d).points
        res = adaptive_nystrom(X, eta, tau, rng)
        tally.check(res.err, tau, slack=0.0)
        if res.factor.jitter == 0.0:
            K = dense_kernel(X, KernelParams(eta=eta))
            gap = float(np.abs(K - densify_plan(res.factor)).max())
            tally.check(abs(res.err - gap), 0.0, slack=1e-7)
    return tally.result()


def feasibility(rng: np.random.Generator, samples: int, fault: Optional[str] = None) -> SuiteResult:
    """Nyström → Sinkhorn → rounding on small instances; skip_rounding measures the unrounded scaling."""
    tally = _Tally("feasibility")
    for _ in range(samples):
        n = int(rng.integers(8, 41))
        eta = rng.uniform(1.0, 5.0)
        inst = uniform_square_instance(n, rng, eta=eta, eps=0.2)
        eps_prime = compute_eps_prime(inst.eps, eta, n, inst.radius)
        res = adaptive_nystrom(inst.support, eta, nystrom_tolerance(eps_prime, eta, inst.radius), rng)
        op = factor_operator(res.factor)
        sk = sinkhorn_scale(op, inst.p, inst.q, eps_prime, eta=eta, radius=inst.radius)
        if fault == "skip_rounding":
            rows, cols = sk.row_marginals, sk.col_marginals
        else:
            rows, cols = plan_marginals(round_to_polytope(op, sk.scalings, inst.p, inst.q, sk.row_marginals))
        tally.check(float(np.abs(rows - inst.p).sum() + np.abs(cols - inst.q).sum()), 0.0, slack=1e-12)
    return tally.result()


# ==========================================================
# REGISTRY
# ==========================================================

Suite = Callable[[np.random.Generator, int, Optional[str]], SuiteResult]

SUITES: Dict[str, Suite] = {
    "cost-perturbation": cost_perturbation,
    "entropy-continuity": entropy_continuity,
    "objective-continuity": objective_continuity,
    "bregman-remainder": bregman_remainder,
    "log-ratio": log_ratio,
    "scaling-cost-identity": scaling_cost_identity,
    "rounding-bound": rounding_bound,
    "projection-lipschitz": projection_lipschitz,
    "closed-form-2x2": closed_form_2x2,
    "nystrom-certificate": nystrom_certificate,
    "feasibility": feasibility,
}
"""Registered suites in run order."""

SAMPLE_SCALE: Dict[str, float] = {
    "scaling-cost-identity": 0.1,
    "rounding-bound": 0.1,
    "projection-lipschitz": 0.1,
    "closed-form-2x2": 0.05,
    "nystrom-certificate": 0.05,
    "feasibility": 0.02,
}
"""Fraction of the requested sample count used by the expensive suites."""


def suite_samples(name: str, samples: int) -> int:
    return max(1, int(round(samples * SAMPLE_SCALE.get(name, 1.0))))


def run_suites(
    seed: int,
    samples: int = 1000,
    inject_fault: Optional[str] = None,
    names: Optional[Iterable[str]] = None,
) -> List[SuiteResult]:
    """
    Run the selected suites (all by default), each on its own seeded stream.

    Raises:
        KeyError: unknown suite name
        ValueError: unknown fault
    """
    if inject_fault is not None and inject_fault not in FAULTS:
        raise ValueError(f"unknown fault {inject_fault!r}; expected one of {FAULTS}")
    selected = list(SUITES) if names is None else list(names)
    results = []
    for name in selected:
        suite = SUITES[name]
        result = suite(get_rng(seed, f"suite:{name}"), suite_samples(name, samples), inject_fault)
        log_from_thread(
            f"[VALIDATE] {name}: {result.samples} samples, {result.violations} violations",
            "log" if result.passed else "error",
        )
        results.append(result)
    return results
