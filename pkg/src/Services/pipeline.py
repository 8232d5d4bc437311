# src/Services/pipeline.py
"""
Nys-Sink Pipeline
=================

End-to-end solve on a ProblemInstance:

1. ε′ = compute_eps_prime(ε, η, n, R), τ = (ε′/2)·e^{−4ηR²}
2. Kernel: adaptive Nyström at τ (or a fixed rank), dense kernel as fallback
3. Sinkhorn scaling at δ = ε′
4. Rounding onto M(p, q)

Recovery:
- NonPositiveOperatorError in Sinkhorn → double the rank floor and retry,
  at most config.max_retries times, then the dense kernel if n ≤ dense_cap,
  else RetryExhaustedError
- RankExhaustedError → dense kernel if n ≤ dense_cap, else propagate

Every propagated SolverError carries the failing stage in its context.
"""

import math
import time
from typing import List, Optional, Tuple

import numpy as np
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from src.Core.config import SolverConfig
from src.Core.errors import (
    InputError,
    NoConvergenceError,
    NonPositiveOperatorError,
    RankExhaustedError,
    RetryExhaustedError,
    SolverError,
)
from src.Core.log_stream import log_from_thread
from src.Models.plan import FactoredPlan
from src.Models.spectrum import KernelParams
from src.Schemas.point_cloud import ProblemInstance
from src.Schemas.report import SolveReport, WallTimes
from src.Services.kernel import dense_kernel
from src.Services.nystrom import adaptive_nystrom, nystrom_fixed_rank
from src.Services.nystrom_core import factor_operator
from src.Services.rounding import plan_marginals, round_to_polytope
from src.Services.sinkhorn import sinkhorn_scale


def compute_eps_prime(eps: float, eta: float, n: int, R: float) -> float:
    """
    ε′ = min(1, εη / (50·(4R²η + log(n/(ηε))))), with the parenthesis
    clamped below at 1.
    """
    inner = 4.0 * R * R * eta + math.log(n / (eta * eps))
    return min(1.0, eps * eta / (50.0 * max(1.0, inner)))


def nystrom_tolerance(eps_prime: float, eta: float, R: float) -> float:
    """τ = (ε′/2)·e^{−4ηR²}; entrywise kernel error at this level keeps ‖log K − log K̃‖_∞ ≤ ε′."""
    return 0.5 * eps_prime * math.exp(-4.0 * eta * R * R)


def _ms(start: float) -> float:
    return (time.perf_counter() - start) * 1000.0


class _KernelChoice:
    __slots__ = ("op", "rank", "rounds", "err", "jitter", "path")

    def __init__(self, op: LinearOperator, rank: int, rounds: int, err: float, jitter: float, path: str):
        self.op = op
        self.rank = rank
        self.rounds = rounds
        self.err = err
        self.jitter = jitter
        self.path = path


def _dense_choice(instance: ProblemInstance, dense_cap: int) -> _KernelChoice:
    K = dense_kernel(instance.support, KernelParams(eta=instance.eta), dense_cap=dense_cap)
    log_from_thread(f"[PIPELINE] using the exact kernel (n={instance.m})", "warning")
    return _KernelChoice(aslinearoperator(K), instance.m, 0, 0.0, 0.0, "dense")


def _nystrom_choice(
    instance: ProblemInstance,
    tau: float,
    rng: np.random.Generator,
    config: SolverConfig,
    rank_floor: int,
) -> _KernelChoice:
    X = instance.support
    n = instance.m
    if config.fixed_rank is not None:
        r = min(max(config.fixed_rank, rank_floor), n)
        res = nystrom_fixed_rank(X, instance.eta, r, rng, lam=max(tau, 1e-12), sampler=config.sampler)
    else:
        if tau <= 0:
            raise RankExhaustedError("Nyström tolerance underflowed to 0", err=1.0, rank=0)
        r_max = n if config.r_max is None else min(config.r_max, n)
        res = adaptive_nystrom(X, instance.eta, tau, rng, r_max=r_max, min_rank=rank_floor, sampler=config.sampler)
    return _KernelChoice(factor_operator(res.factor), res.rank, res.rounds, res.err, res.factor.jitter, "nystrom")


def nys_sink(
    instance: ProblemInstance,
    rng: np.random.Generator,
    config: SolverConfig,
) -> Tuple[FactoredPlan, SolveReport]:
    """
    Solve the entropic OT problem of `instance` matrix-free.

    η and ε are read from the instance; config supplies r_max, caps,
    retries and the optional fixed-rank / fixed-iteration modes.

    Returns:
        (feasible factored plan P̂, SolveReport)

    Raises:
        InputError: fewer than two support points
        RankExhaustedError: adaptive rank hit r_max above the dense cap
        NoConvergenceError: Sinkhorn iteration ceiling reached
        RetryExhaustedError: nonpositive-operator retries exhausted above the dense cap
    """
    t_total = time.perf_counter()
    n = instance.m
    eta, eps, R = instance.eta, instance.eps, instance.radius
    if n < 2:
        raise InputError(f"a solve needs at least 2 support points, got {n}").with_stage("pipeline")

    warnings: List[str] = []
    if not 1.0 <= eta <= n:
        msg = f"eta={eta:g} outside [1, n={n}]; guarantees assume eta in [1, n]"
        warnings.append(msg)
        log_from_thread(f"[PIPELINE] {msg}", "warning")

    eps_prime = compute_eps_prime(eps, eta, n, R)
    tau = nystrom_tolerance(eps_prime, eta, R)
    log_from_thread(f"[PIPELINE] n={n} eta={eta:g} eps={eps:g} R={R:.4g} eps'={eps_prime:.3e} tau={tau:.3e}")

    nystrom_ms = 0.0
    sinkhorn_ms = 0.0
    retries = 0
    rank_floor = 2
    choice: Optional[_KernelChoice] = None

    while True:
        t_stage = time.perf_counter()
        if choice is None:
            try:
                choice = _nystrom_choice(instance, tau, rng, config, rank_floor)
            except RankExhaustedError as exc:
                if n > config.dense_cap:
                    raise exc.with_stage("nystrom")
                warnings.append(f"rank exhausted (err={exc.err:.3e}); fell back to the exact kernel")
                choice = _dense_choice(instance, config.dense_cap)
            except SolverError as exc:
                raise exc.with_stage("nystrom")
        nystrom_ms += _ms(t_stage)

        t_stage = time.perf_counter()
        try:
            result = sinkhorn_scale(
                choice.op, instance.p, instance.q, eps_prime,
                eta=eta, radius=R, fixed_iterations=config.fixed_iterations,
            )
            sinkhorn_ms += _ms(t_stage)
            break
        except NonPositiveOperatorError as exc:
            sinkhorn_ms += _ms(t_stage)
            if choice.path == "dense":
                raise exc.with_stage("sinkhorn")
            retries += 1
            log_from_thread(f"[PIPELINE] {exc.message}; retry {retries} at rank ≥ {2 * choice.rank}", "warning")
            if retries > config.max_retries:
                if n > config.dense_cap:
                    raise RetryExhaustedError(
                        f"nonpositive operator after {config.max_retries} retries",
                        {"retries": config.max_retries, "rank": choice.rank},
                    ).with_stage("sinkhorn")
                warnings.append(f"retries exhausted at rank {choice.rank}; fell back to the exact kernel")
                choice = _dense_choice(instance, config.dense_cap)
                continue
            rank_floor = min(2 * choice.rank, n)
            choice = None
        except NoConvergenceError as exc:
            raise exc.with_stage("sinkhorn")

    t_stage = time.perf_counter()
    try:
        plan = round_to_polytope(choice.op, result.scalings, instance.p, instance.q,
                                 row_marginals=result.row_marginals)
    except SolverError as exc:
        raise exc.with_stage("rounding")
    rows, cols = plan_marginals(plan)
    violation = float(np.abs(rows - instance.p).sum() + np.abs(cols - instance.q).sum())
    round_ms = _ms(t_stage)

    if config.fixed_iterations is not None and result.final_violation > eps_prime / 2:
        warnings.append(
            f"fixed iteration budget left violation {result.final_violation:.3e} above {eps_prime / 2:.3e}"
        )

    report = SolveReport(
        w_hat=result.w_hat,
        rank=choice.rank,
        sinkhorn_iterations=result.iterations,
        nystrom_rounds=choice.rounds,
        retries=retries,
        wall_times=WallTimes(nystrom_ms=nystrom_ms, sinkhorn_ms=sinkhorn_ms,
                             round_ms=round_ms, total_ms=_ms(t_total)),
        eps_prime=eps_prime,
        tau=tau if tau > 0 else np.finfo(np.float64).tiny,
        certificate_err=max(choice.err, 0.0),
        jitter=choice.jitter,
        final_violation=result.final_violation,
        marginal_violation=violation,
        kernel_path=choice.path,
        warnings=warnings,
    )
    log_from_thread(
        f"[PIPELINE] w_hat={report.w_hat:.6g} rank={report.rank} iters={report.sinkhorn_iterations} "
        f"retries={retries} path={choice.path} total={report.wall_times.total_ms:.1f}ms"
    )
    return plan, report
