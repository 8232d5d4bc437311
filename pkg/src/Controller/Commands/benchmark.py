# src/Controller/Commands/benchmark.py
import time
from typing import List

from scipy.sparse.linalg import aslinearoperator

from src.Controller.Commands import solver_command
from src.Controller.Commands.compute import solver_config
from src.Controller.deps import get_rng, iter_repeat_rngs
from src.Core.config import settings
from src.Core.errors import CapacityError
from src.Core.log_stream import log_from_thread
from src.Models.spectrum import KernelParams
from src.Schemas.cli_config import CliConfig
from src.Schemas.point_cloud import ProblemInstance
from src.Schemas.report import BenchmarkRow
from src.Services.geometry import merge_supports
from src.Services.instance_generator import curve_instance, uniform_square_instance
from src.Services.io_core import load_point_cloud
from src.Services.kernel import dense_kernel
from src.Services.pipeline import compute_eps_prime, nys_sink
from src.Services.reference_cache import reference_cache
from src.Services.result_serialization import write_benchmark_csv
from src.Services.sinkhorn import sinkhorn_scale


def benchmark_instance(config: CliConfig) -> ProblemInstance:
    """Input clouds when given, else the synthetic instance named by the grid."""
    if config.points_a and config.points_b:
        a = load_point_cloud(config.points_a)
        b = load_point_cloud(config.points_b)
        return merge_supports(a, b, eta=config.eta, eps=config.eps)
    grid = config.grid
    rng = get_rng(config.seed, "instance")
    if grid.instance == "curve":
        return curve_instance(grid.n, grid.d, rng, eta=config.eta, eps=config.eps)
    return uniform_square_instance(grid.n, rng, d=grid.d, eta=config.eta, eps=config.eps)


def dense_sinkhorn_w_hat(instance: ProblemInstance, dense_cap: int) -> float:
    """Matrix-scaling baseline on the exact kernel at δ = ε′."""
    K = dense_kernel(instance.support, KernelParams(eta=instance.eta), dense_cap=dense_cap)
    delta = compute_eps_prime(instance.eps, instance.eta, instance.m, instance.radius)
    result = sinkhorn_scale(aslinearoperator(K), instance.p, instance.q, delta,
                            eta=instance.eta, radius=instance.radius)
    return result.w_hat


@solver_command
def run_benchmark(config: CliConfig) -> int:
    """
    Time dense Sinkhorn and nys_sink over the (η, rank, repeat) grid.

    Rows: one per (method, η, rank, repeat); the reference W_η is computed
    once per η through the reference cache.

    Raises:
        CapacityError: instance too large for the dense baseline or the oracle
    """
    grid = config.grid
    base = benchmark_instance(config)
    cap = min(config.dense_cap, settings.PROJECTION_CAP)
    if base.m > cap:
        raise CapacityError(f"benchmark instance of size {base.m} exceeds dense cap {cap}", n=base.m, cap=cap)

    rows: List[BenchmarkRow] = []
    for eta in grid.etas:
        instance = base.with_params(eta=eta)
        w_ref, _ = reference_cache.reference(instance, tol=grid.reference_tol)
        log_from_thread(f"[BENCHMARK] eta={eta:g} reference W={w_ref:.8g}")

        for rank in grid.ranks:
            solver = solver_config(config).model_copy(update={"eta": eta, "fixed_rank": rank})
            rngs = iter_repeat_rngs(config.seed, f"benchmark:{eta!r}:{rank}", grid.repeats)
            for repeat, rng in enumerate(rngs):
                start = time.perf_counter()
                w_dense = dense_sinkhorn_w_hat(instance, config.dense_cap)
                rows.append(BenchmarkRow(
                    method="dense_sinkhorn", eta=eta, rank=instance.m, repeat=repeat,
                    elapsed_ms=(time.perf_counter() - start) * 1000.0,
                    abs_error_vs_reference=abs(w_dense - w_ref),
                    n=instance.m, d=instance.d, seed=config.seed,
                ))

                start = time.perf_counter()
                _, report = nys_sink(instance, rng, solver)
                rows.append(BenchmarkRow(
                    method="nys_sink", eta=eta, rank=report.rank, repeat=repeat,
                    elapsed_ms=(time.perf_counter() - start) * 1000.0,
                    abs_error_vs_reference=abs(report.w_hat - w_ref),
                    n=instance.m, d=instance.d, seed=config.seed,
                ))

    write_benchmark_csv(rows, config.output)
    log_from_thread(f"[BENCHMARK] wrote {len(rows)} rows")
    return 0
