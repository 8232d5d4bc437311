# src/Controller/Commands/compute.py
from src.Controller.Commands import solver_command
from src.Controller.deps import get_rng
from src.Core.config import SolverConfig
from src.Core.log_stream import log_from_thread
from src.Schemas.cli_config import CliConfig
from src.Services.geometry import merge_supports
from src.Services.io_core import load_point_cloud
from src.Services.pipeline import nys_sink
from src.Services.result_serialization import serialize_compute_result, write_json
from src.Services.rounding import plan_transport_cost


def solver_config(config: CliConfig) -> SolverConfig:
    return SolverConfig(
        eta=config.eta,
        eps=config.eps,
        seed=config.seed,
        r_max=config.r_max,
        dense_cap=config.dense_cap,
        fixed_rank=config.fixed_rank,
        fixed_iterations=config.fixed_iterations,
        sampler=config.sampler,
    )


@solver_command
def run_compute(config: CliConfig) -> int:
    """
    Solve between the two input clouds and emit the compute JSON.

    Flow:
    1. Load both CSV clouds
    2. Merge and center into one ProblemInstance
    3. nys_sink with the "nystrom" stage stream of the master seed
    4. Transport cost of the rounded plan, then JSON to --output (or stdout)
    """
    a = load_point_cloud(config.points_a)
    b = load_point_cloud(config.points_b)
    log_from_thread(f"[CLI] loaded {a.n} + {b.n} points in R^{a.d}")

    instance = merge_supports(a, b, eta=config.eta, eps=config.eps)
    plan, report = nys_sink(instance, get_rng(config.seed, "nystrom"), solver_config(config))
    cost = plan_transport_cost(plan, instance.support)

    write_json(serialize_compute_result(report, instance, config.seed, cost), config.output)
    return 0
