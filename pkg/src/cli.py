"""
Ensemble AQC - Command-Line Front End
Reproducible experiments for ensemble-encoded adiabatic quantum computing.

Subcommands: gen, landscape, spectrum, mingap, meanfield, anneal, batch, negativity.
Every run validates its configuration first, echoes it into the output header
and exits with a code per failure class (see utils.errors).
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent))

from analytics.entanglement import negativity_trace
from analytics.landscape import landscape_summary, loglog_slope, nc_fraction_curve, trajectory_samples
from analytics.meanfield import mf_energy_curve
from analytics.spectrum import (
    DEFAULT_LEVELS,
    GRID_POINTS,
    default_lambda_grid,
    ferromagnet_min_gap_table,
    gap_curve,
    min_gap,
    min_gap_statistics,
    spectrum_scan,
)
from dynamics.batch import batch_errors
from dynamics.evolution import ScheduleSpec, evolve_lindblad, evolve_pure
from dynamics.individual import evolve_individual_dephasing
from dynamics.statistics import final_distribution
from problems.instance_sets import generate_instance_set, save_instance_set
from problems.instances import (
    NAMED_INSTANCES,
    ProblemInstance,
    ferromagnetic_instance,
    load_instance,
    named_instance,
    random_instance,
    save_instance,
)
from utils.config import TOOL_VERSION, get_settings
from utils.errors import ConfigError, DegenerateGroundStateError, EnsembleAQCError, OutputError
from utils.output import write_csv, write_report

logger = logging.getLogger(__name__)

COMMANDS = ("gen", "landscape", "spectrum", "mingap", "meanfield", "anneal", "batch", "negativity")


# ============================================================================
# Run configuration
# ============================================================================

class RunConfig(BaseModel):
    """Resolved configuration of one CLI run."""
    command: str
    instance: Optional[str] = None
    family: Optional[str] = None
    M: Optional[int] = Field(default=None, ge=1)
    M_range: Optional[List[int]] = None
    K: Optional[float] = None
    K_values: Optional[List[float]] = None
    seed: Optional[int] = Field(default=None, ge=0)
    N: List[int] = Field(default_factory=lambda: [1])
    tau: List[float] = Field(default_factory=lambda: [100.0])
    gamma_z: float = Field(default=0.0, ge=0.0)
    gamma_x: float = Field(default=0.0, ge=0.0)
    lambda_points: int = Field(default=GRID_POINTS, ge=3)
    levels: int = Field(default=DEFAULT_LEVELS, ge=1)
    steps: Optional[int] = Field(default=None, ge=1)
    mode: str = "collective"
    count: Optional[int] = Field(default=None, ge=1)
    filter_nc: Optional[str] = None
    samples: Optional[int] = Field(default=None, ge=1)
    refine: bool = False
    ferro_table: bool = False
    output: str
    n_jobs: int = 1

    class Config:
        json_schema_extra = {
            "example": {
                "command": "anneal",
                "instance": "data/instances/chain.json",
                "N": [5],
                "tau": [100.0],
                "gamma_z": 1e-4,
                "output": "results/anneal.csv",
            }
        }

    @field_validator("N")
    @classmethod
    def _positive_sizes(cls, values: List[int]) -> List[int]:
        if not values or any(v < 1 for v in values):
            raise ValueError("ensemble sizes must be at least 1")
        return values

    @field_validator("tau")
    @classmethod
    def _positive_times(cls, values: List[float]) -> List[float]:
        if not values or any(v <= 0 for v in values):
            raise ValueError("sweep times must be positive")
        return values

    @field_validator("mode")
    @classmethod
    def _known_mode(cls, value: str) -> str:
        if value not in ("collective", "individual"):
            raise ValueError("mode must be 'collective' or 'individual'")
        return value

    @field_validator("family")
    @classmethod
    def _known_family(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and value not in ("ferro", "random"):
            raise ValueError("family must be 'ferro' or 'random'")
        return value

    @model_validator(mode="after")
    def _individual_has_no_sx_channel(self) -> "RunConfig":
        if self.mode == "individual" and self.gamma_x > 0.0:
            raise ValueError("individual mode dephases along z only; gamma_x must be 0")
        return self


def parse_int_range(text: str) -> List[int]:
    """"1..7" -> [1, ..., 7]; "1,3,5" -> [1, 3, 5]."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer list or range, got {text!r}") from None


def parse_float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated number list, got {text!r}") from None


def resolve_instance(config: RunConfig) -> ProblemInstance:
    """Instance from a file, a known name, or a generator family."""
    if config.instance is not None:
        path = Path(config.instance)
        if path.exists():
            return load_instance(path)
        # anything with a suffix or directory part is a file reference
        if path.suffix or len(path.parts) > 1:
            raise OutputError(f"instance file {path} does not exist")
        if config.instance in NAMED_INSTANCES:
            return named_instance(config.instance)
        raise ConfigError(f"instance {config.instance!r} is neither a file nor a known name")
    if config.family == "ferro":
        if config.M is None or config.K is None:
            raise ConfigError("family 'ferro' needs --M and --K")
        return ferromagnetic_instance(config.M, config.K)
    if config.family == "random":
        if config.M is None or config.seed is None:
            raise ConfigError("family 'random' needs --M and --seed")
        return random_instance(config.M, config.seed)
    raise ConfigError("no instance given: use --instance or --family")


def _grid(config: RunConfig) -> np.ndarray:
    return default_lambda_grid(config.lambda_points)


def _require_instance_set(config: RunConfig):
    if config.M is None or config.count is None or config.filter_nc is None or config.seed is None:
        raise ConfigError("instance sets need --M, --count, --filter-nc and --seed")
    return generate_instance_set(config.M, config.count, config.filter_nc, config.seed)


# ============================================================================
# Subcommands
# ============================================================================

def cmd_gen(config: RunConfig, wall_clock: bool) -> Path:
    """Write one instance, or an N_c-filtered set when --count is given."""
    if config.count is not None:
        iset = _require_instance_set(config)
        return save_instance_set(iset, Path(config.output), config.seed, wall_clock)
    return save_instance(resolve_instance(config), Path(config.output))


def cmd_landscape(config: RunConfig, wall_clock: bool) -> Path:
    """Landscape report of one instance, or the random-instance N_c fraction curve with --samples."""
    dump = config.model_dump(mode="json")
    if config.samples is not None:
        if config.M is None or config.seed is None:
            raise ConfigError("the fraction curve needs --M, --seed and --samples")
        curve = nc_fraction_curve(config.M, config.N, config.samples, config.seed, config.n_jobs)
        try:
            logger.info(f"📊 log-log slope of the fraction curve: {loglog_slope(curve['N'], curve['fraction']):.3f}")
        except ValueError as e:
            logger.warning(f"⚠️  No slope: {e}")
        return write_csv(curve, Path(config.output), dump, config.seed, wall_clock)

    inst = resolve_instance(config)
    summary = landscape_summary(inst)
    report: Dict[str, Any] = {"instance": inst.name, "M": inst.M, **summary.to_dict()}
    if summary.eps1 is not None:
        report["Delta"] = {str(N): summary.Delta(N) for N in config.N}
    output = Path(config.output)
    if summary.unique_ground:
        eps = np.linspace(0.0, 1.0, config.lambda_points)
        samples = trajectory_samples(inst, eps, summary=summary)
        write_csv(samples, output.with_name(output.stem + "_trajectories.csv"), dump, config.seed, wall_clock)
    else:
        logger.warning(f"⚠️  {inst} has a degenerate ground corner, no trajectory samples")
    return write_report(report, output, dump, config.seed, wall_clock)


def cmd_spectrum(config: RunConfig, wall_clock: bool) -> Path:
    """Lowest levels along the sweep for the first N."""
    inst = resolve_instance(config)
    table = spectrum_scan(inst, config.N[0], _grid(config), config.levels)
    return write_csv(table, Path(config.output), config.model_dump(mode="json"), config.seed, wall_clock)


def cmd_mingap(config: RunConfig, wall_clock: bool) -> Path:
    """Gap curves of one instance, set statistics with --filter-nc, or the ferromagnet table."""
    dump = config.model_dump(mode="json")
    grid = _grid(config)
    if config.ferro_table:
        if not config.M_range or not config.K_values:
            raise ConfigError("--ferro-table needs --M-range and --K-values")
        table = ferromagnet_min_gap_table(config.M_range, config.K_values, grid)
        return write_csv(table, Path(config.output), dump, config.seed, wall_clock)
    if config.filter_nc is not None:
        iset = _require_instance_set(config)
        table = min_gap_statistics(iset.instances, config.N, grid, config.refine, config.n_jobs)
        return write_csv(table, Path(config.output), dump, config.seed, wall_clock)

    inst = resolve_instance(config)
    frames = []
    for N in config.N:
        lam_star, gap_min = min_gap(inst, N, grid, config.refine)
        logger.info(f"📊 {inst} N={N}: minimum gap {gap_min:.6g} at lambda={lam_star:.4f}")
        frames.append(pd.DataFrame({"N": N, "lambda": grid, "gap": gap_curve(inst, N, grid)}))
    return write_csv(pd.concat(frames, ignore_index=True), Path(config.output), dump, config.seed, wall_clock)


def cmd_meanfield(config: RunConfig, wall_clock: bool) -> Path:
    """Mean-field z, energy and gap along the sweep."""
    inst = resolve_instance(config)
    table = mf_energy_curve(inst, _grid(config), N=config.N[0])
    return write_csv(table, Path(config.output), config.model_dump(mode="json"), config.seed, wall_clock)


def cmd_anneal(config: RunConfig, wall_clock: bool) -> Path:
    """One sweep per (N, tau); the level distribution of the last run goes next to the table."""
    inst = resolve_instance(config)
    ground = landscape_summary(inst)
    if not ground.unique_ground:
        raise DegenerateGroundStateError(
            f"success is undefined: {inst} has {ground.ground_degeneracy} degenerate ground corners"
        )
    rows = []
    last = None
    for N in config.N:
        for tau in config.tau:
            schedule = ScheduleSpec(tau=tau)
            if config.mode == "individual":
                result = evolve_individual_dephasing(inst, N, schedule, config.gamma_z, config.steps)
            elif config.gamma_z == 0.0 and config.gamma_x == 0.0:
                result = evolve_pure(inst, N, schedule, config.steps)
            else:
                result = evolve_lindblad(inst, N, schedule, config.gamma_z, config.gamma_x, config.steps)
            rows.append(result.to_row())
            last = (result, N)
            logger.info(f"✅ N={N} tau={tau}: error {result.error}")

    dump = config.model_dump(mode="json")
    output = Path(config.output)
    columns = ["N", "tau", "Gamma_z", "Gamma_x", "success", "error", "steps", "norm_drift"]
    write_csv(pd.DataFrame(rows, columns=columns), output, dump, config.seed, wall_clock)
    result, N = last
    levels = final_distribution(result, inst, N, display_normalize=True)
    write_csv(levels, output.with_name(output.stem + "_levels.csv"), dump, config.seed, wall_clock)
    return output


def cmd_batch(config: RunConfig, wall_clock: bool) -> Path:
    """Mean error per (N, tau) over an N_c-filtered instance set."""
    iset = _require_instance_set(config)
    raw, summary = batch_errors(
        iset.instances, config.N, config.tau, config.gamma_z, config.gamma_x,
        config.mode, config.steps, config.n_jobs,
    )
    dump = config.model_dump(mode="json")
    output = Path(config.output)
    write_csv(raw, output.with_name(output.stem + "_raw.csv"), dump, config.seed, wall_clock)
    return write_csv(summary, output, dump, config.seed, wall_clock)


def cmd_negativity(config: RunConfig, wall_clock: bool) -> Path:
    """Log-negativity between the two ensembles along the sweep, one block per N."""
    inst = resolve_instance(config)
    schedule = ScheduleSpec(tau=config.tau[0])
    times = np.linspace(0.0, schedule.tau, config.samples or 21)
    frames = [
        negativity_trace(inst, N, schedule, config.gamma_z, config.gamma_x, times, config.steps)
        for N in config.N
    ]
    table = pd.concat(frames, ignore_index=True)
    return write_csv(table, Path(config.output), config.model_dump(mode="json"), config.seed, wall_clock)


HANDLERS = {
    "gen": cmd_gen,
    "landscape": cmd_landscape,
    "spectrum": cmd_spectrum,
    "mingap": cmd_mingap,
    "meanfield": cmd_meanfield,
    "anneal": cmd_anneal,
    "batch": cmd_batch,
    "negativity": cmd_negativity,
}


# ============================================================================
# Argument parsing
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--instance", help="instance JSON file or built-in name (triangle, chain, exact_cover)")
    common.add_argument("--family", choices=["ferro", "random"], help="generated instance family")
    common.add_argument("--M", type=int, help="number of logical spins")
    common.add_argument("--K", type=float, help="ferromagnet bias")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--N", type=parse_int_range, default=[1], help="ensemble sizes, e.g. 1..7 or 1,3,5")
    common.add_argument("--tau", type=parse_float_list, default=[100.0], help="sweep times, e.g. 5,20,100")
    common.add_argument("--gamma-z", type=float, default=0.0, help="S^z dephasing rate")
    common.add_argument("--gamma-x", type=float, default=0.0, help="S^x dephasing rate")
    common.add_argument("--lambda-points", type=int, default=GRID_POINTS, help="uniform lambda grid size")
    common.add_argument("--levels", type=int, default=DEFAULT_LEVELS, help="number of levels L")
    common.add_argument("--steps", type=int, help="RK4 steps per sweep")
    common.add_argument("--mode", default="collective", help="dephasing model: collective or individual")
    common.add_argument("--count", type=int, help="instance-set size")
    common.add_argument("--filter-nc", help="N_c predicate for instance sets: eq:<n> or gt:<n>")
    common.add_argument("--samples", type=int, help="random samples (landscape) or time samples (negativity)")
    common.add_argument("--refine", action="store_true", help="refine minimum gaps between grid points")
    common.add_argument("--ferro-table", action="store_true", help="mingap: ferromagnet exact vs mean-field table")
    common.add_argument("--M-range", type=parse_int_range, help="ferromagnet table sizes, e.g. 2..6")
    common.add_argument("--K-values", type=parse_float_list, help="ferromagnet table biases")
    common.add_argument("--output", help="output file (directory for gen --count)")
    common.add_argument("--n-jobs", type=int, help="worker processes (default from ENSEMBLE_AQC_N_JOBS)")
    common.add_argument("--no-wall-clock", action="store_true", help="omit the wall-clock header line")
    common.add_argument("--log-level", default="INFO", help="logging level")

    parser = argparse.ArgumentParser(
        prog="ensemble-aqc",
        description="Ensemble-encoded adiabatic quantum computing toolkit",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {TOOL_VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=HANDLERS[name].__doc__.strip().splitlines()[0])
    return parser


def default_output(args: argparse.Namespace, output_dir: Path) -> Path:
    if args.command == "gen":
        return output_dir / ("instance_set" if args.count else "instance.json")
    if args.command == "landscape" and args.samples is None:
        return output_dir / "landscape.json"
    return output_dir / f"{args.command}.csv"


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Validate the parsed flags into a RunConfig; failures become ConfigError."""
    settings = get_settings()
    values = {
        key: getattr(args, key)
        for key in RunConfig.model_fields
        if key not in ("output", "n_jobs") and hasattr(args, key)
    }
    values["output"] = str(args.output or default_output(args, settings.output_dir))
    if args.n_jobs is not None:
        values["n_jobs"] = args.n_jobs
    elif args.command == "batch":
        values["n_jobs"] = settings.n_jobs
    try:
        return RunConfig(**values)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(p) for p in first["loc"])
        raise ConfigError(f"{location}: {first['msg']}") from e


def report_failure(error: EnsembleAQCError) -> int:
    """Print one machine-parsable line on stderr and return the exit code."""
    message = str(error).replace("\n", " ")
    print(f"error={type(error).__name__} code={error.exit_code} message={message}", file=sys.stderr)
    return error.exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    try:
        config = resolve_config(args)
        logger.info(f"🚀 {config.command}: output {config.output}")
        path = HANDLERS[config.command](config, not args.no_wall_clock)
    except EnsembleAQCError as e:
        logger.error(f"❌ {args.command} failed: {e}")
        return report_failure(e)
    except ValueError as e:
        # precondition rejected by a library function
        logger.error(f"❌ {args.command} rejected its input: {e}")
        return report_failure(ConfigError(str(e)))
    except Exception as e:
        logger.error(f"❌ {args.command} failed unexpectedly: {e}", exc_info=True)
        return report_failure(EnsembleAQCError(str(e)))
    logger.info(f"✅ {args.command} finished: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
