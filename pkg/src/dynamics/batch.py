"""
Batch Error Tables
==================

Runs every (instance, N, tau) cell of an experiment and averages the logical
error per (N, tau). Cells are independent and run on a joblib worker pool; a
failing cell becomes a row with its error message instead of aborting the batch.
"""
import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd
from joblib import Parallel, delayed

from dynamics.evolution import ScheduleSpec, evolve_lindblad, evolve_pure
from dynamics.individual import evolve_individual_dephasing
from problems.instances import ProblemInstance
from utils.errors import EnsembleAQCError

logger = logging.getLogger(__name__)

RAW_COLUMNS = [
    "instance", "N", "tau", "Gamma_z", "Gamma_x", "mode",
    "success", "error", "steps", "norm_drift", "failure",
]
SUMMARY_COLUMNS = ["N", "tau", "mean_error", "instances", "failed"]


def run_cell(
    inst: ProblemInstance,
    N: int,
    tau: float,
    gamma_z: float = 0.0,
    gamma_x: float = 0.0,
    mode: str = "collective",
    steps: Optional[int] = None,
) -> Dict[str, Any]:
    """One sweep, reported as a raw table row; toolkit errors are captured in ``failure``."""
    row: Dict[str, Any] = {
        "instance": inst.name, "N": N, "tau": tau, "Gamma_z": gamma_z, "Gamma_x": gamma_x,
        "mode": mode, "success": None, "error": None, "steps": None, "norm_drift": None,
        "failure": None,
    }
    schedule = ScheduleSpec(tau=tau)
    try:
        if mode == "individual":
            result = evolve_individual_dephasing(inst, N, schedule, gamma_z, steps)
        elif gamma_z == 0.0 and gamma_x == 0.0:
            result = evolve_pure(inst, N, schedule, steps)
        else:
            result = evolve_lindblad(inst, N, schedule, gamma_z, gamma_x, steps)
    except (EnsembleAQCError, ValueError) as e:
        logger.error(f"❌ Cell {inst} N={N} tau={tau} failed: {e}", exc_info=True)
        row["failure"] = f"{type(e).__name__}: {e}"
        return row

    row.update({
        "success": result.success,
        "error": result.error,
        "steps": result.steps,
        "norm_drift": result.norm_drift,
    })
    return row


def batch_errors(
    instances: Sequence[ProblemInstance],
    N_range: Sequence[int],
    tau_range: Sequence[float],
    gamma_z: float = 0.0,
    gamma_x: float = 0.0,
    mode: str = "collective",
    steps: Optional[int] = None,
    n_jobs: int = 1,
) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """
    Mean logical error per (N, tau) over a fixed instance set.

    Args:
        instances: Instance set
        N_range: Ensemble sizes
        tau_range: Sweep times
        gamma_z: Dephasing rate (collective, or per qubit in individual mode)
        gamma_x: Collective S^x dephasing rate
        mode: "collective" (symmetric subspace) or "individual" (full space, gamma_x must be 0)
        steps: RK4 steps per run (default from the sweep time)
        n_jobs: joblib worker count; 1 runs in-process

    Returns:
        (raw, summary): one row per cell, and per-(N, tau) mean error over
        the cells that completed
    """
    if mode not in ("collective", "individual"):
        raise ValueError(f"mode must be 'collective' or 'individual', got {mode!r}")
    if mode == "individual" and gamma_x > 0.0:
        raise ValueError("individual mode dephases along z only; gamma_x must be 0")
    if not instances:
        raise ValueError("instance set is empty")

    cells = [(inst, int(N), float(tau)) for inst in instances for N in N_range for tau in tau_range]
    logger.info(f"🔮 Batch of {len(cells)} cells ({len(instances)} instances) with n_jobs={n_jobs}")
    if n_jobs == 1:
        rows: List[Dict[str, Any]] = [
            run_cell(inst, N, tau, gamma_z, gamma_x, mode, steps) for inst, N, tau in cells
        ]
    else:
        rows = Parallel(n_jobs=n_jobs)(
            delayed(run_cell)(inst, N, tau, gamma_z, gamma_x, mode, steps) for inst, N, tau in cells
        )

    raw = pd.DataFrame(rows, columns=RAW_COLUMNS)
    for column in ("success", "error", "steps", "norm_drift"):
        raw[column] = pd.to_numeric(raw[column])
    failed = int(raw["failure"].notna().sum())
    if failed:
        logger.warning(f"⚠️  {failed}/{len(cells)} cells failed")

    grouped = raw.groupby(["N", "tau"], sort=True)
    summary = pd.DataFrame({
        "mean_error": grouped["error"].mean(),
        "instances": grouped["error"].count(),
        "failed": grouped["failure"].count(),
    }).reset_index()[SUMMARY_COLUMNS]
    logger.info(f"✅ Batch finished: {len(cells) - failed} cells completed")
    return raw, summary
