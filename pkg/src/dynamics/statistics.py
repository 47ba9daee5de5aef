"""
Final-state statistics: level occupations at lambda = 1 and the logical error.
"""
import logging

import numpy as np
import pandas as pd

from analytics.spectrum import EQUIVALENT, classify_levels
from dynamics.evolution import RunResult
from problems.instances import ProblemInstance

logger = logging.getLogger(__name__)

PROBABILITY_TOL = 1e-6


def final_distribution(
    result: RunResult,
    inst: ProblemInstance,
    N: int,
    display_normalize: bool = False,
) -> pd.DataFrame:
    """
    Occupation of every H_Z level after the sweep, lowest energy first.

    Args:
        result: Completed run
        inst: Instance the run was made for
        N: Ensemble size of the run
        display_normalize: Add a ``display`` column scaled so its maximum is 1;
            the ``probability`` column is never rescaled

    Returns:
        DataFrame with columns (level_index, basis_index, energy, probability, tag[, display])
    """
    if result.populations.shape[0] != (N + 1) ** inst.M:
        raise ValueError(f"run populations do not match M={inst.M}, N={N}")
    levels = classify_levels(inst, N, L=None)
    table = levels.to_frame()
    table["probability"] = result.populations[levels.indices]
    table = table[["level_index", "basis_index", "energy", "probability", "tag"]]

    total = float(table["probability"].sum())
    if abs(total - 1.0) > PROBABILITY_TOL:
        logger.warning(f"⚠️  Level probabilities sum to {total:.8f}")
    if display_normalize:
        peak = float(table["probability"].max())
        table["display"] = table["probability"] / peak if peak > 0 else 0.0
    return table


def error_probability(result: RunResult, inst: ProblemInstance, N: int) -> float:
    """1 - total probability of levels logically equivalent to the ground corner; unresolved levels count as errors."""
    table = final_distribution(result, inst, N)
    success = float(table.loc[table["tag"] == EQUIVALENT, "probability"].sum())
    return float(np.clip(1.0 - success, 0.0, 1.0))
