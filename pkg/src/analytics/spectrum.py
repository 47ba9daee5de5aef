"""
Exact Spectrum of the Ensemble Hamiltonian
==========================================

Eigen-analysis of H(lambda) on the symmetric subspace.

Features:
- Lowest L eigenpairs (dense below the configured cap, iterative above)
- Ground/first-excited gap and its minimum over a lambda grid
- Logical classification of the H_Z levels by majority vote
- Minimum-gap statistics over an instance set
- Ferromagnet minimum-gap table, exact (N=1) against mean-field
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import scipy.linalg
from joblib import Parallel, delayed
from scipy.optimize import minimize_scalar
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from analytics.landscape import ENERGY_TIE_TOL, qubit_ground_state
from analytics.meanfield import mf_gap_curve
from operators.symspace import (
    EnsembleHamiltonian,
    EnsembleOperator,
    ensemble_dim,
    fock_table,
    hz_diagonal,
    majority_signs,
)
from problems.instances import ProblemInstance, ferromagnetic_instance
from utils.config import get_settings
from utils.errors import ConvergenceError, DegenerateGroundStateError

logger = logging.getLogger(__name__)

DEFAULT_LEVELS = 30
MAX_ITERATIVE_LEVELS = 30
GRID_POINTS = 101
REFINE_XTOL = 1e-4

EQUIVALENT = "Equivalent"
ERROR = "Error"
UNRESOLVED = "Unresolved"


def default_lambda_grid(points: int = GRID_POINTS) -> np.ndarray:
    return np.linspace(0.0, 1.0, points)


@dataclass
class SpectrumSlice:
    """Lowest levels of H at one lambda."""
    lam: Optional[float]
    energies: np.ndarray
    vectors: Optional[np.ndarray] = None

    @property
    def gap(self) -> float:
        # degenerate pairs may come back a hair negative
        return max(float(self.energies[1] - self.energies[0]), 0.0)


@dataclass
class LevelClassification:
    """Lowest H_Z levels with their Fock labels and logical tags."""
    sigma_star: np.ndarray
    indices: np.ndarray
    energies: np.ndarray
    fock: np.ndarray
    tags: List[str] = field(default_factory=list)

    def count(self, tag: str) -> int:
        return sum(t == tag for t in self.tags)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "level_index": np.arange(len(self.tags)),
            "basis_index": self.indices,
            "energy": self.energies,
            "tag": self.tags,
        })


# ============================================================================
# Diagonalization
# ============================================================================

def eigensystem(H: EnsembleOperator, L: int, lam: Optional[float] = None) -> SpectrumSlice:
    """
    L smallest eigenpairs of a Hermitian ensemble operator.

    Args:
        H: Operator to diagonalize
        L: Number of levels
        lam: Interpolation parameter recorded on the slice

    Returns:
        SpectrumSlice with ascending energies and orthonormal column vectors
    """
    dim = H.dim
    if not 1 <= L <= dim:
        raise ValueError(f"L must lie in [1, {dim}], got {L}")

    if dim <= get_settings().dense_cap:
        energies, vectors = scipy.linalg.eigh(H.toarray(), subset_by_index=[0, L - 1])
        return SpectrumSlice(lam, energies, vectors)

    if L > MAX_ITERATIVE_LEVELS or L >= dim:
        raise ValueError(
            f"iterative solver handles at most {MAX_ITERATIVE_LEVELS} levels (dim={dim}), got L={L}"
        )
    logger.debug(f"dim={dim} above dense cap, using eigsh for {L} levels")
    try:
        energies, vectors = eigsh(H.matrix, k=L, which="SA")
    except ArpackNoConvergence as e:
        raise ConvergenceError(f"eigsh did not converge for {L} levels at dim={dim}: {e}") from e
    order = np.argsort(energies)
    return SpectrumSlice(lam, energies[order], vectors[:, order])


def _levels(ham: EnsembleHamiltonian, lam: float, L: int) -> SpectrumSlice:
    return eigensystem(ham.at(lam), L, lam)


def gap(inst: ProblemInstance, N: int, lam: float) -> float:
    """E1 - E0 of H(lambda)."""
    return _levels(EnsembleHamiltonian(inst, N), lam, 2).gap


def gap_curve(inst: ProblemInstance, N: int, lambda_grid: Optional[Sequence[float]] = None) -> np.ndarray:
    grid = default_lambda_grid() if lambda_grid is None else np.asarray(lambda_grid, dtype=float)
    ham = EnsembleHamiltonian(inst, N)
    return np.array([_levels(ham, float(lam), 2).gap for lam in grid])


def min_gap(
    inst: ProblemInstance,
    N: int,
    lambda_grid: Optional[Sequence[float]] = None,
    refine: bool = True,
) -> Tuple[float, float]:
    """
    Minimum gap over a lambda grid.

    The coarse minimum (first occurrence, so ties go to the smaller lambda)
    is optionally refined by a bounded scalar search between its grid
    neighbours; the refined point is kept only if it is strictly lower.

    Returns:
        (lambda_star, gap_min)
    """
    grid = default_lambda_grid() if lambda_grid is None else np.sort(np.asarray(lambda_grid, dtype=float))
    if grid.size < 3:
        raise ValueError(f"lambda grid needs at least 3 points, got {grid.size}")
    if grid[0] < 0.0 or grid[-1] > 1.0:
        raise ValueError("lambda grid must lie within [0, 1]")

    ham = EnsembleHamiltonian(inst, N)
    gaps = np.array([_levels(ham, float(lam), 2).gap for lam in grid])
    i = int(np.argmin(gaps))
    lam_star, gap_min = float(grid[i]), float(gaps[i])

    if refine:
        lo, hi = float(grid[max(i - 1, 0)]), float(grid[min(i + 1, grid.size - 1)])
        result = minimize_scalar(
            lambda lam: _levels(ham, lam, 2).gap,
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": REFINE_XTOL},
        )
        if result.success and result.fun < gap_min:
            lam_star, gap_min = float(result.x), float(result.fun)

    logger.debug(f"{inst} N={N}: min gap {gap_min:.6g} at lambda={lam_star:.4f}")
    return lam_star, gap_min


# ============================================================================
# Level classification at lambda = 1
# ============================================================================

def classify_levels(inst: ProblemInstance, N: int, L: Optional[int] = DEFAULT_LEVELS) -> LevelClassification:
    """
    Tag the L lowest H_Z eigenstates (Fock states) relative to the ground corner.

    Levels within ENERGY_TIE_TOL of each other are ordered Equivalent, Error,
    Unresolved, then by basis index. ``L=None`` classifies every level.
    """
    summary = qubit_ground_state(inst)
    if summary.ground_degeneracy > 1:
        raise DegenerateGroundStateError(
            f"level classification needs a unique ground corner, found {summary.ground_degeneracy}"
        )
    sigma_star = summary.sigma_star

    diag = hz_diagonal(inst, N)
    L = diag.size if L is None else min(L, diag.size)
    signs = majority_signs(inst.M, N)
    rank = np.where(
        np.any(signs == 0, axis=1), 2, np.where(np.all(signs == sigma_star, axis=1), 0, 1)
    )

    by_energy = np.argsort(diag, kind="stable")
    sorted_diag = diag[by_energy]
    tol = ENERGY_TIE_TOL * max(1.0, abs(float(sorted_diag[0])))
    group = np.empty(diag.size, dtype=int)
    group[by_energy] = np.concatenate(([0], np.cumsum(np.diff(sorted_diag) > tol)))
    order = np.lexsort((np.arange(diag.size), rank, group))[:L]

    tags = [(EQUIVALENT, ERROR, UNRESOLVED)[r] for r in rank[order]]
    return LevelClassification(sigma_star, order, diag[order], fock_table(inst.M, N)[order], tags)


# ============================================================================
# Scans and statistics
# ============================================================================

def spectrum_scan(
    inst: ProblemInstance,
    N: int,
    lambda_grid: Optional[Sequence[float]] = None,
    L: int = DEFAULT_LEVELS,
) -> pd.DataFrame:
    """
    Lowest levels along the sweep.

    Returns:
        DataFrame with columns (lambda, E0 ... E_{L-1}, gap); L is capped at the dimension
    """
    grid = default_lambda_grid() if lambda_grid is None else np.asarray(lambda_grid, dtype=float)
    dim = ensemble_dim(inst.M, N)
    if L > dim:
        logger.info(f"Requested {L} levels, dimension is {dim}; using {dim}")
        L = dim
    ham = EnsembleHamiltonian(inst, N)

    rows = []
    for lam in grid:
        sl = _levels(ham, float(lam), L)
        row = {"lambda": float(lam)}
        row.update({f"E{n}": float(e) for n, e in enumerate(sl.energies)})
        row["gap"] = sl.gap if L > 1 else np.nan
        rows.append(row)
    columns = ["lambda"] + [f"E{n}" for n in range(L)] + ["gap"]
    return pd.DataFrame(rows, columns=columns)


def _min_gaps_for_instance(
    inst: ProblemInstance,
    N_range: Sequence[int],
    lambda_grid: Optional[Sequence[float]],
    refine: bool,
) -> List[float]:
    return [min_gap(inst, int(N), lambda_grid, refine)[1] for N in N_range]


def min_gap_statistics(
    instances: Sequence[ProblemInstance],
    N_range: Sequence[int],
    lambda_grid: Optional[Sequence[float]] = None,
    refine: bool = False,
    n_jobs: int = 1,
) -> pd.DataFrame:
    """
    Per-N mean of the minimum gap over an instance set, with best and worst instances.

    Best and worst are the instances with the largest and smallest change in
    minimum gap from the smallest N in range to N=7 (the largest N when 7 is
    not in range).

    Returns:
        DataFrame with columns (N, mean, best, worst, best_instance, worst_instance)
    """
    if not instances:
        raise ValueError("instance set is empty")
    N_range = [int(N) for N in N_range]
    if n_jobs == 1:
        table = [_min_gaps_for_instance(inst, N_range, lambda_grid, refine) for inst in instances]
    else:
        table = Parallel(n_jobs=n_jobs)(
            delayed(_min_gaps_for_instance)(inst, N_range, lambda_grid, refine) for inst in instances
        )
    gaps = np.array(table)

    ref = N_range.index(7) if 7 in N_range else len(N_range) - 1
    change = gaps[:, ref] - gaps[:, 0]
    best = int(np.argmax(change))
    worst = int(np.argmin(change))
    logger.info(
        f"✅ Min-gap statistics over {len(instances)} instances: "
        f"best={instances[best]} worst={instances[worst]}"
    )

    return pd.DataFrame({
        "N": N_range,
        "mean": gaps.mean(axis=0),
        "best": gaps[best],
        "worst": gaps[worst],
        "best_instance": [instances[best].name] * len(N_range),
        "worst_instance": [instances[worst].name] * len(N_range),
    })


def ferromagnet_min_gap_table(
    M_range: Sequence[int],
    K_values: Sequence[float],
    lambda_grid: Optional[Sequence[float]] = None,
) -> pd.DataFrame:
    """
    Exact single-qubit (N=1) minimum gap against the mean-field minimum gap.

    Returns:
        DataFrame with columns (M, K, exact_lambda, exact_min_gap, mf_lambda, mf_min_gap)
    """
    grid = default_lambda_grid() if lambda_grid is None else np.asarray(lambda_grid, dtype=float)
    rows: List[Dict[str, float]] = []
    for M in M_range:
        for K in K_values:
            inst = ferromagnetic_instance(int(M), float(K))
            lam_exact, gap_exact = min_gap(inst, 1, grid, refine=False)
            curve = mf_gap_curve(inst, grid)
            j = int(curve["mf_gap"].idxmin())
            rows.append({
                "M": int(M),
                "K": float(K),
                "exact_lambda": lam_exact,
                "exact_min_gap": gap_exact,
                "mf_lambda": float(curve["lambda"].iloc[j]),
                "mf_min_gap": float(curve["mf_gap"].iloc[j]),
            })
    return pd.DataFrame(rows, columns=["M", "K", "exact_lambda", "exact_min_gap", "mf_lambda", "mf_min_gap"])
