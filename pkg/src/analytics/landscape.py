"""
Classical Energy Landscape of H_Z
=================================

Works with the rescaled energy E(x) = H_Z / N evaluated at mean spins
x_i = <S_i^z>/N in [-1, 1]^M. At hypercube corners x = sigma this is the
qubit energy, so ensemble corners carry N times the qubit energy.

Features:
- Corner enumeration: qubit ground state, lowest two distinct corner energies
- Gap formulas: corner gap Delta(N) = N (eps1 - eps0) and single-flip gap delta
- Critical ensemble size N_c, the smallest N with Delta > delta
- Ground-corner gradient and trajectory energies f(eps), F(eps) as executable checks
- Monte Carlo fraction of random instances with Delta < delta
"""
import logging
import math
from dataclasses import dataclass
from itertools import product
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from problems.instances import ProblemInstance, as_spin_configuration, random_instance
from utils.config import get_settings
from utils.errors import DegenerateGroundStateError, GuardLimitError

logger = logging.getLogger(__name__)

# Corner energies closer than this (relative to the energy scale) are ties
ENERGY_TIE_TOL = 1e-9
# Relative slack when deciding N * (eps1 - eps0) > delta; equality never qualifies
RATIO_TOL = 1e-9
ENUM_CHUNK = 1 << 16


@dataclass
class LandscapeSummary:
    """Qubit ground state and gap data of one instance."""
    sigma_star: np.ndarray
    eps0: float
    eps1: Optional[float]
    ground_degeneracy: int
    excited_degeneracy: int
    delta: Optional[float] = None
    Nc: Optional[int] = None

    @property
    def unique_ground(self) -> bool:
        return self.ground_degeneracy == 1 and self.eps1 is not None

    def Delta(self, N: int) -> float:
        """Corner gap for ensemble size N."""
        if self.eps1 is None:
            raise DegenerateGroundStateError("all corners share one energy; Delta is undefined")
        return N * (self.eps1 - self.eps0)

    def to_dict(self, N: Optional[int] = None) -> dict:
        out = {
            "sigma_star": self.sigma_star.tolist(),
            "eps0": self.eps0,
            "eps1": self.eps1,
            "ground_degeneracy": self.ground_degeneracy,
            "excited_degeneracy": self.excited_degeneracy,
            "delta": self.delta,
            "Nc": self.Nc,
        }
        if N is not None and self.eps1 is not None:
            out["N"] = N
            out["Delta"] = self.Delta(N)
        return out


# ============================================================================
# Energies
# ============================================================================

def rescaled_energy(inst: ProblemInstance, x: Sequence[float]) -> float:
    """E(x) = sum_{i,j} J_ij x_i x_j + sum_i K_i x_i for x in [-1, 1]^M."""
    x = np.asarray(x, dtype=float)
    if x.shape != (inst.M,):
        raise ValueError(f"x must have length M={inst.M}, got shape {x.shape}")
    return float(x @ inst.J @ x + inst.K @ x)


def corner_energy(inst: ProblemInstance, sigma: Sequence[int]) -> float:
    """Qubit energy of a spin configuration (double sum over ordered pairs)."""
    sigma = as_spin_configuration(sigma, inst.M)
    return rescaled_energy(inst, sigma)


def corner_from_index(index: int, M: int) -> np.ndarray:
    """Corner number ``index`` in lexicographic order with -1 < +1, sigma_1 slowest."""
    bits = (index >> np.arange(M - 1, -1, -1)) & 1
    return (2 * bits - 1).astype(int)


def _corner_energies(inst: ProblemInstance) -> np.ndarray:
    M = inst.M
    limit = get_settings().enum_guard
    if M > limit:
        raise GuardLimitError(f"corner enumeration needs 2^{M} states; guard is M <= {limit}")
    total = 1 << M
    shifts = np.arange(M - 1, -1, -1)
    energies = np.empty(total)
    for start in range(0, total, ENUM_CHUNK):
        idx = np.arange(start, min(start + ENUM_CHUNK, total))
        S = (((idx[:, None] >> shifts) & 1) * 2 - 1).astype(float)
        energies[idx] = np.einsum("ci,ij,cj->c", S, inst.J, S) + S @ inst.K
    return energies


def qubit_ground_state(inst: ProblemInstance) -> LandscapeSummary:
    """
    Enumerate all 2^M corners.

    Returns:
        LandscapeSummary with sigma_star, eps0, eps1 (second-lowest distinct
        corner energy, None when every corner is degenerate) and the
        multiplicities of both levels. delta and Nc are left unset.
    """
    energies = _corner_energies(inst)
    eps0 = float(energies.min())
    tol = ENERGY_TIE_TOL * max(1.0, abs(eps0))
    ground_mask = energies <= eps0 + tol
    ground_index = int(np.flatnonzero(ground_mask)[0])

    rest = energies[~ground_mask]
    if rest.size:
        eps1 = float(rest.min())
        excited_degeneracy = int(np.count_nonzero(np.abs(energies - eps1) <= tol))
    else:
        eps1 = None
        excited_degeneracy = 0

    return LandscapeSummary(
        sigma_star=corner_from_index(ground_index, inst.M),
        eps0=eps0,
        eps1=eps1,
        ground_degeneracy=int(np.count_nonzero(ground_mask)),
        excited_degeneracy=excited_degeneracy,
    )


def _require_unique(summary: LandscapeSummary, what: str) -> None:
    if summary.ground_degeneracy > 1:
        raise DegenerateGroundStateError(
            f"{what} is undefined: qubit ground state is {summary.ground_degeneracy}-fold degenerate"
        )
    if summary.eps1 is None:
        raise DegenerateGroundStateError(f"{what} is undefined: all corners are degenerate")


def single_flip_energies(inst: ProblemInstance, sigma: Sequence[int]) -> np.ndarray:
    """-2 sigma_k (K_k + 2 sum_j J_kj sigma_j) for every k."""
    sigma = as_spin_configuration(sigma, inst.M)
    return -2.0 * sigma * (inst.K + 2.0 * inst.J @ sigma)


def delta_gap(inst: ProblemInstance, summary: Optional[LandscapeSummary] = None) -> float:
    """Smallest single-flip excitation energy above the unique ground corner."""
    summary = summary or qubit_ground_state(inst)
    _require_unique(summary, "delta")
    return float(single_flip_energies(inst, summary.sigma_star).min())


def Delta_gap(inst: ProblemInstance, N: int, summary: Optional[LandscapeSummary] = None) -> float:
    """Corner gap N (eps1 - eps0)."""
    summary = summary or qubit_ground_state(inst)
    return summary.Delta(N)


def _smallest_exceeding(delta: float, gap: float) -> int:
    # smallest integer N with N * gap > delta, near-equality counted as equality
    ratio = delta / gap
    return int(math.floor(ratio + RATIO_TOL * max(1.0, abs(ratio)))) + 1


def critical_ensemble_size(inst: ProblemInstance, summary: Optional[LandscapeSummary] = None) -> int:
    """Smallest N such that Delta(N) > delta."""
    summary = summary or qubit_ground_state(inst)
    _require_unique(summary, "N_c")
    delta = delta_gap(inst, summary)
    return _smallest_exceeding(delta, summary.eps1 - summary.eps0)


def landscape_summary(inst: ProblemInstance) -> LandscapeSummary:
    """Full summary; delta and Nc stay None for degenerate ground states."""
    summary = qubit_ground_state(inst)
    if summary.unique_ground:
        summary.delta = delta_gap(inst, summary)
        summary.Nc = critical_ensemble_size(inst, summary)
    else:
        logger.warning(f"⚠️  {inst}: degenerate ground corner, delta and N_c undefined")
    return summary


def ferromagnet_closed_forms(M: int, K: float, N: int) -> Tuple[float, float, int]:
    """
    Closed forms for the ferromagnet J_ij = -(1 - delta_ij), K_i = K > 0.

    Returns:
        (Delta, delta, Nc) with Delta = 2KNM, delta = 4(M-1) + 2K and
        Nc = floor((2M + K - 2)/(KM) + 1)
    """
    if K <= 0:
        raise DegenerateGroundStateError("ferromagnet closed forms need K > 0")
    Delta = 2.0 * K * N * M
    delta = 4.0 * (M - 1) + 2.0 * K
    Nc = _smallest_exceeding(delta, 2.0 * K * M)
    return Delta, delta, Nc


# ============================================================================
# Trajectories from the ground corner
# ============================================================================

def ground_gradient(inst: ProblemInstance, sigma_star: Sequence[int]) -> np.ndarray:
    """dE/d eps_k at the ground corner: -2 sigma_k (2 sum_i J_ik sigma_i + K_k)."""
    return single_flip_energies(inst, sigma_star)


def corner_trajectory_energy(
    inst: ProblemInstance,
    sigma_star: Sequence[int],
    n: Sequence[int],
    eps: float,
) -> float:
    """f_n(eps) = E(x(eps)) - E0 with x_i = sigma_i (1 - 2 n_i eps), n in {0,1}^M."""
    sigma = as_spin_configuration(sigma_star, inst.M)
    n = np.asarray(n)
    if n.shape != (inst.M,) or not np.all(np.isin(n, (0, 1))):
        raise ValueError("n must be a 0/1 vector of length M")
    if not n.any():
        raise ValueError("n must select at least one spin")
    x = sigma * (1.0 - 2.0 * n * eps)
    return rescaled_energy(inst, x) - rescaled_energy(inst, sigma)


def trajectory_energy(
    inst: ProblemInstance,
    sigma_star: Sequence[int],
    alpha: Sequence[float],
    eps: float,
) -> float:
    """
    F(eps) along eps_i = alpha_i eps, written as

        F = sum_{i != j} D_ij alpha_i alpha_j + sum_i C_i alpha_i
        D_ij = 4 eps^2 J_ij s_i s_j
        C_i = -2 eps (K_i s_i + 2 sum_{j != i} J_ij s_i s_j)

    Requires alpha in [0, 1]^M with max(alpha) = 1.
    """
    sigma = as_spin_configuration(sigma_star, inst.M).astype(float)
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (inst.M,):
        raise ValueError(f"alpha must have length M={inst.M}")
    if np.any(alpha < 0.0) or np.any(alpha > 1.0) or not np.isclose(alpha.max(), 1.0, atol=1e-12):
        raise ValueError("alpha must lie in [0, 1]^M with max(alpha) = 1")

    Jss = inst.J * np.outer(sigma, sigma)  # zero diagonal
    D = 4.0 * eps ** 2 * Jss
    C = -2.0 * eps * (inst.K * sigma + 2.0 * Jss.sum(axis=1))
    return float(alpha @ D @ alpha + C @ alpha)


def trajectory_samples(
    inst: ProblemInstance,
    eps_grid: Sequence[float],
    n_list: Optional[List[Sequence[int]]] = None,
    summary: Optional[LandscapeSummary] = None,
) -> pd.DataFrame:
    """
    Tabulate f_n(eps) from the ground corner to other corners.

    Args:
        inst: Problem instance
        eps_grid: Positions along each trajectory
        n_list: Trajectories; defaults to all 2^M - 1 non-zero n
        summary: Precomputed ground-state summary

    Returns:
        DataFrame with columns (n, eps, f)
    """
    summary = summary or qubit_ground_state(inst)
    if n_list is None:
        n_list = [n for n in product((0, 1), repeat=inst.M) if any(n)]
    rows = []
    for n in n_list:
        label = "".join(str(int(b)) for b in n)
        for eps in eps_grid:
            rows.append({
                "n": label,
                "eps": float(eps),
                "f": corner_trajectory_energy(inst, summary.sigma_star, n, float(eps)),
            })
    return pd.DataFrame(rows, columns=["n", "eps", "f"])


# ============================================================================
# Random-instance statistics
# ============================================================================

def _gap_ratio(M: int, seed: int) -> Optional[float]:
    inst = random_instance(M, seed)
    summary = qubit_ground_state(inst)
    if not summary.unique_ground:
        return None
    return delta_gap(inst, summary) / (summary.eps1 - summary.eps0)


def derive_seeds(seed: int, count: int) -> List[int]:
    """Per-sample seeds derived from one root seed."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(count)]


def nc_fraction_curve(
    M: int,
    N_values: Sequence[int],
    samples: int,
    seed: int,
    n_jobs: int = 1,
) -> pd.DataFrame:
    """
    Fraction of random instances with N (eps1 - eps0) < delta for every N.

    The same instance set (derived from ``seed``) is used for all N, so the
    fraction is nonincreasing in N. Degenerate samples count as not
    satisfying Delta < delta.

    Returns:
        DataFrame with columns (N, fraction, samples, degenerate)
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    seeds = derive_seeds(seed, samples)
    if n_jobs == 1:
        ratios = [_gap_ratio(M, s) for s in seeds]
    else:
        ratios = Parallel(n_jobs=n_jobs)(delayed(_gap_ratio)(M, s) for s in seeds)

    degenerate = sum(r is None for r in ratios)
    if degenerate:
        logger.warning(f"⚠️  {degenerate}/{samples} degenerate samples counted as Delta >= delta")
    valid = np.array([r for r in ratios if r is not None])

    rows = []
    for N in N_values:
        # N (eps1 - eps0) < delta  <=>  N < delta / (eps1 - eps0)
        count = int(np.count_nonzero(N < valid))
        rows.append({"N": int(N), "fraction": count / samples, "samples": samples, "degenerate": degenerate})
    return pd.DataFrame(rows, columns=["N", "fraction", "samples", "degenerate"])


def nc_fraction(M: int, N: int, samples: int, seed: int, n_jobs: int = 1) -> float:
    """Fraction of ``samples`` random instances with Delta < delta at ensemble size N."""
    return float(nc_fraction_curve(M, [N], samples, seed, n_jobs)["fraction"].iloc[0])


def loglog_slope(N_values: Sequence[float], fractions: Sequence[float]) -> float:
    """Least-squares slope of log(fraction) against log(N), zero fractions skipped."""
    N_values = np.asarray(N_values, dtype=float)
    fractions = np.asarray(fractions, dtype=float)
    keep = fractions > 0
    if np.count_nonzero(keep) < 2:
        raise ValueError("need at least two nonzero fractions to fit a slope")
    slope, _ = np.polyfit(np.log(N_values[keep]), np.log(fractions[keep]), 1)
    return float(slope)
