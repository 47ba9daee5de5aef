"""
Annealing Dynamics on the Symmetric Subspace
============================================

Linear sweep lambda(t) = t / tau starting from the ground state of H_X.

Features:
- Pure Schrodinger evolution of the state vector
- Collective-dephasing master equation with S^z and/or S^x jump operators
- State diagnostics (norm, trace, Hermiticity, positivity) at every checkpoint
- Step-halving convergence check
"""
import logging
import math
from dataclasses import dataclass
from functools import reduce
from typing import Any, Callable, Dict, Iterable, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field
from scipy.special import comb

from analytics.landscape import qubit_ground_state
from dynamics.integrator import propagate, sample_steps
from operators.symspace import EnsembleHamiltonian, collective_op, equivalent_mask, fock_table
from problems.instances import ProblemInstance, as_spin_configuration
from utils.errors import DegenerateGroundStateError, IntegrationError

logger = logging.getLogger(__name__)

DEFAULT_DT = 0.01
MIN_STEPS = 10_000
NORM_TOL = 1e-6
TRACE_TOL = 1e-6
HERMITIAN_TOL = 1e-8
POSITIVITY_WARN = -1e-8
POSITIVITY_FAIL = -1e-6

DensityCallback = Callable[[float, float, np.ndarray], None]


class ScheduleSpec(BaseModel):
    """Annealing schedule; only the linear ramp is supported."""
    tau: float = Field(gt=0.0)
    shape: Literal["linear"] = "linear"

    class Config:
        json_schema_extra = {"example": {"tau": 100.0, "shape": "linear"}}

    def lam(self, t: float) -> float:
        return min(max(t / self.tau, 0.0), 1.0)


def default_steps(tau: float) -> int:
    """Step count for dt = min(0.01, tau / 10^4)."""
    return max(MIN_STEPS, int(math.ceil(tau / DEFAULT_DT - 1e-9)))


@dataclass
class QuantumState:
    data: np.ndarray
    M: int
    N: int
    full_space: bool = False

    @property
    def is_density(self) -> bool:
        return self.data.ndim == 2

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def density_matrix(self) -> np.ndarray:
        if self.is_density:
            return self.data
        return np.outer(self.data, self.data.conj())


@dataclass
class RunResult:
    """
    Final state of one sweep.

    ``populations`` are probabilities of the Fock labels k (the H_Z
    eigenbasis); full-space runs are aggregated by flipped-spin count per
    ensemble, which is what a total-spin measurement reads.
    """
    state: QuantumState
    populations: np.ndarray
    schedule: ScheduleSpec
    steps: int
    mode: str
    gamma_z: float = 0.0
    gamma_x: float = 0.0
    norm_drift: float = 0.0
    hermiticity: Optional[float] = None
    min_eigenvalue: Optional[float] = None
    success: Optional[float] = None

    @property
    def dt(self) -> float:
        return self.schedule.tau / self.steps

    @property
    def error(self) -> Optional[float]:
        return None if self.success is None else 1.0 - self.success

    def to_row(self) -> Dict[str, Any]:
        return {
            "N": self.state.N,
            "tau": self.schedule.tau,
            "Gamma_z": self.gamma_z,
            "Gamma_x": self.gamma_x,
            "success": self.success,
            "error": self.error,
            "steps": self.steps,
            "norm_drift": self.norm_drift,
        }


# ============================================================================
# Initial state and bookkeeping
# ============================================================================

def coherent_x_state(N: int) -> np.ndarray:
    """+x spin-coherent state of one ensemble in the Dicke basis: sqrt(C(N,k)) / 2^(N/2)."""
    k = np.arange(N + 1)
    return np.sqrt(comb(N, k)) / 2.0 ** (N / 2.0)


def initial_state(M: int, N: int) -> np.ndarray:
    """Ground state of H_X: product of +x coherent states, built analytically."""
    single = coherent_x_state(N)
    return reduce(np.kron, [single] * M).astype(complex)


def ground_configuration(inst: ProblemInstance, sigma_star: Optional[Sequence[int]]) -> Optional[np.ndarray]:
    if sigma_star is not None:
        return as_spin_configuration(sigma_star, inst.M)
    summary = qubit_ground_state(inst)
    if summary.ground_degeneracy > 1:
        logger.warning(f"⚠️  {inst}: degenerate ground corner, success probability not reported")
        return None
    return summary.sigma_star


def logical_success(populations: np.ndarray, sigma_star: Optional[np.ndarray], N: int) -> Optional[float]:
    """Total probability of Fock labels whose majority vote equals sigma_star."""
    if sigma_star is None:
        return None
    return float(populations[equivalent_mask(sigma_star, N)].sum())


def check_density(rho: np.ndarray, where: str) -> Dict[str, float]:
    """
    Trace, Hermiticity and positivity diagnostics.

    Raises:
        IntegrationError: trace off by more than TRACE_TOL, Hermiticity worse
            than HERMITIAN_TOL or an eigenvalue below POSITIVITY_FAIL
    """
    trace_drift = abs(np.trace(rho).real - 1.0)
    hermiticity = float(np.max(np.abs(rho - rho.conj().T)))
    min_eig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
    if trace_drift > TRACE_TOL:
        raise IntegrationError(f"{where}: trace drifted by {trace_drift:.3e}")
    if hermiticity > HERMITIAN_TOL:
        raise IntegrationError(f"{where}: Hermiticity violated by {hermiticity:.3e}")
    if min_eig < POSITIVITY_FAIL:
        raise IntegrationError(f"{where}: density matrix eigenvalue {min_eig:.3e}")
    if min_eig < POSITIVITY_WARN:
        logger.warning(f"⚠️  {where}: small negative eigenvalue {min_eig:.3e}")
    return {"trace_drift": trace_drift, "hermiticity": hermiticity, "min_eigenvalue": min_eig}


def check_gammas(gamma_z: float, gamma_x: float) -> None:
    if gamma_z < 0.0 or gamma_x < 0.0:
        raise ValueError(f"dephasing rates must be nonnegative, got Gamma_z={gamma_z}, Gamma_x={gamma_x}")


# ============================================================================
# Pure evolution
# ============================================================================

def evolve_pure(
    inst: ProblemInstance,
    N: int,
    schedule: ScheduleSpec,
    steps: Optional[int] = None,
    sigma_star: Optional[Sequence[int]] = None,
) -> RunResult:
    """
    Integrate i d|psi>/dt = H(lambda(t)) |psi> over the sweep.

    H is integrated relative to (1-lambda) E_X + lambda E_Z, the linear
    interpolation of the endpoint ground energies; this changes only the
    global phase and keeps RK4 norm loss small.

    Raises:
        IntegrationError: norm drift above NORM_TOL
    """
    steps = steps or default_steps(schedule.tau)
    ham = EnsembleHamiltonian(inst, N)
    e_x = -float(N * inst.M)
    e_z = float(ham.hz.min())

    def rhs(t: float, psi: np.ndarray) -> np.ndarray:
        lam = schedule.lam(t)
        reference = (1.0 - lam) * e_x + lam * e_z
        return -1j * (ham.apply(lam, psi) - reference * psi)

    logger.info(f"🔮 Pure sweep {inst} N={N} tau={schedule.tau} steps={steps}")
    psi = propagate(rhs, initial_state(inst.M, N), schedule.tau, steps)

    norm_drift = abs(float(np.linalg.norm(psi)) - 1.0)
    if norm_drift > NORM_TOL:
        raise IntegrationError(
            f"norm drifted by {norm_drift:.3e} with {steps} steps; increase steps"
        )
    populations = np.abs(psi) ** 2
    sigma = ground_configuration(inst, sigma_star)
    return RunResult(
        state=QuantumState(psi, inst.M, N),
        populations=populations,
        schedule=schedule,
        steps=steps,
        mode="pure",
        norm_drift=norm_drift,
        success=logical_success(populations, sigma, N),
    )


# ============================================================================
# Collective dephasing
# ============================================================================

def collective_z_weights(M: int, N: int) -> np.ndarray:
    """sum_n (s_n(a) - s_n(b))^2 for S^z eigenvalues s_n; S^z dephasing is elementwise."""
    s = N - 2.0 * fock_table(M, N)
    weights = np.zeros((s.shape[0], s.shape[0]))
    for n in range(M):
        weights += (s[:, n][:, None] - s[:, n][None, :]) ** 2
    return weights


def lindblad_rhs(
    ham: EnsembleHamiltonian,
    schedule: ScheduleSpec,
    gamma_z: float,
    gamma_x: float,
) -> Callable[[float, np.ndarray], np.ndarray]:
    """
    Right-hand side i[rho, H] - (G/2) sum_n (rho S_n^2 - 2 S_n rho S_n + S_n^2 rho), applied matrix-free.
    """
    wz = 0.5 * gamma_z * collective_z_weights(ham.M, ham.N) if gamma_z > 0.0 else None
    sx = []
    if gamma_x > 0.0:
        for site in range(ham.M):
            S = collective_op(ham.M, ham.N, site, "x").matrix
            sx.append((S, (S @ S).tocsr()))

    def rhs(t: float, rho: np.ndarray) -> np.ndarray:
        lam = schedule.lam(t)
        out = -1j * (ham.apply(lam, rho) - ham.apply_right(lam, rho))
        if wz is not None:
            out -= wz * rho
        for S, S2 in sx:
            # S and S^2 are real symmetric: rho X = (X rho^T)^T
            rho_s = (S @ rho.T).T
            out -= 0.5 * gamma_x * ((S2 @ rho.T).T - 2.0 * (S @ rho_s) + S2 @ rho)
        return out

    return rhs


def evolve_lindblad(
    inst: ProblemInstance,
    N: int,
    schedule: ScheduleSpec,
    gamma_z: float = 0.0,
    gamma_x: float = 0.0,
    steps: Optional[int] = None,
    sigma_star: Optional[Sequence[int]] = None,
    sample_times: Optional[Iterable[float]] = None,
    on_sample: Optional[DensityCallback] = None,
) -> RunResult:
    """
    Integrate the collective-dephasing master equation over the sweep.

    Args:
        inst: Problem instance
        N: Ensemble size
        schedule: Sweep schedule
        gamma_z: Collective S^z dephasing rate
        gamma_x: Collective S^x dephasing rate
        steps: RK4 steps (default from ``default_steps``)
        sigma_star: Ground configuration for the success probability
        sample_times: Times at which the state is checked and passed to ``on_sample``
        on_sample: Callback receiving (t, lambda, rho)
    """
    check_gammas(gamma_z, gamma_x)
    steps = steps or default_steps(schedule.tau)
    ham = EnsembleHamiltonian(inst, N)
    psi0 = initial_state(inst.M, N)
    rho0 = np.outer(psi0, psi0.conj())

    def checkpoint(n: int, t: float, rho: np.ndarray) -> None:
        check_density(rho, f"t={t:.4g}")
        if on_sample is not None:
            on_sample(t, schedule.lam(t), rho)

    samples = sample_steps(sample_times, schedule.tau, steps) if sample_times is not None else []
    logger.info(
        f"🔮 Lindblad sweep {inst} N={N} tau={schedule.tau} "
        f"Gamma_z={gamma_z} Gamma_x={gamma_x} steps={steps}"
    )
    rho = propagate(lindblad_rhs(ham, schedule, gamma_z, gamma_x), rho0, schedule.tau, steps, samples, checkpoint)

    diagnostics = check_density(rho, "final state")
    populations = np.clip(np.real(np.diag(rho)), 0.0, None)
    sigma = ground_configuration(inst, sigma_star)
    return RunResult(
        state=QuantumState(rho, inst.M, N),
        populations=populations,
        schedule=schedule,
        steps=steps,
        mode="lindblad",
        gamma_z=gamma_z,
        gamma_x=gamma_x,
        norm_drift=diagnostics["trace_drift"],
        hermiticity=diagnostics["hermiticity"],
        min_eigenvalue=diagnostics["min_eigenvalue"],
        success=logical_success(populations, sigma, N),
    )


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Half the trace norm of rho - sigma."""
    diff = rho - sigma
    return 0.5 * float(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))).sum())


def step_halving_check(
    run: Callable[..., RunResult],
    inst: ProblemInstance,
    N: int,
    schedule: ScheduleSpec,
    steps: Optional[int] = None,
    **kwargs: Any,
) -> Dict[str, float]:
    """
    Change in success probability when the step count is doubled.

    Args:
        run: ``evolve_pure``, ``evolve_lindblad`` or ``evolve_individual_dephasing``
        steps: Baseline step count (default from ``default_steps``)
        kwargs: Passed through to ``run``
    """
    steps = steps or default_steps(schedule.tau)
    coarse = run(inst, N, schedule, steps=steps, **kwargs)
    fine = run(inst, N, schedule, steps=2 * steps, **kwargs)
    if coarse.success is None or fine.success is None:
        raise DegenerateGroundStateError("step-halving check needs a unique ground corner")
    change = abs(fine.success - coarse.success)
    logger.info(f"Step halving at {steps} steps changes success by {change:.3e}")
    return {"steps": steps, "success": coarse.success, "success_halved": fine.success, "change": change}
