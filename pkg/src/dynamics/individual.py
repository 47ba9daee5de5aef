"""
Individual-Qubit Dephasing in the Full Space
============================================

Every physical qubit dephases on its own, which breaks permutation symmetry,
so the state lives in the full 2^(NM) space. Qubits are ordered ensemble by
ensemble (ensemble 0 most significant); bit 1 is a flipped (down) spin, so
index 0 is the all-up state, matching the Dicke label k = number of flips.

Only small systems fit: N*M is capped by the configured full-space guard.
"""
import logging
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.special import comb

from dynamics.evolution import (
    QuantumState,
    RunResult,
    ScheduleSpec,
    check_gammas,
    ground_configuration,
    check_density,
    default_steps,
    logical_success,
)
from dynamics.integrator import propagate
from operators.symspace import EnsembleHamiltonian, ensemble_dim
from problems.instances import ProblemInstance
from utils.config import get_settings
from utils.errors import GuardLimitError

logger = logging.getLogger(__name__)


def check_guard(M: int, N: int) -> None:
    limit = get_settings().fullspace_guard
    if N * M > limit:
        raise GuardLimitError(
            f"individual dephasing needs 2^{N * M} states; guard is N*M <= {limit}"
        )


def qubit_bits(M: int, N: int) -> np.ndarray:
    """Bit table of the full basis, shape (2^(NM), NM); 1 marks a flipped qubit."""
    n_qubits = N * M
    index = np.arange(1 << n_qubits)
    shifts = np.arange(n_qubits - 1, -1, -1)
    return (index[:, None] >> shifts) & 1


def flip_counts(M: int, N: int) -> np.ndarray:
    """Flipped-qubit count per ensemble for every full basis state, shape (2^(NM), M)."""
    bits = qubit_bits(M, N)
    return bits.reshape(bits.shape[0], M, N).sum(axis=2)


def fock_labels(M: int, N: int) -> np.ndarray:
    """Symmetric-space basis index of the Fock label of every full basis state."""
    counts = flip_counts(M, N)
    return np.ravel_multi_index(tuple(counts.T), (N + 1,) * M)


def symmetric_embedding(M: int, N: int) -> sp.csr_matrix:
    """
    Isometry from the (N+1)^M symmetric space into the 2^(NM) space.

    Column k is the product of normalized Dicke states |D_N, k_i>.
    """
    check_guard(M, N)
    counts = flip_counts(M, N)
    values = 1.0 / np.sqrt(np.prod(comb(N, counts), axis=1))
    rows = np.arange(counts.shape[0])
    cols = fock_labels(M, N)
    return sp.csr_matrix((values, (rows, cols)), shape=(counts.shape[0], ensemble_dim(M, N)))


class FullSpaceHamiltonian(EnsembleHamiltonian):
    """H(lambda) built from per-qubit Paulis summed into the collective spins."""

    def __init__(self, inst: ProblemInstance, N: int):
        check_guard(inst.M, N)
        self.inst = inst
        self.M = inst.M
        self.N = N

        n_qubits = N * inst.M
        dim = 1 << n_qubits
        S = N - 2.0 * flip_counts(inst.M, N)
        self.hz = np.einsum("ci,ij,cj->c", S, inst.J, S) / N + S @ inst.K

        # H_X = -sum of sigma^x over every qubit: one bit flip per entry
        index = np.arange(dim)
        rows = np.tile(index, n_qubits)
        cols = np.concatenate([index ^ (1 << q) for q in range(n_qubits)])
        data = -np.ones(rows.size)
        self.HX = sp.csr_matrix((data, (rows, cols)), shape=(dim, dim))


def hamming_weights(M: int, N: int) -> np.ndarray:
    """Hamming distance between every pair of full basis states."""
    bits = qubit_bits(M, N).astype(float)
    return bits @ (1.0 - bits).T + (1.0 - bits) @ bits.T


def evolve_individual_dephasing(
    inst: ProblemInstance,
    N: int,
    schedule: ScheduleSpec,
    gamma_z: float = 0.0,
    steps: Optional[int] = None,
    sigma_star: Optional[Sequence[int]] = None,
) -> RunResult:
    """
    Integrate d rho/dt = i[rho, H] - Gamma_z sum_{n,k} (rho - sigma^z rho sigma^z).

    sigma^z is diagonal, so the dissipator multiplies rho_ab by
    -2 Gamma_z times the Hamming distance of a and b.

    Raises:
        GuardLimitError: N*M above the configured guard
    """
    check_gammas(gamma_z, 0.0)
    check_guard(inst.M, N)
    steps = steps or default_steps(schedule.tau)
    ham = FullSpaceHamiltonian(inst, N)
    damping = 2.0 * gamma_z * hamming_weights(inst.M, N) if gamma_z > 0.0 else None

    def rhs(t: float, rho: np.ndarray) -> np.ndarray:
        lam = schedule.lam(t)
        out = -1j * (ham.apply(lam, rho) - ham.apply_right(lam, rho))
        if damping is not None:
            out -= damping * rho
        return out

    dim = ham.dim
    psi0 = np.full(dim, 1.0 / np.sqrt(dim), dtype=complex)
    logger.info(
        f"🔮 Full-space sweep {inst} N={N} ({N * inst.M} qubits) tau={schedule.tau} "
        f"Gamma_z={gamma_z} steps={steps}"
    )
    rho = propagate(rhs, np.outer(psi0, psi0.conj()), schedule.tau, steps)

    diagnostics = check_density(rho, "final full-space state")
    probs = np.clip(np.real(np.diag(rho)), 0.0, None)
    populations = np.bincount(fock_labels(inst.M, N), weights=probs, minlength=ensemble_dim(inst.M, N))
    sigma = ground_configuration(inst, sigma_star)
    return RunResult(
        state=QuantumState(rho, inst.M, N, full_space=True),
        populations=populations,
        schedule=schedule,
        steps=steps,
        mode="individual",
        gamma_z=gamma_z,
        norm_drift=diagnostics["trace_drift"],
        hermiticity=diagnostics["hermiticity"],
        min_eigenvalue=diagnostics["min_eigenvalue"],
        success=logical_success(populations, sigma, N),
    )
