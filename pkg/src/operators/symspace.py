"""
Symmetric-Subspace Operators
============================

Each ensemble of N qubits is restricted to its permutation-symmetric (Dicke)
subspace of dimension N+1, labeled by the flipped-spin count k:

    S^z |k> = (N - 2k) |k>
    <k+1| S^x |k> = sqrt((k+1)(N-k))

so |k=0> is the all-up state. M ensembles are combined by Kronecker products
in row-major order (ensemble 0 slowest), giving dimension (N+1)^M.

Sites are addressed 0..M-1.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from problems.instances import ProblemInstance, as_spin_configuration

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class EnsembleOperator:
    """Sparse operator on the (N+1)^M symmetric space."""
    matrix: sp.csr_matrix
    M: int
    N: int

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        diff = self.matrix - self.matrix.conj().T
        return diff.nnz == 0 or float(np.abs(diff.data).max()) <= tol

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()


def ensemble_dim(M: int, N: int) -> int:
    return (N + 1) ** M


def _check_sizes(M: int, N: int) -> None:
    if M < 1:
        raise ValueError(f"M must be at least 1, got {M}")
    if N < 1:
        raise ValueError(f"N must be at least 1, got {N}")


# ============================================================================
# Single-ensemble Dicke ladder
# ============================================================================

def dicke_sz(N: int) -> sp.csr_matrix:
    """S^z on one ensemble: diag(N, N-2, ..., -N)."""
    return sp.diags(N - 2.0 * np.arange(N + 1), format="csr")


def dicke_sx(N: int) -> sp.csr_matrix:
    """S^x on one ensemble: tridiagonal with sqrt((k+1)(N-k)) off the diagonal."""
    k = np.arange(N)
    off = np.sqrt((k + 1.0) * (N - k))
    return sp.diags([off, off], [-1, 1], format="csr")


def collective_op(M: int, N: int, site: int, axis: str) -> EnsembleOperator:
    """
    Collective spin operator S_site^axis embedded in the M-ensemble space.

    Args:
        M: Number of ensembles
        N: Ensemble size
        site: Ensemble index in range(M)
        axis: "x" or "z"
    """
    _check_sizes(M, N)
    if not 0 <= site < M:
        raise ValueError(f"site {site} out of range for M={M}")
    if axis == "z":
        local = dicke_sz(N)
    elif axis == "x":
        local = dicke_sx(N)
    else:
        raise ValueError(f"axis must be 'x' or 'z', got {axis!r}")

    left = sp.identity((N + 1) ** site, format="csr")
    right = sp.identity((N + 1) ** (M - site - 1), format="csr")
    matrix = sp.kron(sp.kron(left, local), right, format="csr")
    return EnsembleOperator(matrix, M, N)


# ============================================================================
# Fock basis bookkeeping
# ============================================================================

def fock_table(M: int, N: int) -> np.ndarray:
    """All Fock indices in basis order, shape ((N+1)^M, M)."""
    _check_sizes(M, N)
    grids = np.indices((N + 1,) * M).reshape(M, -1)
    return grids.T.copy()


def fock_to_index(k: Sequence[int], N: int) -> int:
    """Flat basis index of a Fock index k."""
    k = np.asarray(k, dtype=int)
    if np.any(k < 0) or np.any(k > N):
        raise ValueError(f"Fock index {k.tolist()} outside [0, {N}]")
    return int(np.ravel_multi_index(tuple(k), (N + 1,) * len(k)))


def index_to_fock(index: int, M: int, N: int) -> np.ndarray:
    """Fock index of a flat basis index."""
    if not 0 <= index < ensemble_dim(M, N):
        raise ValueError(f"basis index {index} outside [0, {ensemble_dim(M, N)})")
    return np.array(np.unravel_index(index, (N + 1,) * M), dtype=int)


def extreme_fock(sigma: Sequence[int], N: int) -> np.ndarray:
    """Fully polarized Fock index for a corner: k_i = 0 for +1, N for -1."""
    sigma = as_spin_configuration(sigma)
    return np.where(sigma > 0, 0, N)


def majority_label(k: Sequence[int], N: int) -> Optional[np.ndarray]:
    """
    Majority-vote spin configuration sgn(N - 2 k_i).

    Returns:
        The configuration, or None (unresolved) when some k_i = N/2
    """
    k = np.asarray(k, dtype=int)
    if np.any(k < 0) or np.any(k > N):
        raise ValueError(f"Fock index {k.tolist()} outside [0, {N}]")
    signs = np.sign(N - 2 * k)
    if np.any(signs == 0):
        return None
    return signs.astype(int)


def majority_signs(M: int, N: int) -> np.ndarray:
    """sgn(N - 2 k_i) for every basis state, shape ((N+1)^M, M); 0 marks a tie."""
    return np.sign(N - 2 * fock_table(M, N)).astype(int)


def equivalent_mask(sigma: Sequence[int], N: int) -> np.ndarray:
    """Basis states whose majority vote equals sigma."""
    sigma = as_spin_configuration(sigma)
    return np.all(majority_signs(len(sigma), N) == sigma, axis=1)


# ============================================================================
# Hamiltonians
# ============================================================================

def hz_diagonal(inst: ProblemInstance, N: int) -> np.ndarray:
    """Diagonal of H_Z = (1/N) sum J_ij S_i^z S_j^z + sum K_i S_i^z."""
    S = (N - 2.0 * fock_table(inst.M, N))
    return np.einsum("ci,ij,cj->c", S, inst.J, S) / N + S @ inst.K


def assemble_HZ(inst: ProblemInstance, N: int) -> EnsembleOperator:
    """Problem Hamiltonian on the symmetric space (diagonal)."""
    return EnsembleOperator(sp.diags(hz_diagonal(inst, N), format="csr"), inst.M, N)


def assemble_HX(M: int, N: int) -> EnsembleOperator:
    """Driver Hamiltonian H_X = -sum_i S_i^x."""
    _check_sizes(M, N)
    matrix = sp.csr_matrix((ensemble_dim(M, N),) * 2)
    for site in range(M):
        matrix = matrix - collective_op(M, N, site, "x").matrix
    return EnsembleOperator(matrix.tocsr(), M, N)


def _check_lambda(lam: float) -> None:
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")


class EnsembleHamiltonian:
    """
    H(lambda) = (1 - lambda) H_X + lambda H_Z with both parts assembled once.

    ``apply`` and ``apply_right`` avoid forming H(lambda) at every time step.
    """

    def __init__(self, inst: ProblemInstance, N: int):
        _check_sizes(inst.M, N)
        self.inst = inst
        self.M = inst.M
        self.N = N
        self.HX = assemble_HX(inst.M, N).matrix
        self.hz = hz_diagonal(inst, N)

    @property
    def dim(self) -> int:
        return self.hz.shape[0]

    def at(self, lam: float) -> EnsembleOperator:
        _check_lambda(lam)
        matrix = (1.0 - lam) * self.HX + lam * sp.diags(self.hz, format="csr")
        return EnsembleOperator(matrix.tocsr(), self.M, self.N)

    def apply(self, lam: float, psi: np.ndarray) -> np.ndarray:
        """H(lambda) @ psi for a vector or a matrix (acting on its rows)."""
        hz = self.hz if psi.ndim == 1 else self.hz[:, None]
        return (1.0 - lam) * (self.HX @ psi) + lam * hz * psi

    def apply_right(self, lam: float, rho: np.ndarray) -> np.ndarray:
        """rho @ H(lambda); H is real symmetric."""
        return (1.0 - lam) * (self.HX @ rho.T).T + lam * rho * self.hz[None, :]


def hamiltonian(inst: ProblemInstance, N: int, lam: float) -> EnsembleOperator:
    """H(lambda) = (1 - lambda) H_X + lambda H_Z."""
    _check_lambda(lam)
    return EnsembleHamiltonian(inst, N).at(lam)
