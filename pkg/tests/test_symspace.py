"""
Test the symmetric-subspace operators and Hamiltonian assembly.
"""
import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from analytics.landscape import corner_energy, corner_from_index
from operators.symspace import (
    EnsembleHamiltonian,
    assemble_HX,
    assemble_HZ,
    collective_op,
    ensemble_dim,
    equivalent_mask,
    extreme_fock,
    fock_table,
    fock_to_index,
    hamiltonian,
    hz_diagonal,
    index_to_fock,
    majority_label,
)
from problems.instances import ProblemInstance, named_instance, random_instance


def test_single_qubit_operators():
    np.testing.assert_array_equal(collective_op(1, 1, 0, "x").toarray(), [[0, 1], [1, 0]])
    np.testing.assert_array_equal(collective_op(1, 1, 0, "z").toarray(), [[1, 0], [0, -1]])


def test_two_qubit_dicke_ladder():
    sz = collective_op(1, 2, 0, "z").toarray()
    sx = collective_op(1, 2, 0, "x").toarray()
    np.testing.assert_array_equal(np.diag(sz), [2, 0, -2])
    np.testing.assert_allclose(np.diag(sx, 1), [np.sqrt(2), np.sqrt(2)])
    np.testing.assert_allclose(np.diag(sx, -1), [np.sqrt(2), np.sqrt(2)])


@pytest.mark.parametrize("N", range(1, 7))
def test_sx_squared_on_polarized_state(N):
    sx = collective_op(1, N, 0, "x").toarray()
    assert (sx @ sx)[0, 0] == pytest.approx(N)


def test_operator_validation():
    with pytest.raises(ValueError):
        collective_op(2, 2, 2, "x")
    with pytest.raises(ValueError):
        collective_op(2, 2, 0, "y")
    with pytest.raises(ValueError):
        collective_op(2, 0, 0, "z")


def test_operators_act_on_their_own_site():
    M, N = 3, 2
    sz1 = collective_op(M, N, 1, "z").diagonal()
    table = fock_table(M, N)
    np.testing.assert_array_equal(sz1, N - 2 * table[:, 1])
    assert collective_op(M, N, 2, "x").is_hermitian()


def test_fock_bookkeeping():
    M, N = 3, 4
    assert ensemble_dim(M, N) == 125
    table = fock_table(M, N)
    assert table.shape == (125, 3)
    np.testing.assert_array_equal(table[1], [0, 0, 1])
    np.testing.assert_array_equal(table[5], [0, 1, 0])
    assert fock_to_index([1, 0, 0], N) == 25
    for index in (0, 17, 124):
        assert fock_to_index(index_to_fock(index, M, N), N) == index
    with pytest.raises(ValueError):
        fock_to_index([5, 0, 0], N)


def test_majority_labels():
    np.testing.assert_array_equal(majority_label([0, 5, 1], 5), [1, -1, 1])
    assert majority_label([2, 0], 4) is None
    np.testing.assert_array_equal(extreme_fock([1, -1, 1], 5), [0, 5, 0])
    # odd N: every ensemble has (N+1)/2 states voting each way
    assert np.count_nonzero(equivalent_mask([-1, -1, -1], 5)) == 27
    assert np.count_nonzero(equivalent_mask([1, -1], 3)) == 4


def test_chain_diagonal():
    inst = named_instance("chain")
    hz = hz_diagonal(inst, 5)
    assert hz[fock_to_index([5, 5, 5], 5)] == pytest.approx(-22.5)
    assert hz.min() == pytest.approx(-22.5)


def test_uncoupled_diagonal():
    inst = ProblemInstance(np.zeros((2, 2)), [0.3, -0.7])
    N = 3
    S = N - 2 * fock_table(2, N)
    np.testing.assert_allclose(hz_diagonal(inst, N), S @ inst.K)


def test_corner_energies_scale_with_N():
    for seed in range(100):
        inst = random_instance(3, seed)
        for N in range(1, 6):
            hz = hz_diagonal(inst, N)
            for index in range(8):
                sigma = corner_from_index(index, 3)
                k = extreme_fock(sigma, N)
                assert hz[fock_to_index(k, N)] == pytest.approx(N * corner_energy(inst, sigma), abs=1e-9)


def test_driver_spectrum():
    np.testing.assert_allclose(np.linalg.eigvalsh(assemble_HX(1, 1).toarray()), [-1, 1], atol=1e-12)
    np.testing.assert_allclose(np.linalg.eigvalsh(assemble_HX(2, 1).toarray()), [-2, 0, 0, 2], atol=1e-12)
    for M, N in ((2, 3), (3, 2)):
        levels = np.linalg.eigvalsh(assemble_HX(M, N).toarray())
        assert levels[0] == pytest.approx(-N * M)
        assert levels[1] == pytest.approx(-N * M + 2)


def test_interpolation_endpoints():
    inst = named_instance("chain")
    N = 2
    np.testing.assert_allclose(hamiltonian(inst, N, 0.0).toarray(), assemble_HX(3, N).toarray())
    np.testing.assert_allclose(hamiltonian(inst, N, 1.0).toarray(), assemble_HZ(inst, N).toarray())
    assert hamiltonian(inst, N, 0.37).is_hermitian()
    with pytest.raises(ValueError):
        hamiltonian(inst, N, 1.5)


def test_single_spin_midpoint():
    inst = ProblemInstance([[0.0]], [1.0])
    levels = np.linalg.eigvalsh(hamiltonian(inst, 1, 0.5).toarray())
    np.testing.assert_allclose(levels, [-np.sqrt(0.5), np.sqrt(0.5)], atol=1e-12)


def test_apply_matches_assembled_matrix():
    inst = named_instance("exact_cover")
    ham = EnsembleHamiltonian(inst, 2)
    H = ham.at(0.4).toarray()
    rng = np.random.default_rng(0)
    psi = rng.normal(size=ham.dim) + 1j * rng.normal(size=ham.dim)
    rho = rng.normal(size=(ham.dim, ham.dim)) + 1j * rng.normal(size=(ham.dim, ham.dim))
    np.testing.assert_allclose(ham.apply(0.4, psi), H @ psi, atol=1e-12)
    np.testing.assert_allclose(ham.apply(0.4, rho), H @ rho, atol=1e-12)
    np.testing.assert_allclose(ham.apply_right(0.4, rho), rho @ H, atol=1e-12)
