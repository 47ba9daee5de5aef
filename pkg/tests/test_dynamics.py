"""
Test annealing dynamics: pure sweeps, collective and individual dephasing,
final-state statistics and batch error tables.
"""
import sys
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from analytics.landscape import qubit_ground_state
from dynamics.batch import RAW_COLUMNS, SUMMARY_COLUMNS, batch_errors
from dynamics.evolution import (
    ScheduleSpec,
    default_steps,
    evolve_lindblad,
    evolve_pure,
    initial_state,
    step_halving_check,
    trace_distance,
)
from dynamics.individual import (
    FullSpaceHamiltonian,
    evolve_individual_dephasing,
    symmetric_embedding,
)
from dynamics.integrator import propagate, sample_steps
from dynamics.statistics import error_probability, final_distribution
from operators.symspace import EnsembleHamiltonian, assemble_HX, extreme_fock, fock_to_index
from problems.instance_sets import generate_instance_set
from problems.instances import ferromagnetic_instance, named_instance
from utils.config import reset_settings
from utils.errors import GuardLimitError


@pytest.fixture
def small_guard(monkeypatch):
    monkeypatch.setenv("ENSEMBLE_AQC_FULLSPACE_GUARD", "4")
    reset_settings()
    yield
    monkeypatch.delenv("ENSEMBLE_AQC_FULLSPACE_GUARD")
    reset_settings()


def ground_population(result, inst, N):
    sigma = qubit_ground_state(inst).sigma_star
    return result.populations[fock_to_index(extreme_fock(sigma, N), N)]


# ============================================================================
# Schedule, initial state, integrator
# ============================================================================

def test_schedule():
    schedule = ScheduleSpec(tau=10.0)
    assert schedule.lam(0.0) == 0.0
    assert schedule.lam(5.0) == pytest.approx(0.5)
    assert schedule.lam(10.0) == 1.0
    with pytest.raises(ValidationError):
        ScheduleSpec(tau=0.0)
    with pytest.raises(ValidationError):
        ScheduleSpec(tau=1.0, shape="quadratic")


def test_default_steps():
    assert default_steps(1.0) == 10_000
    assert default_steps(100.0) == 10_000
    assert default_steps(200.0) == 20_000


def test_initial_state_is_driver_ground_state():
    for M, N in ((1, 1), (2, 3), (3, 4)):
        psi = initial_state(M, N)
        assert np.linalg.norm(psi) == pytest.approx(1.0)
        HX = assemble_HX(M, N).matrix
        np.testing.assert_allclose(HX @ psi, -N * M * psi, atol=1e-12)


def test_rk4_on_exponential_decay():
    y = propagate(lambda t, y: -y, np.array([1.0]), 1.0, 100)
    assert y[0].real == pytest.approx(np.exp(-1.0), abs=1e-9)
    seen = []
    propagate(lambda t, y: -y, np.array([1.0]), 1.0, 10, samples=[0, 5, 10],
              on_sample=lambda n, t, v: seen.append((n, t)))
    assert [n for n, _ in seen] == [0, 5, 10]
    assert sample_steps([0.0, 0.55, 2.0], 1.0, 10) == [0, 6, 10]
    with pytest.raises(ValueError):
        propagate(lambda t, y: -y, np.array([1.0]), 1.0, 0)


# ============================================================================
# Pure evolution
# ============================================================================

def test_sudden_quench_keeps_initial_state():
    inst = named_instance("chain")
    result = evolve_pure(inst, 2, ScheduleSpec(tau=1e-4), steps=1)
    psi0 = initial_state(3, 2)
    fidelity = abs(np.vdot(psi0, result.state.data)) ** 2
    assert fidelity >= 1.0 - 1e-4


def test_pure_sweep_conserves_norm():
    inst = named_instance("chain")
    result = evolve_pure(inst, 2, ScheduleSpec(tau=5.0))
    assert result.norm_drift <= 1e-6
    assert result.populations.sum() == pytest.approx(1.0, abs=1e-6)
    assert 0.0 <= result.success <= 1.0
    assert result.error == pytest.approx(1.0 - result.success)
    assert result.mode == "pure"
    row = result.to_row()
    assert row["N"] == 2 and row["tau"] == 5.0


@pytest.mark.slow
def test_slow_sweep_finds_ground_state():
    inst = named_instance("chain")
    slow = evolve_pure(inst, 5, ScheduleSpec(tau=100.0))
    fast = evolve_pure(inst, 5, ScheduleSpec(tau=5.0))
    assert ground_population(slow, inst, 5) >= 0.9
    assert ground_population(fast, inst, 5) < ground_population(slow, inst, 5)


def test_step_halving_small():
    inst = named_instance("chain")
    check = step_halving_check(evolve_pure, inst, 1, ScheduleSpec(tau=2.0), steps=2000)
    assert check["change"] < 1e-5
    assert check["steps"] == 2000


@pytest.mark.slow
def test_step_halving_at_default_settings():
    inst = named_instance("chain")
    check = step_halving_check(evolve_pure, inst, 5, ScheduleSpec(tau=100.0))
    assert check["change"] < 1e-5


# ============================================================================
# Collective dephasing
# ============================================================================

@pytest.mark.parametrize("N", [1, 2])
def test_noiseless_master_equation_matches_pure(N):
    inst = named_instance("chain")
    schedule = ScheduleSpec(tau=5.0)
    pure = evolve_pure(inst, N, schedule)
    mixed = evolve_lindblad(inst, N, schedule)
    assert trace_distance(mixed.state.data, pure.state.density_matrix()) <= 1e-8
    assert mixed.success == pytest.approx(pure.success, abs=1e-8)


def test_dephased_state_stays_physical():
    inst = named_instance("chain")
    seen = []
    result = evolve_lindblad(
        inst, 2, ScheduleSpec(tau=5.0), gamma_z=0.05, gamma_x=0.02, steps=2000,
        sample_times=[0.0, 2.5, 5.0], on_sample=lambda t, lam, rho: seen.append(lam),
    )
    assert seen == pytest.approx([0.0, 0.5, 1.0])
    rho = result.state.data
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-6)
    np.testing.assert_allclose(rho, rho.conj().T, atol=1e-8)
    assert result.min_eigenvalue >= -1e-8
    assert result.mode == "lindblad"


def test_negative_rates_rejected():
    with pytest.raises(ValueError):
        evolve_lindblad(named_instance("chain"), 1, ScheduleSpec(tau=1.0), gamma_z=-0.1)


@pytest.mark.slow
def test_dephasing_lowers_success():
    inst = named_instance("chain")
    schedule = ScheduleSpec(tau=100.0)
    pure = evolve_pure(inst, 5, schedule)
    noisy = evolve_lindblad(inst, 5, schedule, gamma_z=1e-4)
    assert noisy.success < pure.success


@pytest.mark.slow
def test_error_recovers_past_critical_size():
    inst = ferromagnetic_instance(3, 0.3)
    schedule = ScheduleSpec(tau=100.0)
    errors = {N: evolve_lindblad(inst, N, schedule, gamma_z=1e-4).error for N in range(1, 9)}
    assert errors[8] < max(errors[N] for N in range(2, 6))


# ============================================================================
# Individual dephasing
# ============================================================================

def test_symmetric_embedding():
    V = symmetric_embedding(2, 2)
    np.testing.assert_allclose((V.T @ V).toarray(), np.eye(9), atol=1e-12)
    full = V @ initial_state(2, 2)
    np.testing.assert_allclose(full, np.full(16, 0.25), atol=1e-12)


def test_full_space_hamiltonian_restricts_to_symmetric_space():
    inst = ferromagnetic_instance(2, 0.1)
    V = symmetric_embedding(2, 2).toarray()
    full = FullSpaceHamiltonian(inst, 2).at(0.3).toarray()
    sym = EnsembleHamiltonian(inst, 2).at(0.3).toarray()
    np.testing.assert_allclose(V.T @ full @ V, sym, atol=1e-12)


def test_individual_without_noise_matches_symmetric_evolution():
    inst = ferromagnetic_instance(2, 0.1)
    schedule = ScheduleSpec(tau=5.0)
    full = evolve_individual_dephasing(inst, 2, schedule)
    sym = evolve_pure(inst, 2, schedule)
    embedded = symmetric_embedding(2, 2) @ sym.state.data
    fidelity = np.real(np.vdot(embedded, full.state.data @ embedded))
    assert fidelity >= 1.0 - 1e-8
    np.testing.assert_allclose(full.populations, sym.populations, atol=1e-8)


def test_individual_dephasing_stays_physical():
    inst = ferromagnetic_instance(2, 0.2)
    result = evolve_individual_dephasing(inst, 2, ScheduleSpec(tau=3.0), gamma_z=0.05, steps=1500)
    assert result.mode == "individual"
    assert result.populations.shape == (9,)
    assert result.populations.sum() == pytest.approx(1.0, abs=1e-6)
    assert 0.0 <= result.success <= 1.0


@pytest.mark.slow
def test_individual_dephasing_error_falls_with_N():
    inst = ferromagnetic_instance(2, 0.2)
    schedule = ScheduleSpec(tau=100.0)
    errors = [evolve_individual_dephasing(inst, N, schedule, gamma_z=1e-4).error for N in (1, 4)]
    assert errors[1] < errors[0]


def test_full_space_guard(small_guard):
    with pytest.raises(GuardLimitError):
        evolve_individual_dephasing(ferromagnetic_instance(2, 0.1), 3, ScheduleSpec(tau=1.0))


# ============================================================================
# Statistics and batches
# ============================================================================

def test_final_distribution():
    inst = named_instance("chain")
    result = evolve_pure(inst, 3, ScheduleSpec(tau=5.0), steps=2000)
    table = final_distribution(result, inst, 3, display_normalize=True)
    assert list(table.columns) == ["level_index", "basis_index", "energy", "probability", "tag", "display"]
    assert table["probability"].sum() == pytest.approx(1.0, abs=1e-6)
    assert table["display"].max() == pytest.approx(1.0)
    assert np.all(np.diff(table["energy"]) >= 0)
    assert error_probability(result, inst, 3) == pytest.approx(result.error, abs=1e-12)


def test_single_qubit_error_is_ground_miss():
    inst = named_instance("chain")
    result = evolve_pure(inst, 1, ScheduleSpec(tau=3.0), steps=1000)
    expected = 1.0 - ground_population(result, inst, 1)
    assert error_probability(result, inst, 1) == pytest.approx(expected, abs=1e-12)


def test_batch_errors():
    instances = [named_instance("chain"), named_instance("exact_cover")]
    raw, summary = batch_errors(instances, [1, 2], [2.0], steps=400)
    assert list(raw.columns) == RAW_COLUMNS
    assert list(summary.columns) == SUMMARY_COLUMNS
    assert len(raw) == 4 and len(summary) == 2
    assert raw["failure"].isna().all()
    for N in (1, 2):
        cells = raw[raw["N"] == N]
        mean = summary.loc[summary["N"] == N, "mean_error"].iloc[0]
        assert mean == pytest.approx(cells["error"].mean())


def test_batch_isolates_failing_cells(small_guard):
    inst = ferromagnetic_instance(2, 0.1)
    raw, summary = batch_errors([inst], [1, 3], [1.0], gamma_z=0.01, mode="individual", steps=200)
    failed = raw[raw["failure"].notna()]
    assert list(failed["N"]) == [3]
    assert failed["failure"].iloc[0].startswith("GuardLimitError")
    assert summary.loc[summary["N"] == 1, "instances"].iloc[0] == 1
    assert summary.loc[summary["N"] == 3, "failed"].iloc[0] == 1


def test_individual_mode_has_no_sx_channel():
    with pytest.raises(ValueError):
        batch_errors([named_instance("chain")], [1], [1.0], gamma_x=0.1, mode="individual")


@pytest.mark.slow
def test_mean_error_falls_with_N_on_critical_size_3_set():
    iset = generate_instance_set(3, 6, "eq:3", seed=2)
    _, summary = batch_errors(iset.instances, [1, 5], [100.0])
    errors = summary.set_index("N")["mean_error"]
    assert errors[5] < errors[1]
