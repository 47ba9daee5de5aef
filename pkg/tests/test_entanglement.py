"""
Test partial transpose, logarithmic negativity and negativity traces.
"""
import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from analytics.entanglement import BipartiteState, log_negativity, negativity_trace, partial_transpose
from dynamics.evolution import ScheduleSpec
from problems.instances import ProblemInstance, ferromagnetic_instance, named_instance


def bell_state() -> np.ndarray:
    psi = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2.0)
    return np.outer(psi, psi)


def random_density(dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = A @ A.conj().T
    return rho / np.trace(rho).real


def test_product_state_has_zero_negativity():
    a = random_density(2, 1)
    b = random_density(3, 2)
    assert log_negativity(BipartiteState(np.kron(a, b), (2, 3))) == 0.0


def test_bell_pair():
    rho = bell_state()
    assert log_negativity(BipartiteState(rho, (2, 2))) == pytest.approx(1.0)
    assert np.linalg.eigvalsh(partial_transpose(rho, (2, 2))).min() == pytest.approx(-0.5)


def test_partial_transpose_properties():
    rho = random_density(6, 3)
    np.testing.assert_allclose(partial_transpose(partial_transpose(rho, (2, 3)), (2, 3)), rho)
    state = BipartiteState(rho, (2, 3))
    assert log_negativity(state, which=1) == pytest.approx(log_negativity(state, which=2), abs=1e-12)
    with pytest.raises(ValueError):
        partial_transpose(rho, (2, 3), which=3)


def test_invalid_states_rejected():
    with pytest.raises(ValueError, match="dimension mismatch"):
        BipartiteState(np.eye(4) / 4, (2, 3))
    with pytest.raises(ValueError, match="trace"):
        BipartiteState(np.eye(4), (2, 2))
    with pytest.raises(ValueError, match="Hermitian"):
        BipartiteState(np.array([[0.5, 0.3], [0.0, 0.5]]), (1, 2))


def test_uncoupled_ensembles_stay_separable():
    inst = ProblemInstance(np.zeros((2, 2)), [0.5, 1.0])
    trace = negativity_trace(inst, 1, ScheduleSpec(tau=3.0))
    assert list(trace.columns) == ["t", "lambda", "log_negativity", "N"]
    assert len(trace) == 21
    assert (trace["log_negativity"].abs() <= 1e-10).all()


def test_trace_starts_from_product_state():
    inst = ferromagnetic_instance(2, 0.1)
    trace = negativity_trace(
        inst, 1, ScheduleSpec(tau=4.0), gamma_z=0.01, steps=2000, sample_times=[0.0, 2.0, 4.0],
    )
    assert trace["t"].tolist() == pytest.approx([0.0, 2.0, 4.0])
    assert trace["log_negativity"].iloc[0] == 0.0
    assert (trace["log_negativity"] >= 0.0).all()


def test_negativity_needs_two_ensembles():
    with pytest.raises(ValueError):
        negativity_trace(named_instance("chain"), 1, ScheduleSpec(tau=1.0))


@pytest.mark.slow
def test_ferromagnet_entangles_mid_sweep():
    inst = ferromagnetic_instance(2, 0.1)
    for N in range(1, 5):
        trace = negativity_trace(inst, N, ScheduleSpec(tau=60.0), gamma_z=1e-4)
        assert trace["log_negativity"].max() > 0.0
