"""Dynamics module - annealing sweeps, dephasing and logical error statistics."""
from .evolution import RunResult, ScheduleSpec, evolve_lindblad, evolve_pure
from .individual import evolve_individual_dephasing

__all__ = [
    "RunResult",
    "ScheduleSpec",
    "evolve_lindblad",
    "evolve_pure",
    "evolve_individual_dephasing",
]
