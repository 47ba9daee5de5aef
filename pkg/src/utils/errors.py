"""
Shared Error Types for the Ensemble AQC Toolkit
===============================================

Every failure the toolkit reports is a subclass of ``EnsembleAQCError``.
Each class carries the process exit code the CLI uses for it:

- 2: configuration rejected before any computation
- 3: file I/O
- 4: problem instance malformed or invalid
- 5: guard limit exceeded (enumeration size, dense cap, full-space qubits)
- 6: numerical failure (non-convergence, integration diagnostics)
"""


class EnsembleAQCError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ConfigError(EnsembleAQCError):
    """Run configuration failed validation."""

    exit_code = 2


class OutputError(EnsembleAQCError):
    """Reading or writing a file failed."""

    exit_code = 3


class InstanceFormatError(EnsembleAQCError):
    """Instance document could not be parsed."""

    exit_code = 4


class InstanceValidationError(EnsembleAQCError):
    """Instance violates a structural invariant (symmetry, diagonal, shape, finiteness)."""

    exit_code = 4


class DegenerateGroundStateError(EnsembleAQCError):
    """Quantity is undefined because the qubit ground state is degenerate."""

    exit_code = 4


class GuardLimitError(EnsembleAQCError):
    """Requested size exceeds a configured guard limit."""

    exit_code = 5


class ConvergenceError(EnsembleAQCError):
    """An iterative solver did not converge."""

    exit_code = 6


class IntegrationError(EnsembleAQCError):
    """Time integration violated a state invariant (norm, trace, Hermiticity, positivity)."""

    exit_code = 6
