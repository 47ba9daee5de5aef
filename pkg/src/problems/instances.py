"""
Problem Instances
=================

Ising problem instances (J, K, M) defining the problem Hamiltonian

    H_Z = sum_{i,j} J_ij s_i s_j + sum_i K_i s_i

together with the generators used throughout the toolkit:

- uniform random couplings and biases on [-1, 1]
- the all-to-all ferromagnet with uniform bias
- the Exact Cover instance and two three-spin worked examples (triangle, chain)

Instances are immutable and serialize to a JSON document with keys
``M``, ``J`` (full M x M array) and ``K`` (length M).

Random stream semantics: ``random_instance(M, seed)`` builds
``numpy.random.Generator(PCG64(seed))`` and draws, in order, the strict upper
triangle of J in row-major order (M(M-1)/2 values) followed by the M entries
of K, all from ``uniform(-1, 1)``. PCG64 output is platform independent.
"""
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ValidationError

from utils.errors import InstanceFormatError, InstanceValidationError, OutputError

logger = logging.getLogger(__name__)


class ProblemInstance:
    """Immutable Ising problem instance with symmetric, zero-diagonal J."""

    def __init__(self, J: Any, K: Any, name: Optional[str] = None):
        J = np.array(J, dtype=float)
        K = np.array(K, dtype=float)
        if J.ndim != 2 or J.shape[0] != J.shape[1]:
            raise InstanceValidationError(f"shape error: J must be square, got shape {J.shape}")
        M = J.shape[0]
        if M < 1:
            raise InstanceValidationError("shape error: M must be at least 1")
        if K.ndim != 1 or K.shape[0] != M:
            raise InstanceValidationError(
                f"shape error: K must have length M={M}, got shape {K.shape}"
            )
        if not (np.all(np.isfinite(J)) and np.all(np.isfinite(K))):
            raise InstanceValidationError("finiteness error: J and K entries must be finite")
        if not np.array_equal(J, J.T):
            i, j = np.argwhere(J != J.T)[0]
            raise InstanceValidationError(
                f"symmetry error: J[{i}][{j}]={J[i, j]} differs from J[{j}][{i}]={J[j, i]}"
            )
        if np.any(np.diag(J) != 0.0):
            i = int(np.flatnonzero(np.diag(J))[0])
            raise InstanceValidationError(f"diagonal error: J[{i}][{i}]={J[i, i]} must be 0")

        J.flags.writeable = False
        K.flags.writeable = False
        self._J = J
        self._K = K
        self.name = name

    @property
    def J(self) -> np.ndarray:
        return self._J

    @property
    def K(self) -> np.ndarray:
        return self._K

    @property
    def M(self) -> int:
        return int(self._K.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProblemInstance):
            return NotImplemented
        return np.array_equal(self._J, other._J) and np.array_equal(self._K, other._K)

    def __hash__(self) -> int:
        return hash((self._J.tobytes(), self._K.tobytes()))

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"ProblemInstance(M={self.M}{label})"


def as_spin_configuration(sigma: Sequence[int], M: Optional[int] = None) -> np.ndarray:
    """
    Validate and return a spin configuration as an int array of +-1.

    Args:
        sigma: Spin values
        M: Expected length, if known

    Returns:
        Array of dtype int with entries in {-1, +1}
    """
    arr = np.asarray(sigma)
    if arr.ndim != 1:
        raise InstanceValidationError("spin configuration must be a vector")
    if M is not None and arr.shape[0] != M:
        raise InstanceValidationError(
            f"spin configuration has length {arr.shape[0]}, instance has M={M}"
        )
    if not np.all(np.isin(arr, (-1, 1))):
        raise InstanceValidationError("spin configuration entries must be exactly -1 or +1")
    return arr.astype(int)


# ============================================================================
# Generators
# ============================================================================

def random_instance(M: int, seed: int) -> ProblemInstance:
    """Uniform random instance: J_ij (i<j) and K_i i.i.d. on [-1, 1]."""
    if M < 1:
        raise InstanceValidationError(f"M must be at least 1, got {M}")
    rng = np.random.Generator(np.random.PCG64(seed))
    iu = np.triu_indices(M, k=1)
    J = np.zeros((M, M))
    J[iu] = rng.uniform(-1.0, 1.0, size=len(iu[0]))
    J = J + J.T
    K = rng.uniform(-1.0, 1.0, size=M)
    return ProblemInstance(J, K, name=f"random-M{M}-seed{seed}")


def ferromagnetic_instance(M: int, K: float) -> ProblemInstance:
    """All-to-all ferromagnet J_ij = -(1 - delta_ij) with uniform bias K."""
    if M < 2:
        raise InstanceValidationError(f"ferromagnet needs M >= 2, got {M}")
    J = -(np.ones((M, M)) - np.eye(M))
    return ProblemInstance(J, np.full(M, float(K)), name=f"ferro-M{M}-K{K}")


def exact_cover_instance() -> ProblemInstance:
    """The hard M=3 Exact Cover instance (unique ground state)."""
    J = np.array([
        [0.0, 0.5, 0.0],
        [0.5, 0.0, 0.5],
        [0.0, 0.5, 0.0],
    ])
    return ProblemInstance(J, [-1.0, -1.0, -1.0], name="exact_cover")


def _three_site(j12: float, j13: float, j23: float, K: List[float], name: str) -> ProblemInstance:
    J = np.array([
        [0.0, j12, j13],
        [j12, 0.0, j23],
        [j13, j23, 0.0],
    ])
    return ProblemInstance(J, K, name=name)


NAMED_INSTANCES = {
    # energy-landscape example
    "triangle": lambda: _three_site(-2.0, -1.0, -1.0, [1.0, 0.0, -2.0], "triangle"),
    # spectrum / dynamics example
    "chain": lambda: _three_site(-0.5, 0.0, -1.0, [0.5, 0.0, 1.0], "chain"),
    "exact_cover": exact_cover_instance,
}


def named_instance(name: str) -> ProblemInstance:
    """Look up a bundled instance by name: triangle, chain or exact_cover."""
    try:
        return NAMED_INSTANCES[name]()
    except KeyError:
        raise InstanceValidationError(
            f"unknown instance name {name!r}; known: {sorted(NAMED_INSTANCES)}"
        ) from None


# ============================================================================
# Serialization
# ============================================================================

class InstanceDocument(BaseModel):
    """On-disk instance document."""
    M: int
    J: List[List[float]]
    K: List[float]
    name: Optional[str] = None

    class Config:
        json_schema_extra = {
            "example": {
                "M": 3,
                "J": [[0, -0.5, 0], [-0.5, 0, -1], [0, -1, 0]],
                "K": [0.5, 0, 1],
                "name": "chain",
            }
        }


def serialize_instance(inst: ProblemInstance) -> str:
    """Serialize an instance to its JSON document."""
    doc = InstanceDocument(M=inst.M, J=inst.J.tolist(), K=inst.K.tolist(), name=inst.name)
    return doc.model_dump_json(indent=2, exclude_none=True)


def parse_instance(text: str) -> ProblemInstance:
    """
    Parse and validate an instance document.

    Raises:
        InstanceFormatError: text is not a well-formed document
        InstanceValidationError: document violates an instance invariant
    """
    try:
        doc = InstanceDocument.model_validate_json(text)
    except ValidationError as e:
        raise InstanceFormatError(f"malformed instance document: {e.errors()[0]['msg']}") from e

    if len(doc.J) != doc.M or any(len(row) != doc.M for row in doc.J):
        raise InstanceValidationError(f"shape error: J must be {doc.M}x{doc.M}")
    if len(doc.K) != doc.M:
        raise InstanceValidationError(
            f"shape error: K has length {len(doc.K)}, expected M={doc.M}"
        )
    return ProblemInstance(doc.J, doc.K, name=doc.name)


def instance_to_dict(inst: ProblemInstance) -> Dict[str, Any]:
    """Plain-dict view used in report headers."""
    return {"M": inst.M, "J": inst.J.tolist(), "K": inst.K.tolist(), "name": inst.name}


def load_instance(path: Path) -> ProblemInstance:
    """Read an instance file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise OutputError(f"cannot read instance file {path}: {e}") from e
    inst = parse_instance(text)
    logger.info(f"Loaded instance {inst} from {path}")
    return inst


def save_instance(inst: ProblemInstance, path: Path) -> Path:
    """Write an instance file."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(serialize_instance(inst) + "\n", encoding="utf-8")
    except OSError as e:
        raise OutputError(f"cannot write instance file {path}: {e}") from e
    logger.info(f"✅ Saved instance {inst} to {path}")
    return path
