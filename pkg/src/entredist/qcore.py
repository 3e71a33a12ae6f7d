"""Dense complex linear algebra and state primitives for small qubit registers.

Everything works on explicit numpy arrays of dimension at most 16 (four
qubits).  The register layout is fixed once and for all: the two system
qubits S1, S2 come first, then their path environments E1, E2.  Slot 0
carries the most significant bit of the basis index, so the ket |1100>
lives at vector index 12.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path

import numpy as np

__all__ = [
    "Subsystem",
    "ALL_SUBSYSTEMS",
    "Partition",
    "PureState",
    "DensityMatrix",
    "basis_state",
    "basis_index",
    "haar_state",
    "kron",
    "hermitize",
    "psd_sqrt",
    "partial_trace",
    "eig_hermitian",
    "purity",
    "fidelity_pure",
    "numerical_rank",
    "state_to_json",
    "state_from_json",
    "save_state",
    "load_state",
]

# Validation tolerances shared by the whole package.
NORM_ATOL = 1e-9
HERMITIAN_ATOL = 1e-9
TRACE_ATOL = 1e-9
EIGENVALUE_ATOL = 1e-9


class Subsystem(IntEnum):
    """Register slot of each subsystem; slot 0 is the most significant bit."""

    S1 = 0
    S2 = 1
    E1 = 2
    E2 = 3

    @property
    def partner(self) -> "Subsystem":
        """The subsystem locally coupled to this one (S1<->E1, S2<->E2)."""
        return _PARTNER[self]


_PARTNER = {
    Subsystem.S1: Subsystem.E1,
    Subsystem.E1: Subsystem.S1,
    Subsystem.S2: Subsystem.E2,
    Subsystem.E2: Subsystem.S2,
}

ALL_SUBSYSTEMS = (Subsystem.S1, Subsystem.S2, Subsystem.E1, Subsystem.E2)


def _resolve_slots(labels, n_qubits: int) -> tuple[int, ...]:
    """Normalize labels/slot indices to a sorted tuple of register slots."""
    if isinstance(labels, (Subsystem, int, str)):
        labels = (labels,)
    slots = []
    for lab in labels:
        if isinstance(lab, str):
            lab = Subsystem[lab]
        slot = int(lab)
        if not 0 <= slot < n_qubits:
            raise ValueError(f"unknown subsystem {lab!r} for {n_qubits} qubits")
        slots.append(slot)
    if not slots:
        raise ValueError("empty subsystem selection")
    if len(set(slots)) != len(slots):
        raise ValueError(f"duplicate subsystem in selection {labels!r}")
    return tuple(sorted(slots))


@dataclass(frozen=True)
class Partition:
    """A bipartition of the register into two disjoint, non-empty groups."""

    side_a: frozenset
    side_b: frozenset

    def __post_init__(self):
        a = frozenset(Subsystem(int(x)) if not isinstance(x, Subsystem) else x
                      for x in self.side_a)
        b = frozenset(Subsystem(int(x)) if not isinstance(x, Subsystem) else x
                      for x in self.side_b)
        if not a or not b:
            raise ValueError("both sides of a partition must be non-empty")
        if a & b:
            raise ValueError(f"partition sides overlap: {sorted(a & b)}")
        object.__setattr__(self, "side_a", a)
        object.__setattr__(self, "side_b", b)

    @classmethod
    def split(cls, side_a: str, side_b: str) -> "Partition":
        """Build a partition from concatenated label names, e.g. ("S1E1", "S2E2")."""
        return cls(frozenset(_parse_labels(side_a)), frozenset(_parse_labels(side_b)))

    @classmethod
    def one_vs_rest(cls, i) -> "Partition":
        i = Subsystem[i] if isinstance(i, str) else Subsystem(int(i))
        return cls(frozenset({i}), frozenset(set(ALL_SUBSYSTEMS) - {i}))

    def labels(self) -> frozenset:
        return self.side_a | self.side_b


def _parse_labels(text: str) -> list[Subsystem]:
    if len(text) % 2 != 0:
        raise ValueError(f"cannot parse subsystem names from {text!r}")
    return [Subsystem[text[k:k + 2]] for k in range(0, len(text), 2)]


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PureState:
    """Normalized amplitude vector over 1..4 qubits, slot 0 most significant."""

    amplitudes: np.ndarray
    n_qubits: int = 0

    def __post_init__(self):
        amps = _readonly(np.asarray(self.amplitudes).reshape(-1))
        n = int(np.log2(amps.size))
        if 2 ** n != amps.size or not 1 <= n <= 4:
            raise ValueError(f"amplitude vector of length {amps.size} is not a 1..4 qubit state")
        if self.n_qubits and self.n_qubits != n:
            raise ValueError(f"n_qubits={self.n_qubits} does not match vector length {amps.size}")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"state vector norm {norm} deviates from 1 beyond {NORM_ATOL}")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "n_qubits", n)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def amplitude(self, bits: str) -> complex:
        """Amplitude of the basis ket given as a bit string, e.g. "1100"."""
        return complex(self.amplitudes[basis_index(bits)])

    def to_json(self) -> dict:
        return state_to_json(self)

    @classmethod
    def from_json(cls, payload: dict) -> "PureState":
        state = state_from_json(payload)
        if not isinstance(state, cls):
            raise ValueError("payload describes a density matrix, not a pure state")
        return state


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite matrix on 1..4 qubits."""

    entries: np.ndarray
    n_qubits: int = 0

    def __post_init__(self):
        mat = _readonly(np.asarray(self.entries))
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {mat.shape}")
        n = int(np.log2(mat.shape[0]))
        if 2 ** n != mat.shape[0] or not 1 <= n <= 4:
            raise ValueError(f"matrix of dimension {mat.shape[0]} is not a 1..4 qubit state")
        if self.n_qubits and self.n_qubits != n:
            raise ValueError(f"n_qubits={self.n_qubits} does not match dimension {mat.shape[0]}")
        dev = float(np.abs(mat - mat.conj().T).max())
        if dev > HERMITIAN_ATOL:
            raise ValueError(f"matrix deviates from Hermitian by {dev} (> {HERMITIAN_ATOL})")
        tr = complex(np.trace(mat))
        if abs(tr - 1.0) > TRACE_ATOL:
            raise ValueError(f"trace {tr} deviates from 1 beyond {TRACE_ATOL}")
        lo = float(np.linalg.eigvalsh(hermitize(mat)).min())
        if lo < -EIGENVALUE_ATOL:
            raise ValueError(f"negative eigenvalue {lo} below -{EIGENVALUE_ATOL}")
        object.__setattr__(self, "entries", mat)
        object.__setattr__(self, "n_qubits", n)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """Descending eigenvalues, clamped to non-negative."""
        w = np.linalg.eigvalsh(hermitize(self.entries))[::-1]
        return np.clip(w, 0.0, None)

    def to_json(self) -> dict:
        return state_to_json(self)

    @classmethod
    def from_json(cls, payload: dict) -> "DensityMatrix":
        state = state_from_json(payload)
        if not isinstance(state, cls):
            raise ValueError("payload describes a pure state, not a density matrix")
        return state


def basis_index(bits: str) -> int:
    """Vector index of a basis ket bit string (slot 0 = most significant)."""
    if set(bits) - {"0", "1"}:
        raise ValueError(f"invalid bit string {bits!r}")
    return int(bits, 2)


def basis_state(bits: str) -> PureState:
    """Computational basis ket |bits>, e.g. basis_state("1100")."""
    vec = np.zeros(2 ** len(bits), dtype=complex)
    vec[basis_index(bits)] = 1.0
    return PureState(vec)


def haar_state(n_qubits: int, rng: np.random.Generator) -> PureState:
    """Haar-random pure state on n_qubits."""
    dim = 2 ** n_qubits
    vec = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState(vec / np.linalg.norm(vec))


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor (Kronecker) product as a complex array."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def hermitize(m: np.ndarray) -> np.ndarray:
    """(M + M†)/2; guards eigendecompositions against asymmetric round-off."""
    m = np.asarray(m)
    return 0.5 * (m + m.conj().T)


def as_matrix(state) -> np.ndarray:
    """Density-matrix entries of either kind of state object (or a raw array)."""
    if isinstance(state, DensityMatrix):
        return state.entries
    if isinstance(state, PureState):
        return np.outer(state.amplitudes, state.amplitudes.conj())
    return np.asarray(state, dtype=complex)


def vector_marginal(vec: np.ndarray, n_qubits: int, keep: tuple[int, ...]) -> np.ndarray:
    """Reduced density matrix of a pure state over the kept slots (slot order kept)."""
    rest = [q for q in range(n_qubits) if q not in keep]
    m = vec.reshape([2] * n_qubits).transpose(list(keep) + rest)
    m = m.reshape(2 ** len(keep), 2 ** len(rest))
    return m @ m.conj().T


def matrix_marginal(mat: np.ndarray, n_qubits: int, keep: tuple[int, ...]) -> np.ndarray:
    """Partial trace of a density matrix, keeping the given slots in slot order."""
    rest = [q for q in range(n_qubits) if q not in keep]
    t = mat.reshape([2] * (2 * n_qubits))
    perm = list(keep) + rest + [n_qubits + q for q in keep] + [n_qubits + q for q in rest]
    dk, dr = 2 ** len(keep), 2 ** len(rest)
    t = t.transpose(perm).reshape(dk, dr, dk, dr)
    return np.einsum("abcb->ac", t)


def partial_trace(rho, keep) -> DensityMatrix:
    """Reduced density matrix over ``keep`` (subsystem labels or slot indices).

    Accepts a :class:`DensityMatrix` or a :class:`PureState`; the kept slots
    retain their register order and the result has unit trace.
    """
    if isinstance(rho, PureState):
        n = rho.n_qubits
        slots = _resolve_slots(keep, n)
        if len(slots) == n:
            return rho.density()
        return DensityMatrix(vector_marginal(rho.amplitudes, n, slots))
    if isinstance(rho, DensityMatrix):
        n = rho.n_qubits
        slots = _resolve_slots(keep, n)
        if len(slots) == n:
            return rho
        return DensityMatrix(matrix_marginal(rho.entries, n, slots))
    raise TypeError(f"expected a state object, got {type(rho).__name__}")


def eig_hermitian(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvector columns of a Hermitian matrix."""
    mat = as_matrix(m)
    dev = float(np.abs(mat - mat.conj().T).max())
    if dev > HERMITIAN_ATOL:
        raise ValueError(f"matrix deviates from Hermitian by {dev} (> {HERMITIAN_ATOL})")
    w, v = np.linalg.eigh(hermitize(mat))
    return w[::-1].copy(), v[:, ::-1].copy()


def psd_sqrt(mat: np.ndarray) -> np.ndarray:
    """Principal square root of a PSD matrix, tiny negative eigenvalues clamped."""
    w, v = np.linalg.eigh(hermitize(mat))
    w = np.sqrt(np.clip(w, 0.0, None))
    return (v * w) @ v.conj().T


def purity(rho) -> float:
    """tr(rho^2), clamped to [0, 1]."""
    mat = as_matrix(rho)
    value = float(np.real(np.einsum("ij,ji->", mat, mat)))
    return min(max(value, 0.0), 1.0)


def fidelity_pure(rho, psi: PureState) -> float:
    """<psi|rho|psi>, real and clamped to [0, 1]."""
    mat = as_matrix(rho)
    vec = psi.amplitudes
    if mat.shape[0] != vec.size:
        raise ValueError(f"dimension mismatch: matrix {mat.shape[0]} vs state {vec.size}")
    value = complex(vec.conj() @ mat @ vec)
    if abs(value.imag) > 1e-9:
        raise ValueError(f"fidelity has imaginary part {value.imag}; input not Hermitian?")
    return min(max(float(value.real), 0.0), 1.0)


def numerical_rank(rho, eps: float) -> int:
    """Number of eigenvalues above eps times the largest eigenvalue."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    w = np.linalg.eigvalsh(hermitize(as_matrix(rho)))
    return int(np.sum(w > eps * w.max()))


def state_to_json(state) -> dict:
    """JSON payload {"n_qubits": n, "re": [...], "im": [...]}; matrices row-major.

    Floats serialize through ``repr`` and therefore round-trip bit-exactly.
    """
    if isinstance(state, PureState):
        data = state.amplitudes
    elif isinstance(state, DensityMatrix):
        data = state.entries.reshape(-1)
    else:
        raise TypeError(f"expected a state object, got {type(state).__name__}")
    return {
        "n_qubits": state.n_qubits,
        "re": [float(x) for x in data.real],
        "im": [float(x) for x in data.imag],
    }


def state_from_json(payload: dict):
    """Inverse of :func:`state_to_json`; the array length selects the kind."""
    n = int(payload["n_qubits"])
    data = np.asarray(payload["re"], dtype=float) + 1j * np.asarray(payload["im"], dtype=float)
    dim = 2 ** n
    if data.size == dim:
        return PureState(data, n)
    if data.size == dim * dim:
        return DensityMatrix(data.reshape(dim, dim), n)
    raise ValueError(f"array length {data.size} matches neither a vector nor a matrix on {n} qubits")


def save_state(state, path) -> None:
    Path(path).write_text(json.dumps(state_to_json(state)))


def load_state(path):
    return state_from_json(json.loads(Path(path).read_text()))
