"""Initial states and the local amplitude-damping dilations that drive them.

Each system qubit S_i couples to its own environment qubit E_i through a
two-qubit unitary that transfers the excitation |1>_S into |1>_E with
probability ``p``.  Tracing out the environment afterwards realizes the
amplitude-damping channel; keeping it gives the full four-qubit dynamics.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .qcore import (
    NORM_ATOL,
    DensityMatrix,
    PureState,
    Subsystem,
    kron,
    matrix_marginal,
)

__all__ = [
    "theta_to_p",
    "InitialSpec",
    "initial_state",
    "ad_unitary",
    "evolve",
    "random_family_state",
    "mixed_system_with_purity",
]


def theta_to_p(theta: float) -> float:
    """Damping strength sin^2(2*theta) set by the half-wave-plate angle (radians)."""
    s = math.sin(2.0 * theta)
    return s * s


@dataclass(frozen=True)
class InitialSpec:
    """Initial (S1,S2) system: either amplitudes alpha,beta or a mixed 2-qubit state.

    The pure form describes alpha|00> + beta|11> on (S1,S2); the mixed form
    tensors an arbitrary two-qubit density matrix with the |00> environment.
    """

    alpha: complex | None = None
    beta: complex | None = None
    mixed_system: DensityMatrix | None = None

    def __post_init__(self):
        if self.mixed_system is not None:
            if self.alpha is not None or self.beta is not None:
                raise ValueError("give either (alpha, beta) or mixed_system, not both")
            if self.mixed_system.n_qubits != 2:
                raise ValueError("mixed_system must be a 2-qubit density matrix")
            return
        if self.alpha is None or self.beta is None:
            raise ValueError("pure spec needs both alpha and beta")
        a, b = complex(self.alpha), complex(self.beta)
        norm2 = abs(a) ** 2 + abs(b) ** 2
        if abs(norm2 - 1.0) > NORM_ATOL:
            raise ValueError(f"|alpha|^2+|beta|^2 = {norm2} deviates from 1 beyond {NORM_ATOL}")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @classmethod
    def from_json(cls, payload: dict, base_dir=".") -> "InitialSpec":
        """Read {"alpha_re":..,"alpha_im":..,"beta_re":..,"beta_im":..} or {"mixed_system_file": path}."""
        if "mixed_system_file" in payload:
            path = Path(base_dir) / payload["mixed_system_file"]
            state = json.loads(path.read_text())
            data = np.asarray(state["re"], float) + 1j * np.asarray(state["im"], float)
            dim = 2 ** int(state["n_qubits"])
            return cls(mixed_system=DensityMatrix(data.reshape(dim, dim)))
        alpha = complex(payload["alpha_re"], payload.get("alpha_im", 0.0))
        beta = complex(payload["beta_re"], payload.get("beta_im", 0.0))
        return cls(alpha=alpha, beta=beta)


def initial_state(spec: InitialSpec):
    """Four-qubit initial state with both environments in |0>.

    Returns a :class:`PureState` for the amplitude form and a
    :class:`DensityMatrix` (system tensor |00><00|) for the mixed form.
    """
    if spec.mixed_system is None:
        vec = np.zeros(16, dtype=complex)
        vec[0b0000] = spec.alpha   # |0000>
        vec[0b1100] = spec.beta    # |1100>
        return PureState(vec)
    env = np.zeros((4, 4), dtype=complex)
    env[0, 0] = 1.0
    # Register order is (S1,S2,E1,E2), so system (x) environment is a plain kron.
    return DensityMatrix(kron(spec.mixed_system.entries, env))


def ad_unitary(p: float) -> np.ndarray:
    """4x4 dilation unitary on one (S_i, E_i) pair, basis order |se> = 00,01,10,11.

    |00> is fixed, |10> -> sqrt(1-p)|10> + sqrt(p)|01>, and the unpopulated
    sector is completed as the rotation |01> -> sqrt(1-p)|01> - sqrt(p)|10>,
    |11> -> |11>, which keeps the matrix real orthogonal.
    """
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"damping strength p={p} outside [0, 1]")
    c, s = math.sqrt(1.0 - p), math.sqrt(p)
    return np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, c, s, 0.0],
            [0.0, -s, c, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ],
        dtype=complex,
    )


def _embed_pair_unitary(u: np.ndarray, slots: tuple[int, int], n_qubits: int) -> np.ndarray:
    """Lift a two-qubit unitary acting on ``slots`` to the full register."""
    i, j = slots
    others = [q for q in range(n_qubits) if q not in (i, j)]
    big = kron(u, np.eye(2 ** (n_qubits - 2)))
    order = [i, j, *others]
    axes = [order.index(q) for q in range(n_qubits)]
    t = big.reshape([2] * (2 * n_qubits))
    t = t.transpose(axes + [n_qubits + a for a in axes])
    return np.ascontiguousarray(t.reshape(2 ** n_qubits, 2 ** n_qubits))


def full_unitary(p1: float, p2: float, adjoint: bool = False) -> np.ndarray:
    """16x16 unitary applying the (S1,E1) dilation at p1 and (S2,E2) at p2."""
    u1 = _embed_pair_unitary(ad_unitary(p1), (Subsystem.S1, Subsystem.E1), 4)
    u2 = _embed_pair_unitary(ad_unitary(p2), (Subsystem.S2, Subsystem.E2), 4)
    u = u2 @ u1
    return u.conj().T if adjoint else u


def _environment_population(state) -> float:
    """Total probability mass with either environment excited."""
    if isinstance(state, PureState):
        probs = np.abs(state.amplitudes) ** 2
        mask = np.array([(k >> 1) & 1 or k & 1 for k in range(16)], dtype=bool)
        return float(probs[mask].sum())
    r1 = matrix_marginal(state.entries, 4, (int(Subsystem.E1),))
    r2 = matrix_marginal(state.entries, 4, (int(Subsystem.E2),))
    return float(r1[1, 1].real + r2[1, 1].real)


def evolve(state, p1: float, p2: float, adjoint: bool = False):
    """Apply the local dilations at strengths (p1, p2) to a four-qubit state.

    Pure states are mapped through the unitary, density matrices are
    conjugated by it.  The forward map expects both environments in |0>;
    populated environments only raise a warning (needed e.g. for the
    ``adjoint`` backward evolution of a final state).
    """
    if not adjoint and _environment_population(state) > 1e-9:
        warnings.warn("environment qubits are not in |0>; applying the dilation anyway")
    u = full_unitary(p1, p2, adjoint=adjoint)
    if isinstance(state, PureState):
        return PureState(u @ state.amplitudes)
    if isinstance(state, DensityMatrix):
        return DensityMatrix(u @ state.entries @ u.conj().T)
    raise TypeError(f"expected a 4-qubit state object, got {type(state).__name__}")


def random_family_state(rng: np.random.Generator, p1=None, p2=None) -> PureState:
    """Random member of the damped family: random alpha,beta phases and strengths.

    Every state produced this way has rank-two (S1,E1) and (S2,E2) marginals,
    which several of the decomposition identities rely on.
    """
    t = rng.uniform(0.05, math.pi / 2 - 0.05)
    alpha = math.cos(t) * np.exp(1j * rng.uniform(0, 2 * math.pi))
    beta = math.sin(t) * np.exp(1j * rng.uniform(0, 2 * math.pi))
    p1 = rng.uniform() if p1 is None else p1
    p2 = rng.uniform() if p2 is None else p2
    return evolve(initial_state(InitialSpec(alpha=alpha, beta=beta)), p1, p2)


def mixed_system_with_purity(alpha: complex, beta: complex, target_purity: float) -> DensityMatrix:
    """Two-qubit alpha|00>+beta|11> mixed with white noise to a given purity.

    Solves v^2 + (1 - v^2)/4 = target_purity for the mixing weight v; with
    target 0.82 this reproduces the fidelity ~0.9 quoted for the lab states.
    """
    if not 0.25 < target_purity <= 1.0:
        raise ValueError("two-qubit purity must lie in (1/4, 1]")
    v = math.sqrt((4.0 * target_purity - 1.0) / 3.0)
    psi = np.zeros(4, dtype=complex)
    psi[0], psi[3] = alpha, beta
    rho = v * np.outer(psi, psi.conj()) + (1.0 - v) * np.eye(4) / 4.0
    return DensityMatrix(rho)
