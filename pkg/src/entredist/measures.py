"""Entanglement quantifiers for the four-qubit system+environment register.

Covers the two-qubit concurrence and its signed precursor, pure-state and
estimated mixed-state tangles across arbitrary bipartitions, the
three-tangle and its extension to rank-two pair groupings treated as
effective qubits, the residual (monogamy-slack) quantities, their six-term
decomposition, and the Dicke-state witness of genuine four-partite
entanglement.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .qcore import (
    Partition,
    PureState,
    Subsystem,
    ALL_SUBSYSTEMS,
    as_matrix,
    eig_hermitian,
    fidelity_pure,
    hermitize,
    matrix_marginal,
    numerical_rank,
    psd_sqrt,
    purity,
    vector_marginal,
)

__all__ = [
    "EstimatorWarning",
    "RankConditionError",
    "DecompositionError",
    "Grouping",
    "concurrence_signed",
    "concurrence",
    "tangle_pure",
    "tangle_lower_bound",
    "tangle_quasipure",
    "three_tangle",
    "compress_pair_to_qubit",
    "effective_three_tangle",
    "residual_pair_cut",
    "residual_single_qubit",
    "reduced_three_tangle",
    "decompose_pair_residual",
    "ResidualDecomposition",
    "monogamy_slacks",
    "MonogamyReport",
    "dicke_state",
    "dicke_witness",
    "TangleReport",
    "compute_report",
    "PAIR_CUT",
]

PAIR_CUT = Partition.split("S1E1", "S2E2")

# Sub-1e-6 negatives are floating noise from the estimators; anything more
# negative is surfaced as a warning instead of silently clamped.
CLAMP_ATOL = 1e-6

_SY_SY = np.array(
    [[0, 0, 0, -1],
     [0, 0, 1, 0],
     [0, 1, 0, 0],
     [-1, 0, 0, 0]],
    dtype=complex,
)


class EstimatorWarning(UserWarning):
    """An estimated tangle came out more negative than numerical noise allows."""


class RankConditionError(ValueError):
    """A pair marginal that must be rank-two has a third eigenvalue."""


class DecompositionError(RuntimeError):
    """The six-term residual decomposition failed its consistency check."""


@dataclass(frozen=True)
class Grouping:
    """Reference qubit i, spectator j and the pair (k,l) treated as one qubit."""

    i: Subsystem
    j: Subsystem
    pair_kl: tuple[Subsystem, Subsystem]

    def __post_init__(self):
        labels = {self.i, self.j, *self.pair_kl}
        if len(labels) != 4 or labels != set(ALL_SUBSYSTEMS):
            raise ValueError(f"grouping must cover all four subsystems once, got {self}")

    @classmethod
    def anchored_at(cls, i) -> "Grouping":
        """Canonical grouping for reference qubit i: j is its local partner."""
        i = Subsystem[i] if isinstance(i, str) else Subsystem(int(i))
        j = i.partner
        kl = tuple(sorted(set(ALL_SUBSYSTEMS) - {i, j}))
        return cls(i, j, (Subsystem(kl[0]), Subsystem(kl[1])))


def _clamp_small_negative(value: float, atol: float, context: str) -> float:
    if -atol <= value < 0.0:
        return 0.0
    if value < -atol:
        warnings.warn(f"{context} = {value:.3e} is negative beyond noise", EstimatorWarning)
    return value


# ---------------------------------------------------------------------------
# Two-qubit concurrence
# ---------------------------------------------------------------------------

def _spin_flipped(mat: np.ndarray) -> np.ndarray:
    return _SY_SY @ mat.conj() @ _SY_SY


def _wootters_roots(mat: np.ndarray) -> np.ndarray:
    """Descending sqrt-eigenvalues of rho * rho_tilde via the Hermitian surrogate."""
    root = psd_sqrt(mat)
    m = hermitize(root @ _spin_flipped(mat) @ root)
    w = np.linalg.eigvalsh(m)[::-1]
    if w[-1] < -1e-9:
        raise ValueError(f"spin-flipped product has eigenvalue {w[-1]} below -1e-9")
    # eigenvalues below 1e-9 are floating noise whose square roots (~1e-8 for
    # a pure input) would otherwise dominate the subtracted terms
    return np.sqrt(np.where(w < 1e-9, 0.0, w))


def concurrence_signed(rho2) -> float:
    """Signed precursor of the two-qubit concurrence (may be negative).

    The sign carries information the clamped concurrence discards: how far
    inside the separable set a state sits before pairwise entanglement dies
    or after it is born.
    """
    mat = as_matrix(rho2)
    if mat.shape != (4, 4):
        raise ValueError(f"concurrence needs a 2-qubit state, got dimension {mat.shape[0]}")
    lam = _wootters_roots(mat)
    return float(lam[0] - lam[1] - lam[2] - lam[3])


def concurrence(rho2) -> float:
    """Wootters two-qubit concurrence, in [0, 1]."""
    return max(0.0, concurrence_signed(rho2))


# ---------------------------------------------------------------------------
# Tangles across bipartitions
# ---------------------------------------------------------------------------

def _side_a_slots(part, n_qubits: int) -> tuple[int, ...]:
    if isinstance(part, Partition):
        labels = part.labels()
        if len(labels) != n_qubits:
            raise ValueError(f"partition covers {len(labels)} labels but state has {n_qubits} qubits")
        return tuple(sorted(int(x) for x in part.side_a))
    slots = tuple(sorted(int(Subsystem[x]) if isinstance(x, str) else int(x) for x in part))
    if not slots or len(slots) >= n_qubits:
        raise ValueError(f"side A must be a proper non-empty subset of the {n_qubits} slots")
    if len(set(slots)) != len(slots) or slots[0] < 0 or slots[-1] >= n_qubits:
        raise ValueError(f"invalid side-A slots {slots} for {n_qubits} qubits")
    return slots


def tangle_pure(psi: PureState, part) -> float:
    """Tangle 2(1 - tr rho_A^2) of a pure state across the given bipartition."""
    slots = _side_a_slots(part, psi.n_qubits)
    rho_a = vector_marginal(psi.amplitudes, psi.n_qubits, slots)
    return 2.0 * (1.0 - purity(rho_a))


def tangle_lower_bound(rho, part) -> float:
    """Purity-gap lower bound max(0, 2[tr rho^2 - tr rho_A^2]) on the tangle."""
    mat = as_matrix(rho)
    n = int(np.log2(mat.shape[0]))
    slots = _side_a_slots(part, n)
    rho_a = matrix_marginal(mat, n, slots)
    return max(0.0, 2.0 * (purity(mat) - purity(rho_a)))


def _antisym_overlap_matrix(subnormed: np.ndarray, d_a: int, d_b: int) -> np.ndarray:
    """Overlaps <f1 f1|A|fm fn> of the doubled antisymmetric projector.

    ``subnormed`` holds sqrt(mu_i) * eigenvector rows; A is the operator whose
    pure-state expectation is the squared concurrence across the (A|B) cut.
    """
    f = subnormed.reshape(-1, d_a, d_b)
    f1c = f[0].conj()
    v = np.einsum("ab,mab->m", f1c, f)
    swap_a = np.einsum("ab,cd,mcb,nad->mn", f1c, f1c, f, f)
    swap_b = np.einsum("ab,cd,mad,ncb->mn", f1c, f1c, f, f)
    return np.outer(v, v) + np.outer(v, v).T - swap_a - swap_b


def tangle_quasipure(rho, part) -> float:
    """Quasi-pure estimate of the mixed-state tangle across a bipartition.

    Expands the squared-concurrence form around the dominant eigenvector of
    rho, which reduces the convex-roof minimization to the same
    singular-value expression that solves the two-qubit case.  Exact on pure
    states; on the mixed states of interest it sits below the convex roof.
    """
    mat = as_matrix(rho)
    n = int(np.log2(mat.shape[0]))
    slots = _side_a_slots(part, n)
    d_a = 2 ** len(slots)
    d_b = mat.shape[0] // d_a

    w, v = eig_hermitian(mat)
    keep = w > 1e-13
    w, v = w[keep], v[:, keep]
    # Reorder amplitudes so side A is the leading tensor factor.
    rest = [q for q in range(n) if q not in slots]
    perm = list(slots) + rest
    vecs = v.T.reshape(-1, *([2] * n)).transpose([0] + [1 + q for q in perm]).reshape(-1, d_a * d_b)
    subnormed = np.sqrt(w)[:, None] * vecs

    a11 = _antisym_overlap_matrix(subnormed[:1], d_a, d_b)[0, 0].real
    if a11 <= 1e-14:
        return 0.0
    t = _antisym_overlap_matrix(subnormed, d_a, d_b) / np.sqrt(a11)
    sigma = np.linalg.svd(t, compute_uv=False)
    c = max(0.0, float(sigma[0] - sigma[1:].sum()))
    return c * c


# ---------------------------------------------------------------------------
# Three-tangle and effective-qubit compression
# ---------------------------------------------------------------------------

def three_tangle(psi3: PureState, ref: int = 0) -> float:
    """Tripartite tangle of a pure 3-qubit state (independent of ``ref``)."""
    if psi3.n_qubits != 3:
        raise ValueError(f"three_tangle needs a 3-qubit state, got {psi3.n_qubits}")
    ref = int(ref)
    others = [q for q in range(3) if q != ref]
    vec = psi3.amplitudes
    rho_i = vector_marginal(vec, 3, (ref,))
    one_to_rest = 4.0 * float(np.real(np.linalg.det(rho_i)))
    c_ij = concurrence(vector_marginal(vec, 3, tuple(sorted((ref, others[0])))))
    c_ik = concurrence(vector_marginal(vec, 3, tuple(sorted((ref, others[1])))))
    tau = one_to_rest - c_ij ** 2 - c_ik ** 2
    if -1e-7 <= tau < 0.0:
        return 0.0
    if tau < -1e-7:
        warnings.warn(f"three-tangle = {tau:.3e} is negative beyond noise", EstimatorWarning)
    return tau


def compress_pair_to_qubit(psi: PureState, pair) -> PureState:
    """Map a rank-two pair of qubits onto one effective qubit.

    The two eigenvectors of the pair marginal (descending eigenvalue, each
    phased so its largest-magnitude component is real positive) become the
    effective |0> and |1>.  The returned 3-qubit state keeps the remaining
    slots in register order and appends the effective qubit last.
    """
    if psi.n_qubits != 4:
        raise ValueError("compression expects a 4-qubit state")
    pair_slots = tuple(sorted(int(Subsystem[x]) if isinstance(x, str) else int(x) for x in pair))
    if len(pair_slots) != 2:
        raise ValueError(f"pair must name two distinct subsystems, got {pair!r}")
    rho_pair = vector_marginal(psi.amplitudes, 4, pair_slots)
    w, v = eig_hermitian(rho_pair)
    if w[2] > 1e-6 * w[0]:
        raise RankConditionError(
            f"pair marginal over slots {pair_slots} is not rank-two: "
            f"third eigenvalue {w[2]:.3e} (largest {w[0]:.3e})"
        )
    basis = []
    for k in range(2):
        col = v[:, k]
        pivot = col[int(np.argmax(np.abs(col)))]
        basis.append(col * (pivot.conjugate() / abs(pivot)) if abs(pivot) > 0 else col)
    iso = np.column_stack(basis)  # 4 x 2, columns = effective |0>, |1>

    kept = [q for q in range(4) if q not in pair_slots]
    t = psi.amplitudes.reshape([2] * 4).transpose(kept + list(pair_slots)).reshape(4, 4)
    out = t @ iso.conj()  # (kept, effective)
    norm = float(np.linalg.norm(out))
    return PureState(out.reshape(-1) / norm)


def effective_three_tangle(psi: PureState, grouping: Grouping) -> float:
    """Three-tangle of (i, j, effective qubit) after compressing grouping.pair_kl."""
    compressed = compress_pair_to_qubit(psi, grouping.pair_kl)
    kept = sorted(q for q in range(4) if q not in {int(s) for s in grouping.pair_kl})
    return three_tangle(compressed, kept.index(int(grouping.i)))


# ---------------------------------------------------------------------------
# Residual (monogamy-slack) quantities
# ---------------------------------------------------------------------------

def _pair_concurrences(state) -> dict[frozenset, float]:
    out = {}
    mat = as_matrix(state)
    vec = state.amplitudes if isinstance(state, PureState) else None
    for a in range(4):
        for b in range(a + 1, 4):
            if vec is not None:
                rho = vector_marginal(vec, 4, (a, b))
            else:
                rho = matrix_marginal(mat, 4, (a, b))
            out[frozenset({Subsystem(a), Subsystem(b)})] = concurrence(rho)
    return out


def _pair_tangle(state, estimator: str) -> float:
    """Tangle across the (S1,E1)|(S2,E2) cut with the requested estimator."""
    if isinstance(state, PureState):
        return tangle_pure(state, PAIR_CUT)
    if estimator == "lb":
        return tangle_lower_bound(state, PAIR_CUT)
    if estimator == "qp":
        return tangle_quasipure(state, PAIR_CUT)
    raise ValueError(f"unknown pair-cut estimator {estimator!r}")


def residual_pair_cut(state, estimator: str = "lb") -> float:
    """Residual entanglement of the (S1,E1)|(S2,E2) cut beyond all pairwise terms.

    Pure states use the exact tangle; mixed states the purity-gap bound (or
    the quasi-pure estimate when ``estimator="qp"``).  A pair marginal of
    rank above two voids the monogamy guarantee, so it only warns.
    """
    if numerical_rank(matrix_marginal(as_matrix(state), 4, (0, 2)), 1e-6) > 2:
        warnings.warn("(S1,E1) marginal has rank above two; residual is not certified")
    pairs = _pair_concurrences(state)
    big = _pair_tangle(state, estimator)
    return big - sum(
        pairs[frozenset(p)] ** 2
        for p in ({Subsystem.S2, Subsystem.E1}, {Subsystem.S1, Subsystem.E2},
                  {Subsystem.S1, Subsystem.S2}, {Subsystem.E1, Subsystem.E2})
    )


def residual_single_qubit(state, i) -> float:
    """Residual entanglement of qubit i versus the rest beyond pairwise terms."""
    i = Subsystem[i] if isinstance(i, str) else Subsystem(int(i))
    if isinstance(state, PureState):
        big = tangle_pure(state, (int(i),))
    else:
        big = tangle_quasipure(state, (int(i),))
    pairs = _pair_concurrences(state)
    return big - sum(pairs[frozenset({i, j})] ** 2 for j in ALL_SUBSYSTEMS if j != i)


def _reduced_three_tangle_raw(psi: PureState, grouping: Grouping) -> float:
    return residual_single_qubit(psi, grouping.i) - effective_three_tangle(psi, grouping)


def reduced_three_tangle(psi: PureState, grouping: Grouping) -> float:
    """Tripartite entanglement of the mixed (i, k, l) reduction, anchored at i.

    Subtracts the effective-qubit three-tangle from the single-qubit residual;
    unlike the pure three-tangle this is not permutation invariant in i.
    """
    raw = _reduced_three_tangle_raw(psi, grouping)
    return _clamp_small_negative(raw, CLAMP_ATOL, f"reduced three-tangle at {grouping.i.name}")


@dataclass(frozen=True)
class ResidualDecomposition:
    """Six-term split of the pair-cut residual, plus its consistency check."""

    reduced: dict[str, float]
    effective: dict[str, float]
    half_sum: float
    residual: float
    discrepancy: float


def decompose_pair_residual(psi: PureState, atol: float = 1e-6) -> ResidualDecomposition:
    """Split the pair-cut residual into four anchored and two effective tangles.

    The half-sum of the six terms must reproduce the residual itself; a
    discrepancy beyond ``atol`` raises with both sides reported.
    """
    effective = {
        "S1E1(S2E2)": effective_three_tangle(psi, Grouping.anchored_at(Subsystem.S1)),
        "S2E2(S1E1)": effective_three_tangle(psi, Grouping.anchored_at(Subsystem.S2)),
    }
    raw = {}
    reduced = {}
    for i in ALL_SUBSYSTEMS:
        g = Grouping.anchored_at(i)
        key = f"{i.name}:{g.pair_kl[0].name}{g.pair_kl[1].name}"
        eff = effective["S1E1(S2E2)"] if i in (Subsystem.S1, Subsystem.E1) else effective["S2E2(S1E1)"]
        raw[key] = residual_single_qubit(psi, i) - eff
        reduced[key] = _clamp_small_negative(raw[key], CLAMP_ATOL, f"reduced three-tangle at {i.name}")
    half_sum = 0.5 * (sum(raw.values()) + sum(effective.values()))
    residual = residual_pair_cut(psi)
    discrepancy = abs(half_sum - residual)
    if discrepancy > atol:
        raise DecompositionError(
            f"residual decomposition mismatch: half-sum {half_sum!r} vs residual {residual!r} "
            f"(|diff| = {discrepancy:.3e} > {atol})"
        )
    return ResidualDecomposition(reduced, effective, half_sum, residual, discrepancy)


@dataclass(frozen=True)
class MonogamyReport:
    """Left-minus-right slack of the monogamy inequalities."""

    one_vs_rest: dict[str, float]
    pair_cut: float | None
    pair_cut_note: str | None = None


def monogamy_slacks(state) -> MonogamyReport:
    """Monogamy slacks for each single qubit and for the (S1,E1)|(S2,E2) cut.

    The pair-cut inequality is only valid when the (S1,E1) marginal is
    rank-two; otherwise that check is skipped with a notice.  On pure input
    all slacks are exact; on mixed input they inherit the estimators and may
    dip below zero.
    """
    one_vs_rest = {i.name: residual_single_qubit(state, i) for i in ALL_SUBSYSTEMS}
    rank = numerical_rank(matrix_marginal(as_matrix(state), 4, (0, 2)), 1e-6)
    if rank > 2:
        return MonogamyReport(one_vs_rest, None,
                              f"(S1,E1) marginal rank {rank} > 2; pair-cut check skipped")
    return MonogamyReport(one_vs_rest, residual_pair_cut(state))


# ---------------------------------------------------------------------------
# Dicke witness
# ---------------------------------------------------------------------------

def dicke_state() -> PureState:
    """Six-term symmetric four-qubit state (a Dicke state up to local flips)."""
    vec = np.zeros(16, dtype=complex)
    for bits in ("0000", "1111", "0011", "1100", "0110", "1001"):
        vec[int(bits, 2)] = 1.0
    return PureState(vec / np.sqrt(6.0))


def dicke_witness(state) -> tuple[float, bool]:
    """Fidelity with the Dicke-type state and whether it certifies 4-partite entanglement.

    Fidelity strictly above 2/3 witnesses genuine four-partite entanglement.
    """
    fid = fidelity_pure(state, dicke_state())
    return fid, fid > 2.0 / 3.0


# ---------------------------------------------------------------------------
# One-stop report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TangleReport:
    """Every measure of interest for one state along the damping sweep."""

    p: float
    c2_s1s2: float
    c2_e1e2: float
    c2_s1e2: float
    c2_s2e1: float
    gamma_s1s2: float
    gamma_e1e2: float
    c2_pair_lb: float
    residual_pair: float
    residual_i: dict[str, float] = field(repr=False)
    tau_underline: dict[str, float] = field(repr=False)
    tau_effective: dict[str, float] = field(repr=False)
    dicke_fidelity: float = 0.0
    genuine4: bool = False


def compute_report(state, p: float, estimator_pair: str = "lb") -> TangleReport:
    """Evaluate the full measure hierarchy for one four-qubit state.

    ``estimator_pair`` selects the mixed-state stand-in for the pair-cut
    tangle inside the residual ("lb" purity-gap bound or "qp" quasi-pure).
    For mixed input the effective-qubit tangles are reported as zero: they
    vanish identically on the damped family this pipeline sweeps, and the
    compression they need is only defined for pure global states.
    """
    pure = isinstance(state, PureState)
    mat = as_matrix(state)
    vec = state.amplitudes if pure else None

    def marg(a, b):
        if vec is not None:
            return vector_marginal(vec, 4, (a, b))
        return matrix_marginal(mat, 4, (a, b))

    g_s1s2 = concurrence_signed(marg(0, 1))
    g_e1e2 = concurrence_signed(marg(2, 3))
    c_s1e2 = concurrence(marg(0, 3))
    c_s2e1 = concurrence(marg(1, 2))

    residual_i = {i.name: residual_single_qubit(state, i) for i in ALL_SUBSYSTEMS}

    if pure:
        tau_eff = {
            "S1E1(S2E2)": effective_three_tangle(state, Grouping.anchored_at(Subsystem.S1)),
            "S2E2(S1E1)": effective_three_tangle(state, Grouping.anchored_at(Subsystem.S2)),
        }
    else:
        tau_eff = {"S1E1(S2E2)": 0.0, "S2E2(S1E1)": 0.0}

    tau_under = {}
    for i in ALL_SUBSYSTEMS:
        g = Grouping.anchored_at(i)
        key = f"{i.name}:{g.pair_kl[0].name}{g.pair_kl[1].name}"
        eff = tau_eff["S1E1(S2E2)"] if i in (Subsystem.S1, Subsystem.E1) else tau_eff["S2E2(S1E1)"]
        tau_under[key] = _clamp_small_negative(
            residual_i[i.name] - eff, CLAMP_ATOL, f"reduced three-tangle at {i.name}"
        )

    fid, genuine = dicke_witness(state)
    return TangleReport(
        p=float(p),
        c2_s1s2=max(0.0, g_s1s2) ** 2,
        c2_e1e2=max(0.0, g_e1e2) ** 2,
        c2_s1e2=c_s1e2 ** 2,
        c2_s2e1=c_s2e1 ** 2,
        gamma_s1s2=g_s1s2,
        gamma_e1e2=g_e1e2,
        c2_pair_lb=tangle_lower_bound(state, PAIR_CUT),
        residual_pair=residual_pair_cut(state, estimator=estimator_pair),
        residual_i=residual_i,
        tau_underline=tau_under,
        tau_effective=tau_eff,
        dicke_fidelity=fid,
        genuine4=genuine,
    )
