"""Simulated four-qubit state tomography with 256 product-projector settings.

Each setting projects every qubit onto one of |0>, |1>, |+> = (|0>+|1>)/sqrt(2)
or |+i> = (|0>+i|1>)/sqrt(2); the 256 resulting rank-one product projectors
are informationally complete.  Counts are drawn binomially per setting, and
states are reconstructed either by linear inversion or by the iterative
maximum-likelihood fixed point.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .qcore import DensityMatrix, as_matrix, hermitize

__all__ = [
    "SELECTORS",
    "MeasurementSetting",
    "CountRecord",
    "enumerate_settings",
    "setting_projectors",
    "born_probability",
    "simulate_counts",
    "linear_inversion",
    "project_physical",
    "mle_reconstruct",
    "MleResult",
    "save_counts",
    "load_counts",
    "save_settings_manifest",
]

# Selector order fixes the base-4 digit of each setting id.
SELECTORS = ("Z", "Z'", "X", "Y")

_KETS = {
    "Z": np.array([1.0, 0.0], dtype=complex),
    "Z'": np.array([0.0, 1.0], dtype=complex),
    "X": np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0),
    "Y": np.array([1.0, 1.0j], dtype=complex) / np.sqrt(2.0),
}

N_QUBITS = 4
N_SETTINGS = 4 ** N_QUBITS


@dataclass(frozen=True)
class MeasurementSetting:
    """One product projector: a basis selector per qubit plus its id.

    The id encodes the selector tuple in base 4 with the S1 digit most
    significant, so id 0 is the all-|0> projector.
    """

    setting_id: int
    selectors: tuple[str, str, str, str]

    def __post_init__(self):
        if len(self.selectors) != N_QUBITS or any(s not in SELECTORS for s in self.selectors):
            raise ValueError(f"selectors must be four of {SELECTORS}, got {self.selectors}")
        encoded = 0
        for s in self.selectors:
            encoded = 4 * encoded + SELECTORS.index(s)
        if encoded != self.setting_id:
            raise ValueError(f"id {self.setting_id} does not encode selectors {self.selectors}")

    def ket(self) -> np.ndarray:
        """The 16-component product ket this setting projects onto."""
        out = np.array([1.0], dtype=complex)
        for s in self.selectors:
            out = np.kron(out, _KETS[s])
        return out

    def projector(self) -> np.ndarray:
        k = self.ket()
        return np.outer(k, k.conj())


@dataclass(frozen=True)
class CountRecord:
    """Coincidence count for one setting: ``count`` successes out of ``shots``."""

    setting_id: int
    shots: int
    count: int

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be positive")
        if not 0 <= self.count <= self.shots:
            raise ValueError(f"count {self.count} outside [0, shots={self.shots}]")


def enumerate_settings() -> list[MeasurementSetting]:
    """All 256 settings in deterministic id order."""
    out = []
    for sid in range(N_SETTINGS):
        digits = [(sid >> (2 * k)) & 3 for k in range(N_QUBITS - 1, -1, -1)]
        out.append(MeasurementSetting(sid, tuple(SELECTORS[d] for d in digits)))
    return out


@lru_cache(maxsize=1)
def _setting_kets() -> np.ndarray:
    return np.stack([s.ket() for s in enumerate_settings()])


def setting_projectors() -> np.ndarray:
    """Array (256, 16, 16) of the canonical projectors, id order."""
    kets = _setting_kets()
    return np.einsum("si,sj->sij", kets, kets.conj())


def _probabilities(rho_mat: np.ndarray, projectors: np.ndarray) -> np.ndarray:
    probs = np.einsum("sij,ji->s", projectors, rho_mat).real
    return np.clip(probs, 0.0, 1.0)


def born_probability(rho, s: MeasurementSetting) -> float:
    """tr(rho * Pi_s), clamped to [0, 1]."""
    mat = as_matrix(rho)
    k = s.ket()
    value = float(np.real(k.conj() @ mat @ k))
    return min(max(value, 0.0), 1.0)


def simulate_counts(rho, shots: int, seed: int, projectors: np.ndarray | None = None) -> list[CountRecord]:
    """Binomial counts for every setting; reproducible for a fixed seed."""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    mat = as_matrix(rho)
    projectors = setting_projectors() if projectors is None else projectors
    probs = _probabilities(mat, projectors)
    rng = np.random.default_rng(seed)
    counts = rng.binomial(shots, probs)
    return [CountRecord(sid, shots, int(c)) for sid, c in enumerate(counts)]


def _complete_records(records) -> dict[int, CountRecord]:
    by_id = {r.setting_id: r for r in records}
    missing = sorted(set(range(N_SETTINGS)) - set(by_id))
    if missing:
        raise ValueError(f"missing settings: {missing}")
    return by_id


def linear_inversion(records, projectors: np.ndarray | None = None) -> np.ndarray:
    """Least-squares solve of the Born system; Hermitian and unit trace.

    The output is a plain array because finite counts can push eigenvalues
    negative; feed it through :func:`project_physical` to obtain a state.
    """
    by_id = _complete_records(records)
    freqs = np.array([by_id[sid].count / by_id[sid].shots for sid in range(N_SETTINGS)])
    projectors = setting_projectors() if projectors is None else projectors
    a = projectors.conj().reshape(N_SETTINGS, -1)
    sol, *_ = np.linalg.lstsq(a, freqs.astype(complex), rcond=None)
    rho = hermitize(sol.reshape(16, 16))
    return rho / np.trace(rho).real


def project_physical(m: np.ndarray) -> DensityMatrix:
    """Nearest (Frobenius) PSD unit-trace matrix, by clipping with redistribution.

    Negative eigenvalues are zeroed one by one while their total is spread
    uniformly over the remaining ones, which preserves the trace.
    """
    mat = hermitize(np.asarray(m, dtype=complex))
    tr = float(np.trace(mat).real)
    if abs(tr - 1.0) > 1e-9:
        raise ValueError(f"expected unit trace, got {tr}")
    w, v = np.linalg.eigh(mat)
    w = w[::-1].copy()
    v = v[:, ::-1]
    carry = 0.0
    for k in range(w.size - 1, -1, -1):
        if w[k] + carry / (k + 1) < 0.0:
            carry += w[k]
            w[k] = 0.0
        else:
            w[: k + 1] += carry / (k + 1)
            break
    return DensityMatrix((v * w) @ v.conj().T)


@dataclass(frozen=True)
class MleResult:
    """Maximum-likelihood reconstruction plus convergence diagnostics."""

    rho: DensityMatrix
    iterations: int
    log_likelihood: float
    converged: bool


def _log_likelihood(probs: np.ndarray, counts: np.ndarray, shots: np.ndarray) -> float:
    p = np.clip(probs, 1e-12, 1.0 - 1e-12)
    return float(np.sum(counts * np.log(p) + (shots - counts) * np.log1p(-p)))


def mle_reconstruct(
    records,
    max_iter: int = 50_000,
    tol: float = 1e-5,
    projectors: np.ndarray | None = None,
) -> MleResult:
    """Iterative R*rho*R maximum-likelihood fit of the binomial count data.

    Each setting contributes both its projector and the complement, so the
    update operator is positive and the plain fixed-point step is attempted
    first; whenever it fails to increase the log-likelihood the step is
    diluted by factors of 0.5 until it does.  Iteration starts from the
    unbiased I/16 and stops once the log-likelihood gain drops below ``tol``
    (warns and flags if ``max_iter`` is hit first).
    """
    by_id = _complete_records(records)
    counts = np.array([by_id[sid].count for sid in range(N_SETTINGS)], dtype=float)
    shots = np.array([by_id[sid].shots for sid in range(N_SETTINGS)], dtype=float)

    projectors = setting_projectors() if projectors is None else projectors
    flat = np.ascontiguousarray(projectors.reshape(N_SETTINGS, -1))
    dim = projectors.shape[1]
    eye = np.eye(dim, dtype=complex)
    total = float(shots.sum())

    def probabilities(mat):
        return np.clip((flat @ mat.T.reshape(-1)).real, 1e-12, 1.0 - 1e-12)

    rho = eye / dim
    ll = _log_likelihood(probabilities(rho), counts, shots)

    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        probs = probabilities(rho)
        w_hit = counts / probs
        w_miss = (shots - counts) / (1.0 - probs)
        r_op = ((w_hit - w_miss) @ flat).reshape(dim, dim) + w_miss.sum() * eye
        r_op /= total  # harmless overall scale; keeps the dilution step tame

        candidate = hermitize(r_op @ rho @ r_op)
        candidate /= np.trace(candidate).real
        new_ll = _log_likelihood(probabilities(candidate), counts, shots)

        eps = 1.0
        while new_ll < ll and eps > 1e-8:
            eps *= 0.5
            step = eye + eps * r_op
            candidate = hermitize(step @ rho @ step)
            candidate /= np.trace(candidate).real
            new_ll = _log_likelihood(probabilities(candidate), counts, shots)
        if new_ll < ll:
            break  # no ascent direction left at working precision
        rho, gain, ll = candidate, new_ll - ll, new_ll
        if gain < tol:
            converged = True
            break
    if not converged:
        warnings.warn(f"maximum-likelihood fit did not converge in {iterations} iterations")
    w, v = np.linalg.eigh(hermitize(rho))
    rho = (v * np.clip(w, 0.0, None)) @ v.conj().T
    rho /= np.trace(rho).real
    return MleResult(DensityMatrix(rho), iterations, ll, converged)


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def save_counts(records, path) -> None:
    """CSV with header setting_id,shots,count, ordered by setting id."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["setting_id", "shots", "count"])
        for r in sorted(records, key=lambda r: r.setting_id):
            writer.writerow([r.setting_id, r.shots, r.count])


def load_counts(path) -> list[CountRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [CountRecord(int(row["setting_id"]), int(row["shots"]), int(row["count"]))
                for row in reader]


def save_settings_manifest(path) -> None:
    """Companion JSON describing the projector of every setting."""
    payload = []
    for s in enumerate_settings():
        ket = s.ket()
        payload.append({
            "setting_id": s.setting_id,
            "selectors": list(s.selectors),
            "ket_re": [float(x) for x in ket.real],
            "ket_im": [float(x) for x in ket.imag],
        })
    Path(path).write_text(json.dumps(payload, indent=1))
