"""Two-qubit states: construction, random sampling and entanglement measures.

Pure states are length-4 complex vectors in the ``|00>, |01>, |10>, |11>``
basis (qubit 1 first); density matrices are 4x4 complex arrays.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import qmath
from .qmath import PAULIS, I2, dagger, eigh, partial_trace, partial_transpose, tensor
from .rng import RandomStream

DM_ATOL = 1e-12
EIG_CLIP = 1e-10

SINGLET = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


class InvalidStateError(ValueError):
    pass


@dataclass(frozen=True)
class SchmidtForm:
    lam: float
    basis1: np.ndarray
    basis2: np.ndarray

    def __post_init__(self):
        if not 0.0 <= self.lam <= 0.5:
            raise InvalidStateError(f"Schmidt coefficient {self.lam} outside [0, 1/2]")
        for u in (self.basis1, self.basis2):
            if np.abs(dagger(u) @ u - I2).max() > DM_ATOL:
                raise InvalidStateError("local Schmidt basis is not unitary")


@dataclass(frozen=True)
class PauliDecomposition:
    """Local Bloch vectors ``r``, ``s`` and correlation matrix ``t``."""

    r: np.ndarray
    s: np.ndarray
    t: np.ndarray

    def reconstruct(self) -> np.ndarray:
        rho = tensor(I2, I2).copy()
        for i, sig in enumerate(PAULIS):
            rho += self.r[i] * tensor(sig, I2) + self.s[i] * tensor(I2, sig)
            for j, sig2 in enumerate(PAULIS):
                rho += self.t[i, j] * tensor(sig, sig2)
        return rho / 4


@dataclass(frozen=True)
class MQuantityResult:
    m: float
    u: float
    u_tilde: float

    @property
    def violates(self) -> bool:
        return self.m > 1


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return psi[..., :, None] * np.conj(psi[..., None, :])


def validate_density_matrix(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise InvalidStateError(f"expected a 4x4 density matrix, got {rho.shape}")
    if not qmath.is_hermitian(rho, DM_ATOL):
        raise InvalidStateError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > DM_ATOL:
        raise InvalidStateError(f"trace {np.trace(rho).real} != 1")
    if eigh(rho).eigenvalues[0] < -EIG_CLIP:
        raise InvalidStateError("density matrix is not positive semidefinite")
    return rho


def from_schmidt(form: SchmidtForm) -> np.ndarray:
    e, f = form.basis1, form.basis2
    psi = np.sqrt(form.lam) * np.kron(e[:, 0], f[:, 0])
    psi = psi + np.sqrt(1 - form.lam) * np.kron(e[:, 1], f[:, 1])
    return psi / np.linalg.norm(psi)


def schmidt_coefficient(psi: np.ndarray) -> float:
    """Smaller eigenvalue of the reduced state, i.e. lambda in [0, 1/2]."""
    reduced = partial_trace(projector(psi), "second")
    return float(np.clip(eigh(reduced).eigenvalues[0], 0.0, 0.5))


def werner(lam: float) -> np.ndarray:
    if not 0.0 <= lam <= 1.0:
        raise InvalidStateError(f"Werner parameter {lam} outside [0, 1]")
    return lam * projector(SINGLET) + (1 - lam) / 4 * np.eye(4, dtype=complex)


def haar_unitary_2(rng: RandomStream, size: tuple[int, ...] = ()) -> np.ndarray:
    """Haar-random 2x2 unitaries via QR of a complex Ginibre matrix."""
    g = rng.standard_normal(size + (2, 2)) + 1j * rng.standard_normal(size + (2, 2))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[..., None, :]


def haar_pure(rng: RandomStream) -> np.ndarray:
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    return v / np.linalg.norm(v)


def random_schmidt_form(lam: float, rng: RandomStream) -> SchmidtForm:
    u = haar_unitary_2(rng, (2,))
    return SchmidtForm(lam, u[0], u[1])


def random_mixed(rng: RandomStream) -> np.ndarray:
    """Hilbert-Schmidt random density matrix ``G G^dag / Tr(G G^dag)``."""
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    w = g @ dagger(g)
    rho = w / np.trace(w).real
    return 0.5 * (rho + dagger(rho))


def pauli_decompose(rho: np.ndarray) -> PauliDecomposition:
    rho = np.asarray(rho, dtype=complex)
    r = np.array([np.trace(rho @ tensor(p, I2)).real for p in PAULIS])
    s = np.array([np.trace(rho @ tensor(I2, p)).real for p in PAULIS])
    t = np.array([[np.trace(rho @ tensor(p, q)).real for q in PAULIS] for p in PAULIS])
    return PauliDecomposition(r, s, t)


def correlation_matrix(rho: np.ndarray) -> np.ndarray:
    return pauli_decompose(rho).t


def concurrence_pure(lam: float) -> float:
    if not 0.0 <= lam <= 0.5:
        raise InvalidStateError(f"Schmidt coefficient {lam} outside [0, 1/2]")
    return 2.0 * np.sqrt(lam * (1.0 - lam))


def schmidt_from_concurrence(c: float) -> float:
    if not 0.0 <= c <= 1.0:
        raise InvalidStateError(f"concurrence {c} outside [0, 1]")
    return (1.0 - np.sqrt(1.0 - c * c)) / 2.0


def negativity(rho: np.ndarray) -> float:
    vals = eigh(partial_transpose(rho)).eigenvalues
    return float(-np.sum(vals[vals < 0]))


def m_quantity(rho: np.ndarray) -> MQuantityResult:
    t = correlation_matrix(rho)
    vals = eigh((t.T @ t).astype(complex)).eigenvalues
    vals = np.clip(vals, 0.0, None)
    u, u_tilde = float(vals[2]), float(vals[1])
    return MQuantityResult(m=u + u_tilde, u=u, u_tilde=u_tilde)


# JSON wire format: nested arrays of [re, im] pairs.

def to_json_array(a: np.ndarray) -> list:
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def from_json_array(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.shape[-1] != 2:
        raise InvalidStateError("complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def load_state(path: str | Path) -> np.ndarray:
    """Read a pure state (4 pairs) or density matrix (4x4 pairs) as a density matrix."""
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = data.get("rho", data.get("state"))
    arr = from_json_array(data)
    if arr.shape == (4,):
        norm = np.linalg.norm(arr)
        if abs(norm - 1) > DM_ATOL:
            raise InvalidStateError(f"pure state has norm {norm}")
        arr = projector(arr)
    return validate_density_matrix(arr)


def save_state(path: str | Path, state: np.ndarray) -> None:
    with open(path, "w") as fh:
        json.dump(to_json_array(state), fh)
