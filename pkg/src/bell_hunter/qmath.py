"""Small dense complex linear algebra for one- and two-qubit operators.

Matrices are plain ``numpy`` complex arrays. Every routine accepts a stack of
matrices with arbitrary leading batch dimensions, so the same code path serves
a single density matrix and ten thousand see-saw restarts.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

HERMITIAN_ATOL = 1e-12
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100
_PHASE_EPS = 1e-10

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


class NotHermitianError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues and matching unit eigenvectors.

    ``eigenvectors[..., :, i]`` is the eigenvector of ``eigenvalues[..., i]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues[..., None, :]) @ dagger(v)


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def is_hermitian(m: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    m = np.asarray(m)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        return False
    return bool(np.all(np.abs(m - dagger(m)) <= atol))


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape[-1] != b.shape[-2]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return a @ b


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; the first factor is qubit 1 (Alice).

    Works on stacks: ``tensor(a[..., m, n], b[..., p, q])`` has shape
    ``(..., m*p, n*q)``.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    out = a[..., :, None, :, None] * b[..., None, :, None, :]
    shape = out.shape[:-4] + (a.shape[-2] * b.shape[-2], a.shape[-1] * b.shape[-1])
    return out.reshape(shape)


def _check_4x4(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.shape[-2:] != (4, 4):
        raise ValueError(f"expected a 4x4 two-qubit operator, got shape {m.shape}")
    return m


def partial_trace(m: np.ndarray, subsystem: Literal["first", "second"]) -> np.ndarray:
    """Trace out one qubit of a two-qubit operator."""
    m = _check_4x4(m)
    t = m.reshape(m.shape[:-2] + (2, 2, 2, 2))  # (i, j, k, l) = <ij| m |kl>
    if subsystem == "first":
        return np.einsum("...ijil->...jl", t)
    if subsystem == "second":
        return np.einsum("...ijkj->...ik", t)
    raise ValueError(f"unknown subsystem {subsystem!r}")


def partial_transpose(m: np.ndarray, subsystem: Literal["second"] = "second") -> np.ndarray:
    m = _check_4x4(m)
    if subsystem != "second":
        raise ValueError("only the second qubit can be transposed")
    t = m.reshape(m.shape[:-2] + (2, 2, 2, 2))
    return np.swapaxes(t, -3, -1).reshape(m.shape)


def _fix_phase(vecs: np.ndarray) -> np.ndarray:
    """Rotate each column so its first non-negligible entry is real positive."""
    mags = np.abs(vecs)
    first = np.argmax(mags > _PHASE_EPS, axis=-2)
    lead = np.take_along_axis(vecs, first[..., None, :], axis=-2)
    phase = lead / np.abs(lead)
    return vecs * np.conj(phase)


def _eigh2(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = m[..., 0, 0].real
    c = m[..., 1, 1].real
    b = m[..., 0, 1]
    mean = 0.5 * (a + c)
    d = 0.5 * (a - c)
    r = np.hypot(d, np.abs(b))

    # top eigenvector from whichever row is better conditioned
    use_first = d >= 0
    v1 = np.where(use_first, r + d, b)
    v2 = np.where(use_first, np.conj(b), r - d)
    norm = np.sqrt(np.abs(v1) ** 2 + np.abs(v2) ** 2)
    degenerate = norm < 1e-300
    safe = np.where(degenerate, 1.0, norm)
    v1 = np.where(degenerate, 1.0, v1 / safe)
    v2 = np.where(degenerate, 0.0, v2 / safe)

    top = np.stack([v1, v2], axis=-1)
    bottom = np.stack([-np.conj(v2), np.conj(v1)], axis=-1)
    vecs = np.stack([bottom, top], axis=-1)
    vals = np.stack([mean - r, mean + r], axis=-1)
    return vals, vecs


def _jacobi(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic complex Jacobi sweeps, vectorised over the batch axis."""
    a = m.copy()
    n = a.shape[-1]
    v = np.broadcast_to(np.eye(n, dtype=complex), a.shape).copy()
    pairs = [(p, q) for p in range(n - 1) for q in range(p + 1, n)]
    offmask = ~np.eye(n, dtype=bool)
    scale = np.maximum(np.linalg.norm(a, axis=(-2, -1)), 1.0)

    for _ in range(JACOBI_MAX_SWEEPS):
        off = np.sqrt(np.sum(np.abs(a[..., offmask]) ** 2, axis=-1))
        if np.all(off < JACOBI_TOL * scale):
            break
        for p, q in pairs:
            apq = a[..., p, q]
            mag = np.abs(apq)
            active = mag > 1e-300
            safe_mag = np.where(active, mag, 1.0)
            phase = np.where(active, apq / safe_mag, 1.0)
            tau = (a[..., q, q].real - a[..., p, p].real) / (2.0 * safe_mag)
            t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
            t = np.where(active, t, 0.0)
            c = 1.0 / np.hypot(1.0, t)
            s = t * c
            # G = diag(1, conj(phase)) @ [[c, s], [-s, c]] on the (p, q) plane
            g_pp = c
            g_pq = s
            g_qp = -s * np.conj(phase)
            g_qq = c * np.conj(phase)

            ap = a[..., :, p].copy()
            aq = a[..., :, q]
            a[..., :, p] = ap * g_pp[..., None] + aq * g_qp[..., None]
            a[..., :, q] = ap * g_pq[..., None] + aq * g_qq[..., None]
            ap = a[..., p, :].copy()
            aq = a[..., q, :]
            a[..., p, :] = ap * np.conj(g_pp)[..., None] + aq * np.conj(g_qp)[..., None]
            a[..., q, :] = ap * np.conj(g_pq)[..., None] + aq * np.conj(g_qq)[..., None]
            a[..., p, q] = 0.0
            a[..., q, p] = 0.0

            vp = v[..., :, p].copy()
            vq = v[..., :, q]
            v[..., :, p] = vp * g_pp[..., None] + vq * g_qp[..., None]
            v[..., :, q] = vp * g_pq[..., None] + vq * g_qq[..., None]
    else:
        off = np.sqrt(np.sum(np.abs(a[..., offmask]) ** 2, axis=-1))
        if not np.all(off < JACOBI_TOL * scale):
            raise ConvergenceError(
                f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps"
            )

    vals = np.diagonal(a, axis1=-2, axis2=-1).real
    order = np.argsort(vals, axis=-1, kind="stable")
    vals = np.take_along_axis(vals, order, axis=-1)
    vecs = np.take_along_axis(v, order[..., None, :], axis=-1)
    return vals, vecs


def eigh(m: np.ndarray) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian 2x2, 3x3 or 4x4 matrix (or a stack).

    2x2 inputs use the closed form; larger ones use cyclic Jacobi rotations.
    Eigenvalues come back ascending and each eigenvector has its first
    non-negligible component real and positive.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2] or m.shape[-1] not in (2, 3, 4):
        raise ValueError(f"eigh supports 2x2, 3x3 and 4x4 matrices, got {m.shape}")
    if not is_hermitian(m):
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    m = 0.5 * (m + dagger(m))
    if m.shape[-1] == 2:
        vals, vecs = _eigh2(m)
    else:
        vals, vecs = _jacobi(m)
    return EigenDecomposition(vals, _fix_phase(vecs))


def eigvalsh(m: np.ndarray) -> np.ndarray:
    return eigh(m).eigenvalues
