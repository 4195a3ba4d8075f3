"""Local dichotomic measurements, Born-rule statistics and shot-noise sampling.

A setting vector is a complex array whose last axis has length 8, read as
four 2-component blocks ``(a, a', b, b')``. Leading axes are batch axes: one
call evaluates CHSH for every trajectory in a batch.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import RandomStream

BLOCK_ATOL = 1e-12
PROB_CLIP = 1e-12

# CHSH signs for (a,b), (a,b'), (a',b), (a',b')
CHSH_SIGNS = np.array([[1.0, 1.0], [1.0, -1.0]])
TSIRELSON = 2.0 * np.sqrt(2.0)


class DegenerateSettingError(ValueError):
    pass


@dataclass(frozen=True)
class Observable:
    plus_projector: np.ndarray
    minus_projector: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return self.plus_projector - self.minus_projector


@dataclass(frozen=True)
class JointOutcomeDistribution:
    p_pp: float
    p_pm: float
    p_mp: float
    p_mm: float

    def as_array(self) -> np.ndarray:
        return np.array([self.p_pp, self.p_pm, self.p_mp, self.p_mm])


@dataclass(frozen=True)
class CountRecord:
    n_pp: int
    n_pm: int
    n_mp: int
    n_mm: int

    @property
    def n_total(self) -> int:
        return self.n_pp + self.n_pm + self.n_mp + self.n_mm

    @property
    def correlator(self) -> float:
        return (self.n_pp + self.n_mm - self.n_pm - self.n_mp) / self.n_total


def as_blocks(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if z.shape[-1] != 8:
        raise ValueError(f"setting vector must have 8 components, got {z.shape}")
    return z.reshape(z.shape[:-1] + (4, 2))


def normalize_blocks(z: np.ndarray) -> np.ndarray:
    """Scale each of the four blocks to unit Euclidean norm."""
    blocks = as_blocks(z)
    norms = np.linalg.norm(blocks, axis=-1, keepdims=True)
    if np.any(norms <= BLOCK_ATOL):
        raise DegenerateSettingError("a measurement block has zero norm")
    return (blocks / norms).reshape(np.shape(z))


def random_settings(rng: RandomStream, size: tuple[int, ...] = ()) -> np.ndarray:
    """Four independent Haar-random blocks per setting vector."""
    shape = size + (4, 2)
    g = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    g /= np.linalg.norm(g, axis=-1, keepdims=True)
    return g.reshape(size + (8,))


def measurement_basis(block: np.ndarray) -> np.ndarray:
    """Rows are ``psi(z)`` and ``psi_perp(z)`` for each block in the stack."""
    block = np.asarray(block, dtype=complex)
    norm = np.linalg.norm(block, axis=-1, keepdims=True)
    if np.any(norm <= BLOCK_ATOL):
        raise DegenerateSettingError("a measurement block has zero norm")
    psi = block / norm
    perp = np.stack([-np.conj(psi[..., 1]), np.conj(psi[..., 0])], axis=-1)
    return np.stack([psi, perp], axis=-2)


def observable_from_block(z) -> Observable:
    basis = measurement_basis(np.asarray(z, dtype=complex))
    plus = np.outer(basis[0], np.conj(basis[0]))
    minus = np.outer(basis[1], np.conj(basis[1]))
    return Observable(plus, minus)


def _joint_probs(rho: np.ndarray, alice: np.ndarray, bob: np.ndarray) -> np.ndarray:
    """``P[..., x, y] = <u_x v_y| rho |u_x v_y>`` from basis rows ``u``, ``v``."""
    w = alice[..., :, None, :, None] * bob[..., None, :, None, :]
    w = w.reshape(w.shape[:-2] + (4,))
    rw = np.einsum("...ij,...xyj->...xyi", np.asarray(rho, dtype=complex), w)
    return np.einsum("...i,...i->...", np.conj(w), rw).real


def _clip_renormalize(p: np.ndarray) -> np.ndarray:
    p = np.where((p < 0) & (p >= -PROB_CLIP), 0.0, p)
    return p / p.sum(axis=-1, keepdims=True)


def joint_distribution(rho, za, zb) -> JointOutcomeDistribution:
    p = _joint_probs(rho, measurement_basis(za), measurement_basis(zb))
    p = _clip_renormalize(p.reshape(4))
    return JointOutcomeDistribution(*map(float, p))


def correlator_exact(rho, za, zb) -> float:
    d = joint_distribution(rho, za, zb)
    return d.p_pp + d.p_mm - d.p_pm - d.p_mp


def sample_counts(dist: JointOutcomeDistribution, n: int, rng: RandomStream) -> CountRecord:
    if n < 1:
        raise ValueError("ensemble size must be positive")
    counts = rng.multinomial(n, _clip_renormalize(dist.as_array()))
    return CountRecord(*map(int, counts))


def chsh_probabilities(rho: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Joint outcome probabilities for all four setting pairs.

    Returns shape ``(..., 2, 2, 4)``: Alice setting, Bob setting, then
    outcomes ordered ``(++, +-, -+, --)``.
    """
    blocks = as_blocks(z)
    alice = measurement_basis(blocks[..., 0:2, :])[..., :, None, :, :]
    bob = measurement_basis(blocks[..., 2:4, :])[..., None, :, :, :]
    rho = np.asarray(rho, dtype=complex)[..., None, None, :, :]
    p = _joint_probs(rho, alice, bob)
    return p.reshape(p.shape[:-2] + (4,))


_OUTCOME_SIGN = np.array([1.0, -1.0, -1.0, 1.0])


def chsh_exact(rho: np.ndarray, z: np.ndarray) -> np.ndarray | float:
    corr = chsh_probabilities(rho, z) @ _OUTCOME_SIGN
    s = np.sum(corr * CHSH_SIGNS, axis=(-2, -1))
    return float(s) if np.ndim(s) == 0 else s


def chsh_estimate(rho: np.ndarray, z: np.ndarray, n_per_correlator: int,
                  rng: RandomStream) -> np.ndarray | float:
    """CHSH value from four independent multinomial draws of ``N`` pairs each."""
    if n_per_correlator < 1:
        raise ValueError("ensemble size must be positive")
    p = _clip_renormalize(chsh_probabilities(rho, z))
    counts = rng.multinomial(n_per_correlator, p)
    corr = (counts @ _OUTCOME_SIGN) / n_per_correlator
    s = np.sum(corr * CHSH_SIGNS, axis=(-2, -1))
    return float(s) if np.ndim(s) == 0 else s
