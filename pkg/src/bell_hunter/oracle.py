"""Ground-truth maximal CHSH values for known states.

Closed forms cover pure states (via the Schmidt coefficient) and Werner
states; the correlation-matrix bound ``2 sqrt(M)`` covers any state; the
see-saw search gives an independent numerical optimum that also returns the
optimal measurement settings.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .measurement import TSIRELSON, as_blocks, chsh_exact, measurement_basis, normalize_blocks
from .qmath import I2, eigh
from .rng import RandomStream
from .states import haar_unitary_2, m_quantity

DEGENERACY_ATOL = 1e-12
POLISH_FD_STEP = 1e-5
POLISH_GTOL = 1e-9


@dataclass(frozen=True)
class SeesawResult:
    s_max: float
    optimal_settings: np.ndarray
    half_steps: int
    converged: bool


def max_chsh_pure(lam: float) -> float:
    if not 0.0 <= lam <= 0.5:
        raise ValueError(f"Schmidt coefficient {lam} outside [0, 1/2]")
    return 2.0 * np.sqrt(1.0 + 4.0 * lam * (1.0 - lam))


def max_chsh_werner(lam: float) -> float:
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"Werner parameter {lam} outside [0, 1]")
    return TSIRELSON * lam


def horodecki_bound(rho: np.ndarray) -> float:
    return 2.0 * np.sqrt(m_quantity(rho).m)


def _observable(plus_vec: np.ndarray) -> np.ndarray:
    """``2|v><v| - I`` for a stack of unit vectors."""
    return 2.0 * plus_vec[..., :, None] * np.conj(plus_vec[..., None, :]) - I2


def _best_response(eff: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Optimal traceless +-1 observable against each effective operator.

    Over observables ``2|v><v| - I`` the maximum of ``Tr(eff B)`` is the
    eigenvalue gap, attained with ``v`` the top eigenvector. A vanishing gap
    makes every choice optimal; ``|0>`` is taken.
    """
    dec = eigh(eff)
    gap = dec.eigenvalues[..., 1] - dec.eigenvalues[..., 0]
    top = dec.eigenvectors[..., :, 1]
    flat = gap <= DEGENERACY_ATOL
    top = np.where(flat[..., None], np.array([1.0, 0.0], dtype=complex), top)
    return top, gap


def _reduce_bob(rho: np.ndarray, a: np.ndarray) -> np.ndarray:
    """``Tr_A[(a (x) I) rho]`` for a stack of Alice operators."""
    r = rho.reshape(2, 2, 2, 2)
    return np.einsum("...ki,ijkl->...jl", a, r)


def _reduce_alice(rho: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``Tr_B[(I (x) b) rho]`` for a stack of Bob operators."""
    r = rho.reshape(2, 2, 2, 2)
    return np.einsum("...lj,ijkl->...ik", b, r)


def _bob_step(rho, va, va2):
    a, a2 = _observable(va), _observable(va2)
    vb, g1 = _best_response(_reduce_bob(rho, a + a2))
    vb2, g2 = _best_response(_reduce_bob(rho, a - a2))
    return vb, vb2, g1 + g2


def _alice_step(rho, vb, vb2):
    b, b2 = _observable(vb), _observable(vb2)
    va, g1 = _best_response(_reduce_alice(rho, b + b2))
    va2, g2 = _best_response(_reduce_alice(rho, b - b2))
    return va, va2, g1 + g2


def _chart(z0: np.ndarray):
    """Local coordinates ``t`` (8 reals) around unit-block settings ``z0``.

    Block ``j`` becomes ``psi_j + (t[2j] + i t[2j+1]) psi_j_perp``, which is
    regular at ``t = 0`` unlike polar angles near the poles.
    """
    basis = measurement_basis(as_blocks(z0))
    psi, perp = basis[:, 0, :], basis[:, 1, :]

    def settings(t):
        t = np.asarray(t)
        w = t[..., 0::2] + 1j * t[..., 1::2]
        return (psi + w[..., None] * perp).reshape(t.shape[:-1] + (8,))

    return settings


def _polish(rho: np.ndarray, z0: np.ndarray) -> np.ndarray:
    """Local quasi-Newton ascent of the exact CHSH value from ``z0``.

    Alternation crawls along directions where S is nearly flat (states close
    to maximally entangled); a few BFGS steps from the alternation's end
    point remove that residual.
    """
    settings = _chart(z0)
    offsets = POLISH_FD_STEP * np.concatenate([np.eye(8), -np.eye(8)])

    def negative_s(t):
        return -chsh_exact(rho, settings(t))

    def gradient(t):
        vals = chsh_exact(rho, settings(t + offsets))
        return -(vals[:8] - vals[8:]) / (2 * POLISH_FD_STEP)

    res = minimize(negative_s, np.zeros(8), jac=gradient, method="BFGS",
                   options={"gtol": POLISH_GTOL, "maxiter": 200})
    return normalize_blocks(settings(res.x))


def seesaw_max(rho: np.ndarray, restarts: int = 10, tol: float = 1e-10,
               max_half_steps: int = 1000, rng: RandomStream | None = None
               ) -> SeesawResult:
    """Alternating exact optimization of Bob's then Alice's observables.

    All restarts run together as one batch; each stops individually once a
    half-step improves S by less than ``tol``. The best restart is then
    polished by a local ascent, kept only if it raises S.
    """
    if restarts < 1:
        raise ValueError("need at least one restart")
    rng = rng if rng is not None else np.random.default_rng(0)
    rho = np.asarray(rho, dtype=complex)

    u = haar_unitary_2(rng, (restarts, 2))
    va, va2 = u[:, 0, :, 0].copy(), u[:, 1, :, 0].copy()
    vb, vb2 = np.zeros_like(va), np.zeros_like(va)
    value = np.full(restarts, -np.inf)
    done = np.zeros(restarts, dtype=bool)
    steps = 0

    while steps < max_half_steps and not done.all():
        live = ~done
        if steps % 2 == 0:
            nb, nb2, new = _bob_step(rho, va, va2)
            vb[live], vb2[live] = nb[live], nb2[live]
        else:
            na, na2, new = _alice_step(rho, vb, vb2)
            va[live], va2[live] = na[live], na2[live]
        steps += 1
        # a full Bob+Alice round is needed before the first comparison is meaningful
        if steps > 1:
            done |= live & (new - value < tol)
        value = np.where(live, new, value)

    best = int(np.argmax(value))
    settings = np.concatenate([va[best], va2[best], vb[best], vb2[best]])
    s_max = float(chsh_exact(rho, settings))
    polished = _polish(rho, settings)
    s_polished = float(chsh_exact(rho, polished))
    if s_polished > s_max:
        settings, s_max = polished, s_polished
    return SeesawResult(s_max, settings, steps, bool(done.any()))
