"""Complex simultaneous perturbation stochastic approximation over CHSH settings.

The optimizer only sees an :class:`ObjectiveEvaluator`: something that maps a
setting vector to one noisy CHSH value and declares how many state copies each
call consumes. The simulator backends live here too, but a lab driver can be
dropped in without touching the update loop.

All routines accept a batch of setting vectors (shape ``(..., 8)``) so that
many independent trajectories advance together; each trajectory draws its
own perturbations and its own shot noise.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, NamedTuple, Protocol

import numpy as np

from .measurement import chsh_estimate, chsh_exact, normalize_blocks
from .rng import RandomStream

PERTURBATION_SYMBOLS = np.array([1, -1, 1j, -1j], dtype=complex)


@dataclass(frozen=True)
class GainSchedule:
    a: float = 1.0
    A_stability: float = 0.0
    s: float = 1.0
    b: float = 0.25
    r: float = 1.0 / 6.0

    @classmethod
    def parse(cls, text: str) -> "GainSchedule":
        """Parse ``"a,A,s,b,r"``."""
        parts = [float(x) for x in text.split(",")]
        if len(parts) != 5:
            raise ValueError(f"gain schedule needs 5 values a,A,s,b,r; got {text!r}")
        sched = cls(*parts)
        if sched.a < 0 or sched.A_stability < 0 or sched.s <= 0 or sched.b <= 0 or sched.r <= 0:
            raise ValueError(f"invalid gain schedule {text!r}")
        return sched

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.a, self.A_stability, self.s, self.b, self.r)


def gains_at(schedule: GainSchedule, k: int) -> tuple[float, float]:
    """Step size ``a_k`` and perturbation size ``c_k`` at iteration ``k``."""
    if k < 0:
        raise ValueError("iteration index must be non-negative")
    a_k = schedule.a / (k + 1 + schedule.A_stability) ** schedule.s
    c_k = schedule.b / (k + 1) ** schedule.r
    return a_k, c_k


class ObjectiveEvaluator(Protocol):
    """Noisy CHSH oracle.

    Calling it as ``objective(z, rng)`` returns one S value per setting vector in ``z``;
    ``copies_per_call`` is the number of state copies one evaluation of a
    single setting vector consumes.
    """

    copies_per_call: int

    def __call__(self, z: np.ndarray, rng: RandomStream) -> np.ndarray | float: ...


class ShotNoiseCHSH:
    """Simulated lab: ``N`` pairs per correlator, four correlators per call."""

    def __init__(self, rho: np.ndarray, n_shots: int):
        if n_shots < 1:
            raise ValueError("ensemble size must be positive")
        self.rho = np.asarray(rho, dtype=complex)
        self.n_shots = int(n_shots)
        self.copies_per_call = 4 * self.n_shots

    def __call__(self, z, rng):
        return chsh_estimate(self.rho, z, self.n_shots, rng)


class ExactCHSH:
    """Noiseless objective; consumes no copies and ignores the stream."""

    copies_per_call = 0

    def __init__(self, rho: np.ndarray):
        self.rho = np.asarray(rho, dtype=complex)

    def __call__(self, z, rng=None):
        return chsh_exact(self.rho, z)


def sample_perturbation(rng: RandomStream, size: tuple[int, ...] = ()) -> np.ndarray:
    return PERTURBATION_SYMBOLS[rng.integers(0, 4, size=size + (8,))]


def gradient_estimate(s_plus, s_minus, c_k: float, delta: np.ndarray) -> np.ndarray:
    """Simultaneous-perturbation estimate of the conjugate Wirtinger gradient."""
    if c_k <= 0:
        raise ValueError("perturbation gain must be positive")
    diff = np.asarray(s_plus, dtype=float) - np.asarray(s_minus, dtype=float)
    return diff[..., None] / (2.0 * c_k * np.conj(delta))


class IterationEntry(NamedTuple):
    k: int
    settings: np.ndarray
    s_plus: np.ndarray | float
    s_minus: np.ndarray | float
    s_exact_diag: np.ndarray | float | None
    copies_used: int


def cspsa_step(z_k: np.ndarray, k: int, schedule: GainSchedule,
               objective: ObjectiveEvaluator, rng: RandomStream
               ) -> tuple[np.ndarray, IterationEntry]:
    """One update: perturb, evaluate twice, estimate the gradient, move, renormalize.

    The perturbed points are passed to the objective unnormalized; the local
    measurement construction is scale invariant per block.
    """
    z_k = np.asarray(z_k, dtype=complex)
    a_k, c_k = gains_at(schedule, k)
    delta = sample_perturbation(rng, z_k.shape[:-1])
    s_plus = objective(z_k + c_k * delta, rng)
    s_minus = objective(z_k - c_k * delta, rng)
    g = gradient_estimate(s_plus, s_minus, c_k, delta)
    z_next = normalize_blocks(z_k + a_k * g)
    entry = IterationEntry(k, z_next, s_plus, s_minus, None, 2 * objective.copies_per_call)
    return z_next, entry


@dataclass
class TrajectoryRecord:
    """History of one trajectory, or of a batch advanced in lockstep.

    Arrays carry the iteration on axis 0; remaining leading axes are the
    batch shape. ``settings[i]`` is the iterate after update ``k[i]``; it is
    ``None`` when the run was told not to keep the history.
    """

    k: np.ndarray
    settings: np.ndarray | None
    s_plus: np.ndarray
    s_minus: np.ndarray
    s_exact: np.ndarray | None
    copies_used: np.ndarray
    final_settings: np.ndarray

    @property
    def total_copies(self) -> int:
        return int(self.copies_used.sum())

    def __len__(self) -> int:
        return len(self.k)

    @property
    def iterations(self) -> Iterator[IterationEntry]:
        for i, k in enumerate(self.k):
            yield IterationEntry(
                int(k),
                None if self.settings is None else self.settings[i],
                self.s_plus[i],
                self.s_minus[i],
                None if self.s_exact is None else self.s_exact[i],
                int(self.copies_used[i]),
            )


def run_trajectory(objective: ObjectiveEvaluator, z0: np.ndarray, k_max: int,
                   schedule: GainSchedule, rng: RandomStream,
                   diagnostic: Callable[[np.ndarray], np.ndarray | float] | None = None,
                   keep_settings: bool = True) -> TrajectoryRecord:
    """Run ``k_max`` updates from ``z0`` with gains indexed ``k = 1..k_max``.

    ``diagnostic`` (typically the exact CHSH value of the simulated state) is
    evaluated on each new iterate; it costs no copies.
    """
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    z = normalize_blocks(np.asarray(z0, dtype=complex))
    batch = z.shape[:-1]
    settings = np.empty((k_max,) + z.shape, dtype=complex) if keep_settings else None
    s_plus = np.empty((k_max,) + batch)
    s_minus = np.empty((k_max,) + batch)
    s_exact = np.empty((k_max,) + batch) if diagnostic is not None else None
    copies = np.empty(k_max, dtype=np.int64)

    for i in range(k_max):
        z, entry = cspsa_step(z, i + 1, schedule, objective, rng)
        if settings is not None:
            settings[i] = z
        s_plus[i] = entry.s_plus
        s_minus[i] = entry.s_minus
        copies[i] = entry.copies_used
        if s_exact is not None:
            s_exact[i] = diagnostic(z)

    return TrajectoryRecord(np.arange(1, k_max + 1), settings, s_plus, s_minus, s_exact,
                            copies, z)
