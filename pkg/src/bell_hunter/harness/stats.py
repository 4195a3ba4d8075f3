"""Aggregate statistics over trajectories and over sets of states.

Quartiles use linear interpolation between order statistics (Hyndman-Fan
type 7, numpy's default).
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Literal, Sequence

import numpy as np

from ..cspsa import TrajectoryRecord

QUARTILE_METHOD = "linear"
CLASSICAL_BOUND = 2.0


@dataclass(frozen=True)
class SummaryStatistics:
    k: int
    mean_s: float
    median_s: float
    q1: float
    q3: float
    mse_mean: float
    mse_median: float
    theory_s: float

    def as_dict(self) -> dict:
        return asdict(self)


def _diag_at(record: TrajectoryRecord, k: int) -> np.ndarray:
    if record.s_exact is None:
        raise ValueError("trajectory was run without the exact-S diagnostic")
    idx = np.searchsorted(record.k, k)
    if idx >= len(record.k) or record.k[idx] != k:
        raise ValueError(f"iteration {k} not recorded")
    return np.ravel(record.s_exact[idx])


def mean_over_trajectories(records: Sequence[TrajectoryRecord], k: int) -> float:
    """Mean diagnostic S at iteration ``k`` across all trajectories."""
    if len(records) == 0:
        raise ValueError("no trajectories")
    return float(np.mean(np.concatenate([_diag_at(r, k) for r in records])))


def set_statistics(values: Sequence[float]) -> tuple[float, float, float, float]:
    """(mean, median, q1, q3)."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("empty input")
    q1, med, q3 = np.percentile(v, [25, 50, 75], method=QUARTILE_METHOD)
    return float(v.mean()), float(med), float(q1), float(q3)


def squared_errors(s_values, s_max) -> np.ndarray:
    return np.abs(np.asarray(s_values, dtype=float) - s_max) ** 2


def squared_error_stats(records: Sequence[TrajectoryRecord], k: int,
                        s_max_theory: float) -> tuple[float, float]:
    """Mean and median squared error of the diagnostic S at iteration ``k``."""
    if len(records) == 0:
        raise ValueError("no trajectories")
    se = squared_errors(np.concatenate([_diag_at(r, k) for r in records]), s_max_theory)
    return float(se.mean()), float(np.median(se))


def k_violation(stats_by_k: Sequence[SummaryStatistics],
                mode: Literal["q1_above_2", "mean_above_2"] = "q1_above_2",
                sustained: bool = True) -> int | None:
    """First iteration where the chosen statistic exceeds 2.

    With ``sustained`` the statistic must also stay above 2 for every later
    recorded iteration; otherwise the first crossing is returned.
    """
    if mode == "q1_above_2":
        values = [s.q1 for s in stats_by_k]
    elif mode == "mean_above_2":
        values = [s.mean_s for s in stats_by_k]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    above = np.asarray(values) > CLASSICAL_BOUND
    if not above.any():
        return None
    if not sustained:
        return int(stats_by_k[int(np.argmax(above))].k)
    if not above[-1]:
        return None
    below = np.flatnonzero(~above)
    first = 0 if below.size == 0 else below[-1] + 1
    return int(stats_by_k[first].k)
