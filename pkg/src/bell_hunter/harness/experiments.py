"""Monte Carlo experiment pipelines.

Each experiment is split into tasks, one per (grid point, state). A task owns
the random stream ``substream(seed, 0, point, state)``, draws its state if the
experiment samples one, then advances all ``K`` trajectories for that state
together. Task results are folded in index order, so serial and pooled runs
produce the same bytes.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..cspsa import ExactCHSH, GainSchedule, ShotNoiseCHSH, run_trajectory
from ..measurement import random_settings
from ..oracle import horodecki_bound, max_chsh_pure, max_chsh_werner, seesaw_max
from ..rng import substream
from ..states import (
    SchmidtForm,
    from_schmidt,
    haar_pure,
    load_state,
    m_quantity,
    negativity,
    projector,
    random_mixed,
    random_schmidt_form,
    schmidt_coefficient,
    schmidt_from_concurrence,
    to_json_array,
    werner,
)
from .config import ExperimentConfig
from .stats import QUARTILE_METHOD, SummaryStatistics, k_violation, set_statistics, squared_errors

log = logging.getLogger(__name__)

CSV_HEADER = ("experiment", "point", "state_id", "k", "N", "K", "mean_s", "median_s",
              "q1", "q3", "mse_mean", "mse_median", "theory_s")
SET_ROW_ID = "all"
MIXED_STATE_LAW = "hilbert-schmidt (ginibre)"
MAX_GENERATED_MIXED = 10**6
_TASK_STREAM = 0
_FILTER_STREAM = 1


@dataclass
class TaskSpec:
    experiment: str
    point: int
    state_id: int
    value: float
    n_shots: int
    k_max: int
    trajectories: int
    seed: int
    gains: tuple
    rho: np.ndarray | None = None
    theory: float | None = None
    stream_point: int | None = None


@dataclass
class TaskResult:
    point: int
    state_id: int
    n_shots: int
    theory: float
    s_exact: np.ndarray  # (k_max, K)
    info: dict = field(default_factory=dict)


@dataclass
class PointSummary:
    point: int
    value: float
    n_shots: int
    series: list[SummaryStatistics]
    k_violation: dict


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list[dict]
    points: list[PointSummary]
    manifest: dict

    def csv_text(self) -> str:
        return rows_to_csv(self.rows)


def _sample_state(spec: TaskSpec, rng) -> tuple[np.ndarray, float, dict]:
    exp = spec.experiment
    if exp == "schmidt_sweep":
        eye = np.eye(2, dtype=complex)
        psi = from_schmidt(SchmidtForm(spec.value, eye, eye))
        return projector(psi), max_chsh_pure(spec.value), {"lambda": spec.value}
    if exp == "werner_sweep":
        return werner(spec.value), max_chsh_werner(spec.value), {"lambda": spec.value}
    if exp == "concurrence_sweep":
        lam = schmidt_from_concurrence(spec.value)
        psi = from_schmidt(random_schmidt_form(lam, rng))
        return projector(psi), max_chsh_pure(lam), {"lambda": lam}
    if exp in ("haar_average", "mse_curve"):
        psi = haar_pure(rng)
        lam = schmidt_coefficient(psi)
        return projector(psi), max_chsh_pure(lam), {"lambda": lam}
    raise ValueError(f"experiment {exp!r} does not sample states per task")


def run_task(spec: TaskSpec) -> TaskResult:
    key = spec.point if spec.stream_point is None else spec.stream_point
    rng = substream(spec.seed, _TASK_STREAM, key, spec.state_id)
    if spec.rho is None:
        rho, theory, info = _sample_state(spec, rng)
    else:
        rho, theory, info = spec.rho, spec.theory, {}
    z0 = random_settings(rng, (spec.trajectories,))
    record = run_trajectory(
        ShotNoiseCHSH(rho, spec.n_shots), z0, spec.k_max, GainSchedule(*spec.gains), rng,
        diagnostic=ExactCHSH(rho), keep_settings=False,
    )
    info["copies_per_trajectory"] = record.total_copies
    return TaskResult(spec.point, spec.state_id, spec.n_shots, float(theory), record.s_exact, info)


def _mixed_pool(config: ExperimentConfig, point: int) -> tuple[list[np.ndarray], dict]:
    """Draw Hilbert-Schmidt states until enough of them can violate CHSH."""
    rng = substream(config.seed, _FILTER_STREAM, point)
    kept, generated = [], 0
    while len(kept) < config.states_per_point and generated < MAX_GENERATED_MIXED:
        rho = random_mixed(rng)
        generated += 1
        if m_quantity(rho).violates:
            kept.append(rho)
    if not kept:
        raise RuntimeError(f"no CHSH-violating state among {generated} samples")
    return kept, {"generated": generated, "kept": len(kept)}


def build_tasks(config: ExperimentConfig) -> tuple[list[TaskSpec], list[float], dict]:
    exp = config.experiment
    gains = config.gains.as_tuple()
    common = dict(experiment=exp, k_max=config.k_max, trajectories=config.trajectories,
                  seed=config.seed, gains=gains)
    tasks: list[TaskSpec] = []
    extra: dict = {}
    if exp in ("schmidt_sweep", "werner_sweep"):
        values = list(config.grid)
        for p, v in enumerate(values):
            tasks.append(TaskSpec(point=p, state_id=0, value=v, n_shots=config.n_shots, **common))
    elif exp == "concurrence_sweep":
        values = list(config.grid)
        for p, v in enumerate(values):
            for s in range(config.states_per_point):
                tasks.append(TaskSpec(point=p, state_id=s, value=v, n_shots=config.n_shots, **common))
    elif exp == "haar_average":
        values = [float("nan")]
        for s in range(config.states_per_point):
            tasks.append(TaskSpec(point=0, state_id=s, value=np.nan, n_shots=config.n_shots, **common))
    elif exp == "mse_curve":
        values = list(config.grid)
        for p, n in enumerate(values):
            for s in range(config.states_per_point):
                # same states at every ensemble size
                tasks.append(TaskSpec(point=p, state_id=s, value=n, n_shots=int(n),
                                      stream_point=0, **common))
    elif exp == "mixed_set":
        values = [float("nan")]
        pool, counts = _mixed_pool(config, 0)
        extra["filter_counts"] = counts
        extra["theory_method"] = "see-saw"
        for s, rho in enumerate(pool):
            sw = seesaw_max(rho, restarts=config.seesaw_restarts,
                            rng=substream(config.seed, _FILTER_STREAM, 0, s))
            tasks.append(TaskSpec(point=0, state_id=s, value=np.nan, n_shots=config.n_shots,
                                  rho=rho, theory=sw.s_max, **common))
            extra.setdefault("states", []).append({
                "state_id": s, "seesaw_s_max": sw.s_max, "seesaw_converged": sw.converged,
                "horodecki_bound": horodecki_bound(rho), "negativity": negativity(rho),
            })
    else:
        raise ValueError(f"experiment {exp!r} is not a trajectory experiment")
    return tasks, values, extra


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer, str)):
        return str(x)
    return f"{x:.9g}"


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in CSV_HEADER])
    return buf.getvalue()


def _trajectory_stats(k: int, s: np.ndarray, theory: float) -> SummaryStatistics:
    mean, med, q1, q3 = set_statistics(s)
    se = squared_errors(s, theory)
    return SummaryStatistics(k, mean, med, q1, q3, float(se.mean()), float(np.median(se)), theory)


def aggregate(config: ExperimentConfig, results: list[TaskResult], values: list[float]
              ) -> tuple[list[dict], list[PointSummary]]:
    """Per-state rows (spread over trajectories) plus set rows over per-state means."""
    rows: list[dict] = []
    points: list[PointSummary] = []
    ks = np.arange(1, config.k_max + 1)
    by_point: dict[int, list[TaskResult]] = {}
    for r in sorted(results, key=lambda r: (r.point, r.state_id)):
        by_point.setdefault(r.point, []).append(r)

    for p, group in by_point.items():
        K = config.trajectories
        n = group[0].n_shots
        base = dict(experiment=config.experiment, point=p, N=n, K=K)
        per_state = []
        for res in group:
            series = [_trajectory_stats(int(k), res.s_exact[i], res.theory) for i, k in enumerate(ks)]
            per_state.append(series)
            for st in series:
                rows.append(dict(base, state_id=res.state_id, **st.as_dict()))

        if len(group) == 1:
            headline = per_state[0]
        else:
            headline = []
            theories = np.array([r.theory for r in group])
            for i, k in enumerate(ks):
                means = np.array([r.s_exact[i].mean() for r in group])
                mse = np.array([squared_errors(r.s_exact[i], r.theory).mean() for r in group])
                mean, med, q1, q3 = set_statistics(means)
                st = SummaryStatistics(int(k), mean, med, q1, q3, float(mse.mean()),
                                       float(np.median(mse)), float(theories.mean()))
                headline.append(st)
                rows.append(dict(base, state_id=SET_ROW_ID, **st.as_dict()))

        kv = {
            f"{mode}{'' if sustained else '_first'}": k_violation(headline, mode, sustained)
            for mode in ("mean_above_2", "q1_above_2") for sustained in (True, False)
        }
        points.append(PointSummary(p, float(values[p]), n, headline, kv))
    return rows, points


def run_tasks(tasks: list[TaskSpec], workers: int = 1) -> list[TaskResult]:
    if workers <= 1 or len(tasks) <= 1:
        return [run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_task, tasks))


def run_seesaw_oracle(config: ExperimentConfig) -> dict:
    rho = load_state(config.input_path)
    res = seesaw_max(rho, restarts=config.seesaw_restarts, rng=substream(config.seed, 0))
    mq = m_quantity(rho)
    return {
        "s_max": res.s_max,
        "converged": res.converged,
        "half_steps": res.half_steps,
        "M": mq.m,
        "horodecki_bound": horodecki_bound(rho),
        "negativity": negativity(rho),
        "optimal_settings": to_json_array(res.optimal_settings.reshape(4, 2)),
    }


def run_experiment(config: ExperimentConfig, write: bool = True) -> ExperimentResult | dict:
    """Run one configured experiment; optionally write CSV and ``manifest.json``.

    ``seesaw_oracle`` returns its JSON-ready dict instead of a table.
    """
    config.validate()
    if config.experiment == "seesaw_oracle":
        out = run_seesaw_oracle(config)
        if write and config.output_path not in ("", "-"):
            path = Path(config.output_path)
            path.mkdir(parents=True, exist_ok=True)
            (path / "seesaw_oracle.json").write_text(json.dumps(out, indent=2))
        return out

    start = time.perf_counter()
    tasks, values, extra = build_tasks(config)
    log.info("%s: %d tasks x %d trajectories x %d iterations", config.experiment,
             len(tasks), config.trajectories, config.k_max)
    results = run_tasks(tasks, config.workers)
    rows, points = aggregate(config, results, values)
    csv_text = rows_to_csv(rows)
    elapsed = time.perf_counter() - start

    manifest = {
        "config": config.echo(),
        "seed": config.seed,
        "code_version": __version__,
        "numpy_version": np.__version__,
        "python_version": platform.python_version(),
        "elapsed_seconds": elapsed,
        "quartile_method": f"{QUARTILE_METHOD} interpolation between order statistics (type 7)",
        "mixed_state_law": MIXED_STATE_LAW,
        "diagnostic": "exact CHSH value at the current iterate",
        "copies_per_iteration": 8 * config.n_shots if config.experiment != "mse_curve" else None,
        "csv_sha256": hashlib.sha256(csv_text.encode()).hexdigest(),
        "points": [
            {"point": pt.point, "value": None if np.isnan(pt.value) else pt.value,
             "N": pt.n_shots, "k_violation": pt.k_violation,
             "final": pt.series[-1].as_dict()}
            for pt in points
        ],
        **extra,
    }
    if write:
        out_dir = Path(config.output_path)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / f"{config.experiment}.csv").write_text(csv_text)
        (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, default=float))
    return ExperimentResult(config, rows, points, manifest)
