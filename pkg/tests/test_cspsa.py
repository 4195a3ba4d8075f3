import numpy as np
import pytest

from conftest import gradient_samples, wirtinger_central
from bell_hunter.cspsa import (
    ExactCHSH, GainSchedule, ShotNoiseCHSH, cspsa_step, gains_at, gradient_estimate,
    run_trajectory, sample_perturbation,
)
from bell_hunter.measurement import as_blocks, chsh_exact, normalize_blocks, random_settings
from bell_hunter.rng import stream
from bell_hunter.states import SINGLET, haar_pure, projector, random_mixed


@pytest.mark.parametrize("k,a_k,c_k", [
    (0, 1.0, 0.25),
    (1, 0.5, 0.25 / 2 ** (1 / 6)),
    (63, 1 / 64, 0.25 / 2),
])
def test_gains_default_schedule(k, a_k, c_k):
    assert gains_at(GainSchedule(), k) == pytest.approx((a_k, c_k), abs=1e-15)


def test_gains_custom_schedule():
    sched = GainSchedule.parse("2,1,0.602,0.1,0.101")
    assert sched.as_tuple() == (2.0, 1.0, 0.602, 0.1, 0.101)
    a_k, c_k = gains_at(sched, 3)
    assert a_k == pytest.approx(2 / 5 ** 0.602)
    assert c_k == pytest.approx(0.1 / 4 ** 0.101)


@pytest.mark.parametrize("text", ["1,0,1", "1,0,1,0,0.1", "a,b,c,d,e", "1,-1,1,0.2,0.1"])
def test_gain_parse_rejects(text):
    with pytest.raises(ValueError):
        GainSchedule.parse(text)


def test_perturbation_golden_seed_42():
    assert np.array_equal(sample_perturbation(stream(42)), [1, -1j, 1j, -1, -1, -1j, 1, 1j])


def test_perturbation_symbols_uniform():
    d = sample_perturbation(stream(1), (100_000,)).ravel()
    for sym in (1, -1, 1j, -1j):
        assert abs(np.mean(d == sym) - 0.25) < 0.005
    # E[delta^2] = 0 is what makes the estimator target the conjugate gradient
    assert abs(np.mean(d ** 2)) < 0.01


@pytest.mark.parametrize("delta,expected", [(1, 2), (-1, -2), (1j, 2j), (-1j, -2j)])
def test_gradient_estimate_examples(delta, expected):
    g = gradient_estimate(3.0, 1.0, 0.5, np.full(8, delta, dtype=complex))
    assert np.allclose(g, expected)


def test_gradient_estimate_rejects_bad_gain():
    with pytest.raises(ValueError):
        gradient_estimate(1.0, 0.0, 0.0, np.ones(8))


def test_step_matches_hand_computation():
    rho = projector(SINGLET)
    z = random_settings(stream(2))
    z_next, entry = cspsa_step(z, 1, GainSchedule(), ExactCHSH(rho), stream(3))

    delta = sample_perturbation(stream(3))
    a_k, c_k = gains_at(GainSchedule(), 1)
    sp, sm = chsh_exact(rho, z + c_k * delta), chsh_exact(rho, z - c_k * delta)
    blocks = (z + a_k * (sp - sm) / (2 * c_k * np.conj(delta))).reshape(4, 2)
    expected = (blocks / np.linalg.norm(blocks, axis=1, keepdims=True)).ravel()
    assert np.allclose(z_next, expected, atol=1e-14)
    assert entry.s_plus == pytest.approx(sp) and entry.s_minus == pytest.approx(sm)
    assert entry.copies_used == 0


def test_blocks_stay_normalized():
    rng = stream(4)
    rec = run_trajectory(ShotNoiseCHSH(random_mixed(rng), 100), random_settings(rng, (20,)),
                         30, GainSchedule(), rng)
    norms = np.linalg.norm(as_blocks(rec.settings), axis=-1)
    assert np.abs(norms - 1).max() < 1e-12


def test_run_trajectory_deterministic():
    rho = projector(haar_pure(stream(5)))
    z0 = random_settings(stream(6), (8,))
    runs = [run_trajectory(ShotNoiseCHSH(rho, 50), z0, 20, GainSchedule(), stream(7),
                           diagnostic=ExactCHSH(rho)) for _ in range(2)]
    assert np.array_equal(runs[0].settings, runs[1].settings)
    assert np.array_equal(runs[0].s_exact, runs[1].s_exact)


@pytest.mark.parametrize("k_max,n", [(1, 10), (100, 100), (7, 1000)])
def test_copy_accounting(k_max, n):
    rec = run_trajectory(ShotNoiseCHSH(projector(SINGLET), n), random_settings(stream(8)),
                         k_max, GainSchedule(), stream(9))
    assert len(rec) == k_max
    assert rec.total_copies == 8 * n * k_max
    assert list(rec.k) == list(range(1, k_max + 1))
    entries = list(rec.iterations)
    assert [e.k for e in entries] == list(range(1, k_max + 1))
    assert all(e.copies_used == 8 * n for e in entries)


def test_exact_objective_consumes_no_copies():
    rec = run_trajectory(ExactCHSH(projector(SINGLET)), random_settings(stream(10)), 5,
                         GainSchedule(), stream(11))
    assert rec.total_copies == 0


def test_k_max_must_be_positive():
    with pytest.raises(ValueError):
        run_trajectory(ExactCHSH(projector(SINGLET)), random_settings(stream(0)), 0,
                       GainSchedule(), stream(0))


def test_keep_settings_false_drops_history():
    rho = projector(SINGLET)
    z0 = random_settings(stream(12), (3,))
    full = run_trajectory(ShotNoiseCHSH(rho, 10), z0, 5, GainSchedule(), stream(13))
    lean = run_trajectory(ShotNoiseCHSH(rho, 10), z0, 5, GainSchedule(), stream(13), keep_settings=False)
    assert lean.settings is None
    assert np.array_equal(full.final_settings, lean.final_settings)
    assert np.array_equal(full.settings[-1], full.final_settings)


def test_mean_trajectory_improves():
    rng = stream(14)
    rho = projector(haar_pure(rng))
    rec = run_trajectory(ShotNoiseCHSH(rho, 100), random_settings(rng, (1000,)), 100,
                         GainSchedule(), rng, diagnostic=ExactCHSH(rho), keep_settings=False)
    means = rec.s_exact.mean(axis=1)
    assert means[9] < means[49] < means[99]


def test_singlet_median_exceeds_two_quickly():
    rng = stream(15)
    rho = projector(SINGLET)
    rec = run_trajectory(ShotNoiseCHSH(rho, 100), random_settings(rng, (100,)), 20,
                         GainSchedule(), rng, diagnostic=ExactCHSH(rho), keep_settings=False)
    assert np.median(rec.s_exact[-1]) > 2


def test_gradient_estimator_unbiased_within_standard_error():
    rng = stream(16)
    for _ in range(5):
        rho, z = random_mixed(rng), normalize_blocks(random_settings(rng))
        samples = gradient_samples(rho, z, 1e-4, 20_000, rng)
        se = samples.std(axis=0) / np.sqrt(len(samples))
        err = np.abs(samples.mean(axis=0) - wirtinger_central(rho, z))
        assert np.all(err < 5 * np.maximum(se, 1e-6))
