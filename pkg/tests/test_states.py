import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bell_hunter import states
from bell_hunter.qmath import I2
from bell_hunter.rng import stream
from bell_hunter.states import (
    SchmidtForm, concurrence_pure, from_schmidt, haar_pure, haar_unitary_2,
    m_quantity, negativity, pauli_decompose, projector, random_mixed, werner,
)

SQ2 = np.sqrt(2)


def brute_partial_transpose(rho):
    out = np.zeros_like(rho)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    out[2 * i + l, 2 * k + j] = rho[2 * i + j, 2 * k + l]
    return out


def test_from_schmidt_examples():
    assert np.allclose(from_schmidt(SchmidtForm(0.5, I2, I2)), [1 / SQ2, 0, 0, 1 / SQ2])
    assert np.allclose(from_schmidt(SchmidtForm(0.0, I2, I2)), [0, 0, 0, 1])
    assert np.allclose(from_schmidt(SchmidtForm(0.25, I2, I2)), [0.5, 0, 0, np.sqrt(3) / 2])


def test_schmidt_form_validation():
    with pytest.raises(states.InvalidStateError):
        SchmidtForm(0.6, I2, I2)
    with pytest.raises(states.InvalidStateError):
        SchmidtForm(0.2, 2 * I2, I2)


def test_from_schmidt_phase_invariance():
    rng = stream(11)
    for _ in range(50):
        form = states.random_schmidt_form(rng.uniform(0, 0.5), rng)
        ph = np.exp(1j * rng.uniform(0, 2 * np.pi, size=2))
        b1 = form.basis1 * ph
        b2 = form.basis2 * np.conj(ph)
        psi1 = from_schmidt(form)
        psi2 = from_schmidt(SchmidtForm(form.lam, b1, b2))
        assert abs(abs(np.vdot(psi1, psi2)) - 1) < 1e-10


def test_schmidt_coefficient_recovers_lambda():
    rng = stream(12)
    for lam in (0.0, 0.1, 0.3, 0.5):
        psi = from_schmidt(states.random_schmidt_form(lam, rng))
        assert abs(states.schmidt_coefficient(psi) - lam) < 1e-10


def test_werner_examples():
    assert np.allclose(werner(0.0), np.eye(4) / 4)
    assert np.allclose(werner(1.0), projector(states.SINGLET))
    assert abs(m_quantity(werner(1 / 3)).m - 2 / 9) < 1e-12
    with pytest.raises(states.InvalidStateError):
        werner(1.2)


def test_haar_pure_golden_seed_42():
    expected = np.array([
        0.10614793844653536 - 0.6796414670262348j,
        -0.3622775887178862 - 0.45361313600194075j,
        0.2614190428832837 + 0.04453309692163368j,
        0.32764492788174815 - 0.11016284106329674j,
    ])
    psi = haar_pure(stream(42))
    assert np.allclose(psi, expected, atol=1e-15)
    assert abs(np.linalg.norm(psi) - 1) < 1e-12


def test_haar_pure_population_mean():
    rng = stream(5)
    pops = [abs(haar_pure(rng)[0]) ** 2 for _ in range(100_000)]
    assert abs(np.mean(pops) - 0.25) < 0.01


def test_haar_unitary_is_unitary():
    u = haar_unitary_2(stream(1), (100,))
    assert np.abs(np.conj(np.swapaxes(u, -1, -2)) @ u - I2).max() < 1e-12


def test_random_mixed_invariants():
    rng = stream(6)
    for _ in range(200):
        states.validate_density_matrix(random_mixed(rng))


def test_random_mixed_mean_purity():
    rng = stream(7)
    purity = [np.trace(r @ r).real for r in (random_mixed(rng) for _ in range(100_000))]
    assert abs(np.mean(purity) - 8 / 17) < 0.005


def test_random_mixed_violation_fraction_is_small():
    rng = stream(8)
    n = 5_000
    hits = sum(m_quantity(random_mixed(rng)).violates for _ in range(n))
    assert 1e-4 < hits / n < 5e-2


def test_pauli_decompose_examples():
    d = pauli_decompose(np.eye(4) / 4)
    assert np.allclose(d.r, 0) and np.allclose(d.s, 0) and np.allclose(d.t, 0)
    d = pauli_decompose(projector(states.SINGLET))
    assert np.allclose(d.r, 0) and np.allclose(d.s, 0)
    assert np.allclose(d.t, -np.eye(3))
    for lam in (0.2, 0.7):
        assert np.allclose(pauli_decompose(werner(lam)).t, -lam * np.eye(3))


def test_pauli_reconstruction_random_states():
    rng = stream(9)
    for _ in range(1000):
        rho = random_mixed(rng)
        d = pauli_decompose(rho)
        assert np.abs(d.reconstruct() - rho).max() < 1e-10
        assert np.linalg.norm(d.r) <= 1 + 1e-10 and np.linalg.norm(d.s) <= 1 + 1e-10
        assert np.abs(d.t).max() <= 1 + 1e-10


def test_concurrence_examples():
    assert concurrence_pure(0.5) == pytest.approx(1.0, abs=1e-15)
    assert concurrence_pure(0.0) == 0.0
    assert concurrence_pure(0.25) == pytest.approx(np.sqrt(3) / 2, abs=1e-15)
    with pytest.raises(states.InvalidStateError):
        concurrence_pure(0.7)


def test_concurrence_monotone_on_random_lambdas():
    lams = np.sort(stream(10).uniform(0, 0.5, 1000))
    c = np.array([concurrence_pure(l) for l in lams])
    assert np.all((c >= 0) & (c <= 1))
    assert np.all(np.diff(c) >= 0)


def test_concurrence_inversion():
    for c in (0.1, 0.5, 0.9, 1.0):
        assert concurrence_pure(states.schmidt_from_concurrence(c)) == pytest.approx(c, abs=1e-12)


def test_negativity_examples():
    assert negativity(projector(np.kron([1, 0], [0, 1]).astype(complex))) == pytest.approx(0, abs=1e-12)
    assert negativity(projector(states.SINGLET)) == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("lam", np.linspace(0, 1, 11))
def test_negativity_werner_against_brute_force(lam):
    rho = werner(lam)
    vals = np.linalg.eigvalsh(brute_partial_transpose(rho))
    brute = -vals[vals < 0].sum()
    assert negativity(rho) == pytest.approx(brute, abs=1e-12)
    assert negativity(rho) == pytest.approx(max(0.0, (3 * lam - 1) / 4), abs=1e-12)


def test_m_quantity_examples():
    assert m_quantity(np.eye(4) / 4).m == pytest.approx(0, abs=1e-15)
    assert m_quantity(projector(states.SINGLET)).m == pytest.approx(2, abs=1e-12)
    for lam in (0.3, 0.7, 0.9):
        r = m_quantity(werner(lam))
        assert r.m == pytest.approx(2 * lam ** 2, abs=1e-12)
        assert r.u >= r.u_tilde >= 0
        assert r.m == pytest.approx(r.u + r.u_tilde, abs=1e-12)


def test_violation_implies_entanglement():
    rng = stream(13)
    checked = []
    for _ in range(1000):
        rho = random_mixed(rng)
        mq = m_quantity(rho)
        assert 0 <= mq.m <= 2 + 1e-10
        if mq.violates:
            checked.append(negativity(rho))
    # the random draw yields only a handful; top up with noisy Werner states
    for lam in np.linspace(0.71, 1, 30):
        rho = 0.95 * werner(lam) + 0.05 * random_mixed(rng)
        if m_quantity(rho).violates:
            checked.append(negativity(rho))
    assert len(checked) > 10
    assert min(checked) > 0


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1))
def test_werner_m_quantity_property(lam):
    assert m_quantity(werner(lam)).m == pytest.approx(2 * lam * lam, abs=1e-12)


def test_json_roundtrip_density_and_pure(tmp_path):
    rho = random_mixed(stream(14))
    path = tmp_path / "rho.json"
    states.save_state(path, rho)
    data = json.loads(path.read_text())
    assert len(data) == 4 and len(data[0]) == 4 and len(data[0][0]) == 2
    assert np.allclose(states.load_state(path), rho, atol=1e-15)

    psi = haar_pure(stream(15))
    states.save_state(path, psi)
    assert np.allclose(states.load_state(path), projector(psi))


def test_load_state_rejects_invalid(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(states.to_json_array(np.eye(4))))
    with pytest.raises(states.InvalidStateError):
        states.load_state(path)
    path.write_text(json.dumps([[1, 0], [1, 0], [0, 0], [0, 0]]))
    with pytest.raises(states.InvalidStateError):
        states.load_state(path)
