import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mzsim.experiments import tomography as tg
from mzsim.qlinalg import ket, projector, random_density_matrix

BELL = projector((ket("01") + ket("10")) / math.sqrt(2))


@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 4]))
def test_exact_probabilities_invert(seed, d):
    rho = random_density_matrix(d, np.random.default_rng(seed))
    assert np.abs(tg.simulate_tomography(rho, None) - rho).max() < 1e-12


def test_bell_fidelity_at_1e4_shots():
    f = [tg.fidelity(tg.simulate_tomography(BELL, 10_000, seed), BELL) for seed in range(50)]
    assert min(f) > 0.99


def test_small_shot_count_is_physical():
    rho = tg.simulate_tomography(projector(ket("00")), 100, seed=1)
    assert abs(np.trace(rho) - 1) < 1e-12
    assert np.linalg.eigvalsh(rho)[0] > -1e-12


def test_error_decreases_with_shots(rng):
    states = [random_density_matrix(4, rng) for _ in range(50)]
    err = []
    for shots in (100, 1_000, 10_000):
        err.append(np.mean([np.linalg.norm(tg.simulate_tomography(s, shots, k) - s) for k, s in enumerate(states)]))
    assert err[0] > err[1] > err[2]


@given(st.integers(0, 2**32 - 1))
def test_projection_is_nearest_psd(seed):
    r = np.random.default_rng(seed)
    g = r.normal(size=(4, 4)) + 1j * r.normal(size=(4, 4))
    h = 0.5 * (g + g.conj().T)
    h = h - (np.trace(h) - 1) * np.eye(4) / 4
    p = tg.project_psd(h)
    assert abs(np.trace(p) - 1) < 1e-12 and np.linalg.eigvalsh(p)[0] > -1e-12
    # any other unit-trace PSD candidate is at least as far away
    for _ in range(5):
        q = random_density_matrix(4, r)
        assert np.linalg.norm(h - p) <= np.linalg.norm(h - q) + 1e-12


def test_projection_keeps_valid_state(rng):
    rho = random_density_matrix(4, rng)
    assert np.allclose(tg.project_psd(rho), rho)


def test_fidelity_pure_target(rng):
    rho = random_density_matrix(4, rng)
    assert tg.fidelity(rho, BELL) == pytest.approx(np.real(np.trace(rho @ BELL)))
    assert tg.fidelity(BELL, BELL) == pytest.approx(1.0)


def test_bad_inputs():
    with pytest.raises(ValueError):
        tg.simulate_tomography(np.eye(8) / 8, None)
    with pytest.raises(ValueError):
        tg.simulate_tomography(BELL, 0)
