import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mzsim import qlinalg as ql

seeds = st.integers(0, 2**32 - 1)


def test_kron_identity_and_diagonal():
    assert np.allclose(ql.kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.allclose(ql.kron(ql.SIGMA_Z, np.eye(2)), np.diag([1, 1, -1, -1]))


def test_spin_flip_matches_index_oracle(rng):
    rho = ql.random_density_matrix(4, rng)
    yy = ql.kron(ql.SIGMA_Y, ql.SIGMA_Y)
    flipped = yy @ rho.conj() @ yy
    # sigma_y (x) sigma_y has entries -1, +1, +1, -1 on the anti-diagonal
    s = np.array([-1, 1, 1, -1])
    oracle = np.empty((4, 4), dtype=complex)
    for i, j in itertools.product(range(4), repeat=2):
        oracle[i, j] = s[i] * s[j] * np.conj(rho[3 - i, 3 - j])
    assert np.allclose(flipped, oracle, atol=1e-15)


def test_kron_dimension_guard():
    with pytest.raises(ql.DimensionError):
        ql.kron(np.eye(300), np.eye(300))


def test_eigh_small_cases():
    assert np.allclose(ql.eigh(np.diag([3.0, 1.0, 2.0])).eigenvalues, [1, 2, 3])
    assert np.allclose(ql.eigh(ql.SIGMA_X).eigenvalues, [-1, 1])


def test_eigh_rejects_bad_input():
    with pytest.raises(ql.ShapeError):
        ql.eigh(np.ones((2, 3)))
    with pytest.raises(ql.ShapeError):
        ql.eigh(np.array([[0, 1], [0, 0]]))


def test_eigh_reconstruction_13(rng):
    h = ql.random_hermitian(13, rng)
    assert np.linalg.norm(ql.eigh(h).reconstruct() - h) < 1e-10


@given(seeds, st.integers(1, 12))
def test_eigh_properties(seed, n):
    h = ql.random_hermitian(n, np.random.default_rng(seed))
    dec = ql.eigh(h)
    v = dec.eigenvectors
    assert np.linalg.norm(dec.reconstruct() - h) <= 1e-10 * max(np.linalg.norm(h), 1)
    assert np.linalg.norm(v.conj().T @ v - np.eye(n)) < 1e-10


def test_partial_trace_product_and_bell():
    rho = ql.projector(ql.ket("01"))
    assert np.allclose(ql.partial_trace(rho, [2, 2], [0]), ql.projector(ql.ket("0")))
    bell = ql.projector((ql.ket("01") + ql.ket("10")) / np.sqrt(2))
    for k in (0, 1):
        assert np.allclose(ql.partial_trace(bell, [2, 2], [k]), np.eye(2) / 2)


def test_partial_trace_index_oracle(rng):
    rho = ql.random_density_matrix(8, rng)
    t = rho.reshape(2, 2, 2, 2, 2, 2)
    oracle = np.zeros((4, 4), dtype=complex)
    for a, c, a2, c2, b in itertools.product(range(2), repeat=5):
        oracle[2 * a + c, 2 * a2 + c2] += t[a, b, c, a2, b, c2]
    assert np.abs(ql.partial_trace(rho, [2, 2, 2], [0, 2]) - oracle).max() < 1e-12


def test_partial_trace_bad_index():
    with pytest.raises(IndexError):
        ql.partial_trace(np.eye(4) / 4, [2, 2], [2])


@given(seeds, st.lists(st.integers(2, 3), min_size=2, max_size=3), st.data())
def test_partial_trace_preserves_trace_and_hermiticity(seed, dims, data):
    keep = data.draw(st.lists(st.integers(0, len(dims) - 1), unique=True))
    rho = ql.random_density_matrix(int(np.prod(dims)), np.random.default_rng(seed))
    red = ql.partial_trace(rho, dims, keep)
    assert abs(np.trace(red) - 1) < 1e-12
    assert np.linalg.norm(red - red.conj().T) < 1e-12


@given(seeds)
def test_kron_associative(seed):
    r = np.random.default_rng(seed)
    a, b, c = (r.normal(size=(2, 3)) + 1j * r.normal(size=(2, 3)) for _ in range(3))
    assert np.abs(ql.kron(ql.kron(a, b), c) - ql.kron(a, ql.kron(b, c))).max() < 1e-14


def test_matexp_zero_and_rotation():
    assert np.allclose(ql.matexp_herm(np.zeros((3, 3)), 1.7), np.eye(3))
    w = 2 * np.pi * 5e6
    u = ql.matexp_herm(ql.SIGMA_Z * w / 2, 2 * np.pi / w)
    assert np.allclose(u, -np.eye(2), atol=1e-12)
    assert np.linalg.norm(u @ u.conj().T - np.eye(2)) < 1e-12


def test_matexp_two_level_rabi():
    j = 2 * np.pi * 3.56e6
    h = np.array([[0, j], [j, 0]])  # basis (|10>, |01>)
    for t in np.linspace(0, 200e-9, 7):
        psi = ql.matexp_herm(h, t) @ np.array([1, 0])
        assert np.allclose(psi, [np.cos(j * t), -1j * np.sin(j * t)], atol=1e-12)


@given(seeds, st.integers(1, 10), st.floats(-1e-6, 1e-6))
def test_matexp_unitary(seed, n, t):
    h = ql.random_hermitian(n, np.random.default_rng(seed)) * 1e8
    u = ql.matexp_herm(h, t)
    assert np.linalg.norm(u.conj().T @ u - np.eye(n)) < 1e-10


def test_non_finite_rejected():
    with pytest.raises(ql.ShapeError):
        ql.as_matrix([[np.nan]])
