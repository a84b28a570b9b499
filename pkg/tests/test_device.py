import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm

from mzsim import device as dm
from mzsim import lindblad as lb
from mzsim import presets
from mzsim.qlinalg import NUMBER, SIGMA_MINUS, SIGMA_PLUS, ShapeError, kron_all

F0 = presets.WORKING_FREQUENCY


def chain(n, j=3e6, freqs=None, **kw):
    freqs = freqs or [F0] * n
    qubits = [dm.QubitSpec(f"Q{i}", f, **kw) for i, f in enumerate(freqs)]
    return dm.DeviceModel(qubits, [dm.Coupling(f"Q{i}", f"Q{i + 1}", j) for i in range(n - 1)])


def test_sector_basis_examples():
    b = dm.sector_basis(2, 1)
    assert b.states == ("00", "01", "10") and b.dim == 3
    assert dm.sector_basis(12, 1).dim == 13
    full = dm.sector_basis(4, 4)
    assert full.dim == 16 and full.is_full_space()


@given(st.integers(1, 8), st.data())
def test_sector_dimension_and_order(n, data):
    k = data.draw(st.integers(1, n))
    b = dm.sector_basis(n, k)
    assert b.dim == sum(math.comb(n, m) for m in range(k + 1))
    keys = [(s.count("1"), s) for s in b.states]
    assert keys == sorted(keys)


def test_sector_error_outside_basis():
    with pytest.raises(dm.SectorError):
        dm.sector_basis(3, 1).index("110")


def test_qubit_validation():
    with pytest.raises(ValueError):
        dm.QubitSpec("Q0", 0.5e9)
    with pytest.raises(ValueError):
        dm.QubitSpec("Q0", 5e9, t1=-1e-6)
    with pytest.raises(ValueError):
        dm.Coupling("Q0", "Q0", 1e6)
    with pytest.raises(ValueError):
        dm.DeviceModel([dm.QubitSpec("Q0", 5e9)], [dm.Coupling("Q0", "Q9", 1e6)])


def test_hcb_two_resonant_qubits():
    j = 3.56e6
    h = dm.build_hcb(chain(2, j), [F0, F0], dm.sector_basis(2, 1), F0)
    assert np.allclose(h[1:, 1:], [[0, 2 * np.pi * j], [2 * np.pi * j, 0]])
    assert np.allclose(h[0], 0)


def test_hcb_decoupled_is_diagonal():
    dev = chain(3, 0.0, [5.8e9, 5.9e9, 6.0e9])
    h = dm.build_hcb(dev, dev.idle_frequencies(), dm.sector_basis(3, 2), F0)
    assert np.allclose(h, np.diag(np.diag(h)))


def test_hcb_shape_error():
    with pytest.raises(ShapeError):
        dm.build_hcb(chain(2), [F0], dm.sector_basis(2, 1), F0)


def _site(op, i, n):
    return kron_all([op if k == i else np.eye(2) for k in range(n)])


def test_hcb_star_matches_kron_oracle():
    qs = [dm.QubitSpec(f"Q{i}", f) for i, f in enumerate([5.82e9, 5.83e9, 5.81e9, 5.85e9])]
    js = {1: 3.1e6, 2: 2.7e6, 3: 4.0e6}
    dev = dm.DeviceModel(qs, [dm.Coupling("Q0", f"Q{k}", j) for k, j in js.items()])
    basis = dm.sector_basis(4, 1)
    h = dm.build_hcb(dev, dev.idle_frequencies(), basis, F0)
    full = sum(2 * np.pi * (q.idle_frequency - F0) * _site(NUMBER, i, 4) for i, q in enumerate(qs))
    for k, j in js.items():
        hop = _site(SIGMA_PLUS, 0, 4) @ _site(SIGMA_MINUS, k, 4)
        full = full + 2 * np.pi * j * (hop + hop.conj().T)
    idx = basis.full_index()
    assert np.abs(h - full[np.ix_(idx, idx)]).max() < 1e-6  # rad/s, entries ~1e8


@given(st.integers(0, 2**32 - 1), st.integers(2, 5))
def test_hcb_hermitian_and_number_conserving(seed, n):
    r = np.random.default_rng(seed)
    qs = [dm.QubitSpec(f"Q{i}", F0 + r.uniform(-50e6, 50e6)) for i in range(n)]
    cs = [dm.Coupling(f"Q{i}", f"Q{k}", r.uniform(-5e6, 5e6)) for i in range(n) for k in range(i + 1, n) if r.random() < 0.6]
    dev = dm.DeviceModel(qs, cs)
    basis = dm.sector_basis(n, r.integers(1, n + 1))
    h = dm.build_hcb(dev, dev.idle_frequencies(), basis, F0)
    num = dm.total_number(basis)
    assert np.linalg.norm(h - h.conj().T) <= 1e-12 * max(np.linalg.norm(h), 1)
    assert np.linalg.norm(h @ num - num @ h) <= 1e-10 * max(np.linalg.norm(h), 1)


def test_bose_hubbard_single_qubit():
    q = dm.QubitSpec("Q0", 5.9e9, anharmonicity=-220e6)
    h = dm.build_bose_hubbard(dm.DeviceModel([q]), [5.9e9], 3, F0)
    dw = 5.9e9 - F0
    assert np.allclose(np.diag(h), 2 * np.pi * np.array([0, dw, 2 * dw - 220e6]))
    assert np.allclose(h, np.diag(np.diag(h)))


def test_bose_hubbard_size_guard():
    with pytest.raises(ValueError):
        dm.build_bose_hubbard(chain(8), [F0] * 8, 3, F0)


def test_bose_hubbard_cutoff2_projection_equals_hcb():
    dev = chain(3, 3.3e6, [5.82e9, 5.84e9, 5.80e9])
    f = dev.idle_frequencies()
    basis = dm.sector_basis(3, 3)
    bh = dm.build_bose_hubbard(dev, f, 2, F0, include_interaction=False)
    assert np.array_equal(dm.hcb_sector_projection(bh, 2, basis), dm.build_hcb(dev, f, basis, F0))


def test_bose_hubbard_large_u_matches_hcb():
    j = 3.56e6
    dev = chain(3, j, anharmonicity=-100 * j)
    f = dev.idle_frequencies()
    basis = dm.sector_basis(3, 1)
    bh = dm.build_bose_hubbard(dev, f, 3, F0)
    hcb = dm.build_hcb(dev, f, basis, F0)
    psi_bh = np.zeros(27, complex)
    psi_bh[int("100", 3)] = 1
    psi_hcb = np.zeros(basis.dim, complex)
    psi_hcb[basis.index("100")] = 1
    idx = [int(s, 3) for s in basis.states]
    for t in np.linspace(10e-9, 100e-9, 10):
        p_bh = np.abs(expm(-1j * bh * t) @ psi_bh) ** 2
        p_hcb = np.abs(expm(-1j * hcb * t) @ psi_hcb) ** 2
        big = p_hcb > 1e-3
        assert np.all(np.abs(p_bh[idx][big] - p_hcb[big]) <= 1e-3 * p_hcb[big])


def test_collapse_operators_empty_when_coherent():
    dev = chain(3)
    stage = dm.Stage(10e-9, dev.idle_frequencies())
    assert dm.collapse_operators(dev, stage, dm.sector_basis(3, 1)) == []


def test_measurement_rate_enters_dephasing():
    dev = presets.mz12_device()
    stage = dm.Stage(200e-9, [F0] * dev.n_qubits, (dm.Measurement("Q2", 5.921e6),))
    rates = dm.dephasing_rates(dev, stage)
    assert rates[dev.index("Q2")] == pytest.approx(2 * np.pi * 5.921e6, rel=1e-15)
    ops = dm.collapse_operators(dev, stage, dm.sector_basis(dev.n_qubits, 1))
    assert len(ops) == 1
    z = dm.sigma_z(dm.sector_basis(dev.n_qubits, 1), dev.index("Q2"))
    assert np.allclose(ops[0], math.sqrt(np.pi * 5.921e6) * z)


def test_t1_decay_of_single_qubit():
    dev = dm.DeviceModel([dm.QubitSpec("Q0", F0, t1=20e-6)])
    basis = dm.sector_basis(1, 1)
    sched = dm.Schedule([dm.Stage(100e-6, [F0])], F0)
    tr = lb.run_schedule(dev, sched, "1", basis, lb.SolverOptions(output_dt=1e-6))
    n = tr.observables["n_Q0"]
    assert np.abs(n / np.exp(-tr.times / 20e-6) - 1).max() < 1e-8


@given(st.integers(0, 2**32 - 1))
def test_collapse_structure(seed):
    r = np.random.default_rng(seed)
    n = int(r.integers(2, 5))
    qs = [dm.QubitSpec(f"Q{i}", F0, t1=r.uniform(5e-6, 50e-6), tphi=r.uniform(5e-6, 50e-6)) for i in range(n)]
    dev = dm.DeviceModel(qs)
    basis = dm.sector_basis(n, n)
    stage = dm.Stage(1e-9, [F0] * n, (dm.Measurement(f"Q{r.integers(n)}", r.uniform(0, 20e6)),))
    occ = basis.occupations.sum(axis=1)
    for c in dm.collapse_operators(dev, stage, basis):
        if np.allclose(c, np.diag(np.diag(c))):
            continue
        rows, cols = np.nonzero(np.abs(c) > 0)
        assert np.all(occ[rows] == occ[cols] - 1)


def test_reduced_state_matches_partial_trace(rng):
    from mzsim.qlinalg import partial_trace

    basis = dm.sector_basis(4, 2)
    g = rng.normal(size=(basis.dim, basis.dim)) + 1j * rng.normal(size=(basis.dim, basis.dim))
    rho = g @ g.conj().T
    rho /= np.trace(rho)
    full = dm.embed_full(rho, basis)
    assert np.allclose(dm.reduced_state(rho, basis, [1, 3]), partial_trace(full, [2] * 4, [1, 3]))
