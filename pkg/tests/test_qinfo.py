import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mzsim import qinfo as qi
from mzsim.qlinalg import ket, partial_trace, projector, random_density_matrix, random_unitary

seeds = st.integers(0, 2**32 - 1)
PSI_PLUS = (ket("01") + ket("10")) / math.sqrt(2)


def werner(p):
    return p * projector(PSI_PLUS) + (1 - p) * np.eye(4) / 4


def test_concurrence_examples():
    assert qi.concurrence(projector(PSI_PLUS)) == pytest.approx(1.0, abs=1e-12)
    assert qi.concurrence(projector(ket("10"))) < 1e-12
    for p in (0.2, 0.5, 0.9):
        assert abs(qi.concurrence(werner(p)) - max(0, (3 * p - 1) / 2)) < 1e-9


def test_concurrence_rejects_negative_state():
    with pytest.raises(qi.NumericError):
        qi.concurrence(np.diag([1.1, -0.1, 0, 0]))


def test_concurrence_clamps_tiny_negativity():
    rho = projector(ket("00")) - 1e-12 * projector(ket("11"))
    assert qi.concurrence(rho) < 1e-9


@given(seeds)
def test_product_states_have_zero_concurrence(seed):
    r = np.random.default_rng(seed)
    rho = np.kron(random_density_matrix(2, r), random_density_matrix(2, r))
    assert qi.concurrence(rho) < 1e-9


@given(seeds)
def test_concurrence_local_unitary_invariance(seed):
    r = np.random.default_rng(seed)
    rho = random_density_matrix(4, r, rank=int(r.integers(1, 5)))
    u = np.kron(random_unitary(2, r), random_unitary(2, r))
    assert abs(qi.concurrence(u @ rho @ u.conj().T) - qi.concurrence(rho)) < 1e-9


@given(seeds)
def test_pure_state_concurrence_oracle(seed):
    rho = random_density_matrix(4, np.random.default_rng(seed), rank=1)
    ra = partial_trace(rho, [2, 2], [0])
    oracle = math.sqrt(max(0.0, 2 * (1 - np.trace(ra @ ra).real)))
    assert abs(qi.concurrence(rho) - oracle) < 1e-9


def test_project_balanced_pure():
    for phi in (0.0, 0.7, 2.5):
        psi = (ket("10") + np.exp(1j * phi) * ket("01")) / math.sqrt(2)
        s = qi.project_single_excitation(projector(psi))
        assert (s.p1, s.p2, abs(s.c), s.weight) == pytest.approx((0.5, 0.5, 0.5, 1.0))


def test_project_empty_sector():
    with pytest.raises(qi.EmptySectorError):
        qi.project_single_excitation(projector(ket("00")))


def test_project_with_vacuum_weight():
    block = np.array([[0.5, 0.2], [0.2, 0.5]])
    rho = np.zeros((4, 4), complex)
    rho[0, 0] = 0.2
    # Kronecker index of |10> is 2 and of |01> is 1
    rho[2, 2], rho[2, 1], rho[1, 2], rho[1, 1] = 0.8 * block[0, 0], 0.8 * block[0, 1], 0.8 * block[1, 0], 0.8 * block[1, 1]
    s = qi.project_single_excitation(rho)
    assert s.weight == pytest.approx(0.8)
    assert np.allclose(s.matrix, block)


@pytest.fixture
def derived():
    return qi.SingleExcitationState(0.7, 0.3, 0.2, 1.0)


def test_visibility_examples(derived):
    assert qi.visibility_of(qi.SingleExcitationState(0.6, 0.4, 0, 1)) == 0
    assert qi.visibility_of(qi.SingleExcitationState(0.5, 0.5, 0.5, 1)) == pytest.approx(1)
    assert qi.visibility_of(derived) == pytest.approx(0.4)
    assert derived.bloch_length == pytest.approx(math.sqrt(0.32))


def test_purity_examples(derived):
    assert qi.purity(qi.SingleExcitationState(0.5, 0.5, 0.5j, 1)) == pytest.approx(1)
    assert qi.purity(qi.SingleExcitationState(0.5, 0.5, 0, 1)) == pytest.approx(0.5)
    assert qi.purity(derived) == pytest.approx(0.66)


def test_entropy_examples(derived):
    assert qi.von_neumann_entropy(qi.SingleExcitationState(1.0, 0.0, 0, 1)) == 0
    assert qi.von_neumann_entropy(qi.SingleExcitationState(0.5, 0.5, 0, 1)) == pytest.approx(1)
    lam = np.linalg.eigvalsh(derived.matrix)
    oracle = -sum(x * math.log2(x) for x in lam)
    assert qi.von_neumann_entropy(derived) == pytest.approx(oracle, abs=1e-12)
    assert oracle == pytest.approx(0.754943, abs=1e-6)


def test_entropy_bound_sym():
    assert qi.entropy_bound_sym(1.0) == 0
    assert qi.entropy_bound_sym(0.0) == 1
    assert qi.entropy_bound_sym(0.5) == pytest.approx(-0.75 * math.log2(0.75) - 0.25 * math.log2(0.25))
    with pytest.raises(ValueError):
        qi.entropy_bound_sym(1.2)


def test_report_examples(derived):
    r = qi.complementarity_report(qi.SingleExcitationState(0.5, 0.5, 0.3, 1))
    assert abs(r.bound_gap_purity) < 1e-15
    pure = qi.SingleExcitationState(0.8, 0.2, 0.4, 1)
    assert qi.complementarity_report(pure).entropy == pytest.approx(0, abs=1e-7)
    r = qi.complementarity_report(derived)
    assert r.bound_gap_purity == pytest.approx(0.16, abs=1e-12)
    lam = np.linalg.eigvalsh(derived.matrix)
    s_oracle = -sum(x * math.log2(x) for x in lam)
    assert r.bound_gap_entropy == pytest.approx(qi.entropy_bound_sym(0.4) - s_oracle, abs=1e-12)
    assert r.bound_gap_entropy == pytest.approx(0.126348, abs=1e-6)


@st.composite
def arm_states(draw):
    p1 = draw(st.floats(0, 1))
    r = draw(st.floats(0, 1))
    phase = draw(st.floats(0, 2 * math.pi))
    c = r * math.sqrt(p1 * (1 - p1)) * complex(math.cos(phase), math.sin(phase))
    return qi.SingleExcitationState(p1, 1 - p1, c, 1.0)


@given(arm_states())
def test_complementarity_inequalities(s):
    r = qi.complementarity_report(s)
    dp = s.imbalance
    assert r.bound_gap_purity >= -1e-9
    assert abs(r.bound_gap_purity - dp * dp) < 1e-12
    assert r.bound_gap_entropy >= -1e-9
    assert -1e-12 <= r.entropy <= qi.entropy_bound_sym(r.visibility) + 1e-9
    if abs(dp) < 1e-9:
        assert abs(r.bound_gap_purity) < 1e-9
    if abs(dp) > math.sqrt(1e-9) * 1.01:
        assert r.bound_gap_purity > 1e-9


@given(arm_states())
def test_purity_and_entropy_match_direct(s):
    m = s.matrix
    assert abs(qi.purity(s) - np.trace(m @ m).real) < 1e-12
    lam = np.clip(np.linalg.eigvalsh(m), 0, None)
    direct = -sum(x * math.log2(x) for x in lam if x > 0)
    # entropy is not Lipschitz at eigenvalue 0; compare away from the pure edge
    if lam.min() > 1e-6:
        assert abs(qi.von_neumann_entropy(s) - direct) < 1e-12
