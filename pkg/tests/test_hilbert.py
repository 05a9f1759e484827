import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dicke_witness.hilbert import (
    CollectiveState, DickeSpace, DimensionError, FockSpace, FullSpace, StateSpace,
    StateValidationError, build_collective_operators, build_fock_operators,
    build_full_collective_operators, coherent_field, coherent_spin_state, collective_moments,
    commutator, embed, expectation, field_reduced, field_tail, holstein_primakoff_image, identity,
    joint_operators, purity_single_particle, r_operator, random_state, reduced_bloch_vector,
    spin_reduced, sym_covariance, symmetric_to_full, tensor, thermal_field, variance)


# ---------------------------------------------------------------------------
# collective spin algebra
# ---------------------------------------------------------------------------

def test_n2_matrices():
    ops = build_collective_operators(DickeSpace(2))
    np.testing.assert_array_equal(ops["S_z"].toarray().real, np.diag([-1.0, 0.0, 1.0]))
    # <1,0| S+ |1,-1> with m ascending: row 1, column 0
    assert ops["S_plus"].toarray()[1, 0] == pytest.approx(math.sqrt(2), abs=1e-15)


@pytest.mark.parametrize("N", [1, 2, 3, 7, 16, 33, 64])
def test_su2_algebra(N):
    ops = build_collective_operators(DickeSpace(N))
    Sx, Sy, Sz = ops["S_x"], ops["S_y"], ops["S_z"]
    assert (commutator(ops["S_plus"], ops["S_minus"]) - 2 * Sz).max_abs() < 1e-12
    assert (commutator(Sx, Sy) - 1j * Sz).max_abs() < 1e-12
    assert (commutator(Sy, Sz) - 1j * Sx).max_abs() < 1e-12
    assert (commutator(Sz, Sx) - 1j * Sy).max_abs() < 1e-12
    S = N / 2
    casimir = Sx @ Sx + Sy @ Sy + Sz @ Sz
    assert (casimir - S * (S + 1) * identity(N + 1)).max_abs() < 1e-12 * max(1, N)
    R = r_operator(ops)
    assert (R - (casimir - Sz @ Sz + Sz)).max_abs() < 1e-12 * max(1, N ** 2)


def test_dicke_cap():
    with pytest.raises(DimensionError):
        DickeSpace(10 ** 6)


@pytest.mark.parametrize("m", [-8, -3, 0, 5, 8])
def test_dicke_states_are_r_eigenstates(m):
    N, S = 16, 8
    st_ = CollectiveState.dicke(N, m)
    R = r_operator(build_collective_operators(DickeSpace(N)))
    assert variance(st_, R) == pytest.approx(0.0, abs=1e-12)
    assert expectation(st_, R).real == pytest.approx(S * (S + 1) - m * (m - 1), abs=1e-10)


def test_r_eigenvalue_example():
    st_ = CollectiveState.dicke(16, 0)
    R = r_operator(build_collective_operators(DickeSpace(16)))
    assert expectation(st_, R).real == pytest.approx(72.0, abs=1e-12)


# ---------------------------------------------------------------------------
# Fock space and tensor structure
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n_max", [1, 2, 5, 30])
def test_fock_truncation(n_max):
    ops = build_fock_operators(FockSpace(n_max))
    a, ad, n = ops["a"], ops["a_dag"], ops["n"]
    assert a.toarray()[0, 1] == pytest.approx(1.0)
    np.testing.assert_allclose(np.diag(n.toarray()).real, np.arange(n_max + 1))
    comm = commutator(a, ad).toarray()
    # canonical commutator holds except in the last retained level
    np.testing.assert_allclose(comm[:-1, :-1], np.eye(n_max), atol=1e-14)
    assert comm[-1, -1] == pytest.approx(-n_max)


def test_fock_requires_one_level():
    with pytest.raises(ValueError):
        build_fock_operators(FockSpace(0))


def test_tensor_and_embed():
    assert (tensor(identity(2), identity(3)) - identity(6)).max_abs() == 0
    spin = build_collective_operators(DickeSpace(3))
    fock = build_fock_operators(FockSpace(4))
    A = tensor(spin["S_z"], identity(5))
    B = tensor(identity(4), fock["n"])
    assert commutator(A, B).max_abs() == 0
    assert (embed(spin["S_z"], 0, [4, 5]) - A).max_abs() == 0
    with pytest.raises(DimensionError):
        embed(spin["S_z"], 1, [4, 5])
    with pytest.raises(DimensionError):
        _ = spin["S_z"] @ fock["n"]


def test_hand_built_four_dim_case():
    # N = 1, n_max = 1: basis |m=-1/2,0>, |-1/2,1>, |1/2,0>, |1/2,1>
    ops = joint_operators(StateSpace("dicke", 1, 1))
    M = (ops["S_plus"] @ ops["a"]).toarray()
    expected = np.zeros((4, 4))
    expected[2, 1] = 1.0  # |g,1> -> |e,0>
    np.testing.assert_allclose(M, expected, atol=1e-15)


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------

def test_variance_rejects_non_hermitian():
    st_ = CollectiveState.dicke(4, 0)
    ops = build_collective_operators(DickeSpace(4))
    with pytest.raises(ValueError):
        variance(st_, ops["S_plus"])


def test_sym_covariance_diagonal_is_variance():
    st_ = random_state("symmetric", 6, 3)
    ops = build_collective_operators(DickeSpace(6))
    for k in ("S_x", "S_y", "S_z"):
        assert sym_covariance(st_, ops[k], ops[k]) == pytest.approx(variance(st_, ops[k]), abs=1e-12)


def test_pure_and_mixed_paths_agree():
    st_ = random_state("symmetric", 5, 11)
    mixed = CollectiveState(st_.space, st_.dm())
    a, b = collective_moments(st_), collective_moments(mixed)
    assert a.expR == pytest.approx(b.expR, abs=1e-12)
    assert a.expR2 == pytest.approx(b.expR2, abs=1e-10)
    assert a.expSz == pytest.approx(b.expSz, abs=1e-12)


def test_symmetric_and_full_moments_agree():
    st_ = random_state("symmetric", 6, 5)
    a, b = collective_moments(st_), collective_moments(symmetric_to_full(st_))
    assert a.expR == pytest.approx(b.expR, abs=1e-10)
    assert a.expR2 == pytest.approx(b.expR2, abs=1e-9)
    assert a.expSz == pytest.approx(b.expSz, abs=1e-12)


@pytest.mark.parametrize("m,v,purity", [(-3, (0, 0, -1), 1.0), (0, (0, 0, 0), 0.5)])
def test_bloch_vector_examples(m, v, purity):
    st_ = CollectiveState.dicke(6, m)
    np.testing.assert_allclose(reduced_bloch_vector(st_), v, atol=1e-14)
    assert purity_single_particle(st_) == pytest.approx(purity, abs=1e-14)


@pytest.mark.parametrize("seed", range(4))
def test_purity_paths_agree(seed):
    st_ = random_state("symmetric", 6, seed)
    assert purity_single_particle(st_) == pytest.approx(purity_single_particle(symmetric_to_full(st_)),
                                                        abs=1e-12)


def test_partial_traces():
    psi = np.kron(coherent_spin_state(3, 1.0, 0.2).data, coherent_field(6, 0.4 + 0.1j))
    joint = CollectiveState(StateSpace("dicke", 3, 6), psi)
    np.testing.assert_allclose(spin_reduced(joint).dm(), coherent_spin_state(3, 1.0, 0.2).dm(), atol=1e-14)
    f = field_reduced(joint)
    assert f.space.type == "fock"
    assert field_tail(joint) < 1e-6


# ---------------------------------------------------------------------------
# states and serialization
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("kind,N", [("symmetric", 16), ("full", 8)])
def test_random_state_norm_and_determinism(kind, N):
    a = random_state(kind, N, 42)
    b = random_state(kind, N, 42)
    assert np.linalg.norm(a.data) == pytest.approx(1.0, abs=1e-12)
    assert a.data.tobytes() == b.data.tobytes()


def test_random_full_state_cap():
    with pytest.raises(DimensionError):
        random_state("full", 13, 0)
    with pytest.raises(DimensionError):
        FullSpace(17, allow_large=True)


def test_haar_mean_sz_vanishes():
    N, count = 4, 10_000
    Sz = build_collective_operators(DickeSpace(N))["S_z"]
    vals = np.array([expectation(random_state("symmetric", N, [7, i]), Sz).real for i in range(count)])
    assert abs(vals.mean()) < 3 * vals.std() / math.sqrt(count)


def test_density_matrix_validation():
    space = StateSpace("dicke", 1)
    with pytest.raises(StateValidationError):
        CollectiveState(space, np.array([[0.5, 0.3], [0.1, 0.5]]))
    with pytest.raises(StateValidationError):
        CollectiveState(space, np.diag([0.7, 0.7]))
    with pytest.raises(StateValidationError):
        CollectiveState(space, np.array([[1.2, 0], [0, -0.2]]))
    with pytest.raises(StateValidationError):
        CollectiveState(space, np.array([1.0, 1.0]))


@pytest.mark.parametrize("state", [
    CollectiveState.dicke(4, 1),
    CollectiveState(StateSpace("dicke", 2, 3), np.kron(coherent_spin_state(2, 0.3, 1).data, coherent_field(3, 0.2))),
    CollectiveState(StateSpace(None, None, 5), thermal_field(5, 0.3)),
    random_state("full", 3, 1),
])
def test_json_round_trip(state):
    text = state.to_json()
    obj = json.loads(text)
    assert obj["ordering"] == "m_asc_n_asc_spin_major"
    back = CollectiveState.from_json(text)
    assert back.space == state.space
    assert back.data.tobytes() == state.data.tobytes()


@pytest.mark.parametrize("text,where", [
    ('{"kind": "pure", "re": [1], "im": [0]}', "$: missing key 'space'"),
    ('{"space": {"type": "qutrit"}, "kind": "pure", "re": [1], "im": [0]}', "$.space"),
    ('{"space": {"type": "dicke", "N": 1}, "kind": "pure", "re": [1, 0], "im": [0]}', "$.im"),
    ('{"space": {"type": "dicke", "N": 1}, "kind": "mixed", "re": [1, 0], "im": [0, 0]}', "$.kind"),
    ('{"space": {"type": "dicke", "N": 1},\n "kind": "pure", "re": [1, 0,]}', "line 2"),
])
def test_json_rejects_malformed(text, where):
    with pytest.raises(StateValidationError, match=__import__("re").escape(where)):
        CollectiveState.from_json(text)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.floats(0, math.pi), st.floats(0, 2 * math.pi))
def test_coherent_spin_state_moments(N, theta, phi):
    st_ = coherent_spin_state(N, theta, phi)
    v = reduced_bloch_vector(st_)
    expected = [math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)]
    np.testing.assert_allclose(v, expected, atol=1e-10)


def test_full_collective_operators_phases():
    N = 3
    plain = build_full_collective_operators(FullSpace(N))
    same = build_full_collective_operators(FullSpace(N), np.full(N, 0.7))
    # a common phase is a global rotation: R is unchanged
    assert (r_operator(plain) - r_operator(same)).max_abs() < 1e-14


def test_holstein_primakoff_image():
    st_ = coherent_spin_state(64, math.pi - 0.15, 0.4)
    img = holstein_primakoff_image(st_)
    assert img.space.type == "fock" and img.space.n_max == 64
    n = build_fock_operators(FockSpace(64))["n"]
    Sz = build_collective_operators(DickeSpace(64))["S_z"]
    assert expectation(img, n).real == pytest.approx(expectation(st_, Sz).real + 32, abs=1e-10)
    with pytest.raises(ValueError):
        holstein_primakoff_image(random_state("full", 3, 0))
