import json
import math

import numpy as np
import pytest
from scipy.linalg import expm

from separable_states import random_classical_gaussian, random_separable_joint

from dicke_witness.criteria import (
    ENTANGLED, INCONCLUSIVE, INVALID, NONCLASSICAL, UNDETECTED, ModePair, TruncationError,
    gn_wavefunction, linear_entropy_Q, mandel_q_field, mu_HZ, mu_SR, mu_spin, schwinger_monomial,
    single_mode_witness, sr_moments, xi_new, xi_new_from_moments, xi_spin)
from dicke_witness.hilbert import (
    CollectiveState, DickeSpace, MomentSet, StateSpace, build_collective_operators, coherent_field,
    coherent_spin_state, collective_moments, joint_operators, random_state, symmetric_to_full, thermal_field)
from dicke_witness.models import DickeParams, dicke_ground_state
from dicke_witness.separable import EtaQuery, OptimizerConfig, eta_lower_bound, separable_sampler


def joint(spin_vec, field_vec, N, n_max):
    return CollectiveState(StateSpace("dicke", N, n_max), np.kron(spin_vec, field_vec))


def ground(N):
    return CollectiveState.dicke(N, -N / 2).data


def fock_state(n_max, rho):
    return CollectiveState(StateSpace(None, None, n_max), rho)


# ---------------------------------------------------------------------------
# xi_new and Q
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("m", [-8, 8])
def test_xi_new_endpoints(m):
    rep = xi_new(CollectiveState.dicke(16, m))
    assert rep.value == pytest.approx(0.0, abs=1e-6)
    assert rep.verdict == UNDETECTED


def test_xi_new_center_dicke_state():
    rep = xi_new(CollectiveState.dicke(16, 0))
    assert rep.value < -1e-6 and rep.verdict == ENTANGLED
    assert rep.recombined() == pytest.approx(rep.value, abs=1e-9)
    assert rep.diagnostics["eta_status"] in ("converged", "exact")


def test_xi_new_matched_mode_is_certified_infeasible():
    rep = xi_new(CollectiveState.dicke(8, 0), OptimizerConfig(mode="matched"))
    assert rep.value == -math.inf and rep.verdict == ENTANGLED
    assert rep.diagnostics["eta_status"] == "infeasible"


def test_xi_new_inconclusive_is_never_a_detection(monkeypatch):
    import dicke_witness.criteria as crit
    from dicke_witness.separable import EtaResult
    monkeypatch.setattr(crit, "eta_lower_bound", lambda q, cfg: EtaResult(50.0, "inconclusive"))
    rep = xi_new_from_moments(MomentSet(6, 10.0, 130.0, -0.5))
    assert rep.value < 0
    assert rep.verdict == INCONCLUSIVE
    assert not rep.detected


def test_xi_new_soundness_small_sample():
    worst = min(xi_new_from_moments(MomentSet(5, m["expR"], m["expR2"], m["expSz"])).value
                for m, _ in separable_sampler(5, 25, 2024))
    assert worst >= -1e-6


def test_report_json():
    rep = xi_new(CollectiveState.dicke(6, 0))
    obj = json.loads(rep.to_json())
    assert obj["name"] == "xi_new" and obj["verdict"] == ENTANGLED
    assert set(obj["terms"]) == {"var_R", "minus_eta"}
    assert obj["config"]["tol"] == 1e-6


@pytest.mark.parametrize("m", [-8, -5, 0, 3, 8])
def test_linear_entropy_dicke(m):
    assert linear_entropy_Q(CollectiveState.dicke(16, m)) == pytest.approx(1 - 4 * m * m / 256, abs=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_linear_entropy_paths_agree(seed):
    st_ = random_state("symmetric", 6, seed)
    assert linear_entropy_Q(st_) == pytest.approx(linear_entropy_Q(symmetric_to_full(st_)), abs=1e-12)


def test_linear_entropy_rotation_invariant():
    st_ = random_state("symmetric", 8, 4)
    ops = build_collective_operators(DickeSpace(8))
    n = np.array([0.3, -0.5, 0.8])
    G = sum(c * ops[k].toarray() for c, k in zip(n, ("S_x", "S_y", "S_z")))
    rotated = CollectiveState(st_.space, expm(1.1j * G) @ st_.data)
    assert linear_entropy_Q(rotated) == pytest.approx(linear_entropy_Q(st_), abs=1e-10)


# ---------------------------------------------------------------------------
# spin squeezing
# ---------------------------------------------------------------------------

def test_xi_spin_coherent_state():
    assert xi_spin(CollectiveState.dicke(16, -8)).value == pytest.approx(0.0, abs=1e-9)
    assert xi_spin(coherent_spin_state(16, 1.2, 0.4)).value == pytest.approx(0.0, abs=1e-9)


def test_xi_spin_one_axis_twisting():
    N = 16
    css = coherent_spin_state(N, math.pi / 2, 0.0)
    Sz = build_collective_operators(DickeSpace(N))["S_z"].toarray()
    twisted = CollectiveState(css.space, expm(-1j * 0.05 * Sz @ Sz) @ css.data)
    rep = xi_spin(twisted)
    assert rep.value < 0 and rep.verdict == ENTANGLED


def test_xi_spin_degenerate_mean_spin():
    rep = xi_spin(CollectiveState.dicke(8, 0))
    assert math.isnan(rep.value) and rep.verdict == UNDETECTED
    assert "reason" in rep.diagnostics


def test_xi_spin_dicke_ground_state_superradiant():
    gs = dicke_ground_state(DickeParams(16, 1.0))
    assert xi_spin(gs.state).value >= 0


# ---------------------------------------------------------------------------
# single-mode criterion
# ---------------------------------------------------------------------------

def test_single_mode_fock_three():
    v = np.zeros(10)
    v[3] = 1
    rep = single_mode_witness(fock_state(9, np.outer(v, v)))
    assert rep.value == pytest.approx(-3.0, abs=1e-12)
    assert rep.verdict == NONCLASSICAL


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.2j, 1.2 * np.exp(1j * math.pi / 4), -1.7 + 0.4j])
def test_single_mode_coherent_central_variant(alpha):
    v = coherent_field(60, alpha)
    rep = single_mode_witness(fock_state(60, np.outer(v, v.conj())))
    assert rep.value == pytest.approx(0.0, abs=1e-10)


def test_single_mode_printed_variant_flags_coherent_state():
    # the literal <b>^2 reading marks a coherent state as nonclassical
    v = coherent_field(60, 1.2 * np.exp(1j * math.pi / 4))
    rep = single_mode_witness(fock_state(60, np.outer(v, v.conj())), "as_printed")
    assert rep.value < -1


def test_single_mode_thermal():
    rep = single_mode_witness(fock_state(120, thermal_field(120, 2.0)))
    assert rep.value == pytest.approx(4.0, abs=1e-8)


def test_single_mode_central_variant_flags_coherent_mixture():
    # a 50/50 mixture of |x> and |-x> is classical, yet the rotated correction
    # reaches x^4 while Var(n) - <n> = 0: the criterion is only sound for
    # classical Gaussian states
    x = 1.0
    a, b = coherent_field(60, x), coherent_field(60, -x)
    rho = 0.5 * (np.outer(a, a) + np.outer(b, b))
    rep = single_mode_witness(fock_state(60, rho))
    assert rep.terms["mandel_q"] == pytest.approx(0.0, abs=1e-10)
    assert rep.value == pytest.approx(-x ** 4, abs=1e-6)


def test_single_mode_rotation_consistency():
    rng = np.random.default_rng(5)
    v = np.zeros(41, dtype=complex)
    v[:5] = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    v /= np.linalg.norm(v)
    phi = 0.37
    rotated = np.exp(-1j * phi * np.arange(41)) * v
    a = single_mode_witness(fock_state(40, np.outer(rotated, rotated.conj())), theta_scan=90)
    b = single_mode_witness(fock_state(40, np.outer(v, v.conj())), theta_scan=90, theta_offset=phi)
    assert a.value == pytest.approx(b.value, abs=1e-9)


def test_single_mode_truncation_flag():
    v = coherent_field(8, 2.5)
    rep = single_mode_witness(fock_state(8, np.outer(v, v.conj())))
    assert rep.verdict == INVALID


@pytest.mark.parametrize("seed", range(3))
def test_single_mode_sound_on_classical_gaussian(seed):
    rng = np.random.default_rng(seed)
    for _ in range(20):
        assert single_mode_witness(random_classical_gaussian(40, rng)).value >= -1e-6


def test_mandel_q_examples():
    vac = np.zeros(31)
    vac[0] = 1
    assert mandel_q_field(joint(ground(4), vac, 4, 30)) == pytest.approx(0.0, abs=1e-14)
    assert mandel_q_field(joint(ground(4), coherent_field(40, 1.3 - 0.7j), 4, 40)) == pytest.approx(0.0, abs=1e-10)
    with pytest.raises(TruncationError):
        mandel_q_field(joint(ground(2), coherent_field(6, 2.0), 2, 6))


# ---------------------------------------------------------------------------
# ensemble-field witnesses
# ---------------------------------------------------------------------------

def test_mu_sr_boundary_saturation():
    N, n_max = 6, 10
    vac = np.zeros(n_max + 1)
    vac[0] = 1
    rep = mu_SR(joint(ground(N), vac, N, n_max))
    assert rep.value == pytest.approx(0.0, abs=1e-12)
    # cross term <-R + 2 S_z a a^dag> = -N on the all-ground vacuum
    assert rep.terms["factor_product"] == pytest.approx(N * N, abs=1e-12)
    assert -rep.terms["minus_cross_sq"] == pytest.approx(rep.terms["factor_product"], abs=1e-12)
    assert rep.terms["minus_cov_sq"] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("alpha", [0.3, 1.0j, 1.5 * np.exp(0.7j), -2.0])
def test_ground_times_coherent_not_flagged(alpha):
    st_ = joint(ground(5), coherent_field(50, alpha), 5, 50)
    assert mu_SR(st_).value >= -1e-8
    assert mu_HZ(st_).value == pytest.approx(0.0, abs=1e-12)
    assert mu_spin(st_).value == pytest.approx(0.0, abs=1e-9)


def _pt_schroedinger_robertson(state):
    """Uncertainty functional of K1 = S+ a^dag + S- a, K2 = i(S+ a^dag - S- a) on rho^(T_field)."""
    sp_ = state.space
    ds, df = sp_.spin_dim, sp_.field_dim
    rho = state.dm().reshape(ds, df, ds, df).transpose(0, 3, 2, 1).reshape(ds * df, ds * df)
    o = joint_operators(sp_)
    Sp, Sm, a, ad = (o[k].toarray() for k in ("S_plus", "S_minus", "a", "a_dag"))
    K1, K2 = Sp @ ad + Sm @ a, 1j * (Sp @ ad - Sm @ a)

    def e(X):
        return np.trace(rho @ X)

    v1 = (e(K1 @ K1) - e(K1) ** 2).real
    v2 = (e(K2 @ K2) - e(K2) ** 2).real
    cov = (0.5 * e(K1 @ K2 + K2 @ K1) - e(K1) * e(K2)).real
    return v1 * v2 - cov ** 2 - abs(e(K1 @ K2 - K2 @ K1)) ** 2 / 4


@pytest.mark.parametrize("seed", range(4))
def test_mu_sr_equals_partial_transpose_uncertainty(seed):
    rng = np.random.default_rng(seed)
    st_ = random_separable_joint(3, 40, rng)
    assert mu_SR(st_).value == pytest.approx(_pt_schroedinger_robertson(st_), rel=1e-9, abs=1e-9)


def test_mu_sr_partial_transpose_on_ground_state():
    st_ = dicke_ground_state(DickeParams(6, 0.6)).state
    assert mu_SR(st_).value == pytest.approx(_pt_schroedinger_robertson(st_), rel=1e-9)


def test_mu_hz_bell_state():
    # (|1,0>|0> + |1,-1>|1>)/sqrt(2) for N = 2; index = k * (n_max + 1) + n
    n_max = 6
    v = np.zeros(3 * (n_max + 1))
    v[1 * (n_max + 1) + 0] = v[0 * (n_max + 1) + 1] = 1 / math.sqrt(2)
    st_ = CollectiveState(StateSpace("dicke", 2, n_max), v)
    rep = mu_HZ(st_)
    assert rep.value == pytest.approx(-0.5, abs=1e-12)
    assert rep.verdict == ENTANGLED
    alt = mu_HZ(st_, alternate=True)
    assert alt.value <= rep.value


def test_mu_spin_vacuum_and_unpolarized():
    vac = np.zeros(11)
    vac[0] = 1
    assert mu_spin(joint(ground(6), vac, 6, 10)).value == pytest.approx(0.0, abs=1e-9)
    rep = mu_spin(joint(CollectiveState.dicke(6, 0).data, vac, 6, 10))
    assert math.isnan(rep.value) and rep.verdict == UNDETECTED


def test_ensemble_field_witnesses_need_field():
    with pytest.raises(ValueError):
        sr_moments(CollectiveState.dicke(4, 0))


@pytest.mark.parametrize("seed", range(5))
def test_ensemble_field_soundness(seed):
    rng = np.random.default_rng(seed)
    for _ in range(20):
        st_ = random_separable_joint(int(rng.integers(1, 6)), 30, rng)
        for rep in (mu_SR(st_), mu_HZ(st_), mu_spin(st_)):
            assert rep.verdict != INVALID
            assert not rep.value < -1e-6, rep.name
            assert rep.recombined() == pytest.approx(rep.value, abs=1e-9) or math.isnan(rep.value)


def test_truncated_field_is_invalid():
    st_ = joint(ground(2), coherent_field(5, 2.0), 2, 5)
    assert mu_SR(st_).verdict == INVALID


# ---------------------------------------------------------------------------
# atomic correlation functions
# ---------------------------------------------------------------------------

def _two_mode_oracle(state, order, kind):
    """<psi^dag^k psi^k> averaged on a grid, psi = u_g c_g + u_e c_e, explicit two-mode Fock space."""
    N = state.space.N
    d = N + 1
    a = np.diag(np.sqrt(np.arange(1, d)), 1)
    cg, ce = np.kron(a, np.eye(d)), np.kron(np.eye(d), a)
    vec = np.zeros(d * d, dtype=complex)
    amp = state.data
    for k in range(N + 1):
        vec[(N - k) * d + k] = amp[k]
    xs = 2 * math.pi * np.arange(8 * order + 4) / (8 * order + 4)
    total = 0.0
    for x in xs:
        ue = np.exp(1j * x) if kind == "plane_wave" else math.sqrt(2) * math.cos(x)
        psi = cg + ue * ce
        P = np.linalg.matrix_power(psi, order)
        w = P @ vec
        total += np.vdot(w, w).real
    return total / len(xs) / N ** order


@pytest.mark.parametrize("kind", ["plane_wave", "standing_wave"])
@pytest.mark.parametrize("order", [2, 3, 4])
def test_gn_matches_two_mode_oracle(order, kind):
    st_ = random_state("symmetric", 6, order)
    got = gn_wavefunction(st_, ModePair(kind), order)
    assert got == pytest.approx(_two_mode_oracle(st_, order, kind), abs=1e-10)


def test_g2_all_ground():
    assert gn_wavefunction(CollectiveState.dicke(16, -8)) == pytest.approx(15 / 16, abs=1e-14)


def test_g2_dicke_ground_state_at_zero_coupling():
    gs = dicke_ground_state(DickeParams(16, 0.0))
    assert gn_wavefunction(gs.state) == pytest.approx(0.9375, abs=1e-12)


def test_gn_order_limit():
    with pytest.raises(ValueError):
        gn_wavefunction(CollectiveState.dicke(4, 0), order=5)


def test_schwinger_monomial_identities():
    N = 5
    ops = build_collective_operators(DickeSpace(N))
    Sp = schwinger_monomial(N, 1, 0, 1, 0)  # c_e^dag c_g
    np.testing.assert_allclose(Sp.toarray(), ops["S_plus"].toarray(), atol=1e-14)
    with pytest.raises(ValueError):
        schwinger_monomial(N, 1, 1, 1, 0)


def test_ground_state_moments_have_separable_certificate():
    # above the transition a separable mixture with the ground state's <R> and
    # <S_z> has a smaller Var(R): no sound bound on these moments detects it
    gs = dicke_ground_state(DickeParams(16, 0.75))
    m = collective_moments(gs.state)
    res = eta_lower_bound(EtaQuery(16, m.expR, m.expSz), OptimizerConfig(mode="matched"))
    assert res.status == "converged"
    assert res.diagnostics["constraint_residual"] < 1e-6
    assert res.eta < m.expR2 - m.expR ** 2 - 1.0
    assert xi_new(gs.state).value > 0
