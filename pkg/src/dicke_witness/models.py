"""Physical systems producing the states fed to the witnesses.

* Dicke model ground states, ``H = w_eg S_z + w_a a^dag a + g/sqrt(N) (S+ + S-)(a^dag + a)``,
  by sparse exact diagonalisation with an adaptive Fock cutoff.
* Interacting two-mode condensate, ``H = w_exc S_z + U S_z^2``, whose ground
  state is a single Dicke state.
* Single-photon superradiance of N atoms in a ball: one shared excitation
  decaying through the kernel ``M`` and its emitted photon collapsed onto one
  collective mode.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .hilbert import (CollectiveState, DickeSpace, FockSpace, FullSpace, MomentSet, StateSpace,
                      TAIL_TOL, build_collective_operators, build_fock_operators, expectation,
                      field_tail, joint_operators)

log = logging.getLogger(__name__)

DENSE_MAX_DIM = 4000


class CutoffCeilingError(RuntimeError):
    """The adaptive Fock cutoff reached its ceiling without a small enough tail."""


class IntegratorError(RuntimeError):
    """Time evolution produced a growing norm."""


# ---------------------------------------------------------------------------
# Dicke model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DickeParams:
    N: int
    g: float
    omega_eg: float = 1.0
    omega_a: float = 1.0
    n_max: int = 40
    n_max_ceiling: int = 800
    tail_tol: float = TAIL_TOL

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be positive")
        if not (self.omega_eg > 0 and self.omega_a > 0):
            raise ValueError("frequencies must be positive")
        if self.n_max < 1:
            raise ValueError("n_max must be at least 1")

    @property
    def g_c(self) -> float:
        return math.sqrt(self.omega_eg * self.omega_a) / 2


def dicke_hamiltonian(p: DickeParams, n_max: int):
    """Sparse Dicke Hamiltonian on Dicke (x) Fock, spin-major ordering."""
    spin = build_collective_operators(DickeSpace(p.N))
    fock = build_fock_operators(FockSpace(n_max))
    I_s = sp.eye_array(p.N + 1, dtype=complex)
    I_f = sp.eye_array(n_max + 1, dtype=complex)
    H = (p.omega_eg * sp.kron(spin["S_z"].mat, I_f) + p.omega_a * sp.kron(I_s, fock["n"].mat)
         + (p.g / math.sqrt(p.N)) * sp.kron((spin["S_plus"] + spin["S_minus"]).mat,
                                            (fock["a"] + fock["a_dag"]).mat))
    return sp.csr_array(H.real)


@dataclass
class DickeGroundState:
    state: CollectiveState
    energy: float
    n_per_N: float
    Sz: float
    n_max: int
    tail: float
    solver: str


def _lowest(H, method: str):
    dim = H.shape[0]
    if method == "dense" or (method == "auto" and dim <= 64):
        w, v = np.linalg.eigh(H.toarray())
        return w[0], v[:, 0], "dense"
    try:
        v0 = np.ones(dim) / math.sqrt(dim)
        w, v = eigsh(H, k=1, which="SA", v0=v0, tol=1e-13, maxiter=20000)
        return w[0], v[:, 0], "iterative"
    except ArpackNoConvergence:
        if dim > DENSE_MAX_DIM:
            raise
        log.warning("eigsh did not converge at dim %d, using dense solver", dim)
        w, v = np.linalg.eigh(H.toarray())
        return w[0], v[:, 0], "dense"


def dicke_ground_state(p: DickeParams, method: str = "auto") -> DickeGroundState:
    """Lowest eigenstate of the Dicke Hamiltonian.

    The Hamiltonian conserves the parity of (excitations + photons); the
    ground state lies in the even sector (it connects to ``|S,-S>|0>`` at
    ``g = 0``).  Diagonalising inside that sector avoids the near-degenerate
    odd partner that appears above the transition at finite N.  The Fock
    cutoff grows until the population of the last level is below
    ``p.tail_tol``.
    """
    if method not in ("auto", "dense", "iterative"):
        raise ValueError(f"unknown method {method!r}")
    n_max = p.n_max
    while True:
        H = dicke_hamiltonian(p, n_max)
        k = np.repeat(np.arange(p.N + 1), n_max + 1)
        n = np.tile(np.arange(n_max + 1), p.N + 1)
        even = np.flatnonzero((k + n) % 2 == 0)
        Hs = H[even][:, even]
        energy, vs, solver = _lowest(sp.csr_array(Hs), method)
        psi = np.zeros(H.shape[0], dtype=complex)
        psi[even] = vs / np.linalg.norm(vs)
        # fix the global phase so that the largest amplitude is real positive
        j = int(np.argmax(np.abs(psi)))
        psi *= abs(psi[j]) / psi[j]
        state = CollectiveState(StateSpace("dicke", p.N, n_max), psi)
        tail = field_tail(state)
        if tail < p.tail_tol:
            break
        if n_max >= p.n_max_ceiling:
            raise CutoffCeilingError(f"tail {tail:.3g} at n_max={n_max} (ceiling {p.n_max_ceiling})")
        n_max = min(int(1.5 * n_max) + 10, p.n_max_ceiling)
    ops = joint_operators(state.space)
    return DickeGroundState(state, float(energy), expectation(state, ops["n"]).real / p.N,
                            expectation(state, ops["S_z"]).real, n_max, tail, solver)


# ---------------------------------------------------------------------------
# condensate with interaction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BECParams:
    """``H = omega_exc S_z + U_int S_z^2``."""

    N: int
    omega_exc: float = 1.0
    U_int: float = 0.0

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be positive")
        if not self.omega_exc > 0:
            raise ValueError("omega_exc must be positive")
        if self.U_int < 0:
            raise ValueError("U_int must be non-negative")

    @classmethod
    def from_total_interaction(cls, N: int, omega_exc: float, U_total: float) -> "BECParams":
        """Coefficient ``U_total / N^2``: ``U_total`` is the interaction energy
        of a condensate normalised to N particles, so the two-body term per
        pair of excitations scales as ``U_total / N^2``."""
        return cls(N, omega_exc, U_total / N ** 2)


@dataclass
class BECGroundState:
    state: CollectiveState
    m_star: float
    tie: bool
    energies: np.ndarray = field(repr=False)


def bec_ground_state(p: BECParams) -> BECGroundState:
    """Minimise ``omega m + U m^2`` over the Dicke ladder; ties go to the smaller m."""
    m = DickeSpace(p.N).m_values
    f = p.omega_exc * m + p.U_int * m ** 2
    fmin = f.min()
    close = np.flatnonzero(np.abs(f - fmin) <= 1e-12 * max(1.0, abs(fmin)))
    j = int(close[0])
    return BECGroundState(CollectiveState.dicke(p.N, float(m[j])), float(m[j]), len(close) > 1, f)


# ---------------------------------------------------------------------------
# single-photon superradiance
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SuperradianceParams:
    """Lengths in units of the wavelength ``lambda0 = 2 pi / k0``; rates in units of ``gamma``."""

    N: int = 200
    radius: float = 5.0
    k0: float = 2 * math.pi
    gamma: float = 1.0
    lamb_shift: bool = False
    seed: int = 0
    t_grid: tuple = tuple(np.linspace(0.0, 10.0, 41))

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be positive")
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        t = np.asarray(self.t_grid, dtype=float)
        if t.ndim != 1 or t.size < 1 or t[0] != 0 or np.any(np.diff(t) <= 0):
            raise ValueError("t_grid must start at 0 and increase strictly")

    @property
    def wavelength(self) -> float:
        return 2 * math.pi / self.k0


def sample_positions(p: SuperradianceParams) -> np.ndarray:
    """``N`` points uniform in a ball of radius ``radius * lambda0`` (shape (N, 3))."""
    rng = np.random.default_rng(p.seed)
    d = rng.standard_normal((p.N, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = p.radius * p.wavelength * rng.uniform(0, 1, p.N) ** (1 / 3)
    return d * r[:, None]


def _k_vector(k0) -> np.ndarray:
    k = np.asarray(k0, dtype=float)
    return np.array([0.0, 0.0, float(k)]) if k.ndim == 0 else k


@dataclass(frozen=True)
class SingleExcitationState:
    """``sum_j beta_j |e_j>|0> + gamma_ph |G>|1>`` with a single collective photon mode."""

    beta: np.ndarray
    gamma_ph: complex
    positions: np.ndarray
    k0: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 2 * math.pi]))

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=complex)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "positions", np.asarray(self.positions, dtype=float).reshape(len(beta), 3))
        object.__setattr__(self, "k0", _k_vector(self.k0))
        norm = float(np.vdot(beta, beta).real + abs(self.gamma_ph) ** 2)
        if abs(norm - 1) > 1e-8:
            raise ValueError(f"sum |beta|^2 + |gamma_ph|^2 = {norm} != 1")

    @property
    def N(self) -> int:
        return len(self.beta)

    @property
    def phases(self) -> np.ndarray:
        """Per-atom phases ``k0 . r_j``."""
        return self.positions @ self.k0

    def to_collective_state(self, n_max: int = 2) -> CollectiveState:
        """Full 2^N (x) Fock representation (validation path, N <= 12)."""
        N = self.N
        FullSpace(N)
        space = StateSpace("full", N, n_max)
        psi = np.zeros(space.dim, dtype=complex)
        df = n_max + 1
        for j, b in enumerate(self.beta):
            psi[(1 << (N - 1 - j)) * df] = b
        psi[1] = self.gamma_ph
        return CollectiveState(space, psi)


def timed_dicke_initial(positions, k0=2 * math.pi) -> SingleExcitationState:
    """``beta_j = exp(i k0 . r_j) / sqrt(N)``, no photon; scalar ``k0`` points along z."""
    pos = np.asarray(positions, dtype=float)
    kv = _k_vector(k0)
    beta = np.exp(1j * (pos @ kv)) / math.sqrt(len(pos))
    return SingleExcitationState(beta, 0j, pos, kv)


def decay_kernel(positions, gamma: float = 1.0, k0: float = 2 * math.pi,
                 lamb_shift: bool = False) -> np.ndarray:
    """``M_jl = gamma/2 [sinc(k0 r_jl) + i L cos(k0 r_jl)/(k0 r_jl)]``, ``M_jj = gamma/2``.

    ``L = 1`` with ``lamb_shift``.  Coincident pairs take the ``r -> 0``
    limit of the sinc; their divergent shift term is dropped.
    """
    pos = np.asarray(positions, dtype=float)
    diff = pos[:, None, :] - pos[None, :, :]
    kr = float(np.linalg.norm(_k_vector(k0))) * np.sqrt((diff ** 2).sum(-1))
    M = (gamma / 2) * np.sinc(kr / math.pi).astype(complex)
    if lamb_shift:
        with np.errstate(divide="ignore", invalid="ignore"):
            shift = np.where(kr > 1e-12, np.cos(kr) / np.where(kr > 1e-12, kr, 1.0), 0.0)
        M = M + 1j * (gamma / 2) * shift
    np.fill_diagonal(M, gamma / 2)
    return M


@dataclass
class Trajectory:
    t: np.ndarray
    beta: np.ndarray  # (T, N)
    gamma_ph: np.ndarray  # (T,)
    positions: np.ndarray
    k0: np.ndarray
    method: str

    def states(self) -> list[SingleExcitationState]:
        return [SingleExcitationState(b, g, self.positions, self.k0) for b, g in zip(self.beta, self.gamma_ph)]

    @property
    def population(self) -> np.ndarray:
        return (np.abs(self.beta) ** 2).sum(axis=1)


def _evolve_eig(M, beta0, t):
    if np.allclose(M, M.conj().T, atol=1e-14):
        w, V = np.linalg.eigh(M)
        coef = V.conj().T @ beta0
        return (V[None, :, :] * np.exp(-np.outer(t, w))[:, None, :]) @ coef
    w, V = sla.eig(M)
    cond = np.linalg.cond(V)
    if not np.isfinite(cond) or cond > 1e8:
        raise np.linalg.LinAlgError(f"ill-conditioned eigenbasis (cond {cond:.3g})")
    coef = np.linalg.solve(V, beta0)
    return (V[None, :, :] * np.exp(-np.outer(t, w))[:, None, :]) @ coef


def _evolve_ode(M, beta0, t):
    sol = solve_ivp(lambda _, b: -M @ b, (t[0], t[-1]), beta0.astype(complex), t_eval=t,
                    method="DOP853", rtol=1e-10, atol=1e-12)
    if not sol.success:
        raise IntegratorError(sol.message)
    return sol.y.T


def evolve(M: np.ndarray, state0: SingleExcitationState, t_grid: Sequence[float],
           method: str = "auto") -> Trajectory:
    """Integrate ``d beta/dt = -M beta`` and assign the lost amplitude to the photon.

    ``|gamma_ph|^2 = 1 - sum |beta|^2``; its phase is that of the decayed
    amplitude's overlap with the timed Dicke mode, ``c(0) - c(t)`` with
    ``c = sum_j exp(-i k0.r_j) beta_j``.
    """
    t = np.asarray(t_grid, dtype=float)
    beta0 = state0.beta
    used = method
    if method in ("auto", "eig"):
        try:
            B = _evolve_eig(M, beta0, t)
            used = "eig"
        except np.linalg.LinAlgError:
            if method == "eig":
                raise
            B = _evolve_ode(M, beta0, t)
            used = "ode"
    elif method == "ode":
        B = _evolve_ode(M, beta0, t)
    else:
        raise ValueError(f"unknown method {method!r}")
    pop = (np.abs(B) ** 2).sum(axis=1)
    p0 = float(np.vdot(beta0, beta0).real)
    if np.any(np.diff(np.concatenate([[p0], pop])) > 1e-8) or np.any(pop > 1 + 1e-8):
        raise IntegratorError("excited-state population grew during evolution")
    lost = np.clip(1.0 - pop, 0.0, None)
    tdm = np.exp(-1j * state0.phases)
    c = B @ tdm
    c0 = beta0 @ tdm
    ph = np.angle(c0 - c)
    gamma_ph = np.sqrt(lost) * np.exp(1j * ph)
    return Trajectory(t, B, gamma_ph, state0.positions, state0.k0, used)


def single_excitation_moments(s: SingleExcitationState, phased: bool = True) -> dict:
    """Closed-form collective and ensemble-field moments.

    With ``c = sum_j exp(-i k0.r_j) beta_j`` (``phased``) or ``c = sum_j beta_j``,
    ``P = sum |beta_j|^2`` and ``g = gamma_ph``::

        <R> = |c|^2, <R^2> = N |c|^2, <S_z> = -N/2 + P
        <H1> = 2 Re(g c*), <H2> = -2 Im(g c*), <H1^2> = <H2^2> = N|g|^2 + |c|^2
        Cov_s(H1, H2) = -<H1><H2>
        <-S+S- + 2 S_z a a^dag> = -|c|^2 + 2(-N/2 + P) - N|g|^2
        <S+S- a^dag a> = 0, <S- a^dag> = conj(g) c, <S- a> = 0

    The returned dict holds a :class:`MomentSet` under ``"collective"`` and
    the ensemble-field moments in the layout of
    :func:`dicke_witness.criteria.sr_moments`.
    """
    N = s.N
    w = np.exp(-1j * s.phases) if phased else np.ones(N)
    c = complex(s.beta @ w)
    P = float(np.vdot(s.beta, s.beta).real)
    g = complex(s.gamma_ph)
    c2, g2 = abs(c) ** 2, abs(g) ** 2
    h1 = 2 * (g * c.conjugate()).real
    h2 = -2 * (g * c.conjugate()).imag
    second = N * g2 + c2
    collective = MomentSet(N, c2, N * c2, -N / 2 + P)
    sr = {
        "var_H1": max(second - h1 ** 2, 0.0),
        "var_H2": max(second - h2 ** 2, 0.0),
        "cov_H12": -h1 * h2,
        "expSz": -N / 2 + P,
        "cross": complex(-c2 + 2 * (-N / 2 + P) - N * g2),
        "R_n": 0.0,
        "Sm_ad": g.conjugate() * c,
        "Sm_a": 0j,
    }
    return {"collective": collective, "sr": sr, "c": c, "population": P}
