"""Separable-state lower bound on the variance of R = S_plus S_minus.

The bound for target moments ``(r, z)`` is

    eta(r, z) = min  < (R - r)^2 >_sigma
                sigma separable, <S_z>_sigma = z

(``mode="relaxed"``, the default).  For a separable state ``rho`` with
``<R> = r`` and ``<S_z> = z`` the state itself is a candidate and its
objective equals ``Var_rho(R)``, so ``Var_rho(R) >= eta``.  The objective is
linear in ``sigma`` and there is one affine constraint, so the minimum is
reached on a mixture of at most two pure product states.

``mode="matched"`` additionally imposes ``<R>_sigma = r``.  That bound is
tighter where it exists, but many entangled states of interest (all interior
Dicke states, the single-excitation timed Dicke state) have ``<R>`` above
anything a separable state reaches at the same ``<S_z>``, and the matched
problem is then infeasible.

Moments of product states are computed exactly in O(N) from power sums of
single-particle moments (see :func:`_moments_site`).
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Iterator, Optional

import numpy as np
from scipy.optimize import minimize

from . import _kernels
from .hilbert import (FullSpace, build_full_collective_operators, product_state_vector,
                      r_operator)

log = logging.getLogger(__name__)


class InfeasibleTargetError(ValueError):
    """No separable mixture reproduces the requested moments."""

    def __init__(self, msg: str, certified: bool):
        super().__init__(msg)
        self.certified = certified


# ---------------------------------------------------------------------------
# product states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProductState:
    """Pure product of qubits ``cos(t/2)|e> + exp(i p) sin(t/2)|g>``.

    ``phases`` are optional per-particle position phases ``k0 . r_j`` that
    multiply ``s_plus^(j)`` by ``exp(+i phase_j)`` in the collective operators.
    """

    thetas: np.ndarray
    phis: np.ndarray
    phases: Optional[np.ndarray] = None

    def __post_init__(self):
        th = np.asarray(self.thetas, dtype=float)
        ph = np.asarray(self.phis, dtype=float)
        if th.shape != ph.shape or th.ndim != 1:
            raise ValueError("thetas and phis must be 1-D arrays of equal length")
        object.__setattr__(self, "thetas", th)
        object.__setattr__(self, "phis", ph)
        if self.phases is not None:
            pz = np.asarray(self.phases, dtype=float)
            if pz.shape != th.shape:
                raise ValueError("phases must have one entry per particle")
            object.__setattr__(self, "phases", pz)

    @property
    def N(self) -> int:
        return self.thetas.size

    def effective_phis(self) -> np.ndarray:
        return self.phis if self.phases is None else self.phis + self.phases


@dataclass(frozen=True)
class SeparableMixture:
    components: tuple
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(self.components) != w.size or w.size == 0:
            raise ValueError("one weight per component required")
        if w.size > 3:
            raise ValueError("at most 3 components")
        if (w < -1e-12).any() or abs(w.sum() - 1) > 1e-9:
            raise ValueError("weights must lie on the simplex")
        object.__setattr__(self, "weights", w)


def bloch_vectors(thetas, phis) -> np.ndarray:
    st = np.sin(thetas)
    return np.stack([st * np.cos(phis), st * np.sin(phis), np.cos(thetas)], axis=-1)


def _moments_site(p, a, grad=False):
    """<R>, <R^2>, E of product states from per-site p = <n>, a = <s_plus>.

    Expanding R and R^2 over particle indices and collecting coincident
    indices gives ordered cumulants per site; their sums are the power sums

        A = sum a          U = sum (p - |a|^2)      W = sum (1 - p - |a|^2)
        Q = sum a^2        D = sum (2|a|^2 - p) a   F = sum (4 p |a|^2 - 6 |a|^4)

    and then <R> = U + |A|^2 and

        <R^2> = F + 4 Re(conj(A) D) + U^2 + |Q|^2 + U W + (3U + W)|A|^2
                - 2 Re(Q conj(A)^2) + |A|^4.

    Sites run along the last axis; leading axes index independent product
    states.  With ``grad`` the derivatives w.r.t. (p, Re a, Im a) of every
    site are returned as well.
    """
    def tot(v):
        return v.sum(axis=-1, keepdims=True)

    s = a.real ** 2 + a.imag ** 2
    A = tot(a)
    U = tot(p - s)
    W = tot(1 - p - s)
    Q = tot(a * a)
    D = tot((2 * s - p) * a)
    F = tot(4 * p * s - 6 * s * s)
    A2 = A.real ** 2 + A.imag ** 2
    Ac = A.conjugate()
    M2 = U + A2
    M4 = (F + 4 * (Ac * D).real + U * U + (Q.real ** 2 + Q.imag ** 2) + U * W + (3 * U + W) * A2
          - 2 * (Q * Ac * Ac).real + A2 * A2)
    E = tot(p)
    vals = (M2[..., 0], M4[..., 0], E[..., 0])
    if not grad:
        return vals
    # Wirtinger derivatives of M4 w.r.t. the complex sums, plain ones for real sums
    dU = 2 * U + W + 3 * A2
    dW = U + A2
    dD = 2 * Ac
    dQ = Q.conjugate() - Ac * Ac
    dA = 2 * D.conjugate() + (3 * U + W) * Ac - 2 * Q.conjugate() * A + 2 * A2 * Ac
    ax, ay = a.real, a.imag
    # site derivatives of the sums: d/dp, d/dax, d/day
    g4p = dU - dW + 4 * s + 2 * (dD * (-a)).real
    base = 2 * s - p
    g4x = ((dU + dW) * (-2 * ax) + (4 * p - 12 * s) * 2 * ax
           + 2 * dA.real + 2 * (dQ * 2 * a).real + 2 * (dD * (4 * ax * a + base)).real)
    g4y = ((dU + dW) * (-2 * ay) + (4 * p - 12 * s) * 2 * ay
           + 2 * (dA * 1j).real + 2 * (dQ * 2j * a).real + 2 * (dD * (4 * ay * a + 1j * base)).real)
    g2p = np.ones_like(p)
    g2x = -2 * ax + 2 * Ac.real
    g2y = -2 * ay + 2 * (Ac * 1j).real
    return vals, ((g2p, g2x, g2y), (g4p, g4x, g4y))


def _moments_angles(thetas, phis, grad=False):
    """Moments and (theta, phi) gradients; leading axes are batch axes."""
    ct, st = np.cos(thetas), np.sin(thetas)
    p = 0.5 * (1 + ct)
    a = 0.5 * st * np.exp(1j * phis)
    if not grad:
        return _moments_site(p, a)
    vals, (g2, g4) = _moments_site(p, a, grad=True)
    # chain rule to (theta, phi)
    dp_dt = -0.5 * st
    dax_dt, day_dt = 0.5 * ct * np.cos(phis), 0.5 * ct * np.sin(phis)
    dax_dp, day_dp = -a.imag, a.real

    def chain(g):
        gp, gx, gy = g
        return gp * dp_dt + gx * dax_dt + gy * day_dt, gx * dax_dp + gy * day_dp

    t2, f2 = chain(g2)
    t4, f4 = chain(g4)
    gth = (t2, t4, dp_dt)
    gph = (f2, f4, np.zeros_like(p))
    return vals, gth, gph


def product_moments(p: ProductState) -> dict:
    """Exact ``<R>``, ``<R^2>``, ``<S_z>`` of a product state in O(N)."""
    M2, M4, E = _moments_angles(p.thetas, p.effective_phis())
    return {"expR": M2, "expR2": M4, "expSz": E - p.N / 2}


def mixture_moments(mix: SeparableMixture) -> dict:
    per = [product_moments(c) for c in mix.components]
    w = mix.weights
    expR = sum(wk * m["expR"] for wk, m in zip(w, per))
    expR2 = sum(wk * m["expR2"] for wk, m in zip(w, per))
    expSz = sum(wk * m["expSz"] for wk, m in zip(w, per))
    return {"expR": expR, "expR2": expR2, "expSz": expSz, "varR": expR2 - expR ** 2}


ORACLE_MAX_N = 10


def statevector_oracle(p: ProductState) -> dict:
    """Same moments as :func:`product_moments` by brute force on 2**N."""
    if p.N > ORACLE_MAX_N:
        raise ValueError(f"statevector oracle limited to N <= {ORACLE_MAX_N}")
    psi = product_state_vector(p.thetas, p.phis)
    ops = build_full_collective_operators(FullSpace(p.N), p.phases)
    R = r_operator(ops)
    w = R @ psi
    return {
        "expR": np.vdot(psi, w).real,
        "expR2": np.vdot(w, w).real,
        "expSz": np.vdot(psi, ops["S_z"] @ psi).real,
    }


# ---------------------------------------------------------------------------
# the bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EtaQuery:
    N: int
    target_expR: float
    target_expSz: float
    tolerance: float = 1e-6
    phased: bool = False

    def __post_init__(self):
        rmax = r_max_eigenvalue(self.N)
        if not -1e-9 <= self.target_expR <= rmax * (1 + 1e-9) + 1e-9:
            raise ValueError(f"target <R>={self.target_expR} outside [0, {rmax}]")
        if abs(self.target_expSz) > self.N / 2 * (1 + 1e-12) + 1e-12:
            raise ValueError(f"target <S_z>={self.target_expSz} outside [-N/2, N/2]")

    def key(self) -> str:
        return json.dumps([self.N, round(self.target_expR, 9), round(self.target_expSz, 9),
                           self.phased, self.tolerance])


@dataclass(frozen=True)
class OptimizerConfig:
    mode: str = "relaxed"  # "relaxed" | "matched"
    n_components: int = 2
    n_starts: int = 32
    seed: int = 0
    maxiter: int = 400
    penalty0: float = 10.0
    penalty_growth: float = 10.0
    outer_iters: int = 8
    gap_tol: float = 1e-5
    min_agree: int = 2
    extra_rounds: int = 3

    def __post_init__(self):
        if self.mode not in ("relaxed", "matched"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not 1 <= self.n_components <= 3:
            raise ValueError("n_components must be 1, 2 or 3")


def r_max_eigenvalue(N: int) -> float:
    S = N / 2
    m = 0.5 if N % 2 else 0.0
    # S(S+1) - m(m-1) is maximal at m = 1/2 (odd N) or m in {0, 1}
    return S * (S + 1) - m * (m - 1)


def product_r_cap(N: int, E: float) -> float:
    """Upper bound on <R> for any separable state with excitation <S_z> + N/2 = E."""
    p = min(max(E / N, 0.0), 1.0)
    return E + N * (N - 1) * p * (1 - p)


def product_r_floor(N: int, E: float) -> float:
    """Lower bound on <R> for any separable state with excitation E."""
    return E * E / N


class _Problem:
    """Augmented-Lagrangian objective over K-component product mixtures."""

    def __init__(self, N, r, E_t, K, matched):
        self.N, self.r, self.E_t, self.K, self.matched = N, r, E_t, K, matched
        self.s = r_max_eigenvalue(N) + 1.0

    def split(self, x):
        N, K = self.N, self.K
        th = x[: K * N].reshape(K, N)
        ph = x[K * N: 2 * K * N].reshape(K, N)
        z = x[2 * K * N:]
        w = np.exp(z - z.max())
        return th, ph, w / w.sum()

    def parts(self, x, grad):
        th, ph, w = self.split(x)
        vals, gth, gph = [], [], []
        for k in range(self.K):
            if grad:
                v, gt, gp = _moments_angles(th[k], ph[k], grad=True)
                gth.append(gt)
                gph.append(gp)
            else:
                v = _moments_angles(th[k], ph[k])
            vals.append(v)
        return th, ph, w, np.array(vals), gth, gph

    def evaluate(self, x):
        """Objective, constraint residuals (raw units) and weights."""
        _, _, w, vals, _, _ = self.parts(x, grad=False)
        M2, M4, E = vals.T
        obj = w @ (M4 - 2 * self.r * M2) + self.r ** 2
        cons = [w @ E - self.E_t]
        if self.matched:
            cons.append(w @ M2 - self.r)
        return obj, np.array(cons), w, vals

    def lagrangian(self, x, lam, rho):
        """Compiled augmented Lagrangian (value, gradient)."""
        lam1 = float(lam[1]) if self.matched else 0.0
        return _kernels.lagrangian(np.ascontiguousarray(x, dtype=float), self.N, self.K, float(self.r),
                                   float(self.E_t), float(self.s), float(lam[0]), lam1, float(rho),
                                   self.matched)

    def lagrangian_reference(self, x, lam, rho):
        """Numpy version of :meth:`lagrangian`, kept as a cross-check."""
        th, ph, w, vals, gth, gph = self.parts(x, grad=True)
        M2, M4, E = vals.T
        s, N, r = self.s, self.N, self.r
        obj_k = (M4 - 2 * r * M2) / s ** 2
        cE = (w @ E - self.E_t) / N
        yE = lam[0] + rho * cE
        L = w @ obj_k + r ** 2 / s ** 2 + lam[0] * cE + 0.5 * rho * cE ** 2
        dw = obj_k + yE * E / N
        coef2 = -2 * r / s ** 2
        if self.matched:
            cR = (w @ M2 - r) / s
            yR = lam[1] + rho * cR
            L += lam[1] * cR + 0.5 * rho * cR ** 2
            dw = dw + yR * M2 / s
            coef2 = coef2 + yR / s
        else:
            yR = 0.0
        gth_out = np.empty((self.K, N))
        gph_out = np.empty((self.K, N))
        for k in range(self.K):
            gt2, gt4, gtE = gth[k]
            gp2, gp4, gpE = gph[k]
            gth_out[k] = w[k] * (gt4 / s ** 2 + coef2 * gt2 + yE * gtE / N)
            gph_out[k] = w[k] * (gp4 / s ** 2 + coef2 * gp2 + yE * gpE / N)
        gz = w * (dw - w @ dw)
        return L, np.concatenate([gth_out.ravel(), gph_out.ravel(), gz])


def _acs_theta(p: float) -> float:
    """Polar angle giving excitation probability p = cos^2(theta/2)."""
    return 2 * math.acos(math.sqrt(min(max(p, 0.0), 1.0)))


def _pack(ths, phs, z) -> np.ndarray:
    return np.concatenate([np.ravel(ths), np.ravel(phs), np.ravel(z)])


def _random_seed(N, K, rng) -> np.ndarray:
    """One random start per component, drawn from three families.

    Uniform Bloch angles, a jittered coherent state, or a two-group product
    (``j`` particles in one orientation, the rest in another).
    """
    ths, phs = [], []
    for _ in range(K):
        family = rng.integers(3)
        if family == 0:
            th = np.arccos(rng.uniform(-1, 1, N))
            ph = rng.uniform(0, 2 * math.pi, N)
        elif family == 1:
            th = np.full(N, _acs_theta(rng.uniform())) + 0.1 * rng.standard_normal(N)
            ph = rng.uniform(0, 2 * math.pi) + 0.1 * rng.standard_normal(N)
        else:
            j = int(rng.integers(1, N)) if N > 1 else 1
            th = np.full(N, np.arccos(rng.uniform(-1, 1)))
            ph = np.zeros(N)
            th[:j] = np.arccos(rng.uniform(-1, 1))
            ph[:j] = rng.uniform(0, 2 * math.pi)
            th = th + 0.01 * rng.standard_normal(N)
        ths.append(th)
        phs.append(ph)
    return _pack(ths, phs, rng.standard_normal(K))


def _seed_points(N, E_t, K, n_starts, rng) -> list[np.ndarray]:
    """Structured seeds first, then random ones."""
    seeds = []
    p_t = E_t / N
    zeros = [np.zeros(N)] * K
    # symmetric coherent states around the target excitation
    for spread in (0.0, 0.5, 1.0):
        ths = []
        for k in range(K):
            frac = (k - (K - 1) / 2) * spread / max(K - 1, 1)
            p = min(max(p_t * (1 + frac), 0.0), 1.0)
            ths.append(np.full(N, _acs_theta(p)))
        seeds.append(_pack(ths, zeros, np.zeros(K)))
    # ground / excited anchors mixed with a coherent state at the target
    for anchor in (math.pi, 0.0):
        ths = [np.full(N, anchor)] + [np.full(N, _acs_theta(p_t)) for _ in range(K - 1)]
        seeds.append(_pack(ths, zeros, np.zeros(K)))
    # coherent states with a few azimuths turned by pi
    for n_flip in (1, 2):
        ph = np.zeros(N)
        ph[:min(n_flip, N)] = math.pi
        ths = [np.full(N, _acs_theta(p_t)) for _ in range(K)]
        seeds.append(_pack(ths, [np.zeros(N)] + [ph] * (K - 1), np.zeros(K)))
    # k-flip products: round(E_t) excited particles, rest ground
    for k_exc in sorted({int(math.floor(E_t)), int(math.ceil(E_t))}):
        th = np.full(N, math.pi)
        th[:min(k_exc, N)] = 0.0
        ths = [th + 0.05 * rng.standard_normal(N) for _ in range(K)]
        seeds.append(_pack(ths, [rng.uniform(0, 2 * math.pi, N) for _ in range(K)], np.zeros(K)))
    # spread excitation with cancelling phases (small <R> at fixed E)
    ths = [np.full(N, _acs_theta(p_t)) for _ in range(K)]
    phs = [2 * math.pi * np.arange(N) / N for _ in range(K)]
    seeds.append(_pack(ths, phs, np.zeros(K)))
    while len(seeds) < n_starts:
        seeds.append(_random_seed(N, K, rng))
    return seeds[:max(n_starts, 1)]


def _random_seeds(N, K, n_starts, rng) -> list[np.ndarray]:
    return [_random_seed(N, K, rng) for _ in range(n_starts)]


def _agreeing(feasible, cfg) -> int:
    """Number of feasible starts within the gap tolerance of the best one."""
    best = min(o for o, _, _ in feasible)
    scale = max(1.0, abs(best))
    return sum(1 for o, _, _ in feasible if o - best <= cfg.gap_tol * scale)


@dataclass
class EtaResult:
    eta: float
    status: str  # "converged" | "inconclusive" | "exact"
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"eta": self.eta, "status": self.status, "diagnostics": self.diagnostics}


def _solve_start(prob: _Problem, x0, cfg: OptimizerConfig):
    n_cons = 2 if prob.matched else 1
    lam = np.zeros(n_cons)
    rho = cfg.penalty0
    x = x0.copy()
    for _ in range(cfg.outer_iters):
        res = minimize(prob.lagrangian, x, args=(lam, rho), jac=True, method="L-BFGS-B",
                       options={"maxiter": cfg.maxiter, "gtol": 1e-12, "ftol": 1e-15})
        x = res.x
        _, cons, _, _ = prob.evaluate(x)
        scaled = cons / np.array([prob.N, prob.s][:n_cons])
        lam = lam + rho * scaled
        if np.abs(cons).max() <= 1e-3 * 1e-6 * prob.N:
            break
        rho *= cfg.penalty_growth
    obj, cons, w, vals = prob.evaluate(x)
    return x, obj, cons


def _polish_feasible(prob: _Problem, x, obj, cons, tol):
    """Snap the excitation constraint exactly by re-weighting when possible."""
    if prob.matched or prob.K < 2:
        return obj, cons
    _, _, w, vals = prob.evaluate(x)
    M2, M4, E = vals.T
    f = M4 - 2 * prob.r * M2 + prob.r ** 2
    # best exact two-point mixture among the found components
    best = (obj, cons)
    for i in range(prob.K):
        for j in range(prob.K):
            if E[i] <= prob.E_t <= E[j] and E[j] - E[i] > 1e-12:
                a = (E[j] - prob.E_t) / (E[j] - E[i])
                val = a * f[i] + (1 - a) * f[j]
                if val <= best[0] + 1e-9 * max(1.0, abs(best[0])):
                    best = (val, np.array([0.0]))
            elif abs(E[i] - prob.E_t) <= tol and f[i] < best[0]:
                best = (f[i], np.array([E[i] - prob.E_t]))
    return best


def eta_lower_bound(q: EtaQuery, cfg: OptimizerConfig = OptimizerConfig()) -> EtaResult:
    """Minimize the separable objective for ``q`` by multi-start augmented Lagrangian.

    Raises :class:`InfeasibleTargetError` for targets that no separable state
    can reproduce.  Returns status ``"inconclusive"`` when the two best
    distinct starts do not agree within ``cfg.gap_tol`` (relative).
    """
    N = q.N
    r, E_t = float(q.target_expR), float(q.target_expSz + N / 2)
    E_t = min(max(E_t, 0.0), float(N))
    matched = cfg.mode == "matched"
    tol = q.tolerance * N

    # exact endpoints
    if E_t <= tol and (not matched or abs(r) <= tol):
        return EtaResult(r ** 2 if not matched else 0.0, "exact",
                         {"attained_by": "all-ground", "starts": 0})
    if E_t >= N - tol and (not matched or abs(r - N) <= tol):
        return EtaResult((N - r) ** 2 if not matched else 0.0, "exact",
                         {"attained_by": "all-excited", "starts": 0})
    if matched:
        lo, hi = product_r_floor(N, E_t), product_r_cap(N, E_t)
        if r > hi + tol or r < lo - tol:
            raise InfeasibleTargetError(
                f"<R>={r:.6g} outside the separable range [{lo:.6g}, {hi:.6g}] at <S_z>={q.target_expSz:.6g}",
                certified=True)

    prob = _Problem(N, r, E_t, cfg.n_components, matched)
    results = []
    feasible = []
    rounds = 0
    # Round 0 uses the structured seeds; further rounds draw fresh random
    # starts from independent streams until the best value is confirmed.
    for rounds in range(1 + cfg.extra_rounds):
        rng = np.random.default_rng([cfg.seed, rounds])
        if rounds == 0:
            seeds = _seed_points(N, E_t, cfg.n_components, cfg.n_starts, rng)
        else:
            seeds = _random_seeds(N, cfg.n_components, cfg.n_starts, rng)
        for x0 in seeds:
            x, obj, cons = _solve_start(prob, x0, cfg)
            obj, cons = _polish_feasible(prob, x, obj, cons, tol)
            results.append((obj, float(np.abs(cons).max()), x))
        feasible = [(o, c, x) for o, c, x in results if c <= tol]
        if feasible and _agreeing(feasible, cfg) >= cfg.min_agree:
            break

    if not feasible:
        best_res = min(c for _, c, _ in results)
        raise InfeasibleTargetError(
            f"no start reached feasibility (best residual {best_res:.3g} > {tol:.3g})", certified=False)
    feasible.sort(key=lambda t: (t[0], t[1]))
    best, resid, xbest = feasible[0]
    agree = _agreeing(feasible, cfg)
    second = feasible[1][0] if len(feasible) > 1 else math.inf
    status = "converged" if agree >= min(cfg.min_agree, len(feasible)) else "inconclusive"
    _, _, w, vals = prob.evaluate(xbest)
    diagnostics = {
        "mode": cfg.mode,
        "starts": len(results),
        "rounds": rounds + 1,
        "feasible_starts": len(feasible),
        "agreeing_starts": agree,
        "best": best,
        "second_best": second,
        "gap": second - best,
        "constraint_residual": resid,
        "weights": [float(v) for v in w],
        "component_E": [float(v) for v in vals[:, 2]],
        "component_R": [float(v) for v in vals[:, 0]],
    }
    return EtaResult(max(best, 0.0), status, diagnostics)


# ---------------------------------------------------------------------------
# sampling oracle
# ---------------------------------------------------------------------------

def random_product_state(N: int, rng: np.random.Generator) -> ProductState:
    return ProductState(np.arccos(rng.uniform(-1, 1, N)), rng.uniform(0, 2 * math.pi, N))


def random_mixture(N: int, rng: np.random.Generator, max_components: int = 3) -> SeparableMixture:
    k = int(rng.integers(2, max_components + 1))
    comps = tuple(random_product_state(N, rng) for _ in range(k))
    return SeparableMixture(comps, rng.dirichlet(np.ones(k)))


def separable_sampler(N: int, count: int, seed, max_components: int = 4) -> Iterator[tuple[dict, float]]:
    """Random separable mixtures (2..max_components products, Dirichlet weights).

    Angles are drawn uniformly on the Bloch sphere, but half of the samples
    first pick a common orientation per component and jitter around it, so
    that near-coherent (high ``<R>``) states are represented.
    """
    if N > 24:
        raise ValueError("sampler limited to N <= 24")
    rng = np.random.default_rng(seed)
    for _ in range(count):
        k = int(rng.integers(2, max_components + 1))
        w = rng.dirichlet(np.ones(k))
        mom = np.zeros(3)
        for wk in w:
            if rng.uniform() < 0.5:
                th = np.arccos(rng.uniform(-1, 1, N))
                ph = rng.uniform(0, 2 * math.pi, N)
            else:
                width = rng.uniform(0, 1)
                th = np.clip(np.arccos(rng.uniform(-1, 1)) + width * rng.standard_normal(N), 0, math.pi)
                ph = rng.uniform(0, 2 * math.pi) + width * rng.standard_normal(N)
            M2, M4, E = _moments_angles(th, ph)
            mom += wk * np.array([M2, M4, E - N / 2])
        moments = {"expR": mom[0], "expR2": mom[1], "expSz": mom[2]}
        yield moments, max(mom[1] - mom[0] ** 2, 0.0)


# ---------------------------------------------------------------------------
# cache
# ---------------------------------------------------------------------------

class EtaCache:
    """JSON file cache of bound evaluations keyed by the rounded query and mode."""

    def __init__(self, path: Optional[str] = None):
        self.path = path
        self.data: dict = {}
        if path and os.path.exists(path):
            with open(path) as fh:
                self.data = json.load(fh)

    @staticmethod
    def _key(q: EtaQuery, cfg: OptimizerConfig) -> str:
        return q.key() + "|" + hashlib.sha1(json.dumps(asdict(cfg), sort_keys=True).encode()).hexdigest()[:12]

    def get(self, q: EtaQuery, cfg: OptimizerConfig) -> Optional[EtaResult]:
        hit = self.data.get(self._key(q, cfg))
        if hit is None:
            return None
        return EtaResult(hit["eta"], hit["status"], hit["diagnostics"])

    def put(self, q: EtaQuery, cfg: OptimizerConfig, res: EtaResult):
        self.data[self._key(q, cfg)] = res.to_dict()

    def save(self):
        if self.path:
            with open(self.path, "w") as fh:
                json.dump(self.data, fh, sort_keys=True, indent=1)

    def solve(self, q: EtaQuery, cfg: OptimizerConfig) -> EtaResult:
        hit = self.get(q, cfg)
        if hit is not None:
            return hit
        res = eta_lower_bound(q, cfg)
        self.put(q, cfg, res)
        return res
