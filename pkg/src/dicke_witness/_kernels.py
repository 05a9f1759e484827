"""Compiled inner loops for the separable-bound optimizer.

The optimizer evaluates the augmented Lagrangian of a K-component product
mixture many thousands of times for small N, where numpy call overhead
dominates.  These kernels repeat the closed-form power-sum moments of
:func:`dicke_witness.separable._moments_site` with explicit loops; the
numpy version stays the reference and the test suite checks agreement.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def product_moments_grad(th, ph, g2t, g2p, g4t, g4p, gEt):
    """Return (<R>, <R^2>, E) of one product state and fill angle gradients."""
    N = th.shape[0]
    Ar = 0.0
    Ai = 0.0
    U = 0.0
    W = 0.0
    Qr = 0.0
    Qi = 0.0
    Dr = 0.0
    Di = 0.0
    F = 0.0
    E = 0.0
    for j in range(N):
        ct = math.cos(th[j])
        st = math.sin(th[j])
        p = 0.5 * (1.0 + ct)
        ax = 0.5 * st * math.cos(ph[j])
        ay = 0.5 * st * math.sin(ph[j])
        s = ax * ax + ay * ay
        Ar += ax
        Ai += ay
        U += p - s
        W += 1.0 - p - s
        Qr += ax * ax - ay * ay
        Qi += 2.0 * ax * ay
        b = 2.0 * s - p
        Dr += b * ax
        Di += b * ay
        F += 4.0 * p * s - 6.0 * s * s
        E += p
    A = complex(Ar, Ai)
    Ac = complex(Ar, -Ai)
    Q = complex(Qr, Qi)
    D = complex(Dr, Di)
    A2 = Ar * Ar + Ai * Ai
    M2 = U + A2
    M4 = (F + 4.0 * (Ac * D).real + U * U + (Qr * Qr + Qi * Qi) + U * W + (3.0 * U + W) * A2
          - 2.0 * (Q * Ac * Ac).real + A2 * A2)
    dU = 2.0 * U + W + 3.0 * A2
    dW = U + A2
    dD = 2.0 * Ac
    dQ = Q.conjugate() - Ac * Ac
    dA = 2.0 * D.conjugate() + (3.0 * U + W) * Ac - 2.0 * Q.conjugate() * A + 2.0 * A2 * Ac
    for j in range(N):
        ct = math.cos(th[j])
        st = math.sin(th[j])
        cp = math.cos(ph[j])
        sp = math.sin(ph[j])
        p = 0.5 * (1.0 + ct)
        ax = 0.5 * st * cp
        ay = 0.5 * st * sp
        a = complex(ax, ay)
        s = ax * ax + ay * ay
        base = 2.0 * s - p
        g4p_ = dU - dW + 4.0 * s + 2.0 * (dD * (-a)).real
        g4x = ((dU + dW) * (-2.0 * ax) + (4.0 * p - 12.0 * s) * 2.0 * ax
               + 2.0 * dA.real + 2.0 * (dQ * 2.0 * a).real + 2.0 * (dD * (4.0 * ax * a + base)).real)
        g4y = ((dU + dW) * (-2.0 * ay) + (4.0 * p - 12.0 * s) * 2.0 * ay
               + 2.0 * (dA * 1j).real + 2.0 * (dQ * 2j * a).real
               + 2.0 * (dD * (4.0 * ay * a + 1j * base)).real)
        g2x = -2.0 * ax + 2.0 * Ar
        g2y = -2.0 * ay + 2.0 * Ai
        dp_dt = -0.5 * st
        dax_dt = 0.5 * ct * cp
        day_dt = 0.5 * ct * sp
        dax_dp = -ay
        day_dp = ax
        g2t[j] = dp_dt + g2x * dax_dt + g2y * day_dt
        g2p[j] = g2x * dax_dp + g2y * day_dp
        g4t[j] = g4p_ * dp_dt + g4x * dax_dt + g4y * day_dt
        g4p[j] = g4x * dax_dp + g4y * day_dp
        gEt[j] = dp_dt
    return M2, M4, E


@njit(cache=True)
def lagrangian(x, N, K, r, E_t, s, lam0, lam1, rho, matched):
    """Augmented Lagrangian of the mixture problem and its gradient.

    ``x`` packs K*N polar angles, K*N azimuths and K softmax logits.
    """
    grad = np.zeros(x.shape[0])
    zmax = x[2 * K * N]
    for k in range(1, K):
        zmax = max(zmax, x[2 * K * N + k])
    w = np.empty(K)
    tot = 0.0
    for k in range(K):
        w[k] = math.exp(x[2 * K * N + k] - zmax)
        tot += w[k]
    for k in range(K):
        w[k] /= tot
    M2 = np.empty(K)
    M4 = np.empty(K)
    E = np.empty(K)
    G2T = np.empty((K, N))
    G2P = np.empty((K, N))
    G4T = np.empty((K, N))
    G4P = np.empty((K, N))
    GET = np.empty((K, N))
    for k in range(K):
        M2[k], M4[k], E[k] = product_moments_grad(
            x[k * N:(k + 1) * N], x[K * N + k * N:K * N + (k + 1) * N],
            G2T[k], G2P[k], G4T[k], G4P[k], GET[k])
    s2 = s * s
    wE = 0.0
    wobj = 0.0
    wM2 = 0.0
    obj = np.empty(K)
    for k in range(K):
        obj[k] = (M4[k] - 2.0 * r * M2[k]) / s2
        wE += w[k] * E[k]
        wobj += w[k] * obj[k]
        wM2 += w[k] * M2[k]
    cE = (wE - E_t) / N
    yE = lam0 + rho * cE
    L = wobj + r * r / s2 + lam0 * cE + 0.5 * rho * cE * cE
    coef2 = -2.0 * r / s2
    yR = 0.0
    if matched:
        cR = (wM2 - r) / s
        yR = lam1 + rho * cR
        L += lam1 * cR + 0.5 * rho * cR * cR
        coef2 += yR / s
    dw = np.empty(K)
    for k in range(K):
        dw[k] = obj[k] + yE * E[k] / N + yR * M2[k] / s
    wdw = 0.0
    for k in range(K):
        wdw += w[k] * dw[k]
    for k in range(K):
        for j in range(N):
            grad[k * N + j] = w[k] * (G4T[k, j] / s2 + coef2 * G2T[k, j] + yE * GET[k, j] / N)
            grad[K * N + k * N + j] = w[k] * (G4P[k, j] / s2 + coef2 * G2P[k, j])
        grad[2 * K * N + k] = w[k] * (dw[k] - wdw)
    return L, grad
