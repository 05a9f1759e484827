"""Monte Carlo oracle for the separable bound on a constraint slice.

For a query ``(r, z)`` every separable mixture with ``<S_z> = z`` is a
candidate of the bound's minimisation, so its objective ``<(R - r)^2>``
must never fall below the reported bound.  Mixtures on the slice are built
exactly from random pairs of product states that straddle the target
excitation ``E = z + N/2``: the weights are then fixed by the constraint.
"""

from __future__ import annotations

import math

import numpy as np

from dicke_witness.separable import _moments_angles


def _family(rng, B, N):
    """Random product states from three families (uniform, coherent-like, two-group)."""
    kind = rng.integers(3, size=B)
    th = np.arccos(rng.uniform(-1, 1, (B, N)))
    ph = rng.uniform(0, 2 * math.pi, (B, N))
    width = rng.uniform(0, 0.6, (B, 1))
    th0 = np.arccos(rng.uniform(-1, 1, (B, 1)))
    ph0 = rng.uniform(0, 2 * math.pi, (B, 1))
    coh = kind == 1
    th[coh] = np.clip(th0 + width * rng.standard_normal((B, N)), 0, math.pi)[coh]
    ph[coh] = (ph0 + width * rng.standard_normal((B, N)))[coh]
    two = kind == 2
    split = rng.integers(1, max(N, 2), size=(B, 1))
    first = np.arange(N)[None, :] < split
    th1 = np.arccos(rng.uniform(-1, 1, (B, 1)))
    ph1 = rng.uniform(0, 2 * math.pi, (B, 1))
    th_two = np.where(first, th1, th0)
    ph_two = np.where(first, ph1, ph0)
    th[two] = th_two[two]
    ph[two] = ph_two[two]
    return th, ph


def slice_objectives(N: int, r: float, z: float, count: int, seed, batch: int = 200_000) -> np.ndarray:
    """Objective values of ``count`` random separable mixtures on the slice ``<S_z> = z``."""
    rng = np.random.default_rng(seed)
    E_t = z + N / 2
    out = []
    have = 0
    while have < count:
        tha, pha = _family(rng, batch, N)
        thb, phb = _family(rng, batch, N)
        M2a, M4a, Ea = _moments_angles(tha, pha)
        M2b, M4b, Eb = _moments_angles(thb, phb)
        ok = ((Ea - E_t) * (Eb - E_t) < 0) & (np.abs(Eb - Ea) > 1e-12)
        wa = (Eb[ok] - E_t) / (Eb[ok] - Ea[ok])
        fa = M4a[ok] - 2 * r * M2a[ok] + r * r
        fb = M4b[ok] - 2 * r * M2b[ok] + r * r
        vals = wa * fa + (1 - wa) * fb
        out.append(vals)
        have += vals.size
    return np.concatenate(out)[:count]
