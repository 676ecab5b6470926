"""Pure-numpy kernel backend.

Mirrors the native extension's interface. Histograms and eigensolve
sweeps are evaluated directly (vectorized per block); the Gray-code
incremental walk is kept as a plain-Python reference implementation,
used by the enumeration self-check.
"""

from __future__ import annotations

import numpy as np

from .common import decode_spins, direct_energies, quantize

NAME = "python"


def hist_range(w, t0, t1, cap):
    """Histogram the configs visited by Gray-walk steps [t0, t1).

    Returns (keys, counts, min_key, min_h, min_count, reps): bin keys
    ascending with their counts, plus the minimum bin's key, exact
    minimum energy, count, and its `cap` smallest config indices.
    """
    t = np.arange(t0, t1, dtype=np.int64)
    idx = t ^ (t >> 1)
    s = decode_spins(idx, w.shape[0])
    h = direct_energies(w, s)
    keys = quantize(h)
    ukeys, counts = np.unique(keys, return_counts=True)
    min_key = int(ukeys[0])
    sel = keys == min_key
    min_h = float(h[sel].min())
    reps = np.sort(idx[sel])[:cap].copy()
    return ukeys, counts.astype(np.int64), min_key, min_h, int(sel.sum()), reps


def beta1_block(w, i0, i1):
    """(H, beta_1) for plain config indices [i0, i1).

    beta_1 is the largest eigenvalue of the binarized Jacobian at
    K=1, K_s=0 (LAPACK eigvalsh on a stacked batch).
    """
    n = w.shape[0]
    idx = np.arange(i0, i1, dtype=np.int64)
    s = decode_spins(idx, n)
    f = s @ w
    h = direct_energies(w, s)
    b = w[None, :, :] * s[:, :, None] * s[:, None, :]
    d = np.arange(n)
    b[:, d, d] = -s * f
    beta1 = np.linalg.eigvalsh(b)[:, -1].copy()
    return h, beta1


def gray_energies(w, t0, t1):
    """Incremental Gray-code walk over steps [t0, t1).

    Returns (config indices in visit order, incrementally updated H).
    The walk is seeded with a direct evaluation at t0 and updates H via
    the spin-flip identity dH = 2 s_k field_k, maintaining the local
    field vector at the cost of the flipped node's row.
    """
    n = w.shape[0]
    size = t1 - t0
    idx_out = np.empty(size, dtype=np.int64)
    h_out = np.empty(size, dtype=np.float64)
    g0 = t0 ^ (t0 >> 1)
    s = decode_spins(np.array([g0], dtype=np.int64), n)[0]
    field = w @ s
    h = float(-0.5 * (s @ field))
    idx_out[0] = g0
    h_out[0] = h
    for j in range(1, size):
        t = t0 + j
        k = ((t & -t).bit_length() - 1) + 1  # flipped bit -> spin k
        h += 2.0 * s[k] * field[k]
        s[k] = -s[k]
        field += (2.0 * s[k]) * w[:, k]
        idx_out[j] = t ^ (t >> 1)
        h_out[j] = h
    return idx_out, h_out
