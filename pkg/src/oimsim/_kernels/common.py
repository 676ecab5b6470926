"""Helpers shared by both kernel backends.

Energy values are binned on a 1e-9 absolute grid. The integer key of a
bin is llround(H * 1e9) (round half away from zero), which recovers
integer energies exactly for integer-weighted graphs. The native kernel
implements the same rule in C; keep the two in sync.
"""

from __future__ import annotations

import numpy as np

# Energies are binned to this absolute resolution.
RESOLUTION = 1e-9
_SCALE = 1e9

# Incremental walks recompute energy/field directly at every multiple of
# this stride, bounding float drift for non-integer weights.
RESEED_STRIDE = 1 << 16


def quantize(h):
    """llround(h * 1e9) with numpy broadcasting."""
    x = np.asarray(h, dtype=np.float64) * _SCALE
    out = np.where(x >= 0.0, np.floor(x + 0.5), np.ceil(x - 0.5))
    return out.astype(np.int64)


def energy_key(h: float) -> int:
    return int(quantize(h))


def key_energy(key: int) -> float:
    """Bin key back to its energy value (exact for integer energies)."""
    return key / _SCALE


def decode_spins(idx, n: int) -> np.ndarray:
    """Config indices -> spin rows (float +-1); spin 0 is fixed to +1."""
    idx = np.asarray(idx, dtype=np.int64)
    s = np.empty((idx.shape[0], n), dtype=np.float64)
    s[:, 0] = 1.0
    if n > 1:
        bits = (idx[:, None] >> np.arange(n - 1, dtype=np.int64)) & 1
        s[:, 1:] = 1.0 - 2.0 * bits
    return s


def direct_energies(w: np.ndarray, s: np.ndarray) -> np.ndarray:
    """H for each spin row: -1/2 sum_i s_i (W s)_i."""
    return -0.5 * np.einsum("ci,ci->c", s, s @ w)
