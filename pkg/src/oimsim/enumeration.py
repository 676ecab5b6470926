"""Exhaustive spin-landscape enumeration.

Spin configurations are index-encoded with spin 0 fixed to +1: bit b of
the index gives spin b+1 (set bit = -1). Indices run over the
2^(n-1) symmetry classes; "full" counts double every class to include
the mirror image. The enumeration walk visits configurations in
reflected-binary Gray order, updating H incrementally through the
spin-flip identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._kernels.common import decode_spins, direct_energies, key_energy
from .errors import CapError
from .model import CouplingMatrix
from .parallel import iter_blocks, map_blocks

__all__ = [
    "ENUM_CAP",
    "VERIFY_CAP",
    "EnergyHistogram",
    "GroundStates",
    "index_to_config",
    "config_to_index",
    "enumerate_energies",
    "ground_states",
    "verify_enumeration",
    "write_histogram_csv",
]

ENUM_CAP = 26
VERIFY_CAP = 16
HIST_BLOCK = 1 << 16


def check_enum_cap(n: int, cap: int = ENUM_CAP) -> None:
    if n > cap:
        raise CapError(
            f"exhaustive sweep is capped at n <= {cap} nodes, got n = {n}"
        )


def num_configs(n: int) -> int:
    """Number of symmetry classes, 2^(n-1)."""
    return 1 << (n - 1)


def index_to_config(idx: int, n: int) -> np.ndarray:
    """Decode a config index to spins (int8, spin 0 = +1)."""
    if not 0 <= idx < num_configs(n):
        raise ValueError(f"config index {idx} out of range for n = {n}")
    return decode_spins(np.array([idx], dtype=np.int64), n)[0].astype(np.int8)


def config_to_index(s) -> int:
    """Encode spins as a config index, canonicalizing so spin 0 is +1.

    A configuration and its global flip map to the same index.
    """
    s = np.asarray(s)
    if s.ndim != 1 or s.shape[0] < 1:
        raise ValueError("spin vector must be 1-d and non-empty")
    canon = s * s[0]
    bits = (canon[1:] < 0).astype(np.int64)
    return int(bits @ (1 << np.arange(s.shape[0] - 1, dtype=np.int64)))


@dataclass(frozen=True)
class EnergyHistogram:
    """Counts of spin configurations per Ising energy H."""

    n: int
    full_count: bool
    bins: tuple[tuple[float, int], ...]  # (H, count), ascending H

    def total(self) -> int:
        return sum(c for _, c in self.bins)

    def as_dict(self) -> dict[float, int]:
        return dict(self.bins)

    def min_energy(self) -> float:
        return self.bins[0][0]


@dataclass(frozen=True)
class GroundStates:
    """Minimum-energy census of the landscape.

    `n_classes` counts symmetry classes at the minimum; `total` is the
    full count including mirror images (= 2 * n_classes);
    `representatives` holds up to the requested cap of explicit
    configurations (smallest config indices, spin 0 = +1).
    """

    h_min: float
    n_classes: int
    total: int
    representatives: tuple[np.ndarray, ...]


def _hist_blocks(w: CouplingMatrix, cap: int, threads: int | None):
    total = num_configs(w.n)
    blocks = iter_blocks(0, total, HIST_BLOCK)
    return map_blocks(
        lambda lo, hi: _kernels.hist_range(w.w, lo, hi, cap), blocks, threads
    )


def enumerate_energies(
    w: CouplingMatrix, full_count: bool = False, *, threads: int | None = None
) -> EnergyHistogram:
    """Histogram H over all 2^(n-1) symmetry classes.

    With full_count, every class count is doubled to cover both mirror
    images (2^n configurations).
    """
    check_enum_cap(w.n)
    merged: dict[int, int] = {}
    for keys, counts, *_ in _hist_blocks(w, 0, threads):
        for k, c in zip(keys.tolist(), counts.tolist()):
            merged[k] = merged.get(k, 0) + c
    factor = 2 if full_count else 1
    bins = tuple(
        (key_energy(k), merged[k] * factor) for k in sorted(merged)
    )
    return EnergyHistogram(n=w.n, full_count=full_count, bins=bins)


def ground_states(
    w: CouplingMatrix, cap: int = 32, *, threads: int | None = None
) -> GroundStates:
    """Exact minimum H with its census and explicit representatives."""
    check_enum_cap(w.n)
    if cap < 0:
        raise ValueError("cap must be >= 0")
    best_key = None
    best_h = 0.0
    count = 0
    rep_idx: list[int] = []
    for _, _, min_key, min_h, min_count, reps in _hist_blocks(w, cap, threads):
        if best_key is None or min_key < best_key:
            best_key = min_key
            best_h = min_h
            count = min_count
            rep_idx = list(reps.tolist())
        elif min_key == best_key:
            best_h = min(best_h, min_h)
            count += min_count
            rep_idx.extend(reps.tolist())
    rep_idx = sorted(rep_idx)[:cap]
    reps = tuple(index_to_config(i, w.n) for i in rep_idx)
    return GroundStates(
        h_min=best_h, n_classes=count, total=2 * count, representatives=reps
    )


def verify_enumeration(w: CouplingMatrix) -> bool:
    """Check the incremental Gray walk against naive recomputation.

    True iff the incrementally updated energy equals a direct
    evaluation for every configuration (exact for integer weights;
    within the 1e-9 binning resolution otherwise).
    """
    if w.n > VERIFY_CAP:
        raise CapError(
            f"enumeration self-check is capped at n <= {VERIFY_CAP}, got n = {w.n}"
        )
    idx, h_inc = _kernels.gray_energies(w.w, 0, num_configs(w.n))
    h_ref = direct_energies(w.w, decode_spins(idx, w.n))
    if np.all(w.w == np.round(w.w)):
        return bool(np.array_equal(h_inc, h_ref))
    return bool(np.all(np.abs(h_inc - h_ref) <= 1e-9))


def format_energy(h: float) -> str:
    """Energies print as exact integers when possible, else 12 digits."""
    if h == int(h):
        return str(int(h))
    return f"{h:.12g}"


def write_histogram_csv(hist: EnergyHistogram, path) -> None:
    """`H,count` rows, ascending H."""
    with open(path, "w", newline="") as f:
        f.write("H,count\n")
        for h, c in hist.bins:
            f.write(f"{format_energy(h)},{c}\n")


