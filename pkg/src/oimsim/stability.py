"""Linear stability of binarized phase configurations.

The Jacobian of the phase dynamics at a binarized state factors as
J(K, K_s) = K*B - 2*K_s*I, where B is the K=1, K_s=0 Jacobian of the
spin image. Its eigenvalues ("Lyapunov exponents" in the operating
convention of this toolkit; beta below) therefore shift affinely:
lambda_i = K*beta_i - 2*K_s. One eigensolve per configuration covers the
whole (K, K_s) plane, which is what makes exhaustive sweeps tractable.

B always annihilates the all-ones vector, so 0 is in every base
spectrum and beta_1 >= 0: the critical injection strength
K_s* = K*beta_1/2 is never negative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import _kernels
from ._kernels.common import key_energy, quantize
from .enumeration import check_enum_cap, format_energy, index_to_config, num_configs
from .errors import NumericalError
from .model import CouplingMatrix, OimParams, ising_energy, phase_velocity
from .parallel import imap_blocks, iter_blocks, map_blocks

__all__ = [
    "STABILITY_MARGIN",
    "StabilityRecord",
    "EnergyLevelStats",
    "jacobian",
    "jacobian_binarized",
    "symmetric_eigenvalues",
    "base_spectrum",
    "largest_lyapunov",
    "critical_ks",
    "is_stable_lambda",
    "base_beta1_all",
    "stability_sweep",
    "energy_level_stats",
    "is_equilibrium",
    "write_sweep_csv",
    "write_levels_csv",
]

# |lambda_L| at or below this counts as marginal and is classified unstable.
STABILITY_MARGIN = 1e-9

EIG_BLOCK = 1 << 12


@dataclass(frozen=True)
class StabilityRecord:
    """Stability of one binarized configuration at fixed (K, K_s)."""

    config: int
    h: float
    lambda_l: float
    stable: bool


@dataclass(frozen=True)
class EnergyLevelStats:
    """Extreme lambda_L over all configurations at one energy level."""

    h: float
    count: int
    lambda_min: float
    lambda_max: float
    n_stable: int


def is_stable_lambda(lambda_l: float) -> bool:
    """Strictly negative beyond the marginal band."""
    return lambda_l < -STABILITY_MARGIN


def _as_phases(th, n):
    th = np.asarray(th, dtype=np.float64)
    if th.shape != (n,):
        raise ValueError(f"phase vector has shape {th.shape}, expected ({n},)")
    return th


def _as_spins(s, n):
    s = np.asarray(s, dtype=np.float64)
    if s.shape != (n,):
        raise ValueError(f"spin vector has shape {s.shape}, expected ({n},)")
    return s


def jacobian(w: CouplingMatrix, p: OimParams, th) -> np.ndarray:
    """Jacobian of the phase velocity field at theta.

    Off-diagonal: +K W_ik cos(theta_i - theta_k); diagonal:
    -K sum_j W_ij cos(theta_i - theta_j) - 2 K_s cos(2 theta_i).
    Equals -(1/2) x the Hessian of the energy function.
    """
    th = _as_phases(th, w.n)
    m = p.k * w.w * np.cos(th[:, None] - th[None, :])
    d = -m.sum(axis=1) - 2.0 * p.ks * np.cos(2.0 * th)
    np.fill_diagonal(m, d)
    return m


def jacobian_binarized(w: CouplingMatrix, p: OimParams, s) -> np.ndarray:
    """Jacobian at the binarized state with spin image s."""
    s = _as_spins(s, w.n)
    field = w.w @ s
    m = p.k * w.w * np.outer(s, s)
    np.fill_diagonal(m, -p.k * s * field - 2.0 * p.ks)
    return m


def symmetric_eigenvalues(j: np.ndarray, asym_tol: float = 1e-10) -> np.ndarray:
    """All eigenvalues of a symmetric matrix, descending.

    The matrix is symmetrized by averaging before the solve; asymmetry
    beyond asym_tol (relative to max(1, ||J||_inf)) or non-finite
    entries raise NumericalError.
    """
    j = np.asarray(j, dtype=np.float64)
    if j.ndim != 2 or j.shape[0] != j.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {j.shape}")
    if not np.all(np.isfinite(j)):
        raise NumericalError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(j))))
    asym = float(np.max(np.abs(j - j.T)))
    if asym > asym_tol * scale:
        raise NumericalError(
            f"matrix asymmetry {asym:.3e} exceeds tolerance {asym_tol:.1e}"
        )
    sym = 0.5 * (j + j.T)
    return np.linalg.eigvalsh(sym)[::-1].copy()


def base_spectrum(w: CouplingMatrix, s) -> np.ndarray:
    """Eigenvalues (descending) of the K=1, K_s=0 binarized Jacobian.

    The spectrum at any (K, K_s) is {K*beta_i - 2*K_s}.
    """
    return symmetric_eigenvalues(jacobian_binarized(w, OimParams(k=1.0), s))


def largest_lyapunov(w: CouplingMatrix, p: OimParams, s) -> float:
    """lambda_L = K*beta_1 - 2*K_s for the binarized configuration s."""
    beta1 = float(base_spectrum(w, s)[0])
    return p.k * beta1 - 2.0 * p.ks


def critical_ks(w: CouplingMatrix, s, k: float) -> float:
    """Injection strength where lambda_L crosses zero: K_s* = K*beta_1/2."""
    if k <= 0:
        raise ValueError(f"k must be > 0, got {k}")
    return k * float(base_spectrum(w, s)[0]) / 2.0


def is_equilibrium(w: CouplingMatrix, p: OimParams, th, tol: float) -> bool:
    """True iff the velocity field vanishes: ||f||_inf <= tol."""
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    return float(np.max(np.abs(phase_velocity(w, p, th)))) <= tol


def base_beta1_all(
    w: CouplingMatrix, *, threads: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """(H, beta_1) for every config index, one eigensolve per config.

    This is the exhaustive-sweep workhorse; results are index-aligned
    arrays of length 2^(n-1).
    """
    check_enum_cap(w.n)
    parts = map_blocks(
        lambda lo, hi: _kernels.beta1_block(w.w, lo, hi),
        iter_blocks(0, num_configs(w.n), EIG_BLOCK),
        threads,
    )
    h = np.concatenate([p[0] for p in parts])
    beta1 = np.concatenate([p[1] for p in parts])
    return h, beta1


def _beta1_for_configs(w: CouplingMatrix, configs: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    h = np.empty(len(configs))
    beta1 = np.empty(len(configs))
    for i, c in enumerate(configs):
        s = index_to_config(int(c), w.n)
        h[i] = ising_energy(w, s)
        beta1[i] = float(base_spectrum(w, s)[0])
    return h, beta1


def stability_sweep(
    w: CouplingMatrix,
    k: float,
    ks_values: Sequence[float],
    configs: Iterable[int] | None = None,
    *,
    threads: int | None = None,
) -> Iterator[tuple[int, float, float, float]]:
    """Yield (config_index, H, ks, lambda_L) rows, ordered by (config, ks).

    configs=None sweeps every configuration exhaustively (one base
    eigensolve each; the K_s grid rides on the affine shift).
    """
    if k <= 0:
        raise ValueError(f"k must be > 0, got {k}")
    ks_values = [float(x) for x in ks_values]
    if not ks_values:
        raise ValueError("empty K_s grid")
    if configs is None:
        check_enum_cap(w.n)
        blocks = list(iter_blocks(0, num_configs(w.n), EIG_BLOCK))
        parts = imap_blocks(
            lambda lo, hi: _kernels.beta1_block(w.w, lo, hi), blocks, threads
        )
        for (lo, hi), (h_arr, b_arr) in zip(blocks, parts):
            for j in range(hi - lo):
                h = float(h_arr[j])
                kb = k * float(b_arr[j])
                for ks in ks_values:
                    yield lo + j, h, ks, kb - 2.0 * ks
    else:
        idxs = sorted(int(c) for c in configs)
        h_arr, b_arr = _beta1_for_configs(w, idxs)
        for j, c in enumerate(idxs):
            kb = k * float(b_arr[j])
            for ks in ks_values:
                yield c, float(h_arr[j]), ks, kb - 2.0 * ks


def energy_level_stats(
    w: CouplingMatrix, k: float, ks: float, *, threads: int | None = None
) -> list[EnergyLevelStats]:
    """Per-energy-level extremes of lambda_L over the full landscape.

    Exact pass over all 2^(n-1) representatives; aggregation is
    streaming min/max/count per level, merged across blocks without
    reassociating any floating-point values.
    """
    if k <= 0:
        raise ValueError(f"k must be > 0, got {k}")
    check_enum_cap(w.n)
    # lambda < -margin  <=>  beta1 < (2*ks - margin) / k
    beta_thresh = (2.0 * ks - STABILITY_MARGIN) / k

    def block_stats(lo, hi):
        h_arr, b_arr = _kernels.beta1_block(w.w, lo, hi)
        keys = quantize(h_arr)
        order = np.argsort(keys, kind="stable")
        keys = keys[order]
        b_sorted = b_arr[order]
        ukeys, starts = np.unique(keys, return_index=True)
        out = {}
        for i, key in enumerate(ukeys.tolist()):
            seg = b_sorted[starts[i]: starts[i + 1] if i + 1 < len(starts) else None]
            out[key] = (
                seg.shape[0],
                float(seg.min()),
                float(seg.max()),
                int(np.count_nonzero(seg < beta_thresh)),
            )
        return out

    merged: dict[int, tuple[int, float, float, int]] = {}
    for part in map_blocks(
        block_stats, iter_blocks(0, num_configs(w.n), EIG_BLOCK), threads
    ):
        for key, (cnt, bmin, bmax, nst) in part.items():
            if key in merged:
                c0, mn, mx, ns = merged[key]
                merged[key] = (c0 + cnt, min(mn, bmin), max(mx, bmax), ns + nst)
            else:
                merged[key] = (cnt, bmin, bmax, nst)

    out = []
    for key in sorted(merged):
        cnt, bmin, bmax, nst = merged[key]
        out.append(
            EnergyLevelStats(
                h=key_energy(key),
                count=cnt,
                lambda_min=k * bmin - 2.0 * ks,
                lambda_max=k * bmax - 2.0 * ks,
                n_stable=nst,
            )
        )
    return out


def format_eig(x: float) -> str:
    return f"{x:.12g}"


def write_sweep_csv(rows, path) -> None:
    """`config_index,H,ks,lambda_L` rows in the given order."""
    with open(path, "w", newline="") as f:
        f.write("config_index,H,ks,lambda_L\n")
        for config, h, ks, lam in rows:
            f.write(
                f"{config},{format_energy(h)},{format_eig(ks)},{format_eig(lam)}\n"
            )


def write_levels_csv(levels: Sequence[EnergyLevelStats], path) -> None:
    """`H,count,lambda_min,lambda_max,n_stable` rows, ascending H."""
    with open(path, "w", newline="") as f:
        f.write("H,count,lambda_min,lambda_max,n_stable\n")
        for lv in levels:
            f.write(
                f"{format_energy(lv.h)},{lv.count},{format_eig(lv.lambda_min)},"
                f"{format_eig(lv.lambda_max)},{lv.n_stable}\n"
            )
