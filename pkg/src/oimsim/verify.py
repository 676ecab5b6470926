"""Self-check oracle suite behind the `verify` CLI command.

Every check pits an implementation against an independent route:
incremental enumeration vs naive recomputation, analytic
velocity/Jacobian vs central finite differences of the energy, the
affine spectral-shift law vs directly assembled Jacobians, and the
gradient-flow energy monotonicity along integrated trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import SimConfig, energy_trace, integrate
from .enumeration import VERIFY_CAP, index_to_config, num_configs, verify_enumeration
from .model import (
    CouplingMatrix,
    Graph,
    OimParams,
    coupling_from_graph,
    generate_random_graph,
    lyapunov_energy,
    phase_velocity,
)
from .stability import jacobian, jacobian_binarized, symmetric_eigenvalues

__all__ = [
    "CheckResult",
    "finite_difference_gradient",
    "finite_difference_hessian",
    "run_checks",
]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def finite_difference_gradient(fn, x, step: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=np.float64)
    g = np.empty_like(x)
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = step
        g[i] = (fn(x + e) - fn(x - e)) / (2.0 * step)
    return g


def finite_difference_hessian(fn, x, step: float = 1e-4) -> np.ndarray:
    """Central-difference Hessian of a scalar function."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    h = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i] = step
            ej[j] = step
            h[i, j] = (
                fn(x + ei + ej) - fn(x + ei - ej) - fn(x - ei + ej) + fn(x - ei - ej)
            ) / (4.0 * step * step)
    return h


def _triangle() -> Graph:
    return Graph(3, ((0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)))


def _builtin_graphs() -> list[tuple[str, Graph]]:
    return [
        ("edge", Graph(2, ((0, 1, 1.0),))),
        ("triangle", _triangle()),
        ("random-8-16", generate_random_graph(8, 16, seed=3)),
    ]


def _check_enumeration(name: str, w: CouplingMatrix) -> CheckResult:
    if w.n > VERIFY_CAP:
        return CheckResult(
            f"enumeration[{name}]", True, f"skipped (n = {w.n} > {VERIFY_CAP})"
        )
    ok = verify_enumeration(w)
    return CheckResult(
        f"enumeration[{name}]", ok, "incremental == naive" if ok else "MISMATCH"
    )


def _check_gradient(name: str, w: CouplingMatrix, rng) -> CheckResult:
    p = OimParams(k=1.0, ks=0.7)
    worst = 0.0
    for _ in range(5):
        th = rng.uniform(0.0, 2.0 * np.pi, w.n)
        f = phase_velocity(w, p, th)
        g = finite_difference_gradient(lambda x: lyapunov_energy(w, p, x), th)
        err = np.max(np.abs(f + 0.5 * g)) / max(1.0, np.max(np.abs(f)))
        worst = max(worst, float(err))
    ok = worst <= 1e-6
    return CheckResult(
        f"gradient[{name}]", ok, f"max rel err {worst:.2e} (tol 1e-06)"
    )


def _check_hessian(name: str, w: CouplingMatrix, rng) -> CheckResult:
    p = OimParams(k=1.0, ks=0.7)
    worst = 0.0
    for _ in range(3):
        th = rng.uniform(0.0, 2.0 * np.pi, w.n)
        j = jacobian(w, p, th)
        hess = finite_difference_hessian(lambda x: lyapunov_energy(w, p, x), th)
        scale = max(1.0, float(np.max(np.abs(j))))
        err = float(np.max(np.abs(j + 0.5 * hess))) / scale
        worst = max(worst, err)
    ok = worst <= 1e-5
    return CheckResult(f"hessian[{name}]", ok, f"max rel err {worst:.2e} (tol 1e-05)")


def _check_spectral_shift(name: str, w: CouplingMatrix, rng) -> CheckResult:
    worst = 0.0
    worst_ones = 0.0
    n_cfg = min(8, num_configs(w.n))
    cfgs = rng.choice(num_configs(w.n), size=n_cfg, replace=False)
    for c in cfgs:
        s = index_to_config(int(c), w.n)
        base = symmetric_eigenvalues(jacobian_binarized(w, OimParams(k=1.0), s))
        for k in (0.5, 1.0, 2.0):
            for ks in (0.0, 0.3, 1.1):
                p = OimParams(k=k, ks=ks)
                jb = jacobian_binarized(w, p, s)
                direct = symmetric_eigenvalues(jb)
                shifted = k * base - 2.0 * ks
                worst = max(worst, float(np.max(np.abs(direct - shifted))))
                ones = jb @ np.ones(w.n) + 2.0 * ks
                worst_ones = max(worst_ones, float(np.max(np.abs(ones))))
    ok = worst <= 1e-9 and worst_ones <= 1e-12
    return CheckResult(
        f"spectral-shift[{name}]",
        ok,
        f"max shift err {worst:.2e} (tol 1e-09), ones err {worst_ones:.2e} (tol 1e-12)",
    )


def _check_dissipation(name: str, w: CouplingMatrix, rng) -> CheckResult:
    p = OimParams(k=1.0, ks=0.8)
    sim = SimConfig(dt=0.01, t_max=20.0, record_stride=5)
    worst = 0.0
    for _ in range(3):
        th0 = rng.uniform(0.0, 2.0 * np.pi, w.n)
        rep = energy_trace(integrate(w, p, th0, sim))
        worst = max(worst, rep.max_increase / rep.scale)
        if not rep.passed:
            return CheckResult(
                f"dissipation[{name}]", False, f"energy increased by {rep.max_increase:.2e}"
            )
    return CheckResult(
        f"dissipation[{name}]", True, f"max scaled increase {worst:.2e} (tol 1e-08)"
    )


def run_checks(graph: Graph | None = None) -> list[CheckResult]:
    """Run the oracle suite on a graph (or the built-in set if None)."""
    targets = [("input", graph)] if graph is not None else _builtin_graphs()
    results: list[CheckResult] = []
    for name, g in targets:
        w = coupling_from_graph(g)
        rng = np.random.default_rng(20240 + g.n)
        results.append(_check_enumeration(name, w))
        results.append(_check_gradient(name, w, rng))
        results.append(_check_hessian(name, w, rng))
        results.append(_check_spectral_shift(name, w, rng))
        results.append(_check_dissipation(name, w, rng))
    return results
