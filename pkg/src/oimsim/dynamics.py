"""Time integration of the phase dynamics.

Deterministic runs use classical RK4 on dtheta/dt = f(theta) and stop
early once ||f||_inf stays below the equilibrium tolerance for a window
of consecutive steps. Noisy runs use Euler-Maruyama with additive,
isotropic Wiener noise scaled by K_n and always run to the horizon:
theta' = theta + f dt + K_n sqrt(dt) xi.

Binarized states (every phase a multiple of pi) are exact equilibria of
the noiseless flow, and the energy function is non-increasing along
deterministic trajectories; `energy_trace` turns that into a checkable
report.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import IntegrationError
from .model import CouplingMatrix, OimParams, lyapunov_energy, phase_velocity

__all__ = [
    "DEFAULT_READOUT_TOL",
    "SETTLE_TIME",
    "SimConfig",
    "Trajectory",
    "ReadoutResult",
    "EnergyTraceReport",
    "step_deterministic",
    "step_sde",
    "integrate",
    "readout",
    "energy_trace",
    "write_trace_csv",
]

DEFAULT_READOUT_TOL = 0.1
# Noiseless post-run settle used to de-jitter noisy trials before readout.
SETTLE_TIME = 10.0

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SimConfig:
    """Integration controls (defaults; override per run as needed)."""

    dt: float = 0.01
    t_max: float = 200.0
    eq_tol: float = 1e-6
    eq_window: int = 10
    record_stride: int = 10

    def __post_init__(self):
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.t_max < self.dt:
            raise ValueError(f"t_max must be >= dt, got {self.t_max}")
        if self.eq_tol <= 0:
            raise ValueError(f"eq_tol must be > 0, got {self.eq_tol}")
        if self.eq_window < 1:
            raise ValueError(f"eq_window must be >= 1, got {self.eq_window}")
        if self.record_stride < 1:
            raise ValueError(f"record_stride must be >= 1, got {self.record_stride}")

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.t_max / self.dt - 1e-12))


@dataclass(frozen=True)
class Trajectory:
    """Recorded samples of one run: strictly increasing times, one phase
    row and one energy per sample. `converged` is the deterministic-mode
    equilibrium flag; `steps` counts integrator steps taken."""

    times: np.ndarray
    states: np.ndarray
    energies: np.ndarray
    steps: int
    converged: bool

    def __post_init__(self):
        if not (len(self.times) == len(self.states) == len(self.energies)):
            raise ValueError("trajectory arrays must have equal lengths")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


@dataclass(frozen=True)
class ReadoutResult:
    """Phase binarization verdict.

    spins is None when some phase sits farther than the tolerance from
    the {0, pi} lattice; worst_deviation is the largest angular distance
    to the lattice either way.
    """

    spins: np.ndarray | None
    worst_deviation: float

    @property
    def binarized(self) -> bool:
        return self.spins is not None


@dataclass(frozen=True)
class EnergyTraceReport:
    """Energy-monotonicity report for a deterministic trajectory."""

    max_increase: float
    scale: float
    passed: bool


def step_deterministic(w: CouplingMatrix, p: OimParams, th, dt: float) -> np.ndarray:
    """One classical RK4 step of the noiseless dynamics."""
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    th = np.asarray(th, dtype=np.float64)
    k1 = phase_velocity(w, p, th)
    k2 = phase_velocity(w, p, th + (0.5 * dt) * k1)
    k3 = phase_velocity(w, p, th + (0.5 * dt) * k2)
    k4 = phase_velocity(w, p, th + dt * k3)
    out = th + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise IntegrationError("non-finite state after deterministic step", step=1)
    return out


def step_sde(w: CouplingMatrix, p: OimParams, th, dt: float, rng) -> np.ndarray:
    """One Euler-Maruyama step with additive noise K_n sqrt(dt) xi.

    xi is a vector of independent standard normals from the supplied
    generator (numpy PCG64, ziggurat normals).
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    th = np.asarray(th, dtype=np.float64)
    drift = phase_velocity(w, p, th) * dt
    noise = (p.kn * math.sqrt(dt)) * rng.standard_normal(th.shape[0])
    out = th + drift + noise
    if not np.all(np.isfinite(out)):
        raise IntegrationError("non-finite state after SDE step", step=1)
    return out


def _make_traj(times, states, energies, steps, converged) -> Trajectory:
    return Trajectory(
        times=np.asarray(times, dtype=np.float64),
        states=np.asarray(states, dtype=np.float64),
        energies=np.asarray(energies, dtype=np.float64),
        steps=steps,
        converged=converged,
    )


def integrate(
    w: CouplingMatrix, p: OimParams, th0, sim: SimConfig, rng=None
) -> Trajectory:
    """Run the dynamics from th0 under sim.

    Stochastic (Euler-Maruyama) iff rng is given and p.kn > 0; otherwise
    deterministic RK4 with early termination after eq_window consecutive
    steps at ||f||_inf <= eq_tol. Samples are recorded every
    record_stride steps, always including the initial and final states.
    On a non-finite state an IntegrationError carrying the partial
    trajectory is raised.
    """
    th = np.array(th0, dtype=np.float64)
    if th.shape != (w.n,):
        raise ValueError(f"initial state has shape {th.shape}, expected ({w.n},)")
    if not np.all(np.isfinite(th)):
        raise ValueError("initial state has non-finite entries")
    noisy = rng is not None and p.kn > 0

    times = [0.0]
    states = [th.copy()]
    energies = [lyapunov_energy(w, p, th)]
    f = phase_velocity(w, p, th)
    if not noisy and float(np.max(np.abs(f))) <= sim.eq_tol:
        return _make_traj(times, states, energies, 0, True)

    dt = sim.dt
    sqrt_dt = math.sqrt(dt)
    window = 0
    converged = False
    steps_taken = 0
    for step in range(1, sim.n_steps + 1):
        if noisy:
            drift = f * dt
            noise = (p.kn * sqrt_dt) * rng.standard_normal(w.n)
            th = th + drift + noise
        else:
            k2 = phase_velocity(w, p, th + (0.5 * dt) * f)
            k3 = phase_velocity(w, p, th + (0.5 * dt) * k2)
            k4 = phase_velocity(w, p, th + dt * k3)
            th = th + (dt / 6.0) * (f + 2.0 * k2 + 2.0 * k3 + k4)
        steps_taken = step
        if not np.all(np.isfinite(th)):
            raise IntegrationError(
                f"non-finite state at step {step} (t = {step * dt:.6g})",
                step=step,
                partial=_make_traj(times, states, energies, step, False),
            )
        f = phase_velocity(w, p, th)
        if not noisy:
            if float(np.max(np.abs(f))) <= sim.eq_tol:
                window += 1
                if window >= sim.eq_window:
                    converged = True
            else:
                window = 0
        last = converged or step == sim.n_steps
        if step % sim.record_stride == 0 or last:
            times.append(step * dt)
            states.append(th.copy())
            energies.append(lyapunov_energy(w, p, th))
        if converged:
            break
    return _make_traj(times, states, energies, steps_taken, converged)


def readout(th, tol: float = DEFAULT_READOUT_TOL) -> ReadoutResult:
    """Classify phases against the {0, pi} lattice (mod 2 pi).

    Spin +1 within tol of 0 (or 2 pi), -1 within tol of pi; if any
    phase misses the lattice the result is non-binarized and reports
    the worst angular deviation.
    """
    if not 0 < tol < math.pi / 4:
        raise ValueError(f"readout tol must be in (0, pi/4), got {tol}")
    th = np.asarray(th, dtype=np.float64)
    m = np.mod(th, TWO_PI)
    k = np.round(m / math.pi)  # nearest lattice multiple: 0, 1, or 2
    dev = np.abs(m - k * math.pi)
    worst = float(dev.max()) if dev.size else 0.0
    if np.all(dev <= tol):
        spins = np.where(k % 2 == 0, 1, -1).astype(np.int8)
        return ReadoutResult(spins=spins, worst_deviation=worst)
    return ReadoutResult(spins=None, worst_deviation=worst)


def energy_trace(traj: Trajectory) -> EnergyTraceReport:
    """Largest single-sample energy increase along a trajectory.

    PASS iff the increase stays within 1e-8 * max(1, |E|); meaningful
    for deterministic runs (noise legitimately breaks monotonicity, the
    report is still produced).
    """
    e = traj.energies
    if len(e) < 2:
        return EnergyTraceReport(max_increase=0.0, scale=1.0, passed=True)
    max_inc = float(np.max(np.diff(e)))
    max_inc = max(max_inc, 0.0)
    scale = max(1.0, float(np.max(np.abs(e))))
    return EnergyTraceReport(
        max_increase=max_inc, scale=scale, passed=max_inc <= 1e-8 * scale
    )


def write_trace_csv(traj: Trajectory, path, footer: dict | None = None) -> None:
    """`t,theta_0,...,theta_{n-1},E` rows; optional '#'-comment JSON footer."""
    n = traj.states.shape[1]
    with open(path, "w", newline="") as f:
        f.write("t," + ",".join(f"theta_{i}" for i in range(n)) + ",E\n")
        for t, th, e in zip(traj.times, traj.states, traj.energies):
            cols = [f"{t:.12g}"] + [f"{x:.12g}" for x in th] + [f"{e:.12g}"]
            f.write(",".join(cols) + "\n")
        if footer is not None:
            f.write("# " + json.dumps(footer, sort_keys=True) + "\n")
