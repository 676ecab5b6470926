"""Reproducible multi-trial campaigns and result persistence.

Trial i of a campaign draws everything (initial phases, then noise)
from the PCG64 stream seeded with SeedSequence([master_seed, i]), so
campaigns at different K_s with the same master seed are paired: trial
i starts from the identical initial condition and sees the identical
noise sequence. Aggregation is per-trial-index and order-independent.

Noisy trials are read out post hoc: the final state gets a short
noiseless settle (SETTLE_TIME time units) to strip the jitter before
binarization, which does not change basin membership.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import __version__
from . import _kernels
from ._kernels.common import energy_key, key_energy
from .dynamics import (
    DEFAULT_READOUT_TOL,
    SETTLE_TIME,
    SimConfig,
    integrate,
    readout,
)
from .enumeration import (
    ENUM_CAP,
    check_enum_cap,
    format_energy,
    ground_states,
    num_configs,
)
from .errors import IntegrationError
from .model import CouplingMatrix, OimParams, ising_energy, seed_key
from .parallel import iter_blocks, map_blocks, resolve_threads
from .stability import (
    EIG_BLOCK,
    StabilityRecord,
    format_eig,
    is_stable_lambda,
    largest_lyapunov,
)

__all__ = [
    "TrialResult",
    "TrialCampaignResult",
    "StableSetReport",
    "RunMetadata",
    "build_metadata",
    "run_trials",
    "ks_campaign",
    "stable_set_report",
    "write_report",
    "read_report",
    "write_trials_csv",
]


@dataclass(frozen=True)
class TrialResult:
    """Outcome of one trial. h and lambda_l are present iff binarized."""

    trial: int
    seed: int
    converged: bool
    binarized: bool
    spins: np.ndarray | None
    h: float | None
    lambda_l: float | None
    steps: int
    worst_deviation: float
    error: str | None = None


@dataclass(frozen=True)
class TrialCampaignResult:
    """All trials at one (K, K_s, K_n) plus aggregates.

    histogram maps H -> count over binarized trials; success_rate is the
    fraction of all trials that reached the reference minimum energy.
    """

    params: OimParams
    sim: SimConfig
    n_trials: int
    master_seed: int
    readout_tol: float
    trials: tuple[TrialResult, ...]
    histogram: tuple[tuple[float, int], ...]
    n_nonbinarized: int
    n_failed: int
    success_rate: float
    h_min_reference: float | None
    success_reference: str


@dataclass(frozen=True)
class StableSetReport:
    """Stable configurations at (K, K_s), sorted by (H, config index)."""

    k: float
    ks: float
    records: tuple[StabilityRecord, ...]
    total_stable: int
    truncated: bool


@dataclass(frozen=True)
class RunMetadata:
    """Provenance sufficient to bit-reproduce a run (plus optional wall
    clock, which never participates in reproducibility)."""

    tool: str = "oimsim"
    version: str = __version__
    prng: str = "numpy-pcg64"
    normal_method: str = "ziggurat"
    numpy_version: str = np.__version__
    kernel_backend: str = field(default_factory=_kernels.backend_name)
    graph: dict = field(default_factory=lambda: {"source": "unspecified"})
    timestamp: str | None = None

    def as_dict(self) -> dict:
        return asdict(self)


def build_metadata(graph_provenance: dict | None = None, timestamp: str | None = None) -> RunMetadata:
    if graph_provenance is None:
        graph_provenance = {"source": "unspecified"}
    return RunMetadata(graph=graph_provenance, timestamp=timestamp)


def graph_file_provenance(path) -> dict:
    with open(path, "rb") as f:
        digest = hashlib.sha256(f.read()).hexdigest()
    return {"source": "file", "path": str(path), "sha256": digest}


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    """The documented per-trial stream: SeedSequence([master_seed, trial])."""
    return np.random.default_rng([seed_key(master_seed), trial])


def _run_one_trial(
    w: CouplingMatrix,
    p: OimParams,
    sim: SimConfig,
    master_seed: int,
    trial: int,
    readout_tol: float,
) -> TrialResult:
    rng = trial_rng(master_seed, trial)
    th0 = rng.uniform(0.0, 2.0 * np.pi, w.n)
    noisy = p.kn > 0
    steps = 0
    try:
        traj = integrate(w, p, th0, sim, rng if noisy else None)
        steps = traj.steps
        final = traj.final_state
        if noisy:
            settle_sim = SimConfig(
                dt=sim.dt,
                t_max=SETTLE_TIME,
                eq_tol=sim.eq_tol,
                eq_window=sim.eq_window,
                record_stride=1 << 30,
            )
            settle = integrate(w, replace(p, kn=0.0), final, settle_sim, None)
            steps += settle.steps
            final = settle.final_state
        ro = readout(final, readout_tol)
        converged = ro.binarized if noisy else traj.converged
    except IntegrationError as exc:
        partial_steps = exc.step if exc.step is not None else steps
        return TrialResult(
            trial=trial,
            seed=trial,
            converged=False,
            binarized=False,
            spins=None,
            h=None,
            lambda_l=None,
            steps=partial_steps,
            worst_deviation=float("nan"),
            error=str(exc),
        )
    if ro.binarized:
        h = ising_energy(w, ro.spins)
        lam = largest_lyapunov(w, p, ro.spins)
    else:
        h = lam = None
    return TrialResult(
        trial=trial,
        seed=trial,
        converged=bool(converged),
        binarized=ro.binarized,
        spins=ro.spins,
        h=h,
        lambda_l=lam,
        steps=steps,
        worst_deviation=ro.worst_deviation,
    )


def _aggregate(
    w: CouplingMatrix,
    p: OimParams,
    sim: SimConfig,
    n_trials: int,
    master_seed: int,
    readout_tol: float,
    trials: list[TrialResult],
    h_min_ref: float | None,
    reference: str,
) -> TrialCampaignResult:
    hist: dict[int, int] = {}
    n_non = 0
    n_failed = 0
    for t in trials:
        if t.error is not None:
            n_failed += 1
        if t.binarized:
            key = energy_key(t.h)
            hist[key] = hist.get(key, 0) + 1
        else:
            n_non += 1
    if h_min_ref is not None:
        ref_key = energy_key(h_min_ref)
        n_success = sum(
            1 for t in trials if t.binarized and energy_key(t.h) == ref_key
        )
        success = n_success / n_trials
    else:
        success = 0.0
    return TrialCampaignResult(
        params=p,
        sim=sim,
        n_trials=n_trials,
        master_seed=master_seed,
        readout_tol=readout_tol,
        trials=tuple(trials),
        histogram=tuple((key_energy(k), hist[k]) for k in sorted(hist)),
        n_nonbinarized=n_non,
        n_failed=n_failed,
        success_rate=success,
        h_min_reference=h_min_ref,
        success_reference=reference,
    )


def _reference_minimum(
    w: CouplingMatrix, threads: int | None
) -> tuple[float | None, str]:
    if w.n <= ENUM_CAP:
        gs = ground_states(w, cap=0, threads=threads)
        return gs.h_min, "exact-enumeration"
    return None, "best-seen"


def run_trials(
    w: CouplingMatrix,
    p: OimParams,
    sim: SimConfig,
    n_trials: int,
    master_seed: int,
    *,
    readout_tol: float = DEFAULT_READOUT_TOL,
    threads: int | None = None,
    _h_min_ref: float | None = None,
    _reference: str | None = None,
) -> TrialCampaignResult:
    """Run n_trials independent trials and aggregate.

    Success is measured against the exact enumerated minimum when
    feasible (n <= 26), else against the best H seen in this campaign.
    Integration failures are recorded per trial; the campaign continues.
    """
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    if _h_min_ref is None and _reference is None:
        h_min_ref, reference = _reference_minimum(w, threads)
    else:
        h_min_ref, reference = _h_min_ref, _reference

    nthreads = min(resolve_threads(threads), n_trials)
    indices = list(range(n_trials))
    if nthreads <= 1:
        trials = [
            _run_one_trial(w, p, sim, master_seed, i, readout_tol) for i in indices
        ]
    else:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=nthreads) as ex:
            trials = list(
                ex.map(
                    lambda i: _run_one_trial(w, p, sim, master_seed, i, readout_tol),
                    indices,
                )
            )
    if h_min_ref is None:
        seen = [t.h for t in trials if t.binarized]
        h_min_ref = min(seen) if seen else None
    return _aggregate(
        w, p, sim, n_trials, master_seed, readout_tol, trials, h_min_ref, reference
    )


def ks_campaign(
    w: CouplingMatrix,
    k: float,
    ks_values,
    kn: float,
    sim: SimConfig,
    n_trials: int,
    master_seed: int,
    *,
    readout_tol: float = DEFAULT_READOUT_TOL,
    threads: int | None = None,
) -> list[TrialCampaignResult]:
    """One campaign per K_s with shared trial seeds (paired comparisons)."""
    ks_values = [float(x) for x in ks_values]
    if not ks_values:
        raise ValueError("empty K_s list")
    h_min_ref, reference = _reference_minimum(w, threads)
    results = []
    for ks in ks_values:
        p = OimParams(k=k, ks=ks, kn=kn)
        results.append(
            run_trials(
                w,
                p,
                sim,
                n_trials,
                master_seed,
                readout_tol=readout_tol,
                threads=threads,
                _h_min_ref=h_min_ref,
                _reference=reference,
            )
        )
    if h_min_ref is None:
        # best-seen reference is global across the whole campaign
        seen = [
            t.h for r in results for t in r.trials if t.binarized
        ]
        if seen:
            best = min(seen)
            results = [
                _aggregate(
                    w,
                    r.params,
                    r.sim,
                    r.n_trials,
                    r.master_seed,
                    r.readout_tol,
                    list(r.trials),
                    best,
                    reference,
                )
                for r in results
            ]
    return results


def stable_set_report(
    w: CouplingMatrix,
    k: float,
    ks: float,
    cap: int,
    *,
    threads: int | None = None,
) -> StableSetReport:
    """Exhaustive list of stable configurations at (k, ks).

    Sorted by (H, config index) and truncated at cap; the total count is
    always reported, truncation is never silent (see `truncated`).
    """
    if k <= 0:
        raise ValueError(f"k must be > 0, got {k}")
    if cap < 0:
        raise ValueError("cap must be >= 0")
    check_enum_cap(w.n)
    beta_thresh = (2.0 * ks - 1e-9) / k

    def block(lo, hi):
        h_arr, b_arr = _kernels.beta1_block(w.w, lo, hi)
        mask = b_arr < beta_thresh
        idx = np.nonzero(mask)[0]
        return idx + lo, h_arr[mask], k * b_arr[mask] - 2.0 * ks

    parts = map_blocks(block, iter_blocks(0, num_configs(w.n), EIG_BLOCK), threads)
    idx = np.concatenate([p[0] for p in parts])
    h = np.concatenate([p[1] for p in parts])
    lam = np.concatenate([p[2] for p in parts])
    total = int(idx.shape[0])
    order = np.lexsort((idx, h))
    keep = order[:cap]
    records = tuple(
        StabilityRecord(
            config=int(idx[j]),
            h=float(h[j]),
            lambda_l=float(lam[j]),
            stable=True,
        )
        for j in keep
    )
    return StableSetReport(
        k=k, ks=ks, records=records, total_stable=total, truncated=total > cap
    )


def write_trials_csv(result: TrialCampaignResult, path) -> None:
    """`trial,seed,converged,binarized,H,lambda_L,steps` rows.

    H and lambda_L are empty for non-binarized trials.
    """
    with open(path, "w", newline="") as f:
        f.write("trial,seed,converged,binarized,H,lambda_L,steps\n")
        for t in result.trials:
            h = format_energy(t.h) if t.h is not None else ""
            lam = format_eig(t.lambda_l) if t.lambda_l is not None else ""
            f.write(
                f"{t.trial},{t.seed},{_b(t.converged)},{_b(t.binarized)},"
                f"{h},{lam},{t.steps}\n"
            )


def _b(x: bool) -> str:
    return "true" if x else "false"


def _campaign_json(result: TrialCampaignResult, metadata: RunMetadata) -> dict:
    p, sim = result.params, result.sim
    return {
        "metadata": metadata.as_dict(),
        "params": {
            "k": p.k,
            "ks": p.ks,
            "kn": p.kn,
            "dt": sim.dt,
            "t_max": sim.t_max,
            "eq_tol": sim.eq_tol,
            "eq_window": sim.eq_window,
            "record_stride": sim.record_stride,
            "readout_tol": result.readout_tol,
            "n_trials": result.n_trials,
            "master_seed": result.master_seed,
        },
        "success_reference": result.success_reference,
        "h_min_reference": result.h_min_reference,
        "histogram": [[h, c] for h, c in result.histogram],
        "n_nonbinarized": result.n_nonbinarized,
        "n_failed": result.n_failed,
        "success_rate": result.success_rate,
    }


def write_report(
    result: TrialCampaignResult,
    path,
    metadata: RunMetadata | None = None,
) -> None:
    """Persist a campaign: trials.csv plus report.json under `path`.

    The JSON is byte-stable for identical inputs (keys sorted, no wall
    clock unless the caller put one into metadata).
    """
    import os

    os.makedirs(path, exist_ok=True)
    if metadata is None:
        metadata = build_metadata()
    write_trials_csv(result, os.path.join(path, "trials.csv"))
    doc = _campaign_json(result, metadata)
    with open(os.path.join(path, "report.json"), "w", newline="") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def read_report(path) -> dict:
    import os

    with open(os.path.join(path, "report.json")) as f:
        return json.load(f)
