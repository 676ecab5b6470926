"""Command-line interface.

Subcommands: gen, enumerate, stability, levels, critical-ks, trace,
simulate, verify. Every command is deterministic given its flags;
--threads only changes wall time, never output bytes.

Exit codes: 0 success, 1 usage error, 2 input error, 3 numerical
failure, 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__, _kernels
from ._kernels.common import energy_key
from .dynamics import SimConfig, integrate, readout, write_trace_csv
from .enumeration import (
    config_to_index,
    enumerate_energies,
    format_energy,
    ground_states,
    index_to_config,
    num_configs,
    write_histogram_csv,
)
from .errors import CapError, GraphFormatError, NumericalError
from .experiments import (
    build_metadata,
    graph_file_provenance,
    ks_campaign,
    trial_rng,
    write_report,
)
from .model import (
    OimParams,
    coupling_from_graph,
    generate_random_graph,
    ising_energy,
    load_graph,
    maxcut_from_energy,
    write_graph,
)
from .parallel import iter_blocks
from .stability import (
    EIG_BLOCK,
    base_spectrum,
    energy_level_stats,
    format_eig,
    largest_lyapunov,
    stability_sweep,
    write_levels_csv,
    write_sweep_csv,
)
from .verify import run_checks

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_VERIFY = 4

# Decoding every ground representative explicitly stops making sense
# somewhere; refuse beyond this many classes.
GROUND_LIST_CAP = 1 << 20


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse, but usage problems exit with code 1."""

    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_graph(path):
    with open(path) as f:
        return load_graph(f)


def _positive(kind, name, value):
    if not value > 0:
        raise UsageError(f"{name} must be > 0, got {value}")
    return kind(value)


def _nonnegative(kind, name, value):
    if value < 0:
        raise UsageError(f"{name} must be >= 0, got {value}")
    return kind(value)


def _ks_grid(lo: float, hi: float, step: float) -> list[float]:
    if lo > hi:
        raise UsageError(f"empty K_s grid: --ks-min {lo} > --ks-max {hi}")
    if lo == hi:
        return [lo]
    if step <= 0:
        raise UsageError(f"--ks-step must be > 0, got {step}")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + i * step for i in range(count)]


def _ground_config_indices(w, threads):
    gs = ground_states(w, cap=GROUND_LIST_CAP, threads=threads)
    if gs.n_classes > GROUND_LIST_CAP:
        raise CapError(
            f"{gs.n_classes} ground classes exceed the listing cap {GROUND_LIST_CAP}"
        )
    return gs, [config_to_index(s) for s in gs.representatives]


def cmd_gen(args) -> int:
    n = _positive(int, "--nodes", args.nodes)
    m = _nonnegative(int, "--edges", args.edges)
    if m > n * (n - 1) // 2:
        raise UsageError(
            f"--edges {m} exceeds maximum {n * (n - 1) // 2} for {n} nodes"
        )
    g = generate_random_graph(n, m, args.seed)
    write_graph(g, args.out)
    density = m / (n * (n - 1) / 2) if n > 1 else 0.0
    print(f"wrote {args.out}: n={g.n} m={g.m}")
    print(f"total weight = {format_energy(g.total_weight())}")
    print(f"density = {density:.6g}")
    return EXIT_OK


def cmd_enumerate(args) -> int:
    g = _read_graph(args.graph)
    w = coupling_from_graph(g)
    hist = enumerate_energies(w, full_count=args.full_count, threads=args.threads)
    write_histogram_csv(hist, args.out)
    gs = ground_states(w, cap=0, threads=args.threads)
    print(f"min H = {format_energy(gs.h_min)}")
    print(f"ground states: {gs.n_classes} classes, {gs.total} including mirrors")
    print(f"maxcut = {format_energy(maxcut_from_energy(g, gs.h_min))}")
    return EXIT_OK


def cmd_stability(args) -> int:
    g = _read_graph(args.graph)
    w = coupling_from_graph(g)
    k = _positive(float, "--k", args.k)
    grid = _ks_grid(args.ks_min, args.ks_max, args.ks_step)
    if args.ground_only:
        _, configs = _ground_config_indices(w, args.threads)
        rows = stability_sweep(w, k, grid, configs, threads=args.threads)
    else:
        rows = stability_sweep(w, k, grid, threads=args.threads)
    count = _write_sweep_streaming(rows, args.out)
    print(f"wrote {count} rows to {args.out}")
    return EXIT_OK


def _write_sweep_streaming(rows, path) -> int:
    count = 0
    with open(path, "w", newline="") as f:
        f.write("config_index,H,ks,lambda_L\n")
        for config, h, ks, lam in rows:
            f.write(
                f"{config},{format_energy(h)},{format_eig(ks)},{format_eig(lam)}\n"
            )
            count += 1
    return count


def cmd_levels(args) -> int:
    g = _read_graph(args.graph)
    w = coupling_from_graph(g)
    k = _positive(float, "--k", args.k)
    ks = _nonnegative(float, "--ks", args.ks)
    levels = energy_level_stats(w, k, ks, threads=args.threads)
    write_levels_csv(levels, args.out)
    print(f"wrote {len(levels)} levels to {args.out}")
    return EXIT_OK


def cmd_critical_ks(args) -> int:
    g = _read_graph(args.graph)
    w = coupling_from_graph(g)
    k = _positive(float, "--k", args.k)
    gs = ground_states(w, cap=0, threads=args.threads)
    hmin_key = energy_key(gs.h_min)
    crit_min = crit_max = None

    with open(args.out, "w", newline="") as f:
        f.write("config_index,H,ks_critical\n")
        if args.ground_only:
            _, configs = _ground_config_indices(w, args.threads)
            for c in configs:
                s = index_to_config(c, w.n)
                h = ising_energy(w, s)
                crit = k * float(base_spectrum(w, s)[0]) / 2.0
                f.write(f"{c},{format_energy(h)},{format_eig(crit)}\n")
                crit_min = crit if crit_min is None else min(crit_min, crit)
                crit_max = crit if crit_max is None else max(crit_max, crit)
        else:
            for lo, hi in iter_blocks(0, num_configs(w.n), EIG_BLOCK):
                h_arr, b_arr = _kernels.beta1_block(w.w, lo, hi)
                crit_arr = (k / 2.0) * b_arr
                for j in range(hi - lo):
                    h = float(h_arr[j])
                    crit = float(crit_arr[j])
                    f.write(
                        f"{lo + j},{format_energy(h)},{format_eig(crit)}\n"
                    )
                    if energy_key(h) == hmin_key:
                        crit_min = crit if crit_min is None else min(crit_min, crit)
                        crit_max = crit if crit_max is None else max(crit_max, crit)
    print(
        f"ground critical K_s: min = {format_eig(crit_min)}, "
        f"max = {format_eig(crit_max)}"
    )
    return EXIT_OK


def cmd_trace(args) -> int:
    g = _read_graph(args.graph)
    w = coupling_from_graph(g)
    p = OimParams(
        k=_positive(float, "--k", args.k),
        ks=_nonnegative(float, "--ks", args.ks),
        kn=_nonnegative(float, "--kn", args.kn),
    )
    sim = SimConfig()
    rng = trial_rng(args.seed, 0)
    th0 = rng.uniform(0.0, 2.0 * np.pi, w.n)
    traj = integrate(w, p, th0, sim, rng if p.kn > 0 else None)
    ro = readout(traj.final_state)
    footer: dict = {
        "binarized": ro.binarized,
        "worst_deviation": ro.worst_deviation,
        "steps": traj.steps,
    }
    if ro.binarized:
        footer["H"] = ising_energy(w, ro.spins)
        footer["lambda_L"] = largest_lyapunov(w, p, ro.spins)
    write_trace_csv(traj, args.out, footer=footer)
    print(json.dumps(footer, sort_keys=True))
    return EXIT_OK


def _parse_ks_list(text: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok != ""]
    except ValueError:
        raise UsageError(f"bad --ks list {text!r}") from None
    if not values:
        raise UsageError("empty --ks list")
    if any(v < 0 for v in values):
        raise UsageError("--ks values must be >= 0")
    return values


def cmd_simulate(args) -> int:
    import os

    g = _read_graph(args.graph)
    w = coupling_from_graph(g)
    k = _positive(float, "--k", args.k)
    kn = _nonnegative(float, "--kn", args.kn)
    trials = _positive(int, "--trials", args.trials)
    ks_values = _parse_ks_list(args.ks)
    sim = SimConfig()
    results = ks_campaign(
        w, k, ks_values, kn, sim, trials, args.seed, threads=args.threads
    )
    metadata = build_metadata(graph_file_provenance(args.graph))
    os.makedirs(args.out, exist_ok=True)
    for ks, result in zip(ks_values, results):
        sub = os.path.join(args.out, f"ks_{ks:g}")
        write_report(result, sub, metadata=metadata)
        hist = " ".join(
            f"{format_energy(h)}:{c}" for h, c in result.histogram
        )
        print(
            f"ks={ks:g}: success_rate={result.success_rate:g} "
            f"n_nonbinarized={result.n_nonbinarized} histogram: {hist or '(empty)'}"
        )
    return EXIT_OK


def cmd_verify(args) -> int:
    graph = _read_graph(args.graph) if args.graph else None
    results = run_checks(graph)
    failed = [r for r in results if not r.passed]
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    if failed:
        print(f"{len(failed)} check(s) failed, first: {failed[0].name}")
        return EXIT_VERIFY
    print(f"all {len(results)} checks passed")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="oimsim", description=__doc__)
    parser.add_argument("--version", action="version", version=f"oimsim {__version__}")
    common = _Parser(add_help=False)
    common.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker threads for exhaustive sweeps (default: all cores); "
        "never changes output bytes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate a random graph file")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--edges", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser(
        "enumerate", parents=[common], help="exhaustive energy histogram"
    )
    p.add_argument("graph")
    p.add_argument("--out", required=True)
    p.add_argument("--full-count", action="store_true")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser(
        "stability", parents=[common], help="lambda_L over a K_s grid"
    )
    p.add_argument("graph")
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--ks-min", type=float, required=True)
    p.add_argument("--ks-max", type=float, required=True)
    p.add_argument("--ks-step", type=float, required=True)
    p.add_argument("--ground-only", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser(
        "levels", parents=[common], help="per-energy-level lambda_L extremes"
    )
    p.add_argument("graph")
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--ks", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_levels)

    p = sub.add_parser(
        "critical-ks", parents=[common], help="zero-crossing K_s per configuration"
    )
    p.add_argument("graph")
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--ground-only", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_critical_ks)

    p = sub.add_parser("trace", parents=[common], help="single trajectory")
    p.add_argument("graph")
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--ks", type=float, required=True)
    p.add_argument("--kn", type=float, default=0.005)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser(
        "simulate", parents=[common], help="multi-trial campaign per K_s"
    )
    p.add_argument("graph")
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--ks", required=True, help="comma-separated K_s values")
    p.add_argument("--kn", type=float, default=0.005)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", parents=[common], help="run the oracle self-checks")
    p.add_argument("graph", nargs="?", default=None)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"oimsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GraphFormatError, CapError) as exc:
        print(f"oimsim: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"oimsim: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        print(f"oimsim: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
