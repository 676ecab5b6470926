#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Times the two hot paths on seeded random graphs and checks that the
backends agree while at it:

  hist   -- Gray-walk energy histogram over all 2^(n-1) configurations
  beta1  -- per-configuration binarized-Jacobian eigensolve sweep

Usage: python benchmarks/bench_kernels.py [--max-n 20]
"""

import argparse
import time

import numpy as np

from oimsim import coupling_from_graph, generate_random_graph
from oimsim._kernels import get_backend, has_native
from oimsim.enumeration import num_configs


def time_call(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return time.perf_counter() - t0, out


def bench_hist(backend, w, total):
    return backend.hist_range(w, 0, total, 8)


def bench_beta1(backend, w, total, block=4096):
    hs, bs = [], []
    for lo in range(0, total, block):
        h, b = backend.beta1_block(w, lo, min(lo + block, total))
        hs.append(h)
        bs.append(b)
    return np.concatenate(hs), np.concatenate(bs)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-n", type=int, default=20,
                    help="largest node count for the histogram kernel")
    ap.add_argument("--max-n-eig", type=int, default=18,
                    help="largest node count for the eigensolve kernel")
    args = ap.parse_args()

    py = get_backend("python")
    na = get_backend("native") if has_native() else None
    if na is None:
        print("native kernels not built; timing the python backend only")

    rows = []
    for kernel, sizes, runner in (
        ("hist", [14, 17, args.max_n], bench_hist),
        ("beta1", [12, 15, args.max_n_eig], bench_beta1),
    ):
        for n in sorted(set(sizes)):
            m = min(n * (n - 1) // 2, 8 * n)
            w = coupling_from_graph(generate_random_graph(n, m, seed=2)).w
            total = num_configs(n)
            t_py, out_py = time_call(runner, py, w, total)
            if na is not None:
                t_na, out_na = time_call(runner, na, w, total)
                if kernel == "hist":
                    assert np.array_equal(out_py[0], out_na[0])
                    assert np.array_equal(out_py[1], out_na[1])
                else:
                    assert np.array_equal(out_py[0], out_na[0])
                    assert float(np.max(np.abs(out_py[1] - out_na[1]))) < 1e-9
            else:
                t_na = float("nan")
            rows.append((kernel, n, total, t_na, t_py))

    print(f"{'kernel':<7} {'n':>3} {'configs':>9} {'native[s]':>10} "
          f"{'python[s]':>10} {'native/python':>14}")
    for kernel, n, total, t_na, t_py in rows:
        ratio = f"{t_na / t_py:14.2f}" if t_na == t_na else " " * 14
        na_s = f"{t_na:10.3f}" if t_na == t_na else "         -"
        print(f"{kernel:<7} {n:>3} {total:>9} {na_s} {t_py:>10.3f} {ratio}")


if __name__ == "__main__":
    main()
