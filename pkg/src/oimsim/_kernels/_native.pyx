# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the exhaustive landscape sweeps.

Two hot loops live here: the Gray-code enumeration walk (incremental
Ising energies via the spin-flip identity) and the per-configuration
eigensolve of the binarized Jacobian (cyclic Jacobi rotations,
eigenvalues only). Both release the GIL so index blocks can run on a
thread pool.

Energy binning matches `common.quantize`: key = llround(H * 1e9).
"""

from cython.operator cimport dereference as deref, preincrement as inc
from libc.math cimport fabs, llround, sqrt
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector

import numpy as np

from ..errors import NumericalError

NAME = "native"

DEF RESEED_STRIDE = 65536
DEF MAX_SWEEPS = 64

ctypedef long long i64
ctypedef signed char spin_t


cdef inline i64 quantize(double h) nogil:
    return llround(h * 1e9)


cdef inline int ctz(i64 x) nogil:
    cdef int c = 0
    while (x & 1) == 0:
        x >>= 1
        c += 1
    return c


cdef void seed_state(const double* w, int n, i64 g,
                     spin_t* s, double* field, double* h) nogil:
    """Direct (non-incremental) spins/field/energy at config index g."""
    cdef int i, j
    cdef double acc, tot = 0.0
    s[0] = 1
    for i in range(1, n):
        s[i] = -1 if (g >> (i - 1)) & 1 else 1
    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc += w[i * n + j] * s[j]
        field[i] = acc
        tot += s[i] * acc
    h[0] = -0.5 * tot


cdef inline void flip_spin(const double* w, int n, int k,
                           spin_t* s, double* field, double* h) nogil:
    """Flip spin k, updating H (dH = 2 s_k field_k) and the field vector."""
    cdef int j
    cdef double d
    h[0] += 2.0 * s[k] * field[k]
    s[k] = -s[k]
    d = 2.0 * s[k]
    for j in range(n):
        field[j] += d * w[j * n + k]


cdef double jacobi_max_eig(double* a, int n, int* fail) nogil:
    """Largest eigenvalue of symmetric a (row-major, destroyed).

    Cyclic-by-row Jacobi rotations; converged when the off-diagonal
    Frobenius norm falls below 1e-12 of the full norm, hard cap
    MAX_SWEEPS sweeps. Off-elements below tol/(4n) are zeroed directly
    (they move eigenvalues far below tolerance and only churn the
    endgame on degenerate clusters). If the cap is hit, the result is
    accepted as long as the remaining off-norm keeps eigenvalues within
    1e-10 * max(1, ||J||_F) (Weyl bound), else the failure is counted.
    """
    cdef int p, q, i, sweep
    cdef bint converged
    cdef double frob, off, tol, zero_tol, app, aqq, apq, theta, t, c, sr, tau
    cdef double aip, aiq, best
    if n == 1:
        return a[0]
    frob = 0.0
    for i in range(n * n):
        frob += a[i] * a[i]
    frob = sqrt(frob)
    if frob > 0.0:
        tol = 1e-12 * frob
        zero_tol = tol / (4.0 * n)
        converged = False
        for sweep in range(MAX_SWEEPS):
            off = 0.0
            for p in range(n - 1):
                for q in range(p + 1, n):
                    off += 2.0 * a[p * n + q] * a[p * n + q]
            if sqrt(off) <= tol:
                converged = True
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p * n + q]
                    if apq == 0.0:
                        continue
                    if fabs(apq) <= zero_tol:
                        a[p * n + q] = 0.0
                        a[q * n + p] = 0.0
                        continue
                    app = a[p * n + p]
                    aqq = a[q * n + q]
                    theta = (aqq - app) / (2.0 * apq)
                    if fabs(theta) > 1e150:
                        t = 1.0 / (2.0 * theta)
                    else:
                        t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                        if theta < 0.0:
                            t = -t
                    c = 1.0 / sqrt(t * t + 1.0)
                    sr = t * c
                    tau = sr / (1.0 + c)
                    a[p * n + p] = app - t * apq
                    a[q * n + q] = aqq + t * apq
                    a[p * n + q] = 0.0
                    a[q * n + p] = 0.0
                    for i in range(n):
                        if i == p or i == q:
                            continue
                        aip = a[i * n + p]
                        aiq = a[i * n + q]
                        a[i * n + p] = aip - sr * (aiq + tau * aip)
                        a[p * n + i] = a[i * n + p]
                        a[i * n + q] = aiq + sr * (aip - tau * aiq)
                        a[q * n + i] = a[i * n + q]
        if not converged:
            off = 0.0
            for p in range(n - 1):
                for q in range(p + 1, n):
                    off += 2.0 * a[p * n + q] * a[p * n + q]
            if sqrt(off) > 1e-10 * (1.0 if frob < 1.0 else frob):
                fail[0] += 1
    best = a[0]
    for i in range(1, n):
        if a[i * n + i] > best:
            best = a[i * n + i]
    return best


def hist_range(const double[:, ::1] w, i64 t0, i64 t1, i64 cap):
    """Histogram of quantized H over Gray-walk steps [t0, t1).

    Returns (keys, counts, min_key, min_h, min_count, reps) with keys
    ascending; reps are the `cap` smallest config indices in the
    minimum bin.
    """
    cdef int n = w.shape[0]
    cdef i64 t, g, key, min_key = 0, min_count = 0
    cdef double min_h = 0.0
    cdef double h = 0.0
    cdef bint have_min = False
    cdef unordered_map[i64, i64] hist
    cdef vector[i64] reps
    cdef size_t pos
    cdef int k

    s_arr = np.empty(n, dtype=np.int8)
    f_arr = np.empty(n, dtype=np.float64)
    cdef spin_t[::1] s = s_arr
    cdef double[::1] field = f_arr
    cdef const double* wp = &w[0, 0]

    if t1 <= t0:
        raise ValueError("empty range")

    with nogil:
        for t in range(t0, t1):
            if t == t0 or (t % RESEED_STRIDE) == 0:
                g = t ^ (t >> 1)
                seed_state(wp, n, g, &s[0], &field[0], &h)
            else:
                k = ctz(t) + 1
                flip_spin(wp, n, k, &s[0], &field[0], &h)
                g = t ^ (t >> 1)
            key = quantize(h)
            hist[key] += 1
            if not have_min or key < min_key:
                have_min = True
                min_key = key
                min_h = h
                min_count = 1
                reps.clear()
                if cap > 0:
                    reps.push_back(g)
            elif key == min_key:
                min_count += 1
                if h < min_h:
                    min_h = h
                if <i64> reps.size() < cap:
                    pos = reps.size()
                    reps.push_back(g)
                    while pos > 0 and reps[pos - 1] > g:
                        reps[pos] = reps[pos - 1]
                        pos -= 1
                    reps[pos] = g
                elif cap > 0 and g < reps[reps.size() - 1]:
                    pos = reps.size() - 1
                    while pos > 0 and reps[pos - 1] > g:
                        reps[pos] = reps[pos - 1]
                        pos -= 1
                    reps[pos] = g

    keys_arr = np.empty(hist.size(), dtype=np.int64)
    counts_arr = np.empty(hist.size(), dtype=np.int64)
    cdef i64[::1] kv = keys_arr
    cdef i64[::1] cv = counts_arr
    cdef unordered_map[i64, i64].iterator it = hist.begin()
    cdef i64 i = 0
    while it != hist.end():
        kv[i] = deref(it).first
        cv[i] = deref(it).second
        inc(it)
        i += 1
    order = np.argsort(keys_arr)
    keys_arr = keys_arr[order]
    counts_arr = counts_arr[order]

    reps_arr = np.empty(reps.size(), dtype=np.int64)
    for i in range(<i64> reps.size()):
        reps_arr[i] = reps[i]
    return keys_arr, counts_arr, min_key, min_h, min_count, reps_arr


def beta1_block(const double[:, ::1] w, i64 i0, i64 i1):
    """(H, beta_1) for plain config indices [i0, i1).

    Walks indices in order with incremental spin flips and runs one
    Jacobi eigensolve of the K=1, K_s=0 binarized Jacobian per config.
    """
    cdef int n = w.shape[0]
    cdef i64 idx, sz = i1 - i0
    cdef i64 diff
    cdef int b, i, j, fail = 0
    cdef double h = 0.0
    cdef double si

    if sz <= 0:
        raise ValueError("empty range")

    h_arr = np.empty(sz, dtype=np.float64)
    b_arr = np.empty(sz, dtype=np.float64)
    s_arr = np.empty(n, dtype=np.int8)
    f_arr = np.empty(n, dtype=np.float64)
    a_arr = np.empty(n * n, dtype=np.float64)
    cdef double[::1] h_out = h_arr
    cdef double[::1] b_out = b_arr
    cdef spin_t[::1] s = s_arr
    cdef double[::1] field = f_arr
    cdef double[::1] a = a_arr
    cdef const double* wp = &w[0, 0]

    with nogil:
        for idx in range(i0, i1):
            if idx == i0 or (idx % RESEED_STRIDE) == 0:
                seed_state(wp, n, idx, &s[0], &field[0], &h)
            else:
                diff = (idx - 1) ^ idx
                b = 0
                while diff:
                    if diff & 1:
                        flip_spin(wp, n, b + 1, &s[0], &field[0], &h)
                    diff >>= 1
                    b += 1
            for i in range(n):
                si = s[i]
                for j in range(n):
                    a[i * n + j] = wp[i * n + j] * si * s[j]
                a[i * n + i] = -si * field[i]
            h_out[idx - i0] = h
            b_out[idx - i0] = jacobi_max_eig(&a[0], n, &fail)

    if fail:
        raise NumericalError(
            f"Jacobi eigensolver failed to converge for {fail} configuration(s)"
        )
    return h_arr, b_arr


def gray_energies(const double[:, ::1] w, i64 t0, i64 t1):
    """Incremental Gray-walk energies over steps [t0, t1).

    Returns (config indices in visit order, H values updated via the
    spin-flip identity). Same walk as hist_range.
    """
    cdef int n = w.shape[0]
    cdef i64 t, sz = t1 - t0
    cdef int k
    cdef double h = 0.0

    if sz <= 0:
        raise ValueError("empty range")

    idx_arr = np.empty(sz, dtype=np.int64)
    h_arr = np.empty(sz, dtype=np.float64)
    s_arr = np.empty(n, dtype=np.int8)
    f_arr = np.empty(n, dtype=np.float64)
    cdef i64[::1] idx_out = idx_arr
    cdef double[::1] h_out = h_arr
    cdef spin_t[::1] s = s_arr
    cdef double[::1] field = f_arr
    cdef const double* wp = &w[0, 0]

    with nogil:
        for t in range(t0, t1):
            if t == t0 or (t % RESEED_STRIDE) == 0:
                seed_state(wp, n, t ^ (t >> 1), &s[0], &field[0], &h)
            else:
                k = ctz(t) + 1
                flip_spin(wp, n, k, &s[0], &field[0], &h)
            idx_out[t - t0] = t ^ (t >> 1)
            h_out[t - t0] = h
    return idx_arr, h_arr
