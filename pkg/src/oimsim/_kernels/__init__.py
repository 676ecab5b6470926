"""Kernel backend selection.

The compiled extension (`_native`, Cython/C++) is used when importable;
otherwise the numpy fallback (`_python`) takes over. Both expose the
same three functions:

    hist_range(w, t0, t1, cap)
    beta1_block(w, i0, i1)
    gray_energies(w, t0, t1)

Backends agree bit-for-bit on integer-weighted graphs for energies and
histograms; eigenvalues agree to the documented 1e-9 tolerance (LAPACK
vs cyclic Jacobi).
"""

from __future__ import annotations

from contextlib import contextmanager

from . import _python

try:
    from . import _native
except ImportError:  # extension not built
    _native = None

_active = _native if _native is not None else _python


def has_native() -> bool:
    return _native is not None


def backend_name() -> str:
    return _active.NAME


def get_backend(name: str):
    if name == "python":
        return _python
    if name == "native":
        if _native is None:
            raise RuntimeError("native kernels are not built")
        return _native
    raise ValueError(f"unknown backend {name!r}")


def active():
    return _active


@contextmanager
def use_backend(name: str):
    """Temporarily force a backend (tests and benchmarks)."""
    global _active
    previous = _active
    _active = get_backend(name)
    try:
        yield _active
    finally:
        _active = previous


def hist_range(w, t0, t1, cap):
    return _active.hist_range(w, t0, t1, cap)


def beta1_block(w, i0, i1):
    return _active.beta1_block(w, i0, i1)


def gray_energies(w, t0, t1):
    return _active.gray_energies(w, t0, t1)
