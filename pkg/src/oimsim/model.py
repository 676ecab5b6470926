"""Core Ising / oscillator-machine objects.

Graphs, coupling matrices, the Ising energy H, the oscillator energy
function E(theta) and its velocity field. Conventions used throughout:

* H sums over unordered pairs:  H = -sum_{i<j} W_ij s_i s_j.
* E uses the ordered double sum, so a binarized phase state with spin
  image s satisfies  E = 2*K*H - n*K_s  exactly.
* Phase differences are taken as theta_i - theta_j, the unique reading
  under which the velocity field equals -(1/2) grad E.
* The MaxCut mapping stores -(edge weight) in the coupling matrix, so an
  unweighted graph gets antiferromagnetic couplings W_ij = -1.

All types are immutable after construction and all operations are pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GraphFormatError

__all__ = [
    "Graph",
    "CouplingMatrix",
    "OimParams",
    "load_graph",
    "generate_random_graph",
    "write_graph",
    "coupling_from_graph",
    "ising_energy",
    "maxcut_from_energy",
    "local_field",
    "lyapunov_energy",
    "phase_velocity",
]


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph with 0-indexed nodes.

    Edges are (u, v, w) with u < v, no self-loops, no duplicate pairs.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"node count must be >= 1, got {self.n}")
        seen = set()
        norm = []
        for u, v, w in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={self.n}")
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"duplicate edge ({key[0]}, {key[1]})")
            seen.add(key)
            if not np.isfinite(w):
                raise ValueError(f"non-finite weight on edge ({u}, {v})")
            norm.append((key[0], key[1], float(w)))
        object.__setattr__(self, "edges", tuple(norm))

    @property
    def m(self) -> int:
        return len(self.edges)

    def total_weight(self) -> float:
        """Sum of edge weights (the MaxCut identity's sigma-W term)."""
        return float(sum(w for _, _, w in self.edges))

    def is_integer_weighted(self) -> bool:
        return all(w == int(w) for _, _, w in self.edges)


@dataclass(frozen=True)
class CouplingMatrix:
    """Dense symmetric coupling matrix with zero diagonal."""

    w: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.array(self.w, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"coupling matrix must be square, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("coupling matrix has non-finite entries")
        if not np.array_equal(w, w.T):
            raise ValueError("coupling matrix must be symmetric")
        if np.any(np.diagonal(w) != 0.0):
            raise ValueError("coupling matrix must have a zero diagonal")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return self.w.shape[0]


@dataclass(frozen=True)
class OimParams:
    """Oscillator machine parameters.

    k : coupling strength (> 0)
    ks : second-harmonic injection strength (>= 0)
    kn : noise amplitude (>= 0)
    """

    k: float = 1.0
    ks: float = 0.0
    kn: float = 0.0

    def __post_init__(self):
        for name in ("k", "ks", "kn"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.k <= 0:
            raise ValueError(f"k must be > 0, got {self.k}")
        if self.ks < 0:
            raise ValueError(f"ks must be >= 0, got {self.ks}")
        if self.kn < 0:
            raise ValueError(f"kn must be >= 0, got {self.kn}")


def _parse_weight(tok: str, lineno: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise GraphFormatError(f"line {lineno}: bad weight {tok!r}") from None


def load_graph(text) -> Graph:
    """Parse the edge-list graph format.

    First non-comment line is ``n m``; each of the following m lines is
    ``u v [w]`` with 1-indexed endpoints and an optional weight
    (default 1). Lines starting with '#' and blank lines are ignored.
    Accepts a string or a readable text stream.
    """
    if hasattr(text, "read"):
        text = text.read()
    lines = text.splitlines()

    header = None
    edges = []
    seen: set[tuple[int, int]] = set()
    expected = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        if header is None:
            if len(toks) != 2:
                raise GraphFormatError(f"line {lineno}: expected header 'n m', got {raw!r}")
            try:
                n, m = int(toks[0]), int(toks[1])
            except ValueError:
                raise GraphFormatError(f"line {lineno}: bad header {raw!r}") from None
            if n < 1 or m < 0:
                raise GraphFormatError(f"line {lineno}: invalid sizes n={n}, m={m}")
            header = (n, m)
            expected = m
            continue
        if len(toks) not in (2, 3):
            raise GraphFormatError(f"line {lineno}: expected 'u v [w]', got {raw!r}")
        try:
            u1, v1 = int(toks[0]), int(toks[1])
        except ValueError:
            raise GraphFormatError(f"line {lineno}: bad endpoints in {raw!r}") from None
        w = _parse_weight(toks[2], lineno) if len(toks) == 3 else 1.0
        n = header[0]
        if not (1 <= u1 <= n and 1 <= v1 <= n):
            raise GraphFormatError(f"line {lineno}: node index out of range 1..{n}")
        u, v = u1 - 1, v1 - 1
        if u == v:
            raise GraphFormatError(f"line {lineno}: self-loop at node {u1}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphFormatError(f"line {lineno}: duplicate edge {u1} {v1}")
        seen.add(key)
        edges.append((key[0], key[1], w))
        if len(edges) > expected:
            raise GraphFormatError(f"line {lineno}: more than {expected} edges")

    if header is None:
        raise GraphFormatError("line 1: empty graph text")
    if len(edges) != header[1]:
        raise GraphFormatError(
            f"expected {header[1]} edges, found {len(edges)}"
        )
    return Graph(header[0], tuple(edges))


def seed_key(seed: int) -> int:
    """Embed a signed 64-bit seed into the non-negative range PCG64 takes."""
    return int(seed) & 0xFFFFFFFFFFFFFFFF


def generate_random_graph(n: int, m: int, seed: int) -> Graph:
    """Sample m distinct unordered pairs uniformly, rejection-style.

    Deterministic for fixed (n, m, seed): pairs are drawn from a PCG64
    stream seeded with ``seed`` and accepted in draw order. All weights
    are 1.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    max_m = n * (n - 1) // 2
    if not 0 <= m <= max_m:
        raise ValueError(f"edge count {m} outside 0..{max_m} for n={n}")
    rng = np.random.default_rng(seed_key(seed))
    seen: set[tuple[int, int]] = set()
    edges = []
    while len(edges) < m:
        u = int(rng.integers(0, n))
        v = int(rng.integers(0, n))
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if key in seen:
            continue
        seen.add(key)
        edges.append((key[0], key[1], 1.0))
    return Graph(n, tuple(edges))


def _fmt_weight(w: float) -> str:
    return str(int(w)) if w == int(w) else repr(w)


def write_graph(g: Graph, path) -> None:
    """Write a graph in the edge-list format read by load_graph."""
    with open(path, "w", newline="") as f:
        f.write(f"{g.n} {g.m}\n")
        for u, v, w in g.edges:
            if w == 1.0:
                f.write(f"{u + 1} {v + 1}\n")
            else:
                f.write(f"{u + 1} {v + 1} {_fmt_weight(w)}\n")


def coupling_from_graph(g: Graph) -> CouplingMatrix:
    """MaxCut mapping: every edge (u, v, w) becomes W_uv = W_vu = -w."""
    w = np.zeros((g.n, g.n), dtype=np.float64)
    for u, v, wt in g.edges:
        w[u, v] = w[v, u] = -wt
    return CouplingMatrix(w)


def _as_spins(s, n: int) -> np.ndarray:
    s = np.asarray(s, dtype=np.float64)
    if s.shape != (n,):
        raise ValueError(f"spin vector has shape {s.shape}, expected ({n},)")
    return s


def _as_phases(th, n: int) -> np.ndarray:
    th = np.asarray(th, dtype=np.float64)
    if th.shape != (n,):
        raise ValueError(f"phase vector has shape {th.shape}, expected ({n},)")
    if not np.all(np.isfinite(th)):
        raise ValueError("phase vector has non-finite entries")
    return th


def ising_energy(w: CouplingMatrix, s) -> float:
    """H = -sum_{i<j} W_ij s_i s_j (unordered-pair convention)."""
    s = _as_spins(s, w.n)
    return float(-0.5 * s @ (w.w @ s))


def maxcut_from_energy(g: Graph, h: float) -> float:
    """Cut value from the identity H = sigma-W - 2*MC."""
    return (g.total_weight() - h) / 2.0


def local_field(w: CouplingMatrix, s, i: int) -> float:
    """sum_j W_ij s_j; spin-flip identity helper."""
    s = _as_spins(s, w.n)
    if not 0 <= i < w.n:
        raise IndexError(f"node index {i} out of range 0..{w.n - 1}")
    return float(w.w[i] @ s)


def lyapunov_energy(w: CouplingMatrix, p: OimParams, th) -> float:
    """E = -K sum_{i!=j} W_ij cos(theta_i - theta_j) - K_s sum_i cos(2 theta_i).

    The coupling term is the ordered double sum (every pair twice).
    """
    th = _as_phases(th, w.n)
    c, s = np.cos(th), np.sin(th)
    # sum_{i,j} W_ij cos(ti - tj) = c.(W c) + s.(W s); diagonal of W is zero.
    pair = c @ (w.w @ c) + s @ (w.w @ s)
    return float(-p.k * pair - p.ks * np.sum(np.cos(2.0 * th)))


def phase_velocity(w: CouplingMatrix, p: OimParams, th) -> np.ndarray:
    """dtheta/dt = -K sum_j W_ij sin(theta_i - theta_j) - K_s sin(2 theta_i).

    Equals -(1/2) grad E componentwise.
    """
    th = _as_phases(th, w.n)
    c, s = np.cos(th), np.sin(th)
    # sum_j W_ij sin(ti - tj) = sin(ti) (W cos)_i - cos(ti) (W sin)_i
    coupling = s * (w.w @ c) - c * (w.w @ s)
    return -p.k * coupling - p.ks * np.sin(2.0 * th)
