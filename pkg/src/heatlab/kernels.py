"""Heat kernels p(t,x,y) on weighted graphs via uniformization.

With H the nonnegative generator and Lambda >= max_x Deg(x),

    e^{-tH} = e^{-Lambda t} * sum_{n>=0} (Lambda t)^n / n! * R^n,
    R = I - H / Lambda,

where R is entrywise nonnegative, so truncating the Poisson series gives a
certified-nonnegative approximation whose operator error is bounded by the
Poisson tail. The kernel itself is p(t,x,y) = [e^{-tH}]_{x,y} / mu(y); it is
symmetric, sub-Markov (mass <= 1) and bounded by 1/mu.

Killed (Dirichlet) kernels on a subset K use the principal submatrix of H,
which keeps the full weighted degree on the diagonal: mass lost through
edges leaving K is absorbed, and the killed kernels increase monotonically
along any exhaustion toward the kernel of the full graph.
"""

from __future__ import annotations

import math
import struct
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    GraphMismatch,
    NonpositiveTime,
    VertexOutsideExhaustion,
)
from .graphs import WeightedGraph, require_connected
from .util import check_time_grid, write_csv

DEFAULT_TAIL_CUTOFF = 1e-14

_MAGIC = b"HKT1"
_HEADER = struct.Struct("<4sId")  # magic, n, t -> 16 bytes


def poisson_weights(lam_t: float, cutoff: float = DEFAULT_TAIL_CUTOFF):
    """Poisson(lam_t) pmf truncated where the upper tail drops below cutoff.

    Returns (pmf, tail_bound) with tail_bound = P(N > len(pmf)-1) evaluated
    from the high end for accuracy. Computed in log space so large rates do
    not underflow term by term.
    """
    if lam_t < 0:
        raise ValueError("Poisson rate must be nonnegative")
    if lam_t == 0.0:
        return np.array([1.0]), 0.0
    nmax = jump_count_cap(lam_t)
    k = np.arange(nmax + 1, dtype=float)
    logfact = np.concatenate(([0.0], np.cumsum(np.log(k[1:]))))
    pmf = np.exp(k * math.log(lam_t) - lam_t - logfact)
    remainder = max(0.0, 1.0 - float(pmf.sum()))
    # tail[n] = P(N > n); sum from the top so small tails keep precision
    tail = np.cumsum(pmf[::-1])[::-1]
    tail = np.concatenate((tail[1:], [0.0])) + remainder
    keep = int(np.argmax(tail <= cutoff))
    if tail[keep] > cutoff:
        keep = nmax
    return pmf[:keep + 1], float(tail[keep])


def jump_count_cap(lam_t: float) -> int:
    """N_max = ceil(Lambda t + 12 sqrt(Lambda t) + 30)."""
    return int(math.ceil(lam_t + 12.0 * math.sqrt(lam_t) + 30.0))


@dataclass
class UniformizationInfo:
    rate: float
    n_terms: int
    tail_bound: float


def uniformized_exponential(h: np.ndarray, t: float, lam: float | None = None,
                            cutoff: float = DEFAULT_TAIL_CUTOFF):
    """e^{-t h} for a generator with nonnegative diagonal and <= 0 off-diagonal.

    Returns (matrix, UniformizationInfo). All series terms are entrywise
    nonnegative, so the result is certified >= 0 and its row sums certify the
    sub-Markov property up to the reported tail bound.
    """
    if t <= 0:
        raise NonpositiveTime(f"t = {t} must be positive")
    h = np.asarray(h, dtype=float)
    n = h.shape[0]
    diag_max = float(np.max(np.diag(h))) if n else 0.0
    if lam is None:
        lam = diag_max
    elif lam < diag_max:
        raise ValueError(f"uniformization rate {lam} < max diagonal {diag_max}")
    if lam == 0.0:
        return np.eye(n), UniformizationInfo(0.0, 1, 0.0)
    r = np.eye(n) - h / lam
    pmf, tail = poisson_weights(lam * t, cutoff)
    out = pmf[0] * np.eye(n)
    power = np.eye(n)
    for w in pmf[1:]:
        power = power @ r
        out += w * power
    return out, UniformizationInfo(float(lam), len(pmf), tail)


# --------------------------------------------------------------- the table


@dataclass
class HeatKernelTable:
    """Dense kernel values p(t,x,y) for one graph at one time."""

    t: float
    values: np.ndarray
    mu: np.ndarray
    graph_key: str
    uniformization_rate: float
    truncation_error_bound: float
    presymmetrization_defect: float
    labels: tuple = field(default=())

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def mass(self) -> np.ndarray:
        """Row masses sum_z p(t,x,z) mu(z); sub-Markov means all <= 1."""
        return self.values @ self.mu

    def diagonal(self) -> np.ndarray:
        return np.diag(self.values).copy()

    def symmetry_defect(self) -> float:
        return float(np.max(np.abs(self.values - self.values.T)))

    # ------------------------------------------------------------ exports

    def to_csv(self, path) -> Path:
        header = ["x"] + [str(l) for l in self.labels or range(self.n)]
        rows = ([self.labels[i] if self.labels else str(i)]
                + list(self.values[i]) for i in range(self.n))
        return write_csv(path, header, rows)

    def to_binary(self, path) -> Path:
        p = Path(path)
        with open(p, "wb") as fh:
            fh.write(_HEADER.pack(_MAGIC, self.n, self.t))
            fh.write(np.ascontiguousarray(self.values, dtype="<f8").tobytes())
        return p

    @staticmethod
    def read_binary(path):
        """Read a binary dump; returns (t, values)."""
        raw = Path(path).read_bytes()
        if len(raw) < _HEADER.size:
            raise ValueError("truncated kernel dump")
        magic, n, t = _HEADER.unpack_from(raw)
        if magic != _MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
        if body.size != n * n:
            raise ValueError(f"expected {n * n} values, found {body.size}")
        return t, body.reshape(n, n).copy()


# ----------------------------------------------------------------- caching


class _KernelCache:
    """Insert-or-get table cache, safe under concurrent access."""

    def __init__(self, capacity: int = 256):
        self._lock = threading.Lock()
        self._data: dict = {}
        self._capacity = capacity

    def lookup(self, key):
        with self._lock:
            return self._data.get(key)

    def insert(self, key, value):
        """Store value unless another thread won the race; return the winner."""
        with self._lock:
            existing = self._data.get(key)
            if existing is not None:
                return existing
            if len(self._data) >= self._capacity:
                self._data.pop(next(iter(self._data)))
            self._data[key] = value
            return value

    def clear(self):
        with self._lock:
            self._data.clear()


_cache = _KernelCache()


def clear_kernel_cache() -> None:
    _cache.clear()


def heat_semigroup(graph: WeightedGraph, t: float, lam: float | None = None,
                   cutoff: float = DEFAULT_TAIL_CUTOFF,
                   use_cache: bool = True) -> HeatKernelTable:
    """Kernel table for the full graph at time t.

    Requires a connected graph (strict positivity of every entry is part of
    the contract and cannot hold across components). The raw matrix is
    symmetrized after uniformization; the pre-symmetrization defect is kept
    on the table for inspection.
    """
    if t <= 0:
        raise NonpositiveTime(f"t = {t} must be positive")
    require_connected(graph)
    key = (graph.fingerprint(), float(t), lam, cutoff)
    if use_cache:
        hit = _cache.lookup(key)
        if hit is not None:
            return hit
    h = graph.generator_matrix()
    e, info = uniformized_exponential(h, t, lam=lam, cutoff=cutoff)
    p_raw = e / graph.mu[None, :]
    defect = float(np.max(np.abs(p_raw - p_raw.T)))
    p = 0.5 * (p_raw + p_raw.T)
    table = HeatKernelTable(
        t=float(t), values=p, mu=graph.mu.copy(), graph_key=graph.fingerprint(),
        uniformization_rate=info.rate, truncation_error_bound=info.tail_bound,
        presymmetrization_defect=defect, labels=graph.labels)
    table.values.setflags(write=False)
    if use_cache:
        table = _cache.insert(key, table)
    return table


def on_diagonal_scan(graph: WeightedGraph, x, t_grid) -> np.ndarray:
    """Rows (t, p(t,x,x) * mu(x)); the product tends to 1 as t -> 0+."""
    x = graph.resolve(x)
    grid = check_time_grid(t_grid)
    out = np.empty((grid.size, 2))
    for i, t in enumerate(grid):
        tab = heat_semigroup(graph, float(t))
        out[i] = (t, tab.values[x, x] * graph.mu[x])
    return out


# ------------------------------------------------------- killed kernels


def killed_generator(graph: WeightedGraph, subset) -> tuple[np.ndarray, list[int]]:
    """Principal submatrix of H on sorted(subset).

    The diagonal keeps the full ambient weighted degree, so edges leaving the
    subset act as absorption (Dirichlet condition).
    """
    idx = sorted({graph.resolve(v) for v in subset})
    if not idx:
        raise VertexOutsideExhaustion("empty subset")
    h = graph.generator_matrix()
    sub = np.ix_(idx, idx)
    return h[sub].copy(), idx


def killed_kernel(graph: WeightedGraph, subset, t: float,
                  cutoff: float = DEFAULT_TAIL_CUTOFF):
    """Killed kernel table values p_K(t,x,y) for x,y in sorted(subset)."""
    if t <= 0:
        raise NonpositiveTime(f"t = {t} must be positive")
    h_k, idx = killed_generator(graph, subset)
    e, _ = uniformized_exponential(h_k, t, cutoff=cutoff)
    mu_k = graph.mu[idx]
    p_raw = e / mu_k[None, :]
    return 0.5 * (p_raw + p_raw.T), idx


@dataclass
class Exhaustion:
    """Nested vertex subsets K_1 subset K_2 subset ... of an ambient graph."""

    subsets: list

    def __post_init__(self):
        sets = [sorted(set(int(v) for v in s)) for s in self.subsets]
        if not sets:
            raise VertexOutsideExhaustion("exhaustion has no members")
        for a, b in zip(sets, sets[1:]):
            if not set(a) <= set(b):
                raise VertexOutsideExhaustion(
                    f"exhaustion members not nested: {a} not within {b}")
        self.subsets = sets

    def __len__(self):
        return len(self.subsets)


@dataclass
class MinimalKernelSequence:
    """Killed kernel values along an exhaustion, plus a convergence proxy."""

    t: float
    x: int
    y: int
    values: np.ndarray
    last_gap: float


def minimal_heat_kernel(graph: WeightedGraph, exhaustion: Exhaustion,
                        t: float, x, y) -> MinimalKernelSequence:
    """p_{K_n}(t,x,y) for each member of the exhaustion.

    The sequence is nondecreasing in n; the gap between the last two values
    is reported as the convergence proxy for the minimal kernel.
    """
    if not isinstance(exhaustion, Exhaustion):
        exhaustion = Exhaustion(list(exhaustion))
    x = graph.resolve(x)
    y = graph.resolve(y)
    first = exhaustion.subsets[0]
    if x not in first or y not in first:
        raise VertexOutsideExhaustion(
            f"vertices ({x},{y}) must lie in the first member {first}")
    vals = np.empty(len(exhaustion))
    for n, subset in enumerate(exhaustion.subsets):
        p, idx = killed_kernel(graph, subset, t)
        pos = {v: i for i, v in enumerate(idx)}
        vals[n] = p[pos[x], pos[y]]
    gap = float(vals[-1] - vals[-2]) if len(vals) > 1 else float("nan")
    return MinimalKernelSequence(t=float(t), x=x, y=y, values=vals,
                                 last_gap=gap)


# ------------------------------------------------------------ axiom check


@dataclass
class AxiomReport:
    """Defects of the semigroup axioms for tables at s, t and s+t."""

    s: float
    t: float
    chapman_kolmogorov_defect: float
    symmetry_defect: float
    mass_excess: float
    mass_deficit: float
    passed: bool

    def rows(self):
        return [(self.s, self.t, self.chapman_kolmogorov_defect,
                 self.symmetry_defect, self.mass_excess, self.mass_deficit,
                 self.passed)]

    header = ("s", "t", "ck_defect", "symmetry_defect", "mass_excess",
              "mass_deficit", "passed")


def verify_axioms(table_s: HeatKernelTable, table_t: HeatKernelTable,
                  table_st: HeatKernelTable, ck_tol: float = 1e-10,
                  sym_tol: float = 1e-12, mass_tol: float = 1e-12,
                  conservative: bool = True) -> AxiomReport:
    """Check the semigroup identity, symmetry and mass bounds numerically.

    table_st must belong to the same graph and sit at time s + t. For finite
    conservative graphs the masses stay within mass_tol of 1; set
    conservative=False to demand only the sub-Markov upper bound.
    """
    keys = {table_s.graph_key, table_t.graph_key, table_st.graph_key}
    if len(keys) != 1:
        raise GraphMismatch("kernel tables come from different graphs")
    if abs((table_s.t + table_t.t) - table_st.t) > 1e-12 * max(1.0, table_st.t):
        raise ValueError(
            f"times do not compose: {table_s.t} + {table_t.t} != {table_st.t}")
    mu = table_s.mu
    composed = table_s.values @ (mu[:, None] * table_t.values)
    ck = float(np.max(np.abs(composed - table_st.values)))
    sym = max(t.symmetry_defect() for t in (table_s, table_t, table_st))
    masses = np.concatenate([t.mass() for t in (table_s, table_t, table_st)])
    excess = float(np.max(masses) - 1.0)
    deficit = float(1.0 - np.min(masses))
    ok = ck <= ck_tol and sym <= sym_tol and excess <= mass_tol
    if conservative:
        ok = ok and deficit <= mass_tol
    return AxiomReport(s=table_s.t, t=table_t.t,
                       chapman_kolmogorov_defect=ck, symmetry_defect=sym,
                       mass_excess=excess, mass_deficit=deficit, passed=ok)
