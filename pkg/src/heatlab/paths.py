"""Jump paths of the graph process, exact bridge sampling, and MC probes.

The free process holds at z for an Exp(Deg(z)) time, then jumps to y with
probability b(z,y) / sum_y' b(z,y'). Bridges pinned at (x, y, t) are drawn
exactly through uniformization: with R = I - H/Lambda and Poisson weights
q_n = e^{-Lambda t} (Lambda t)^n / n!,

    P(N = n) ~ q_n [R^n]_{x,y},

the skeleton is filled in backward, P(z_k = z | z_{k-1}) ~ R[z_{k-1}, z] *
[R^{n-k}]_{z, y}, event times are sorted uniforms on (0,t), and self-jumps
of R are dropped when materializing a path (they do not change any path
functional). Every sampled bridge ends at y, and the convention here sets
gamma(t) = y as well.

Reproducibility: estimators take an integer seed; one child stream per
diagonal vertex is spawned via numpy SeedSequence in vertex order and
results are combined with Kahan summation in that order, so estimates are
bit-identical regardless of worker count.
"""

from __future__ import annotations

import bisect
import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    NonpositiveTime,
    NTruncationExceeded,
    VertexNotInK,
    ZeroKernel,
)
from .graphs import WeightedGraph
from .kernels import (
    DEFAULT_TAIL_CUTOFF,
    heat_semigroup,
    jump_count_cap,
    killed_kernel,
    poisson_weights,
)
from .traces import as_potential
from .util import kahan_sum, parallel_map

_RELATIVE_TAIL_TOL = 1e-10
MAX_BRIDGE_TERMS = 100_000


@dataclass
class JumpPath:
    """A right-continuous pure-jump trajectory on [0, horizon]."""

    start: int
    jumps: list
    horizon: float
    exploded: bool = False

    def __post_init__(self):
        prev_t = 0.0
        prev_state = self.start
        for when, target in self.jumps:
            if not prev_t < when < self.horizon:
                raise ValueError(
                    f"jump time {when} outside (previous, horizon)")
            if target == prev_state:
                raise ValueError("consecutive jump targets must differ")
            prev_t, prev_state = when, target

    def value_at(self, s: float) -> int:
        if not 0.0 <= s <= self.horizon:
            raise ValueError(f"s = {s} outside [0, {self.horizon}]")
        i = bisect.bisect_right([w for w, _ in self.jumps], s)
        return self.start if i == 0 else self.jumps[i - 1][1]

    def final_state(self) -> int:
        return self.jumps[-1][1] if self.jumps else self.start

    def jump_count(self) -> int:
        return len(self.jumps)

    def segments(self):
        """(state, a, b) pieces with the path constant on [a, b)."""
        out = []
        state, a = self.start, 0.0
        for when, target in self.jumps:
            out.append((state, a, when))
            state, a = target, when
        out.append((state, a, self.horizon))
        return out

    def integrate(self, values) -> float:
        """int_0^horizon f(gamma(s)) ds for vertex values f."""
        vals = np.asarray(values, dtype=float)
        return float(sum(vals[state] * (b - a) for state, a, b in self.segments()))

    def occupation(self, n_vertices: int, a: float = None, b: float = None):
        """Occupation time per vertex over [a, b] (defaults: whole horizon)."""
        a = 0.0 if a is None else a
        b = self.horizon if b is None else b
        occ = np.zeros(n_vertices)
        for state, s0, s1 in self.segments():
            lo, hi = max(s0, a), min(s1, b)
            if hi > lo:
                occ[state] += hi - lo
        return occ


@dataclass
class McEstimate:
    """A Monte Carlo estimate with its standard error and provenance."""

    mean: float
    std_error: float
    n_samples: int
    seed: int


# ------------------------------------------------------------- free paths


def sample_free_path(graph: WeightedGraph, x, t: float, rng=None) -> JumpPath:
    """One trajectory of the free process started at x, run to horizon t."""
    if t <= 0:
        raise NonpositiveTime(f"t = {t} must be positive")
    rng = np.random.default_rng(rng)
    z = graph.resolve(x)
    tau = 0.0
    jumps = []
    while True:
        rate = graph.degree(z)
        if rate == 0.0:
            break
        tau += rng.exponential(1.0 / rate)
        if tau >= t:
            break
        nbrs = graph.neighbors(z)
        weights = np.array([b for _, b in nbrs])
        cum = np.cumsum(weights)
        u = rng.random() * cum[-1]
        z = nbrs[int(np.searchsorted(cum, u, side="right"))][0]
        jumps.append((tau, z))
    return JumpPath(start=graph.resolve(x), jumps=jumps, horizon=float(t))


# ------------------------------------------------------ bridge machinery


class BridgeKernel:
    """Uniformization tables for exact bridge sampling at one (graph, t)."""

    def __init__(self, graph: WeightedGraph, t: float,
                 cutoff: float = DEFAULT_TAIL_CUTOFF):
        if t <= 0:
            raise NonpositiveTime(f"t = {t} must be positive")
        self.graph = graph
        self.t = float(t)
        h = graph.generator_matrix()
        n = graph.n
        self.lam = float(np.max(np.diag(h))) if n else 0.0
        self.n_max = jump_count_cap(self.lam * self.t)
        # refuse before allocating the power table: the exact sampler keeps
        # every R^n in memory, so enormous lam*t is out of scope
        if min(self.n_max, MAX_BRIDGE_TERMS) < self.lam * self.t:
            raise NTruncationExceeded(
                f"lam*t = {self.lam * self.t:.3e} needs more jump-count "
                f"terms than the cap {min(self.n_max, MAX_BRIDGE_TERMS)}")
        if self.lam == 0.0:
            self.r = np.eye(n)
            self.pmf = np.array([1.0])
            self.tail = 0.0
        else:
            self.r = np.eye(n) - h / self.lam
            self.pmf, self.tail = poisson_weights(self.lam * self.t, cutoff)
        if len(self.pmf) > self.n_max:
            # fold the cut terms into the reported tail mass
            self.tail += float(self.pmf[self.n_max:].sum())
            self.pmf = self.pmf[:self.n_max]
        powers = np.empty((len(self.pmf), n, n))
        powers[0] = np.eye(n)
        for k in range(1, len(self.pmf)):
            powers[k] = powers[k - 1] @ self.r
        self.powers = powers

    def count_distribution(self, x: int, y: int):
        """Unnormalized P(N = n) for the (x, y) bridge, plus its mass."""
        probs = self.pmf * self.powers[:, x, y]
        denom = float(probs.sum())
        if denom <= 0.0:
            raise ZeroKernel(
                f"kernel vanishes between vertices {x} and {y} at t = {self.t}")
        if self.tail > _RELATIVE_TAIL_TOL * denom:
            raise NTruncationExceeded(
                f"jump-count cap {self.n_max} leaves relative mass "
                f"{self.tail / denom:.3e} unaccounted for")
        return probs, denom


_bridge_cache: dict = {}
_bridge_lock = threading.Lock()


def bridge_kernel(graph: WeightedGraph, t: float) -> BridgeKernel:
    key = (graph.fingerprint(), float(t))
    with _bridge_lock:
        hit = _bridge_cache.get(key)
    if hit is not None:
        return hit
    bk = BridgeKernel(graph, t)
    with _bridge_lock:
        if len(_bridge_cache) > 128:
            _bridge_cache.pop(next(iter(_bridge_cache)))
        return _bridge_cache.setdefault(key, bk)


def _rows_categorical(prob_rows: np.ndarray, rng) -> np.ndarray:
    """One draw per row with probabilities proportional to the row entries."""
    cum = np.cumsum(prob_rows, axis=1)
    u = rng.random(prob_rows.shape[0]) * cum[:, -1]
    idx = (cum <= u[:, None]).sum(axis=1)
    return np.minimum(idx, prob_rows.shape[1] - 1)


def sample_bridge(graph: WeightedGraph, x, y, t: float, rng=None) -> JumpPath:
    """One exact bridge path pinned at gamma(0) = x, gamma(t) = y."""
    rng = np.random.default_rng(rng)
    x = graph.resolve(x)
    y = graph.resolve(y)
    bk = bridge_kernel(graph, t)
    probs, denom = bk.count_distribution(x, y)
    cum = np.cumsum(probs)
    u = rng.random() * denom
    n = min(int(np.searchsorted(cum, u, side="right")), len(probs) - 1)
    states = [x]
    for k in range(1, n):
        row = bk.r[states[-1], :] * bk.powers[n - k][:, y]
        csum = np.cumsum(row)
        uu = rng.random() * csum[-1]
        states.append(min(int(np.searchsorted(csum, uu, side="right")),
                          graph.n - 1))
    if n >= 1:
        states.append(y)
    times = np.sort(rng.random(n)) * t
    jumps = []
    prev = x
    for k in range(1, n + 1):
        if states[k] != prev:
            jumps.append((float(times[k - 1]), int(states[k])))
            prev = states[k]
    return JumpPath(start=x, jumps=jumps, horizon=float(t))


def _bridge_batch(bk: BridgeKernel, x: int, y: int, n_samples: int, rng,
                  w_vals=None, stay_mask=None):
    """Vectorized bridge functionals for n_samples paths from x to y.

    Returns (fk, stay): fk[i] = exp(-int w along path i) when w_vals is
    given, stay[i] = 1{path i never leaves the masked set}. Jump counts are
    processed in ascending order so the stream consumption is deterministic.
    """
    probs, denom = bk.count_distribution(x, y)
    cum = np.cumsum(probs)
    u = rng.random(n_samples) * denom
    counts = np.minimum(np.searchsorted(cum, u, side="right"), len(probs) - 1)
    fk = np.empty(n_samples) if w_vals is not None else None
    stay = np.empty(n_samples, dtype=bool) if stay_mask is not None else None
    t = bk.t
    for nj in np.unique(counts):
        sel = np.flatnonzero(counts == nj)
        m = sel.size
        z = np.empty((m, nj + 1), dtype=np.intp)
        z[:, 0] = x
        if nj >= 1:
            z[:, nj] = y
        for k in range(1, nj):
            rows = bk.r[z[:, k - 1], :] * bk.powers[nj - k][:, y][None, :]
            z[:, k] = _rows_categorical(rows, rng)
        if stay_mask is not None:
            stay[sel] = stay_mask[z].all(axis=1)
        if w_vals is not None:
            gaps = rng.standard_exponential((m, nj + 1))
            gaps *= t / gaps.sum(axis=1, keepdims=True)
            fk[sel] = np.exp(-(w_vals[z] * gaps).sum(axis=1))
    return fk, stay


def bridge_functional_mc(graph: WeightedGraph, x, y, w, t: float,
                         n_samples: int, seed: int) -> McEstimate:
    """MC estimate of E^{x,y}[ exp(-int_0^t w(gamma(s)) ds) ]."""
    pot = as_potential(w, graph.n)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    bk = bridge_kernel(graph, t)
    fk, _ = _bridge_batch(bk, graph.resolve(x), graph.resolve(y),
                          int(n_samples), rng, w_vals=pot.values)
    se = float(fk.std(ddof=1) / np.sqrt(len(fk))) if len(fk) > 1 else 0.0
    return McEstimate(mean=float(fk.mean()), std_error=se,
                      n_samples=int(n_samples), seed=int(seed))


# --------------------------------------------------------- trace estimator


def feynman_kac_trace_mc(graph: WeightedGraph, w, t: float, n_samples: int,
                         seed: int, threads: int = 1) -> McEstimate:
    """MC estimate of tr e^{-t(H + w)} through diagonal bridges:

        sum_x mu(x) p(t,x,x) E^{x,x}[ exp(-int_0^t w(gamma(s)) ds) ].

    One child stream per vertex (SeedSequence spawn in vertex order); the
    weighted means are combined with Kahan summation, so the estimate does
    not depend on the number of worker threads.
    """
    pot = as_potential(w, graph.n)
    table = heat_semigroup(graph, t)
    bk = bridge_kernel(graph, t)
    children = np.random.SeedSequence(seed).spawn(graph.n)
    coeff = graph.mu * table.diagonal()

    def per_vertex(xi: int):
        rng = np.random.Generator(np.random.PCG64(children[xi]))
        fk, _ = _bridge_batch(bk, xi, xi, int(n_samples), rng,
                              w_vals=pot.values)
        var = float(fk.var(ddof=1)) if len(fk) > 1 else 0.0
        return float(fk.mean()), var

    stats = parallel_map(per_vertex, range(graph.n), threads)
    mean = kahan_sum(c * m for c, (m, _) in zip(coeff, stats))
    var = kahan_sum(c * c * v / n_samples for c, (_, v) in zip(coeff, stats))
    return McEstimate(mean=mean, std_error=float(np.sqrt(var)),
                      n_samples=int(n_samples), seed=int(seed))


# ----------------------------------------------------- boundary detection


def pnfb_probability(graph: WeightedGraph, x, subset, t: float,
                     n_samples: int, seed: int) -> McEstimate:
    """MC estimate of P^{x,x}_t{ gamma(s) in K for all s in [0, t) }.

    With K the whole vertex set the indicator is identically one and the
    estimate is exact. Shrinking t drives the probability to 1: the process
    does not feel the boundary of K in short time.
    """
    xi = graph.resolve(x)
    members = sorted({graph.resolve(v) for v in subset})
    if xi not in members:
        raise VertexNotInK(f"vertex {xi} not in K = {members}")
    mask = np.zeros(graph.n, dtype=bool)
    mask[members] = True
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    bk = bridge_kernel(graph, t)
    _, stay = _bridge_batch(bk, xi, xi, int(n_samples), rng, stay_mask=mask)
    vals = stay.astype(float)
    se = float(vals.std(ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
    return McEstimate(mean=float(vals.mean()), std_error=se,
                      n_samples=int(n_samples), seed=int(seed))


def stay_probability_exact(graph: WeightedGraph, x, subset, t: float) -> float:
    """Exact staying probability p_K(t,x,x) / p(t,x,x) via killed kernels."""
    xi = graph.resolve(x)
    members = sorted({graph.resolve(v) for v in subset})
    if xi not in members:
        raise VertexNotInK(f"vertex {xi} not in K = {members}")
    p_killed, idx = killed_kernel(graph, members, t)
    pos = idx.index(xi)
    full = heat_semigroup(graph, t).values[xi, xi]
    if full <= 0.0:
        raise ZeroKernel(f"p({t},{xi},{xi}) vanishes")
    return float(p_killed[pos, pos] / full)


def no_jump_lower_bound(graph: WeightedGraph, x, t: float) -> float:
    """exp(-t Deg(x)) / (p(t,x,x) mu(x)): P^{x,x}{no jump before t}.

    This lower-bounds every staying probability with x in K; on graphs it is
    an identity for K = {x}.
    """
    xi = graph.resolve(x)
    p = heat_semigroup(graph, t).values[xi, xi]
    if p <= 0.0:
        raise ZeroKernel(f"p({t},{xi},{xi}) vanishes")
    return float(np.exp(-t * graph.degree(xi)) / (p * graph.mu[xi]))
