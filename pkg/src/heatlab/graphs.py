"""Weighted graphs (X, b, mu) and the difference Laplacian.

A graph is a finite vertex set with a symmetric edge-weight function b >= 0
(zero diagonal, finite row sums) and a strictly positive vertex measure mu.
The formal difference Laplacian acts on functions psi by

    (L psi)(x) = -(1/mu(x)) * sum_y b(x,y) * (psi(x) - psi(y)),

and the (nonnegative) generator used everywhere else in the package is
H = -L, with matrix entries H[x,x] = Deg(x) and H[x,y] = -b(x,y)/mu(x),
where Deg(x) = (1/mu(x)) * sum_y b(x,y) is the weighted degree.
"""

from __future__ import annotations

import hashlib
import json
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import (
    AsymmetricWeights,
    DisconnectedGraph,
    InputError,
    NegativeWeight,
    NonpositiveMeasure,
    SelfLoop,
    UnknownVertex,
)


@dataclass
class VertexFunction:
    """A real or complex function on the vertex set, stored as a flat array."""

    values: np.ndarray

    @classmethod
    def from_dict(cls, graph: "WeightedGraph", mapping: dict) -> "VertexFunction":
        vals = np.zeros(graph.n, dtype=complex if any(
            isinstance(v, complex) for v in mapping.values()) else float)
        for key, v in mapping.items():
            vals[graph.resolve(key)] = v
        return cls(vals)

    def __len__(self) -> int:
        return len(self.values)


def _as_values(f, n: int) -> np.ndarray:
    if isinstance(f, VertexFunction):
        f = f.values
    arr = np.asarray(f)
    if arr.shape != (n,):
        raise ValueError(f"vertex function has shape {arr.shape}, expected ({n},)")
    return arr


class WeightedGraph:
    """Immutable weighted graph over vertices 0..n-1 with optional labels."""

    def __init__(self, mu, edges, labels=None, name: str = ""):
        mu = np.asarray(mu, dtype=float).copy()
        if mu.ndim != 1 or mu.size == 0:
            raise NonpositiveMeasure("mu must be a nonempty 1-d array")
        n = mu.size
        if not np.all(np.isfinite(mu)) or np.any(mu <= 0.0):
            bad = int(np.argmin(np.where(np.isfinite(mu), mu, -np.inf)))
            raise NonpositiveMeasure(f"mu({bad}) = {mu[bad]} must be positive and finite")

        merged: dict[tuple[int, int], float] = {}
        seen: dict[tuple[int, int], float] = {}
        for i, j, b in edges:
            i, j = int(i), int(j)
            b = float(b)
            for v in (i, j):
                if not 0 <= v < n:
                    raise UnknownVertex(f"edge ({i},{j}) references vertex {v}")
            if not np.isfinite(b):
                raise NegativeWeight(f"edge ({i},{j}) has non-finite weight {b}")
            if i == j:
                if b != 0.0:
                    raise SelfLoop(f"b({i},{i}) = {b} must be zero")
                continue
            if (i, j) in seen and seen[(i, j)] != b:
                raise AsymmetricWeights(
                    f"conflicting weights for edge ({i},{j}): {seen[(i, j)]} vs {b}")
            seen[(i, j)] = b
            if b < 0.0:
                raise NegativeWeight(f"b({i},{j}) = {b} must be nonnegative")
            key = (min(i, j), max(i, j))
            if key in merged and merged[key] != b:
                raise AsymmetricWeights(
                    f"b{(i, j)} = {b} but b{(j, i)} = {merged[key]}")
            if b > 0.0:
                merged[key] = b

        self.n = n
        self.name = name
        self.mu = mu
        self.mu.setflags(write=False)
        if labels is None:
            labels = [str(i) for i in range(n)]
        if len(labels) != n:
            raise InputError(f"{len(labels)} labels for {n} vertices")
        self.labels = tuple(str(l) for l in labels)
        self.edges = tuple(sorted((i, j, merged[(i, j)]) for (i, j) in merged))

        adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        for i, j, b in self.edges:
            adj[i].append((j, b))
            adj[j].append((i, b))
        self._adj = tuple(tuple(sorted(nbrs)) for nbrs in adj)
        # summability witness: per-vertex sum_y b(x,y) must be finite
        self._weight_sums = np.array(
            [sum(b for _, b in nbrs) for nbrs in self._adj])
        if not np.all(np.isfinite(self._weight_sums)):
            raise NegativeWeight("non-finite weight sum")
        self._weight_sums.setflags(write=False)
        self._generator = None
        self._components = None
        self._fingerprint = None

    # ------------------------------------------------------------- identity

    def resolve(self, key) -> int:
        """Map an int index or a string label to a vertex index."""
        if isinstance(key, str):
            try:
                return self.labels.index(key)
            except ValueError:
                raise UnknownVertex(f"no vertex labeled {key!r}") from None
        x = int(key)
        if not 0 <= x < self.n:
            raise UnknownVertex(f"vertex {x} outside 0..{self.n - 1}")
        return x

    def fingerprint(self) -> str:
        """Stable content hash used as a cache key for kernel tables."""
        if self._fingerprint is None:
            h = hashlib.sha256()
            h.update(np.int64(self.n).tobytes())
            h.update(self.mu.tobytes())
            for i, j, b in self.edges:
                h.update(np.int64(i).tobytes())
                h.update(np.int64(j).tobytes())
                h.update(np.float64(b).tobytes())
            self._fingerprint = h.hexdigest()
        return self._fingerprint

    # ------------------------------------------------------------- geometry

    def neighbors(self, x) -> tuple[tuple[int, float], ...]:
        return self._adj[self.resolve(x)]

    def weight_sum(self, x) -> float:
        """sum_y b(x,y), the unnormalized degree."""
        return float(self._weight_sums[self.resolve(x)])

    def degree(self, x) -> float:
        """Weighted degree Deg(x) = (1/mu(x)) * sum_y b(x,y)."""
        x = self.resolve(x)
        return float(self._weight_sums[x] / self.mu[x])

    def degrees(self) -> np.ndarray:
        return self._weight_sums / self.mu

    # ------------------------------------------------------------- operator

    def generator_matrix(self) -> np.ndarray:
        """Dense matrix of H = -L; H[x,x] = Deg(x), H[x,y] = -b(x,y)/mu(x)."""
        if self._generator is None:
            h = np.zeros((self.n, self.n))
            for i, j, b in self.edges:
                h[i, j] -= b / self.mu[i]
                h[j, i] -= b / self.mu[j]
            np.fill_diagonal(h, self.degrees())
            h.setflags(write=False)
            self._generator = h
        return self._generator

    # ----------------------------------------------------------- structure

    def components(self) -> list[list[int]]:
        """Connected components as sorted vertex lists (BFS)."""
        if self._components is None:
            seen = np.zeros(self.n, dtype=bool)
            comps = []
            for start in range(self.n):
                if seen[start]:
                    continue
                queue = deque([start])
                seen[start] = True
                comp = []
                while queue:
                    v = queue.popleft()
                    comp.append(v)
                    for w, _ in self._adj[v]:
                        if not seen[w]:
                            seen[w] = True
                            queue.append(w)
                comps.append(sorted(comp))
            self._components = comps
        return self._components

    def is_connected(self) -> bool:
        return len(self.components()) == 1

    def __repr__(self):
        return (f"WeightedGraph(n={self.n}, edges={len(self.edges)}"
                + (f", name={self.name!r}" if self.name else "") + ")")


def validate(graph: WeightedGraph) -> WeightedGraph:
    """Re-check all invariants, compute components, and return the graph.

    Construction already enforces the invariants; this is the explicit entry
    point used after file ingestion, and it makes the connectivity report
    available on the returned object.
    """
    if np.any(graph.mu <= 0) or not np.all(np.isfinite(graph.mu)):
        raise NonpositiveMeasure("vertex measure must be positive and finite")
    for i, j, b in graph.edges:
        if b < 0:
            raise NegativeWeight(f"b({i},{j}) = {b}")
        if i == j:
            raise SelfLoop(f"b({i},{i}) = {b}")
    graph.components()
    return graph


def require_connected(graph: WeightedGraph) -> None:
    comps = graph.components()
    if len(comps) > 1:
        raise DisconnectedGraph(
            f"graph has {len(comps)} components; strict kernel positivity "
            "cannot be certified")


# ----------------------------------------------------------- Laplacian ops


def laplacian_apply(graph: WeightedGraph, f, x) -> complex:
    """(L f)(x) = -(1/mu(x)) * sum_y b(x,y) * (f(x) - f(y))."""
    x = graph.resolve(x)
    vals = _as_values(f, graph.n)
    acc = 0.0
    for y, b in graph.neighbors(x):
        acc += b * (vals[x] - vals[y])
    out = -acc / graph.mu[x]
    return complex(out) if np.iscomplexobj(vals) else float(out)


def weighted_degree(graph: WeightedGraph, x) -> float:
    return graph.degree(x)


def connected_components(graph: WeightedGraph) -> list[list[int]]:
    return graph.components()


def dirichlet_energy(graph: WeightedGraph, f) -> float:
    """Q(f) = (1/2) * sum_{x,y} b(x,y) |f(x)-f(y)|^2 = <f, Hf>_mu."""
    vals = _as_values(f, graph.n)
    acc = 0.0
    for i, j, b in graph.edges:
        acc += b * abs(vals[i] - vals[j]) ** 2
    return float(acc)


# ------------------------------------------------------------- file format


def _parse_text(text: str, name_hint: str) -> WeightedGraph:
    name = name_hint
    vertices: dict[int, float] = {}
    edges: list[tuple[int, int, float]] = []
    labels: dict[int, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "graph":
                name = " ".join(parts[1:]) or name
            elif parts[0] == "v":
                if len(parts) not in (3, 4):
                    raise ValueError("expected: v <id> <mu> [label]")
                vid = int(parts[1])
                if vid in vertices:
                    raise ValueError(f"duplicate vertex {vid}")
                vertices[vid] = float(parts[2])
                if len(parts) == 4:
                    labels[vid] = parts[3]
            elif parts[0] == "e":
                if len(parts) != 4:
                    raise ValueError("expected: e <id> <id> <b>")
                edges.append((int(parts[1]), int(parts[2]), float(parts[3])))
            else:
                raise ValueError(f"unknown record {parts[0]!r}")
        except ValueError as exc:
            raise InputError(f"line {lineno}: {exc}") from None
    if not vertices:
        raise InputError("no vertices declared")
    ids = sorted(vertices)
    if ids != list(range(len(ids))):
        raise InputError(f"vertex ids must form 0..{len(ids) - 1}, got {ids}")
    mu = [vertices[i] for i in ids]
    lab = [labels.get(i, str(i)) for i in ids]
    return WeightedGraph(mu, edges, labels=lab, name=name)


def _parse_structured(doc: dict, name_hint: str) -> WeightedGraph:
    if not isinstance(doc, dict) or "vertices" not in doc:
        raise InputError("structured graph document needs a 'vertices' array")
    verts = doc["vertices"]
    entries = []
    for item in verts:
        if isinstance(item, dict):
            entries.append((int(item["id"]), float(item["mu"]),
                            item.get("label")))
        else:
            vid, m = item[0], item[1]
            entries.append((int(vid), float(m), None))
    ids = sorted(e[0] for e in entries)
    if ids != list(range(len(ids))):
        raise InputError(f"vertex ids must form 0..{len(ids) - 1}, got {ids}")
    mu = [0.0] * len(ids)
    labels = [None] * len(ids)
    for vid, m, lab in entries:
        mu[vid] = m
        labels[vid] = lab if lab is not None else str(vid)
    edges = []
    for item in doc.get("edges", []):
        if isinstance(item, dict):
            edges.append((int(item["u"]), int(item["v"]), float(item["b"])))
        else:
            edges.append((int(item[0]), int(item[1]), float(item[2])))
    return WeightedGraph(mu, edges, labels=labels,
                         name=str(doc.get("name", name_hint)))


def loads_graph(text: str, name_hint: str = "") -> WeightedGraph:
    """Parse a graph from either the line format or a JSON document.

    Line format:  ``graph <name>`` / ``v <id> <mu>`` / ``e <id> <id> <b>``.
    JSON format:  one object with ``vertices`` and ``edges`` arrays.
    """
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON graph document: {exc}") from None
        return validate(_parse_structured(doc, name_hint))
    return validate(_parse_text(text, name_hint))


def load_graph(path) -> WeightedGraph:
    """Load and validate a graph file (text or JSON, sniffed by content)."""
    from pathlib import Path

    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise InputError(f"cannot read graph file {p}: {exc}") from None
    return loads_graph(text, name_hint=p.stem)


def dumps_graph(graph: WeightedGraph) -> str:
    """Serialize to the line format (round-trips through loads_graph)."""
    lines = [f"graph {graph.name}" if graph.name else "graph g"]
    for i in range(graph.n):
        if graph.labels[i] != str(i):
            lines.append(f"v {i} {float(graph.mu[i])!r} {graph.labels[i]}")
        else:
            lines.append(f"v {i} {float(graph.mu[i])!r}")
    for i, j, b in graph.edges:
        lines.append(f"e {i} {j} {float(b)!r}")
    return "\n".join(lines) + "\n"


def save_graph(graph: WeightedGraph, path) -> None:
    from pathlib import Path

    Path(path).write_text(dumps_graph(graph))
