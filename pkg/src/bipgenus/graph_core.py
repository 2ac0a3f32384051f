"""Sparse graph containers, connectivity and per-component profiles.

Vertices are dense integers.  For a bipartite graph the classes are
``N1 = 0..n1-1`` and ``N2 = 0..n2-1``; when a single flat index is needed,
N2 vertex ``w`` becomes ``n1 + w``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, TextIO, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _cc_labels

__all__ = [
    "GraphError",
    "BipartiteGraph",
    "SimpleGraph",
    "ComponentSummary",
    "ComponentTable",
    "TREE",
    "UNICYCLIC",
    "COMPLEX",
    "build_bipartite",
    "build_simple",
    "component_table",
    "connected_components",
    "two_core_mask",
    "dumps",
    "loads",
    "write_graph",
    "read_graph",
]

TREE, UNICYCLIC, COMPLEX = "tree", "unicyclic", "complex"


class GraphError(ValueError):
    """Invalid graph input (range, duplicates, self-loops, malformed file)."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.int64)
    a.flags.writeable = False
    return a


def _csr(n: int, a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric CSR (indptr, indices) with neighbour lists sorted ascending."""
    src = np.concatenate([a, b])
    dst = np.concatenate([b, a])
    order = np.lexsort((dst, src))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return _frozen(indptr), _frozen(dst[order])


@dataclass(frozen=True, eq=False)
class BipartiteGraph:
    """Simple bipartite graph between N1 (size ``n1``) and N2 (size ``n2``).

    ``u[i]`` in N1 and ``w[i]`` in N2 are the endpoints of edge ``i``; edges
    are stored sorted lexicographically by ``(u, w)``.  Instances are
    immutable and safe to share between workers.
    """

    n1: int
    n2: int
    u: np.ndarray
    w: np.ndarray

    @property
    def m(self) -> int:
        return int(self.u.size)

    @property
    def n(self) -> int:
        return self.n1 + self.n2

    @property
    def edges(self) -> np.ndarray:
        """(m, 2) array of ``(u, w)`` pairs."""
        return np.column_stack([self.u, self.w])

    def edge_set(self) -> set[tuple[int, int]]:
        return set(zip(self.u.tolist(), self.w.tolist()))

    @cached_property
    def deg1(self) -> np.ndarray:
        return _frozen(np.bincount(self.u, minlength=self.n1))

    @cached_property
    def deg2(self) -> np.ndarray:
        return _frozen(np.bincount(self.w, minlength=self.n2))

    @property
    def degrees(self) -> np.ndarray:
        """Flat degree vector (N1 first, then N2)."""
        return np.concatenate([self.deg1, self.deg2])

    def flat_edges(self) -> tuple[np.ndarray, np.ndarray]:
        return self.u, self.w + self.n1

    @cached_property
    def _adj(self) -> tuple[np.ndarray, np.ndarray]:
        a, b = self.flat_edges()
        return _csr(self.n, a, b)

    def neighbors(self, v: int) -> np.ndarray:
        """Neighbours of flat vertex ``v`` (flat indices)."""
        indptr, indices = self._adj
        return indices[indptr[v]:indptr[v + 1]]

    def neighbors_n1(self, x: int) -> np.ndarray:
        """N2-indices adjacent to N1 vertex ``x``."""
        return self.neighbors(x) - self.n1

    def neighbors_n2(self, w: int) -> np.ndarray:
        """N1-indices adjacent to N2 vertex ``w``."""
        return self.neighbors(self.n1 + w)

    def adjacency(self) -> tuple[np.ndarray, np.ndarray]:
        """Flat symmetric CSR ``(indptr, indices)``."""
        return self._adj

    def to_simple(self) -> "SimpleGraph":
        """Flatten to a simple graph on ``n1 + n2`` vertices."""
        a, b = self.flat_edges()
        return SimpleGraph(self.n, _frozen(a), _frozen(b))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BipartiteGraph):
            return NotImplemented
        return (self.n1, self.n2) == (other.n1, other.n2) and np.array_equal(
            self.u, other.u) and np.array_equal(self.w, other.w)

    def __repr__(self) -> str:
        return f"BipartiteGraph(n1={self.n1}, n2={self.n2}, m={self.m})"


@dataclass(frozen=True, eq=False)
class SimpleGraph:
    """Undirected graph on ``0..n-1`` with edges ``a[i] < b[i]``.

    ``multiplicity`` is ``None`` for a simple graph; otherwise it holds the
    number of parallel copies of each listed edge (the intermediate
    multigraph of the 2-centre construction).
    """

    n: int
    a: np.ndarray
    b: np.ndarray
    multiplicity: np.ndarray | None = field(default=None)

    @property
    def m(self) -> int:
        """Edge count including parallel copies."""
        if self.multiplicity is None:
            return int(self.a.size)
        return int(self.multiplicity.sum())

    @property
    def edges(self) -> np.ndarray:
        return np.column_stack([self.a, self.b])

    def edge_set(self) -> set[tuple[int, int]]:
        return set(zip(self.a.tolist(), self.b.tolist()))

    def flat_edges(self) -> tuple[np.ndarray, np.ndarray]:
        if self.multiplicity is None:
            return self.a, self.b
        return np.repeat(self.a, self.multiplicity), np.repeat(self.b, self.multiplicity)

    @cached_property
    def degrees(self) -> np.ndarray:
        a, b = self.flat_edges()
        return _frozen(np.bincount(np.concatenate([a, b]), minlength=self.n))

    @cached_property
    def _adj(self) -> tuple[np.ndarray, np.ndarray]:
        return _csr(self.n, self.a, self.b)

    def neighbors(self, v: int) -> np.ndarray:
        indptr, indices = self._adj
        return indices[indptr[v]:indptr[v + 1]]

    def adjacency(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR over distinct neighbours (parallel copies collapsed)."""
        return self._adj

    def to_simple(self) -> "SimpleGraph":
        if self.multiplicity is None:
            return self
        return SimpleGraph(self.n, self.a, self.b)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SimpleGraph):
            return NotImplemented
        if self.n != other.n or not (np.array_equal(self.a, other.a) and np.array_equal(self.b, other.b)):
            return False
        if self.multiplicity is None or other.multiplicity is None:
            return self.multiplicity is None and other.multiplicity is None
        return np.array_equal(self.multiplicity, other.multiplicity)

    def __repr__(self) -> str:
        tag = "" if self.multiplicity is None else ", multigraph"
        return f"SimpleGraph(n={self.n}, m={self.m}{tag})"


Graph = Union[BipartiteGraph, SimpleGraph]


def _as_pairs(edge_list) -> np.ndarray:
    arr = np.asarray(edge_list, dtype=np.int64)
    if arr.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise GraphError("edge list must be a sequence of pairs")
    return arr


def build_bipartite(n1: int, n2: int, edge_list: Iterable[tuple[int, int]] | np.ndarray) -> BipartiteGraph:
    """Validate and freeze a bipartite edge list.

    Raises ``GraphError`` on an out-of-range endpoint or a repeated edge.
    """
    if n1 < 0 or n2 < 0:
        raise GraphError("partition sizes must be non-negative")
    arr = _as_pairs(edge_list)
    u, w = arr[:, 0], arr[:, 1]
    if arr.shape[0]:
        if u.min() < 0 or u.max() >= n1 or w.min() < 0 or w.max() >= n2:
            raise GraphError(f"endpoint out of range for n1={n1}, n2={n2}")
    key = u * max(n2, 1) + w
    order = np.argsort(key, kind="stable")
    key = key[order]
    if key.size > 1 and np.any(key[1:] == key[:-1]):
        i = int(np.flatnonzero(key[1:] == key[:-1])[0])
        raise GraphError(f"duplicate edge {tuple(arr[order[i]].tolist())}")
    return BipartiteGraph(int(n1), int(n2), _frozen(u[order]), _frozen(w[order]))


def _from_sorted_keys(n1: int, n2: int, keys: np.ndarray) -> BipartiteGraph:
    # keys are strictly increasing lexicographic indices u*n2 + w
    return BipartiteGraph(n1, n2, _frozen(keys // n2), _frozen(keys % n2))


def build_simple(n: int, edge_list, *, allow_parallel: bool = False) -> SimpleGraph:
    """Validate an undirected edge list on ``0..n-1``.

    Self-loops are always rejected.  Repeated pairs are rejected unless
    ``allow_parallel`` is set, in which case they become multiplicities.
    """
    if n < 0:
        raise GraphError("vertex count must be non-negative")
    arr = _as_pairs(edge_list)
    if arr.shape[0]:
        if arr.min() < 0 or arr.max() >= n:
            raise GraphError(f"endpoint out of range for n={n}")
        if np.any(arr[:, 0] == arr[:, 1]):
            raise GraphError("self-loop")
    a = np.minimum(arr[:, 0], arr[:, 1])
    b = np.maximum(arr[:, 0], arr[:, 1])
    key = a * max(n, 1) + b
    uniq, counts = np.unique(key, return_counts=True)
    if np.any(counts > 1) and not allow_parallel:
        dup = int(uniq[np.argmax(counts > 1)])
        raise GraphError(f"duplicate edge {(dup // n, dup % n)}")
    mult = None
    if np.any(counts > 1):
        mult = _frozen(counts)
    return SimpleGraph(int(n), _frozen(uniq // max(n, 1)), _frozen(uniq % max(n, 1)), mult)


# ---------------------------------------------------------------------------
# components


@dataclass(frozen=True)
class ComponentSummary:
    id: int
    verts_n1: int
    verts_n2: int
    edge_count: int
    excess: int
    cls: str
    is_small: bool = False
    is_balanced: bool = False

    @property
    def order(self) -> int:
        return self.verts_n1 + self.verts_n2


@dataclass(frozen=True)
class ComponentTable:
    """Column-oriented component profile, ordered by smallest flat vertex.

    ``label[v]`` gives the component id of flat vertex ``v``.
    """

    label: np.ndarray
    n1_count: np.ndarray
    n2_count: np.ndarray
    edge_count: np.ndarray

    @property
    def kappa(self) -> int:
        return int(self.n1_count.size)

    @property
    def order(self) -> np.ndarray:
        return self.n1_count + self.n2_count

    @property
    def excess(self) -> np.ndarray:
        return self.edge_count - self.order + 1

    def class_codes(self) -> np.ndarray:
        """0 tree, 1 unicyclic, 2 complex."""
        return np.minimum(self.excess, 2)


def _flat(g: Graph) -> tuple[int, int, np.ndarray, np.ndarray]:
    if isinstance(g, BipartiteGraph):
        a, b = g.flat_edges()
        return g.n, g.n1, a, b
    a, b = g.flat_edges()
    return g.n, g.n, a, b


def component_table(g: Graph) -> ComponentTable:
    """Label components once and tabulate sizes and edge counts.

    For a ``SimpleGraph`` all vertices count towards ``n1_count``.
    """
    n, split, a, b = _flat(g)
    if n == 0:
        z = np.zeros(0, dtype=np.int64)
        return ComponentTable(z, z, z, z)
    adj = coo_matrix((np.ones(a.size, dtype=np.int8), (a, b)), shape=(n, n))
    k, raw = _cc_labels(adj, directed=False)
    # relabel by smallest member so ordering is independent of the backend
    first = np.full(k, n, dtype=np.int64)
    np.minimum.at(first, raw, np.arange(n))
    rank = np.empty(k, dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(k)
    label = rank[raw]
    n1c = np.bincount(label[:split], minlength=k)
    n2c = np.bincount(label[split:], minlength=k)
    ec = np.bincount(label[a], minlength=k)
    return ComponentTable(_frozen(label), _frozen(n1c), _frozen(n2c), _frozen(ec))


def connected_components(g: Graph) -> list[ComponentSummary]:
    """Per-component summaries (size/excess/class only; no thresholds)."""
    t = component_table(g)
    names = (TREE, UNICYCLIC, COMPLEX)
    codes = t.class_codes()
    return [
        ComponentSummary(i, int(t.n1_count[i]), int(t.n2_count[i]), int(t.edge_count[i]),
                         int(t.excess[i]), names[int(codes[i])])
        for i in range(t.kappa)
    ]


def two_core_mask(n: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Boolean mask of vertices in the 2-core (parallel edges count twice)."""
    alive = np.ones(n, dtype=bool)
    live_edges = np.ones(a.size, dtype=bool)
    while True:
        ea, eb = a[live_edges], b[live_edges]
        deg = np.bincount(ea, minlength=n) + np.bincount(eb, minlength=n)
        drop = alive & (deg < 2)
        if not drop.any():
            return alive
        alive &= ~drop
        live_edges &= alive[a] & alive[b]


# ---------------------------------------------------------------------------
# text serialization:  "bipartite n1 n2 m" | "simple n m", then "u w" per line


def dumps(g: Graph) -> str:
    lines = []
    if isinstance(g, BipartiteGraph):
        lines.append(f"bipartite {g.n1} {g.n2} {g.m}")
        lines.extend(f"{x} {y}" for x, y in zip(g.u.tolist(), g.w.tolist()))
    else:
        lines.append(f"simple {g.n} {g.m}")
        a, b = g.flat_edges()
        lines.extend(f"{x} {y}" for x, y in zip(a.tolist(), b.tolist()))
    return "\n".join(lines) + "\n"


def loads(text: str) -> Graph:
    rows = text.split("\n")
    head = rows[0].split()
    body = [r for r in rows[1:] if r.strip()]
    try:
        pairs = [tuple(int(t) for t in r.split()) for r in body]
    except ValueError as exc:
        raise GraphError(f"malformed edge line: {exc}") from None
    if any(len(pr) != 2 for pr in pairs):
        raise GraphError("edge lines must hold exactly two integers")
    if not head:
        raise GraphError("missing header")
    if head[0] == "bipartite" and len(head) == 4:
        n1, n2, m = (int(t) for t in head[1:])
        g: Graph = build_bipartite(n1, n2, pairs)
    elif head[0] == "simple" and len(head) == 3:
        n, m = int(head[1]), int(head[2])
        g = build_simple(n, pairs, allow_parallel=True)
    else:
        raise GraphError(f"unrecognised header {rows[0]!r}")
    if g.m != m:
        raise GraphError(f"header declares {m} edges, found {g.m}")
    return g


def write_graph(g: Graph, fh: TextIO | str) -> None:
    if isinstance(fh, str):
        with open(fh, "w", encoding="ascii", newline="\n") as f:
            f.write(dumps(g))
    else:
        fh.write(dumps(g))


def read_graph(fh: TextIO | str) -> Graph:
    if isinstance(fh, str):
        with open(fh, encoding="ascii") as f:
            return loads(f.read())
    return loads(fh.read())
