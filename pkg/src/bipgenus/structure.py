"""Component classification and the counting statistics built on it.

Logarithms are natural throughout.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .graph_core import (
    COMPLEX,
    TREE,
    UNICYCLIC,
    BipartiteGraph,
    ComponentSummary,
    ComponentTable,
    Graph,
    _flat,
    component_table,
    two_core_mask,
)

__all__ = [
    "ClassifierThresholds",
    "StructureReport",
    "WorkLimitExceeded",
    "DEFAULT_MAX_STATES",
    "small_limit",
    "gap_upper_limit",
    "component_flags",
    "classify_components",
    "structure_report",
    "s_paths",
    "Kernel",
    "build_kernel",
    "short_cycle_counts",
    "count_short_cycles",
    "johansson_gap_check",
]

DEFAULT_MAX_STATES = 10**8


class WorkLimitExceeded(RuntimeError):
    """Cycle enumeration would visit more states than allowed; lower ``j``."""


@dataclass(frozen=True)
class ClassifierThresholds:
    beta0: float = 1.0
    beta1: float = 1.0
    balance_factor: float = 2.0

    def __post_init__(self):
        for name in ("beta0", "beta1", "balance_factor"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be a positive real, got {v}")


@dataclass(frozen=True)
class StructureReport:
    kappa: int
    kappa_isolated: int
    kappa_tree: int
    kappa_unicyclic: int
    kappa_complex: int
    kappa_small_balanced_tree: int
    largest_n1_intersection: int
    second_largest_n1_intersection: int
    s_paths: int
    edge_count: int
    vertex_count: int

    def to_dict(self) -> dict:
        return asdict(self)


def small_limit(n1: int, th: ClassifierThresholds) -> float:
    return th.beta0 * math.log(n1) ** 2


def gap_upper_limit(n1: int, th: ClassifierThresholds) -> float:
    return th.beta1 * math.sqrt(n1 * math.log(n1))


def s_paths(g: BipartiteGraph) -> int:
    """Number of 2-paths with both endpoints in N1."""
    d = g.deg2.astype(np.int64)
    return int((d * (d - 1) // 2).sum())


def component_flags(t: ComponentTable, n1: int, n2: int, p: float,
                    th: ClassifierThresholds) -> tuple[np.ndarray, np.ndarray]:
    """``(is_small, is_balanced)`` per component.

    A single-vertex component counts as balanced: an isolated N2 vertex is a
    tree component on (0, 1) vertices and belongs to the tree-component
    count that the limiting density describes.
    """
    small = t.n1_count <= small_limit(n1, th)
    balanced = (t.n2_count <= th.balance_factor * p * n2 * t.n1_count) | (t.order == 1)
    return small, balanced


def _validate(g: BipartiteGraph, p: float) -> None:
    if not isinstance(g, BipartiteGraph):
        raise TypeError("classification needs a BipartiteGraph")
    if g.n1 < 2:
        raise ValueError("classification needs n1 >= 2")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p}")


def _report(g: BipartiteGraph, t: ComponentTable, small, balanced) -> StructureReport:
    codes = t.class_codes()
    tops = np.sort(t.n1_count)[::-1]
    return StructureReport(
        kappa=t.kappa,
        kappa_isolated=int((t.order == 1).sum()),
        kappa_tree=int((codes == 0).sum()),
        kappa_unicyclic=int((codes == 1).sum()),
        kappa_complex=int((codes == 2).sum()),
        kappa_small_balanced_tree=int(((codes == 0) & small & balanced).sum()),
        largest_n1_intersection=int(tops[0]) if tops.size else 0,
        second_largest_n1_intersection=int(tops[1]) if tops.size > 1 else 0,
        s_paths=s_paths(g),
        edge_count=g.m,
        vertex_count=g.n,
    )


def structure_report(g: BipartiteGraph, p: float, th: ClassifierThresholds | None = None,
                     table: ComponentTable | None = None) -> StructureReport:
    """Aggregate statistics only; avoids materialising per-component records."""
    th = th or ClassifierThresholds()
    _validate(g, p)
    t = table if table is not None else component_table(g)
    small, balanced = component_flags(t, g.n1, g.n2, p, th)
    return _report(g, t, small, balanced)


def classify_components(g: BipartiteGraph, p: float, th: ClassifierThresholds | None = None,
                        ) -> tuple[list[ComponentSummary], StructureReport]:
    th = th or ClassifierThresholds()
    _validate(g, p)
    t = component_table(g)
    small, balanced = component_flags(t, g.n1, g.n2, p, th)
    names = (TREE, UNICYCLIC, COMPLEX)
    codes = t.class_codes()
    exc = t.excess
    summaries = [
        ComponentSummary(i, int(t.n1_count[i]), int(t.n2_count[i]), int(t.edge_count[i]),
                         int(exc[i]), names[int(codes[i])], bool(small[i]), bool(balanced[i]))
        for i in range(t.kappa)
    ]
    return summaries, _report(g, t, small, balanced)


def johansson_gap_check(summaries: list[ComponentSummary] | ComponentTable, n1: int,
                        th: ClassifierThresholds | None = None) -> tuple[bool, list[int]]:
    """Check the gap in N1-intersection sizes of components.

    Passes when at most one component meets N1 in more than
    ``beta1 * sqrt(n1 log n1)`` vertices and none meets it in a number of
    vertices inside ``[beta0 log^2 n1, beta1 sqrt(n1 log n1)]``.  Returns the
    flag together with the offending sizes (sorted).
    """
    th = th or ClassifierThresholds()
    if isinstance(summaries, ComponentTable):
        sizes = summaries.n1_count
    else:
        sizes = np.array([c.verts_n1 for c in summaries], dtype=np.int64)
    lo, hi = small_limit(n1, th), gap_upper_limit(n1, th)
    in_gap = sizes[(sizes >= lo) & (sizes <= hi)]
    giants = sizes[sizes > hi]
    bad = sorted(in_gap.tolist())
    if giants.size > 1:
        bad += sorted(giants.tolist())
    return (in_gap.size == 0 and giants.size <= 1), bad


# ---------------------------------------------------------------------------
# short cycles


@dataclass(frozen=True)
class Kernel:
    """Degree-2 chains of the 2-core contracted to weighted edges.

    ``adj[v]`` lists ``(neighbour, edge_id, length)``; ``loops`` holds
    ``(vertex, length)``; ``ring_lengths`` are the lengths of 2-core
    components that are bare cycles.  ``vertex`` maps kernel indices back to
    flat graph vertices.
    """

    vertex: np.ndarray
    adj: list
    loops: list
    ring_lengths: list
    ring_vertex: list


def build_kernel(n: int, a: np.ndarray, b: np.ndarray) -> Kernel:
    alive = two_core_mask(n, a, b)
    keep = alive[a] & alive[b]
    ca, cb = a[keep], b[keep]
    deg = np.bincount(ca, minlength=n) + np.bincount(cb, minlength=n)
    branch = np.flatnonzero(deg >= 3)
    kid = np.full(n, -1, dtype=np.int64)
    kid[branch] = np.arange(branch.size)

    # incidence lists over core edges
    m = ca.size
    src = np.concatenate([ca, cb])
    dst = np.concatenate([cb, ca])
    eidx = np.concatenate([np.arange(m), np.arange(m)])
    order = np.argsort(src, kind="stable")
    src, dst, eidx = src[order], dst[order], eidx[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    dst_l, eidx_l, ip = dst.tolist(), eidx.tolist(), indptr.tolist()
    kid_l = kid.tolist()

    used = bytearray(m)
    adj: list[list[tuple[int, int, int]]] = [[] for _ in range(branch.size)]
    loops: list[tuple[int, int]] = []
    next_id = 0
    for v in branch.tolist():
        kv = kid_l[v]
        for slot in range(ip[v], ip[v + 1]):
            e = eidx_l[slot]
            if used[e]:
                continue
            used[e] = 1
            prev, x, length = v, dst_l[slot], 1
            while kid_l[x] < 0:
                # x has core degree 2: continue through its other edge
                s0 = ip[x]
                e0, e1 = eidx_l[s0], eidx_l[s0 + 1]
                if not used[e0]:
                    nxt_slot = s0
                elif not used[e1]:
                    nxt_slot = s0 + 1
                else:  # pragma: no cover - would need a chain closing on itself
                    raise AssertionError("chain traversal lost its way")
                used[eidx_l[nxt_slot]] = 1
                prev, x = x, dst_l[nxt_slot]
                length += 1
            kx = kid_l[x]
            if kx == kv:
                loops.append((kv, length))
            else:
                adj[kv].append((kx, next_id, length))
                adj[kx].append((kv, next_id, length))
            next_id += 1

    # bare cycles: core components made only of degree-2 vertices
    ring_lengths, ring_vertex = [], []
    rest = np.flatnonzero(~np.asarray(used, dtype=bool))
    if rest.size:
        seen = set()
        for e in rest.tolist():
            if e in seen:
                continue
            start = int(ca[e])
            length, prev, x = 0, -1, start
            cur_e = e
            while True:
                seen.add(cur_e)
                length += 1
                y = int(cb[cur_e]) if int(ca[cur_e]) == x else int(ca[cur_e])
                if y == start:
                    break
                s0 = ip[y]
                e0, e1 = eidx_l[s0], eidx_l[s0 + 1]
                cur_e = e1 if e0 == cur_e else e0
                prev, x = x, y
            ring_lengths.append(length)
            ring_vertex.append(start)
    return Kernel(branch, adj, loops, ring_lengths, ring_vertex)


def _enumerate(kernel: Kernel, max_len: int, max_states: int, on_cycle) -> int:
    """Call ``on_cycle(root_kernel_vertex, length)`` once per cycle."""
    for kv, length in kernel.loops:
        if length <= max_len:
            on_cycle(kv, length)
    adj = kernel.adj
    k = len(adj)
    onpath = bytearray(k)
    states = 0
    for r in range(k):
        onpath[r] = 1
        stack = [[r, 0, 0]]
        first_eid = -1
        while stack:
            top = stack[-1]
            v, i, length = top
            nbrs = adj[v]
            if i == len(nbrs):
                stack.pop()
                if v != r:
                    onpath[v] = 0
                continue
            top[1] = i + 1
            x, eid, el = nbrs[i]
            nl = length + el
            if x == r:
                if len(stack) > 1 and eid > first_eid and nl <= max_len:
                    on_cycle(r, nl)
                continue
            if x < r or onpath[x] or nl >= max_len:
                continue
            if len(stack) == 1:
                first_eid = eid
            onpath[x] = 1
            stack.append([x, 0, nl])
            states += 1
            if states > max_states:
                raise WorkLimitExceeded(
                    f"short-cycle enumeration exceeded {max_states} states (max length {max_len})")
        onpath[r] = 0
    return states


def short_cycle_counts(g: Graph, max_len: int, max_states: int = DEFAULT_MAX_STATES,
                       ) -> tuple[dict[int, int], dict[int, dict[int, int]]]:
    """Exact numbers of cycles of each length ``<= max_len``.

    Returns the global histogram and a per-component breakdown keyed by the
    component id of ``component_table(g)``.
    """
    n, _, a, b = _flat(g)
    if hasattr(g, "multiplicity") and g.multiplicity is not None:
        a, b = g.a, g.b  # parallel copies do not create cycles of length >= 3
    kernel = build_kernel(n, a, b)
    label = component_table(g).label
    total: dict[int, int] = {}
    per: dict[int, dict[int, int]] = {}

    def add(comp: int, length: int) -> None:
        total[length] = total.get(length, 0) + 1
        bucket = per.setdefault(comp, {})
        bucket[length] = bucket.get(length, 0) + 1

    for length, v in zip(kernel.ring_lengths, kernel.ring_vertex):
        if length <= max_len:
            add(int(label[v]), length)
    kvert = kernel.vertex.tolist()
    lab = label.tolist()
    _enumerate(kernel, max_len, max_states, lambda r, length: add(lab[kvert[r]], length))
    return total, per


def count_short_cycles(g: Graph, j: int, max_states: int = DEFAULT_MAX_STATES) -> dict[int, int]:
    """Cycle counts by length up to ``2j``.

    Bipartite input reports the even lengths ``4, 6, ..., 2j``; a simple
    graph reports every length ``3..2j``.  Raises ``WorkLimitExceeded`` when
    the search grows beyond ``max_states``.
    """
    if j < 2:
        raise ValueError("j must be at least 2")
    total, _ = short_cycle_counts(g, 2 * j, max_states)
    lengths = range(4, 2 * j + 1, 2) if isinstance(g, BipartiteGraph) else range(3, 2 * j + 1)
    return {L: total.get(L, 0) for L in lengths}
