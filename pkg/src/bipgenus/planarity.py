"""Left-right planarity test (DFS orientation plus conflict-pair partition).

Only the yes/no answer is produced; no embedding or Kuratowski witness.
Components whose cycle rank is at most 3 are planar outright (every
Kuratowski subdivision has cycle rank at least 4), so the LR machinery only
runs on the remaining components.
"""
from __future__ import annotations

import numpy as np

from .graph_core import BipartiteGraph, Graph, SimpleGraph, component_table

__all__ = ["is_planar", "lr_planar"]


class _Pair:
    """Conflict pair of intervals of return edges: [left.low, left.high, right.low, right.high]."""

    __slots__ = ("ll", "lh", "rl", "rh")

    def __init__(self, ll=None, lh=None, rl=None, rh=None):
        self.ll, self.lh, self.rl, self.rh = ll, lh, rl, rh

    def swap(self):
        self.ll, self.lh, self.rl, self.rh = self.rl, self.rh, self.ll, self.lh

    def left_empty(self):
        return self.ll is None and self.lh is None

    def right_empty(self):
        return self.rl is None and self.rh is None


def lr_planar(n: int, edges: list[tuple[int, int]]) -> bool:
    """LR test on a simple graph given by vertex count and edge list."""
    m = len(edges)
    if n < 3 or m < 9:
        return True
    if m > 3 * n - 6:
        return False
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, (x, y) in enumerate(edges):
        adj[x].append(i)
        adj[y].append(i)
    ends = edges

    height = [-1] * n
    parent_edge = [-1] * n
    src = [-1] * m
    dst = [-1] * m
    lowpt = [0] * m
    lowpt2 = [0] * m
    depth = [0] * m
    out: list[list[int]] = [[] for _ in range(n)]

    def finish_edge(v: int, e: int) -> None:
        depth[e] = 2 * lowpt[e] + (1 if lowpt2[e] < height[v] else 0)
        pe = parent_edge[v]
        if pe >= 0:
            if lowpt[e] < lowpt[pe]:
                lowpt2[pe] = min(lowpt[pe], lowpt2[e])
                lowpt[pe] = lowpt[e]
            elif lowpt[e] > lowpt[pe]:
                lowpt2[pe] = min(lowpt2[pe], lowpt[e])
            else:
                lowpt2[pe] = min(lowpt2[pe], lowpt2[e])

    # phase 1: orientation and lowpoints
    roots = []
    for s in range(n):
        if height[s] >= 0:
            continue
        height[s] = 0
        roots.append(s)
        stack = [[s, 0]]
        while stack:
            fr = stack[-1]
            v, i = fr
            if i == len(adj[v]):
                stack.pop()
                pe = parent_edge[v]
                if pe >= 0:
                    finish_edge(src[pe], pe)
                continue
            fr[1] = i + 1
            e = adj[v][i]
            if src[e] >= 0:
                continue
            x, y = ends[e]
            w = y if x == v else x
            src[e], dst[e] = v, w
            out[v].append(e)
            lowpt[e] = lowpt2[e] = height[v]
            if height[w] < 0:
                parent_edge[w] = e
                height[w] = height[v] + 1
                stack.append([w, 0])
            else:
                lowpt[e] = height[w]
                finish_edge(v, e)

    for v in range(n):
        out[v].sort(key=depth.__getitem__)

    # phase 2: constraint partition
    S: list[_Pair] = []
    stack_bottom: list[_Pair | None] = [None] * m
    lowpt_edge = [-1] * m
    ref: list[int | None] = [None] * m

    def top():
        return S[-1] if S else None

    def conflicting_left(P: _Pair, b: int) -> bool:
        return not P.left_empty() and lowpt[P.lh] > lowpt[b]

    def conflicting_right(P: _Pair, b: int) -> bool:
        return not P.right_empty() and lowpt[P.rh] > lowpt[b]

    def lowest(P: _Pair) -> int:
        if P.left_empty():
            return lowpt[P.rl]
        if P.right_empty():
            return lowpt[P.ll]
        return min(lowpt[P.ll], lowpt[P.rl])

    def add_constraints(ei: int, e: int) -> bool:
        P = _Pair()
        while True:
            Q = S.pop()
            if not Q.left_empty():
                Q.swap()
            if not Q.left_empty():
                return False
            if lowpt[Q.rl] > lowpt[e]:
                if P.right_empty():
                    P.rh = Q.rh
                else:
                    ref[P.rl] = Q.rh
                P.rl = Q.rl
            else:
                ref[Q.rl] = lowpt_edge[e]
            if top() is stack_bottom[ei]:
                break
        while S and (conflicting_left(S[-1], ei) or conflicting_right(S[-1], ei)):
            Q = S.pop()
            if conflicting_right(Q, ei):
                Q.swap()
            if conflicting_right(Q, ei):
                return False
            ref[P.rl] = Q.rh
            if Q.rl is not None:
                P.rl = Q.rl
            if P.left_empty():
                P.lh = Q.lh
            else:
                ref[P.ll] = Q.lh
            P.ll = Q.ll
        if not (P.left_empty() and P.right_empty()):
            S.append(P)
        return True

    def trim_back_edges(u: int) -> None:
        while S and lowest(S[-1]) == height[u]:
            S.pop()
        if not S:
            return
        P = S.pop()
        while P.lh is not None and dst[P.lh] == u:
            P.lh = ref[P.lh]
        if P.lh is None and P.ll is not None:
            ref[P.ll] = P.rl
            P.ll = None
        while P.rh is not None and dst[P.rh] == u:
            P.rh = ref[P.rh]
        if P.rh is None and P.rl is not None:
            ref[P.rl] = P.ll
            P.rl = None
        S.append(P)

    def after_edge(v: int, i: int, ei: int) -> bool:
        if lowpt[ei] < height[v]:
            e = parent_edge[v]
            if i == 0:
                lowpt_edge[e] = lowpt_edge[ei]
            elif not add_constraints(ei, e):
                return False
        return True

    for root in roots:
        stack = [[root, 0, False]]
        while stack:
            fr = stack[-1]
            v, i, resume = fr
            ov = out[v]
            if resume:
                fr[2] = False
                if not after_edge(v, i, ov[i]):
                    return False
                fr[1] = i + 1
                continue
            if i < len(ov):
                ei = ov[i]
                w = dst[ei]
                stack_bottom[ei] = top()
                if ei == parent_edge[w]:
                    fr[2] = True
                    stack.append([w, 0, False])
                    continue
                lowpt_edge[ei] = ei
                S.append(_Pair(rl=ei, rh=ei))
                if not after_edge(v, i, ei):
                    return False
                fr[1] = i + 1
                continue
            stack.pop()
            e = parent_edge[v]
            if e >= 0:
                u = src[e]
                trim_back_edges(u)
                if lowpt[e] < height[u] and S:
                    hl, hr = S[-1].lh, S[-1].rh
                    if hl is not None and (hr is None or lowpt[hl] > lowpt[hr]):
                        ref[e] = hl
                    else:
                        ref[e] = hr
    return True


def is_planar(g: Graph) -> bool:
    """True iff ``g`` embeds in the plane.

    Bipartite input is flattened to a simple graph on ``n1 + n2`` vertices.
    """
    bip = isinstance(g, BipartiteGraph)
    if isinstance(g, SimpleGraph):
        g = g.to_simple()
    t = component_table(g)
    exc = t.excess
    candidates = np.flatnonzero(exc >= 4)
    if candidates.size == 0:
        return True
    a, b = g.flat_edges()
    ea = t.label[a]
    for c in candidates.tolist():
        sel = ea == c
        ca, cb = a[sel], b[sel]
        verts = np.unique(np.concatenate([ca, cb]))
        nv, ne = verts.size, ca.size
        # planar simple bipartite graphs on nv >= 3 vertices have at most 2nv - 4 edges
        if bip and ne > 2 * nv - 4:
            return False
        la = np.searchsorted(verts, ca).tolist()
        lb = np.searchsorted(verts, cb).tolist()
        if not lr_planar(nv, list(zip(la, lb))):
            return False
    return True
