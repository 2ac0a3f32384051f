"""Genus certificates: Euler-formula intervals and an exact rotation-system search.

Genus is additive over components and unchanged by pruning pendant trees,
so both routines work component by component on the 2-core.  Parallel
edges are collapsed first; they never change the genus.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass

import numpy as np

from .graph_core import BipartiteGraph, Graph, SimpleGraph, _flat, component_table, two_core_mask
from .structure import DEFAULT_MAX_STATES, WorkLimitExceeded, short_cycle_counts

__all__ = [
    "GenusInterval",
    "DEFAULT_J_RANGE",
    "DEFAULT_EXACT_MAX_STATES",
    "face_upper_bound",
    "genus_interval",
    "exact_genus_small",
    "rotation_system_count",
]

DEFAULT_J_RANGE = (2, 3, 4, 5)
DEFAULT_EXACT_MAX_STATES = 10**7


@dataclass(frozen=True)
class GenusInterval:
    lower: int
    upper: int
    point_estimate: float
    face_upper_bound: int
    j_star: int | None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class _ComplexParts:
    """Per-component quantities needed by the face bound."""

    kappa: int
    trees: int
    unicyclic: int
    excess: np.ndarray       # per component
    complex_ids: np.ndarray
    core_edges: np.ndarray   # per complex component, edges of its 2-core
    core_paths: np.ndarray   # per complex component, N1-centred 2-paths in the 2-core
    bipartite: bool
    e: int
    v: int


def _simplify(g: Graph) -> Graph:
    return g.to_simple() if isinstance(g, SimpleGraph) else g


def _parts(g: Graph) -> _ComplexParts:
    n, split, a, b = _flat(g)
    t = component_table(g)
    k = t.kappa
    exc = t.excess
    cx = np.flatnonzero(exc >= 2)
    core = two_core_mask(n, a, b)
    ce = core[a] & core[b]
    lab_e = t.label[a]
    e_core = np.bincount(lab_e[ce], minlength=k)
    bip = isinstance(g, BipartiteGraph)
    if bip:
        dcore = np.bincount(a[ce], minlength=n)
        paths = np.bincount(t.label[:split], weights=dcore[:split] * (dcore[:split] - 1) // 2, minlength=k)
        paths = paths.astype(np.int64)
    else:
        paths = np.zeros(k, dtype=np.int64)
    return _ComplexParts(
        kappa=k,
        trees=int((exc == 0).sum()),
        unicyclic=int((exc == 1).sum()),
        excess=exc,
        complex_ids=cx,
        core_edges=e_core[cx],
        core_paths=paths[cx],
        bipartite=bip,
        e=int(a.size),
        v=n,
    )


def _complex_face_bounds(g: Graph, parts: _ComplexParts, js: tuple[int, ...],
                         max_states: int) -> np.ndarray:
    """Face bounds for every complex component (rows) and every ``j`` (columns)."""
    e_core = parts.core_edges
    if parts.bipartite:
        # bipartite face walks in a 2-core have even length >= 4
        cap = e_core // 2
    else:
        cap = (2 * e_core) // 3
    out = np.tile(cap[:, None], (1, len(js))) if js else cap[:, None].copy()
    if not js or parts.complex_ids.size == 0:
        return out
    max_len = 2 * max(js)
    _, per = short_cycle_counts(g, max_len, max_states)
    cx = parts.complex_ids.tolist()
    for col, j in enumerate(js):
        n_cyc = np.array([sum(c for L, c in per.get(cid, {}).items() if L <= 2 * j) for cid in cx],
                         dtype=np.int64)
        if parts.bipartite:
            long_faces = np.minimum(2 * e_core, 2 * parts.core_paths) // (j + 1)
        else:
            long_faces = (2 * e_core) // (2 * j + 1)
        out[:, col] = np.minimum(2 * n_cyc + long_faces, cap)
    return out


def _check_j(js) -> tuple[int, ...]:
    js = tuple(int(j) for j in js)
    if any(j < 2 for j in js):
        raise ValueError("j must be at least 2")
    return js


def face_upper_bound(g: Graph, j: int, max_states: int = DEFAULT_MAX_STATES) -> int:
    """Instance upper bound on the face count of a minimum-genus embedding.

    Trees contribute one face, unicyclic components two; each complex
    component contributes ``2 * (cycles of length <= 2j) + long-face term``,
    capped by the face-length bound.
    """
    g = _simplify(g)
    js = _check_j([j])
    parts = _parts(g)
    fc = _complex_face_bounds(g, parts, js, max_states)
    return int(parts.trees + 2 * parts.unicyclic + fc[:, 0].sum())


def genus_interval(g: Graph, j_range=DEFAULT_J_RANGE, max_states: int = DEFAULT_MAX_STATES) -> GenusInterval:
    """Certified bounds ``lower <= genus(g) <= upper``.

    An empty ``j_range`` uses the face-length cap alone and reports
    ``j_star = None``.
    """
    g = _simplify(g)
    js = _check_j(j_range)
    parts = _parts(g)
    fc = _complex_face_bounds(g, parts, js, max_states)
    base = parts.trees + 2 * parts.unicyclic
    totals = base + fc.sum(axis=0)
    col = int(np.argmin(totals))
    f_star = fc[:, col]
    exc_cx = parts.excess[parts.complex_ids]
    # per component: genus >= (e - v + 2 - f) / 2 = (excess + 1 - f) / 2
    need = exc_cx + 1 - f_star
    lower = int(np.maximum(0, (need + 1) // 2).sum())
    upper = int((parts.excess // 2).sum())
    point = (parts.e - parts.v + parts.kappa) / 2
    return GenusInterval(lower, upper, point, int(totals[col]), js[col] if js else None)


# ---------------------------------------------------------------------------
# exact search over rotation systems


def rotation_system_count(g: Graph) -> int:
    """Number of rotation systems on the 2-cores of the complex components."""
    g = _simplify(g)
    n, _, a, b = _flat(g)
    core = two_core_mask(n, a, b)
    ce = core[a] & core[b]
    deg = np.bincount(np.concatenate([a[ce], b[ce]]), minlength=n)
    t = component_table(g)
    total = 0
    for c in np.flatnonzero(t.excess >= 2).tolist():
        prod = 1
        for d in deg[(t.label == c) & core].tolist():
            prod *= math.factorial(max(d - 1, 0)) or 1
        total += prod
    return total


def _count_cycles(phi: np.ndarray) -> np.ndarray:
    """Cycle counts of a batch of permutations (rows) by pointer doubling."""
    B, D = phi.shape
    lab = np.broadcast_to(np.arange(D), (B, D)).copy()
    p = phi.copy()
    span = 1
    while span < D:
        lab = np.minimum(lab, np.take_along_axis(lab, p, axis=1))
        p = np.take_along_axis(p, p, axis=1)
        span *= 2
    return (lab == np.arange(D)).sum(axis=1)


def _max_faces(nv: int, ea: list[int], eb: list[int], bipartite: bool) -> int:
    m = len(ea)
    D = 2 * m
    out: list[list[int]] = [[] for _ in range(nv)]
    for i, (x, y) in enumerate(zip(ea, eb)):
        out[x].append(2 * i)
        out[y].append(2 * i + 1)
    theta = np.arange(D) ^ 1
    f_cap = min(m - nv + 2, (2 * m) // (4 if bipartite else 3))

    base = np.arange(D)
    slots = []
    mirrored = False
    for darts in out:
        k = len(darts)
        if k == 2:
            base[darts[0]], base[darts[1]] = darts[1], darts[0]
            continue
        rest = list(itertools.permutations(range(1, k)))
        if not mirrored:
            # reversing every rotation mirrors the embedding: keep one of each pair
            rest = [r for r in rest if r[0] < r[-1]]
            mirrored = True
        succ = np.empty((len(rest), k), dtype=np.int64)
        dv = np.asarray(darts)
        for row, r in enumerate(rest):
            cyc = (0,) + r
            for pos in range(k):
                succ[row, cyc[pos]] = dv[cyc[(pos + 1) % k]]
        slots.append((dv, succ))

    total = math.prod(s[1].shape[0] for s in slots)
    batch = max(1, (1 << 20) // max(D, 1))
    best = -1
    for start in range(0, total, batch):
        idx = np.arange(start, min(total, start + batch), dtype=np.int64)
        sig = np.tile(base, (idx.size, 1))
        rem = idx
        for dv, succ in slots:
            r = succ.shape[0]
            sig[:, dv] = succ[rem % r]
            rem = rem // r
        faces = _count_cycles(sig[:, theta])
        chi = nv - m + faces
        if np.any(chi % 2) or np.any(chi > 2):
            raise RuntimeError("face tracing produced an impossible Euler characteristic")
        best = max(best, int(faces.max()))
        if best >= f_cap:
            break
    return best


def exact_genus_small(g: Graph, max_states: int = DEFAULT_EXACT_MAX_STATES) -> int:
    """Orientable genus by exhaustive search over rotation systems.

    Raises ``WorkLimitExceeded`` when the rotation systems on the 2-cores of
    the complex components number more than ``max_states``.
    """
    g = _simplify(g)
    states = rotation_system_count(g)
    if states > max_states:
        raise WorkLimitExceeded(f"{states} rotation systems exceed the limit {max_states}")
    n, _, a, b = _flat(g)
    core = two_core_mask(n, a, b)
    ce = core[a] & core[b]
    t = component_table(g)
    lab_e = t.label[a]
    bip = isinstance(g, BipartiteGraph)
    genus = 0
    for c in np.flatnonzero(t.excess >= 2).tolist():
        sel = ce & (lab_e == c)
        ca, cb = a[sel], b[sel]
        verts = np.unique(np.concatenate([ca, cb]))
        la = np.searchsorted(verts, ca).tolist()
        lb = np.searchsorted(verts, cb).tolist()
        nv, m = verts.size, len(la)
        f = _max_faces(nv, la, lb, bip)
        genus += (2 - nv + m - f) // 2
    return genus
