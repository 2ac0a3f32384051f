"""2-centre projection of a bipartite graph onto its first side."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph_core import BipartiteGraph, SimpleGraph, _frozen

__all__ = ["ProjectionReport", "two_centre"]


@dataclass(frozen=True)
class ProjectionReport:
    """2-centre ``h`` plus the bookkeeping that bounds the genus gap.

    ``h3`` is the multigraph before parallel classes are collapsed;
    ``multiplicity_histogram`` maps a class size to the number of classes
    of that size.
    """

    h: SimpleGraph
    z_count: int
    multiplicity_histogram: dict[int, int]
    v1_count: int
    v2_count: int
    h3: SimpleGraph

    def to_dict(self) -> dict:
        return {
            "n": self.h.n,
            "h_edges": self.h.m,
            "h3_edges": self.h3.m,
            "z_count": self.z_count,
            "multiplicity_histogram": {str(k): v for k, v in sorted(self.multiplicity_histogram.items())},
            "v1_count": self.v1_count,
            "v2_count": self.v2_count,
        }


def two_centre(g: BipartiteGraph) -> ProjectionReport:
    """Join ``x, y`` in N1 whenever some degree-2 vertex of N2 sees exactly ``{x, y}``."""
    deg = g.deg2
    v1_count = int((deg <= 1).sum())
    high = deg >= 3
    v2_count = int(high.sum())
    z_count = int(deg[high].sum())

    # edges are sorted by (u, w); regroup by w so each degree-2 vertex yields one pair
    order = np.lexsort((g.u, g.w))
    w_sorted = g.w[order]
    u_sorted = g.u[order]
    keep = deg[w_sorted] == 2
    pairs = u_sorted[keep].reshape(-1, 2)
    x = pairs[:, 0]
    y = pairs[:, 1]
    assert np.all(x < y), "degree-2 vertex with a repeated neighbour"

    keys = x * g.n1 + y
    uniq, counts = np.unique(keys, return_counts=True)
    ha, hb = uniq // g.n1, uniq % g.n1
    h = SimpleGraph(g.n1, _frozen(ha), _frozen(hb))
    h3 = SimpleGraph(g.n1, _frozen(ha), _frozen(hb), _frozen(counts))
    sizes, freq = np.unique(counts, return_counts=True)
    hist = {int(s): int(f) for s, f in zip(sizes, freq)}
    return ProjectionReport(h, z_count, hist, v1_count, v2_count, h3)
