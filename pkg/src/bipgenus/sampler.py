"""Seeded samplers for G(n1, n2, p) and G(n, q).

Stream contract
---------------
Trial ``i`` of master seed ``s`` draws from
``numpy.random.Generator(PCG64(SeedSequence([s mod 2**64, i])))``; auxiliary
samples of the same trial use ``SeedSequence([s mod 2**64, i, stream])`` with
``stream >= 1``.
Potential edges are indexed lexicographically (``u * n2 + w`` for the
bipartite model, row-major over ``i < j`` for G(n, q)).  In the sparse
branch each uniform ``U`` (taken as ``1 - random()`` so that ``U`` lies in
``(0, 1]``) yields a gap ``floor(log U / log(1 - p))`` to the next present
edge; the dense branch draws one uniform per potential edge and keeps it
when it is below ``p``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph_core import BipartiteGraph, SimpleGraph, _frozen, _from_sorted_keys

__all__ = [
    "SeedSpec",
    "DENSE_THRESHOLD",
    "rng_for",
    "skip_positions",
    "bernoulli_positions",
    "sample_positions",
    "sample_bipartite",
    "sample_binomial_graph",
    "unrank_pairs",
]

DENSE_THRESHOLD = 0.1
_INDEX_LIMIT = 2**62


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    trial_index: int = 0
    stream: int = 0

    def generator(self) -> np.random.Generator:
        return rng_for(self)


def rng_for(seed: SeedSpec | int) -> np.random.Generator:
    if not isinstance(seed, SeedSpec):
        seed = SeedSpec(int(seed), 0)
    if seed.trial_index < 0:
        raise ValueError("trial_index must be non-negative")
    if seed.stream < 0:
        raise ValueError("stream must be non-negative")
    entropy = [seed.master_seed % 2**64, seed.trial_index]
    if seed.stream:
        entropy.append(seed.stream)
    ss = np.random.SeedSequence(entropy)
    return np.random.Generator(np.random.PCG64(ss))


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    return p


def skip_positions(total: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Indices in ``[0, total)`` selected by geometric skipping."""
    if total == 0 or p == 0.0:
        return np.zeros(0, dtype=np.int64)
    if p == 1.0:
        return np.arange(total, dtype=np.int64)
    log_q = math.log1p(-p)
    out = []
    pos = -1
    while True:
        remaining = total - 1 - pos
        mean = remaining * p
        batch = int(mean + 6.0 * math.sqrt(mean + 1.0) + 16)
        u = 1.0 - rng.random(batch)
        gaps = np.floor(np.log(u) / log_q)
        # gaps past the end only need to be recognised as such
        gaps = np.minimum(gaps, float(total)).astype(np.int64)
        steps = np.cumsum(gaps + 1) + pos
        inside = steps < total
        if inside.all():
            out.append(steps)
            pos = int(steps[-1])
            continue
        out.append(steps[: int(np.argmin(inside))])
        break
    return np.concatenate(out)


def bernoulli_positions(total: int, p: float, rng: np.random.Generator, chunk: int = 1 << 22) -> np.ndarray:
    """Indices in ``[0, total)`` with one uniform per index."""
    parts = []
    for start in range(0, total, chunk):
        size = min(chunk, total - start)
        parts.append(np.flatnonzero(rng.random(size) < p) + start)
    if not parts:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate(parts).astype(np.int64)


def sample_positions(total: int, p: float, rng: np.random.Generator, method: str = "auto") -> np.ndarray:
    if method == "auto":
        method = "bernoulli" if p > DENSE_THRESHOLD else "skip"
    if method == "skip":
        return skip_positions(total, p, rng)
    if method == "bernoulli":
        return bernoulli_positions(total, p, rng)
    raise ValueError(f"unknown sampling method {method!r}")


def sample_bipartite(n1: int, n2: int, p: float, seed: SeedSpec | int, method: str = "auto") -> BipartiteGraph:
    """Sample G(n1, n2, p); deterministic given ``seed``."""
    p = _check_p(p)
    if n1 < 0 or n2 < 0:
        raise ValueError("partition sizes must be non-negative")
    total = n1 * n2
    if total >= _INDEX_LIMIT:
        raise OverflowError(f"n1*n2 = {total} exceeds the edge index range")
    keys = sample_positions(total, p, rng_for(seed), method)
    return _from_sorted_keys(int(n1), int(n2), keys)


def unrank_pairs(n: int, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map lexicographic pair indices over ``i < j < n`` to ``(i, j)``."""
    i_all = np.arange(max(n - 1, 0), dtype=np.int64)
    offsets = i_all * n - i_all * (i_all + 1) // 2
    i = np.searchsorted(offsets, t, side="right") - 1
    j = t - offsets[i] + i + 1
    return i.astype(np.int64), j.astype(np.int64)


def sample_binomial_graph(n: int, q: float, seed: SeedSpec | int, method: str = "auto") -> SimpleGraph:
    """Sample G(n, q) over the C(n, 2) potential edges."""
    q = _check_p(q)
    if n < 0:
        raise ValueError("vertex count must be non-negative")
    total = n * (n - 1) // 2
    if total >= _INDEX_LIMIT:
        raise OverflowError(f"C(n, 2) = {total} exceeds the edge index range")
    t = sample_positions(total, q, rng_for(seed), method)
    a, b = unrank_pairs(n, t)
    return SimpleGraph(int(n), _frozen(a), _frozen(b))
