"""Limiting constants and exact finite-size expectations.

Series terms are formed in log space with ``gammaln``.  Every evaluator
returns a certified bound on the truncation error; when no bound below the
requested tolerance can be certified within ``max_terms`` the result is
returned with ``converged=False``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammaln

__all__ = [
    "SeriesResult",
    "DEFAULT_MAX_TERMS",
    "tree_series",
    "mu",
    "nu",
    "nu_closed_form",
    "nu_ratio_bound",
    "gamma_const",
    "zeta",
    "expected_tree_components_exact",
    "spanning_tree_count",
]

DEFAULT_MAX_TERMS = 100_000
_SQRT_2PI = math.sqrt(2.0 * math.pi)
# sum_{r+s=k, r,s>=1} (rs)^{-3/2} <= 2 (k/2)^{-3/2} zeta(3/2), divided by 2 pi
_NU_CONST = 2.0 * 2.0**1.5 * 2.612375348685488 / (2.0 * math.pi)
_CHUNK = 4096
_FUTILE_TERMS = 2048
# pairs whose envelope is below e^{-margin} rho^k are skipped and charged to the tail
_PRUNE_MARGIN = 60.0


@dataclass(frozen=True)
class SeriesResult:
    value: float
    terms_used: int
    tail_bound: float
    converged: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _check_tol(tol: float) -> None:
    if not tol > 0:
        raise ValueError("tol must be positive")


def _tree_tail(rho: float, K: int) -> float:
    """Bound on sum_{k>K} (x^k k^{k-2}/k!) when x e = rho <= 1."""
    if K == 0:
        return math.inf
    head = rho ** (K + 1) / _SQRT_2PI
    bound = head * (2.0 / 3.0) * K**-1.5
    if rho < 1.0:
        bound = min(bound, head * (K + 1) ** -2.5 / (1.0 - rho))
    return bound


def tree_series(x: float, tol: float = 1e-12, max_terms: int = DEFAULT_MAX_TERMS) -> SeriesResult:
    """``sum_{k>=1} x^k k^{k-2} / k!`` for ``0 <= x <= 1/e``."""
    _check_tol(tol)
    if not 0.0 <= x <= math.exp(-1.0) * (1 + 1e-15):
        raise ValueError("tree series needs 0 <= x <= 1/e")
    if x == 0.0:
        return SeriesResult(0.0, 0, 0.0, True)
    rho = min(x * math.e, 1.0)
    parts: list[float] = []
    K = 0
    tail = math.inf
    while K < max_terms:
        k = np.arange(K + 1, min(K + _CHUNK, max_terms) + 1, dtype=np.float64)
        parts.extend(np.exp(k * math.log(x) + (k - 2) * np.log(k) - gammaln(k + 1)).tolist())
        K = int(k[-1])
        tail = _tree_tail(rho, K)
        if tail <= tol:
            break
    return SeriesResult(math.fsum(parts), K, tail, tail <= tol)


def mu(d: float, tol: float = 1e-12, max_terms: int = DEFAULT_MAX_TERMS) -> SeriesResult:
    """Genus density constant of G(n, d/n): ``1/2 - 1/d + T(d e^{-d}) / d^2``."""
    if not d > 0:
        raise ValueError("d must be positive")
    inner = tree_series(d * math.exp(-d), tol * d * d, max_terms)
    tail = inner.tail_bound / (d * d)
    value = math.fsum([0.5, -1.0 / d, inner.value / (d * d)])
    return SeriesResult(value, inner.terms_used, tail, tail <= tol)


def _nu_uv(d: float, lam: float) -> tuple[float, float]:
    sl = math.sqrt(lam)
    return d * sl * math.exp(-d / sl), (d / sl) * math.exp(-d * sl)


def _nu_log_g(lu: float, lv: float):
    """Log of the Stirling envelope ``G(theta)``; concave on (0, 1)."""

    def log_g(t):
        t = np.asarray(t, dtype=np.float64)
        return 1.0 + t * (np.log1p(-t) - np.log(t) + lu) + (1 - t) * (np.log(t) - np.log1p(-t) + lv)

    return log_g


def _nu_peak(d: float, lam: float) -> tuple[float, float]:
    """``(argmax, max)`` of the log envelope."""
    u, v = _nu_uv(d, lam)
    log_g = _nu_log_g(math.log(u), math.log(v))
    grid = np.linspace(1e-6, 1 - 1e-6, 2001)
    vals = log_g(grid)
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    res = minimize_scalar(lambda t: -float(log_g(t)), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    if -float(res.fun) >= float(vals[i]):
        return float(res.x), -float(res.fun)
    return float(grid[i]), float(vals[i])


def nu_ratio_bound(d: float, lam: float) -> float:
    """Upper bound ``rho`` with ``inner_k <= 2.352 rho^k k^{-3/2}`` for ``k >= 2``.

    ``rho`` is the supremum over ``theta`` in (0, 1) of
    ``e ((1-theta) u / theta)^theta (theta v / (1-theta))^(1-theta)``,
    whose logarithm is concave, plus a small safety margin.
    """
    return math.exp(_nu_peak(d, lam)[1]) * (1.0 + 1e-9)


def _nu_tail(rho: float, K: int, scale: float) -> float:
    if K < 1:
        return math.inf
    if rho > 1.0 + 1e-9:
        return math.inf
    head = _NU_CONST * scale * min(rho, 1.0) ** (K + 1)
    bound = head * 2.0 / math.sqrt(K)
    if rho < 1.0:
        bound = min(bound, head * (K + 1) ** -1.5 / (1.0 - rho))
    return bound


def _nu_windows(ks: np.ndarray, log_g, peak: float, log_rho: float) -> tuple[np.ndarray, np.ndarray]:
    """Per ``k``, the ``r`` range outside which ``G(r/k)^k <= e^{-margin} rho^k``."""
    target = log_rho - _PRUNE_MARGIN / ks

    def root(lo, hi, rising):
        lo = np.full(ks.size, lo)
        hi = np.full(ks.size, hi)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            above = log_g(mid) >= target
            if rising:
                hi = np.where(above, mid, hi)
                lo = np.where(above, lo, mid)
            else:
                lo = np.where(above, mid, lo)
                hi = np.where(above, hi, mid)
        return lo if rising else hi

    # rounding outward keeps every dropped pair below the threshold
    r_lo = np.maximum(np.floor(root(1e-300, peak, True) * ks) - 1, 1).astype(np.int64)
    r_hi = np.minimum(np.ceil(root(peak, 1 - 1e-16, False) * ks) + 1, ks - 1).astype(np.int64)
    return r_lo, np.maximum(r_hi, r_lo - 1)


def _nu_inner(k0: int, k1: int, lu: float, lv: float, window=None) -> list[float]:
    """Inner sums over ``r + s = k`` (``r, s >= 1``) for ``k0 <= k < k1``."""
    ks = np.arange(k0, k1, dtype=np.int64)
    if window is None:
        r_lo, r_hi = np.ones_like(ks), ks - 1
    else:
        r_lo, r_hi = _nu_windows(ks, *window)
    cnt = r_hi - r_lo + 1
    seg = np.repeat(np.arange(ks.size), cnt)
    starts = np.concatenate([[0], np.cumsum(cnt)[:-1]])
    r = np.arange(seg.size) - starts[seg] + r_lo[seg]
    s = ks[seg] - r
    # lookup tables are much cheaper than log and gammaln per pair
    idx = np.arange(k1, dtype=np.float64)
    log_k = np.log(np.maximum(idx, 1.0))
    log_fact = gammaln(idx + 1)
    logt = (s - 1) * log_k[r] + (r - 1) * log_k[s] - log_fact[r] - log_fact[s] + r * lu + s * lv
    return np.bincount(seg, weights=np.exp(logt), minlength=ks.size).tolist()


def _nu_sum(d: float, lam: float, tol: float, max_terms: int, cap: int | None) -> SeriesResult:
    u, v = _nu_uv(d, lam)
    lu, lv = math.log(u), math.log(v)
    scale = 1.0 / (d * math.sqrt(lam))
    peak, log_peak = _nu_peak(d, lam)
    rho = math.exp(log_peak) * (1.0 + 1e-9)
    # skipped pairs total at most e^{-margin} times the envelope series, itself <= zeta(3/2)
    pruned = 0.0 if cap is not None else _NU_CONST * scale * 2.62 * math.exp(-_PRUNE_MARGIN)
    window = None if cap is not None else (_nu_log_g(lu, lv), peak, math.log(rho))
    inner = [u + v]
    K = 1
    limit = max_terms if cap is None else cap
    if cap is None and _nu_tail(rho, max_terms, scale) > tol:
        # no certificate can reach tol: return a best-effort partial sum
        limit = min(max_terms, _FUTILE_TERMS)
    tail = _nu_tail(rho, K, scale)
    width = 32
    while K < limit and (cap is not None or tail > tol or limit < max_terms):
        width = max(2, min(limit - K, int(4_000_000 // (K + 1)) + 1, width * 2))
        k1 = min(K + 1 + width, limit + 1)
        inner.extend(_nu_inner(K + 1, k1, lu, lv, window))
        K = k1 - 1
        tail = _nu_tail(rho, K, scale) + pruned
    value = scale * math.fsum(inner)
    if cap is not None:
        return SeriesResult(value, K, 0.0, True)
    return SeriesResult(value, K, tail, tail <= tol)


def nu(d: float, lam: float, tol: float = 1e-10, max_terms: int = DEFAULT_MAX_TERMS) -> SeriesResult:
    """Tree-component density constant of the balanced bipartite model."""
    _check_tol(tol)
    if not d > 0:
        raise ValueError("d must be positive")
    if not 0 < lam <= 1:
        raise ValueError("lambda must lie in (0, 1]")
    return _nu_sum(d, lam, tol, max_terms, None)


def nu_closed_form(d: float, lam: float) -> float:
    """``1 + (1 - d sqrt(lam)) / lam``, valid for ``0 < d < 1``."""
    if not 0 < d < 1:
        raise ValueError("closed form applies to 0 < d < 1")
    if not 0 < lam <= 1:
        raise ValueError("lambda must lie in (0, 1]")
    return 1.0 + (1.0 - d * math.sqrt(lam)) / lam


def gamma_const(d: float, lam: float, tol: float = 1e-10, closed_form: bool = False,
                max_terms: int = DEFAULT_MAX_TERMS) -> SeriesResult:
    """Genus density constant of the balanced bipartite model."""
    _check_tol(tol)
    sl = math.sqrt(lam)
    w = sl / (2 * d)
    if closed_form:
        n_val, terms, n_tail = nu_closed_form(d, lam), 0, 0.0
    else:
        r = nu(d, lam, tol / w, max_terms)
        n_val, terms, n_tail = r.value, r.terms_used, r.tail_bound
    value = math.fsum([0.5, -(lam + 1) / (2 * d * sl), n_val * w])
    tail = n_tail * w
    return SeriesResult(value, terms, tail, tail <= tol)


def zeta(d: float, n1: int, lam: float) -> SeriesResult:
    """The density series cut at ``k <= floor((ln n1)^3)``; a finite sum."""
    if n1 < 2:
        raise ValueError("n1 must be at least 2")
    if not d > 0 or not 0 < lam <= 1:
        raise ValueError("need d > 0 and 0 < lambda <= 1")
    K = max(1, int(math.floor(math.log(n1) ** 3)))
    return _nu_sum(d, lam, 1.0, K, K)


def _log_comb(n: int, upto: int) -> np.ndarray:
    """``log C(n, r)`` for ``r = 0..min(n, upto)`` from exact integers."""
    out = [0.0]
    c = 1
    for r in range(1, min(n, upto) + 1):
        c = c * (n - r + 1) // r
        out.append(math.log(c))
    return np.array(out)


def expected_tree_components_exact(n1: int, n2: int, p: float, kmax: int) -> float:
    """Exact expected number of tree components with at most ``kmax`` vertices in G(n1, n2, p)."""
    if n1 < 0 or n2 < 0:
        raise ValueError("sizes must be non-negative")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if kmax < 0 or kmax > n1 + n2:
        raise ValueError("kmax must lie in [0, n1 + n2]")
    rs = []
    for r in range(0, min(n1, kmax) + 1):
        s_hi = min(n2, kmax - r)
        if r == 0:
            s = np.array([1] if s_hi >= 1 else [], dtype=np.int64)
        elif r == 1:
            s = np.arange(0, s_hi + 1, dtype=np.int64)
        else:
            s = np.arange(1, s_hi + 1, dtype=np.int64)
        rs.append(np.column_stack([np.full(s.size, r, dtype=np.int64), s]))
    if not rs:
        return 0.0
    pairs = np.concatenate(rs)
    if pairs.size == 0:
        return 0.0
    r = pairs[:, 0].astype(np.float64)
    s = pairs[:, 1].astype(np.float64)
    k = r + s
    expo = r * (n2 - s) + s * (n1 - r) + r * s - k + 1
    with np.errstate(divide="ignore", invalid="ignore"):
        log_binom = _log_comb(n1, kmax)[pairs[:, 0]] + _log_comb(n2, kmax)[pairs[:, 1]]
        # 0^0 = 1 covers the single-vertex trees
        log_count = np.where(s > 1, (s - 1) * np.log(np.maximum(r, 1)), 0.0) + \
            np.where(r > 1, (r - 1) * np.log(np.maximum(s, 1)), 0.0)
        log_p = np.where(k > 1, (k - 1) * (math.log(p) if p > 0 else -np.inf), 0.0)
        log_q = np.where(expo > 0, expo * (math.log1p(-p) if p < 1 else -np.inf), 0.0)
        terms = np.exp(log_binom + log_count + log_p + log_q)
    return math.fsum(terms.tolist())


def spanning_tree_count(a: int, b: int) -> int:
    """Spanning trees of the complete bipartite graph K_{a,b}."""
    a, b = int(a), int(b)
    if a < 1 or b < 1:
        raise ValueError("a and b must be at least 1")
    out = a ** (b - 1) * b ** (a - 1)
    if out.bit_length() > 128:
        raise OverflowError("spanning tree count exceeds 128 bits")
    return out
