"""Deterministic propagation solvers.

* :func:`power_method` -- truncated Taylor series, global.
* :func:`push` -- Taylor series with thresholded local pushes.
* :func:`cheby_power` -- truncated Chebyshev series via the three-term
  recurrence, global.
* :func:`cheby_push` -- Chebyshev series with thresholded local pushes
  (subset Chebyshev recurrence on two swapped buffers).

All solvers accept either a source node id or a dense seed vector and
return an :class:`Estimate`.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import _loops
from .graph import Graph, apply_walk
from .kernels import Kernel, plan_truncation

__all__ = [
    "Estimate",
    "ChebyPushTrace",
    "power_method",
    "push",
    "cheby_power",
    "cheby_push",
    "cheby_push_thresholds",
    "subset_recurrence_dense",
    "dense_chebyshev_terms",
    "general_gp_vector",
    "general_gp_matrix",
]


@dataclass
class Estimate:
    y_hat: np.ndarray
    stats: dict = field(default_factory=dict)


@dataclass
class ChebyPushTrace:
    """Per-iteration state of :func:`cheby_push` (row ``k`` = after iteration k).

    ``r_cur[k]`` and ``r_new[k]`` are the buffers after the swap that ends
    iteration ``k``; row 0 holds the initial state. ``pushed[k]`` is the set
    of nodes pushed in iteration ``k`` (empty for ``k = 0``).
    """

    r_cur: np.ndarray
    r_new: np.ndarray
    pushed: list


def _seed(g: Graph, source):
    """Sparse (nodes, values) view of a node id or dense seed vector."""
    if np.ndim(source) == 0:
        s = int(source)
        if not 0 <= s < g.n:
            raise ValueError(f"source {s} is not a node of a graph with {g.n} nodes")
        return np.array([s], dtype=np.int64), np.array([1.0])
    x = np.asarray(source, dtype=np.float64)
    if x.shape != (g.n,):
        raise ValueError(f"seed vector has shape {x.shape}, expected ({g.n},)")
    if not np.all(np.isfinite(x)):
        raise ValueError("seed vector has non-finite entries")
    nodes = np.flatnonzero(x)
    return nodes.astype(np.int64), x[nodes]


def _dense_seed(g: Graph, source) -> np.ndarray:
    nodes, vals = _seed(g, source)
    x = np.zeros(g.n)
    x[nodes] = vals
    return x


def _coeffs(kernel, count, kind):
    if isinstance(kernel, Kernel):
        return kernel.taylor_coeffs(count - 1) if kind == "taylor" else kernel.cheby_coeffs(count - 1)
    c = np.zeros(count)
    src = np.asarray(kernel, dtype=np.float64)[:count]
    c[: src.shape[0]] = src
    return c


def _describe(kernel):
    return kernel.descriptor() if isinstance(kernel, Kernel) else "explicit"


def _source_tag(source):
    return int(source) if np.ndim(source) == 0 else "vector"


def power_method(g: Graph, kernel, source, N: int) -> Estimate:
    """``sum_{k<N} zeta_k P^k x``."""
    if N < 1:
        raise ValueError("N must be at least 1")
    t0 = time.perf_counter()
    zeta = _coeffs(kernel, N, "taylor")
    r = _dense_seed(g, source)
    y = zeta[0] * r
    for k in range(1, N):
        r = apply_walk(g, r)
        y += zeta[k] * r
    elapsed = time.perf_counter() - t0
    return Estimate(y, dict(algorithm="pw", iterations=N, push_work=(N - 1) * 2 * g.m,
                            wall_time=elapsed,
                            params=dict(kernel=_describe(kernel), source=_source_tag(source), N=N)))


def push(g: Graph, kernel, source, N: int, thresholds) -> Estimate:
    """Taylor push with per-step thresholds ``eps_k`` (scalar or sequence).

    At step ``k`` every node with ``|r_k(u)| > eps_k d_u`` folds
    ``zeta_k r_k(u)`` into the estimate and spreads ``r_k(u)/d_u`` to its
    neighbours. Residual left below threshold is not propagated.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    t0 = time.perf_counter()
    zeta = _coeffs(kernel, N, "taylor")
    th = np.broadcast_to(np.asarray(thresholds, dtype=np.float64), (N,)).copy()
    if np.any(th < 0):
        raise ValueError("thresholds must be nonnegative")
    nodes, vals = _seed(g, source)
    y, steps, work = _loops.push_loop(g.offsets, g.neighbors, g.degrees, nodes, vals,
                                      zeta, th, N)
    elapsed = time.perf_counter() - t0
    return Estimate(y, dict(algorithm="push", iterations=int(steps), push_work=int(work),
                            wall_time=elapsed,
                            params=dict(kernel=_describe(kernel), source=_source_tag(source),
                                        N=N, threshold=float(th[0]) if th.size else 0.0)))


def cheby_power(g: Graph, kernel, source, K: int, *, record=False) -> Estimate:
    """``sum_{k<=K} c_k T_k(P) x`` via ``r_{k+1} = 2 P r_k - r_{k-1}``.

    With ``record=True`` the residuals ``r_0..r_K`` are returned in
    ``stats["residuals"]`` as a ``(K+1, n)`` array.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    t0 = time.perf_counter()
    c = _coeffs(kernel, K + 1, "cheby")
    r_prev = _dense_seed(g, source)
    r = apply_walk(g, r_prev)
    y = c[0] * r_prev + c[1] * r
    rows = [r_prev, r] if record else None
    for k in range(1, K):
        r_prev, r = r, 2.0 * apply_walk(g, r) - r_prev
        y += c[k + 1] * r
        if record:
            rows.append(r)
    elapsed = time.perf_counter() - t0
    stats = dict(algorithm="chebypower", iterations=K, push_work=K * 2 * g.m,
                 wall_time=elapsed,
                 params=dict(kernel=_describe(kernel), source=_source_tag(source), K=K))
    if record:
        stats["residuals"] = np.array(rows)
    return Estimate(y, stats)


def cheby_push_thresholds(c: np.ndarray, K: int, eps_a: float) -> np.ndarray:
    """``eps_k = eps_a / (4 K sum_{l=k}^K |c_l|)`` for ``k = 0..K``.

    A tail that underflows to zero gives ``+inf`` (prune everything).
    """
    a = np.abs(np.asarray(c[: K + 1], dtype=np.float64))
    tails = np.cumsum(a[::-1])[::-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        eps = eps_a / (4.0 * K * tails)
    eps[tails == 0.0] = np.inf
    if eps_a == 0.0:
        eps[:] = 0.0
    return eps


def cheby_push(g: Graph, kernel, source, K: int, eps_a: float, *,
               thresholds=None, by_degree=True, trace=False) -> Estimate:
    """Chebyshev push.

    ``kernel`` is a :class:`Kernel` or an explicit coefficient array
    ``c_0..c_K``. ``thresholds`` overrides the per-iteration ``eps_k``
    (scalar or length ``K+1`` array indexed by ``k``); ``by_degree=False``
    compares ``|r_cur(u)|`` against ``eps_k`` itself instead of
    ``eps_k d_u``. With ``trace=True``
    ``stats["trace"]`` holds a :class:`ChebyPushTrace` (dense, small graphs).
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    if eps_a < 0:
        raise ValueError("eps_a must be nonnegative")
    t0 = time.perf_counter()
    c = _coeffs(kernel, K + 1, "cheby")
    if thresholds is None:
        eps_k = cheby_push_thresholds(c, K, eps_a)
    else:
        eps_k = np.broadcast_to(np.asarray(thresholds, dtype=np.float64), (K + 1,)).copy()
    lazy = bool(np.all(np.diff(eps_k[1:]) >= 0))
    nodes, vals = _seed(g, source)
    n = g.n
    if trace:
        cur_t = np.zeros((K + 1, n))
        new_t = np.zeros((K + 1, n))
        pushed_nodes = np.empty(n * K, dtype=np.int64)
        pushed_ptr = np.zeros(K + 2, dtype=np.int64)
    else:
        cur_t = new_t = np.zeros((0, 0))
        pushed_nodes = np.zeros(0, dtype=np.int64)
        pushed_ptr = np.zeros(0, dtype=np.int64)
    y, work = _loops.cheby_push_loop(g.offsets, g.neighbors, g.degrees, nodes, vals, c, eps_k,
                                     K, lazy, by_degree, trace, cur_t, new_t, pushed_nodes, pushed_ptr)
    elapsed = time.perf_counter() - t0
    stats = dict(algorithm="chebypush", iterations=K, push_work=int(work), wall_time=elapsed,
                 params=dict(kernel=_describe(kernel), source=_source_tag(source), K=K,
                             eps_a=eps_a))
    if trace:
        x = np.zeros(n)
        x[nodes] = vals
        cur_t[0] = apply_walk(g, x)
        new_t[0] = -x
        pushed = [np.zeros(0, dtype=np.int64)] + [
            np.sort(pushed_nodes[pushed_ptr[k]:pushed_ptr[k + 1]]) for k in range(1, K + 1)]
        stats["trace"] = ChebyPushTrace(cur_t, new_t, pushed)
    return Estimate(y, stats)


def dense_chebyshev_terms(P: np.ndarray, K: int) -> list:
    """``[T_0(P), ..., T_K(P)]`` as dense matrices."""
    n = P.shape[0]
    T = [np.eye(n), P.copy()]
    for _ in range(1, K):
        T.append(2.0 * P @ T[-1] - T[-2])
    return T[: K + 1]


def subset_recurrence_dense(g: Graph, source, sets, K: int):
    """Literal dense evaluation of the subset Chebyshev recurrence.

    ``sets[k]`` is ``S_k`` for ``k = 0..K-1`` (``None`` means all nodes).
    Returns ``(r_hat, deltas)``: ``(K+1, n)`` arrays with
    ``deltas[l] = r_hat[l]`` restricted to the complement of ``S_l``.
    """
    if len(sets) < K:
        raise ValueError("need at least K node sets")
    n = g.n
    P = g.walk_matrix()

    def mask(k):
        m = np.zeros(n, dtype=bool)
        if sets[k] is None:
            m[:] = True
        else:
            members = getattr(sets[k], "members", sets[k])
            m[np.asarray(members, dtype=np.int64)] = True
        return m

    r_hat = np.zeros((K + 1, n))
    deltas = np.zeros((K + 1, n))
    r_hat[0] = _dense_seed(g, source)
    r_hat[1] = P @ r_hat[0]
    masks = [mask(k) for k in range(K)]
    for k in range(1, K):
        inside = np.where(masks[k], r_hat[k], 0.0)
        prev_in = np.where(masks[k - 1], r_hat[k - 1], 0.0)
        prev_out = np.where(masks[k - 1], 0.0, r_hat[k - 1])
        r_hat[k + 1] = 2.0 * P @ inside - prev_in + prev_out
    for k in range(K):
        deltas[k] = np.where(masks[k], 0.0, r_hat[k])
    return r_hat, deltas


_SOLVERS = {
    "pw": lambda g, kern, x, p: power_method(g, kern, x, p["N"]),
    "push": lambda g, kern, x, p: push(g, kern, x, p["N"], p.get("thresholds", 0.0)),
    "chebypower": lambda g, kern, x, p: cheby_power(g, kern, x, p["K"]),
    "chebypush": lambda g, kern, x, p: cheby_push(g, kern, x, p["K"], p.get("eps_a", 0.0)),
}


def _fill_truncation(kernel, method, params):
    params = dict(params)
    eps = params.pop("eps", 1e-12)
    if method in ("pw", "push") and "N" not in params:
        params["N"] = plan_truncation(kernel, eps).N
    if method in ("chebypower", "chebypush") and "K" not in params:
        params["K"] = plan_truncation(kernel, eps).K
    return params


def general_gp_vector(g: Graph, kernel: Kernel, a: float, x, method="chebypush", **params):
    """``f(D^-a A D^-(1-a)) x`` computed as ``D^-a f(P) (D^a x)``.

    ``method`` is one of ``pw``, ``push``, ``chebypower``, ``chebypush``;
    truncation defaults to ``plan_truncation(kernel, eps)`` with
    ``eps=1e-12`` unless ``N``/``K`` is given.
    """
    if method not in _SOLVERS:
        raise ValueError(f"unknown method {method!r}")
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (g.n,):
        raise ValueError(f"x has shape {x.shape}, expected ({g.n},)")
    if not np.any(x):
        return np.zeros(g.n)
    scale = g.degrees.astype(np.float64) ** a
    params = _fill_truncation(kernel, method, params)
    y = _SOLVERS[method](g, kernel, scale * x, params).y_hat
    return y / scale


def general_gp_matrix(g: Graph, kernel: Kernel, a: float, X, method="chebypush", **params):
    """Column-wise :func:`general_gp_vector` for an ``(n, k)`` matrix."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    return np.column_stack([general_gp_vector(g, kernel, a, X[:, j], method, **params)
                            for j in range(X.shape[1])])
