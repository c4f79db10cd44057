"""Two-phase SSPPR estimator: Chebyshev push, then alpha-random walks that
spend the leftover (signed) residual.

After the push phase the estimate and residual satisfy

    pi_s(u) = pi_hat(u) + sum_v r(v) pi_v(u),

so launching ``ceil(|r(v)| W)`` walks from each ``v`` and crediting
``r(v) / W_v`` at every terminal gives an unbiased correction.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _loops
from .graph import Graph, apply_walk
from .kernels import Kernel, plan_truncation
from .solvers import Estimate, cheby_push

__all__ = [
    "RandomWalkConfig",
    "ResidualVector",
    "compute_residual",
    "alpha_random_walk",
    "alpha_walk_sampler",
    "cheby_push_rw",
]

RESIDUAL_FLOOR = 1e-16


def _check_ranges(alpha, eps_r, delta, n):
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if not 0.0 < eps_r < 1.0:
        raise ValueError("eps_r must lie in (0, 1)")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if n < 2:
        raise ValueError("graph needs at least two nodes")


def _budget(eps_r, delta, n):
    return math.ceil(2.0 * (2.0 * eps_r / 3.0 + 2.0) * math.log(n) / (eps_r ** 2 * delta))


@dataclass(frozen=True)
class RandomWalkConfig:
    alpha: float
    W: int
    r_max: float
    eps_r: float
    delta: float
    seed: int = 0

    @classmethod
    def build(cls, alpha: float, n: int, eps_r: float = 0.5, delta: Optional[float] = None,
              seed: int = 0) -> "RandomWalkConfig":
        """Walk budget ``W = ceil(2 (2 eps_r/3 + 2) ln n / (eps_r^2 delta))`` and
        push threshold ``r_max = sqrt(alpha) / W``. ``delta`` defaults to ``1/n``."""
        if delta is None:
            delta = 1.0 / n
        _check_ranges(alpha, eps_r, delta, n)
        W = _budget(eps_r, delta, n)
        return cls(alpha=alpha, W=W, r_max=math.sqrt(alpha) / W, eps_r=eps_r, delta=delta,
                   seed=seed)

    def check(self, n: int):
        _check_ranges(self.alpha, self.eps_r, self.delta, n)
        W = _budget(self.eps_r, self.delta, n)
        if self.W != W:
            raise ValueError(f"W={self.W} does not match the budget {W} for n={n}")
        if not math.isclose(self.r_max, math.sqrt(self.alpha) / self.W, rel_tol=1e-12):
            raise ValueError("r_max must equal sqrt(alpha) / W")


@dataclass(frozen=True)
class ResidualVector:
    """Sparse signed residual: ``values[i]`` sits at node ``nodes[i]``."""

    nodes: np.ndarray
    values: np.ndarray

    def to_dense(self, n: int) -> np.ndarray:
        r = np.zeros(n)
        r[self.nodes] = self.values
        return r

    def __len__(self):
        return self.nodes.shape[0]


def compute_residual(g: Graph, alpha: float, pi_hat, s: int) -> ResidualVector:
    """``r = e_s - (pi_hat - (1 - alpha) P pi_hat) / alpha``; entries with
    magnitude below 1e-16 are dropped."""
    pi_hat = np.asarray(pi_hat, dtype=np.float64)
    r = -(pi_hat - (1.0 - alpha) * apply_walk(g, pi_hat)) / alpha
    r[s] += 1.0
    keep = np.flatnonzero(np.abs(r) >= RESIDUAL_FLOOR)
    return ResidualVector(keep.astype(np.int64), r[keep])


def alpha_random_walk(g: Graph, start: int, alpha: float, rng: np.random.Generator) -> int:
    """Terminal node of one walk that stops with probability ``alpha`` before
    each step and otherwise moves to a uniform neighbour."""
    u = int(start)
    while rng.random() >= alpha:
        nb = g.neighbors_of(u)
        u = int(nb[rng.integers(nb.shape[0])])
    return u


def alpha_walk_sampler(g: Graph, starts, counts, increments, alpha, seed, out) -> int:
    """Default walk phase. Node ``v`` draws from its own stream derived from
    ``(seed, v)``, so results do not depend on processing order."""
    return int(_loops.walk_accumulate(g.offsets, g.neighbors, g.degrees,
                                      np.asarray(starts, dtype=np.int64),
                                      np.asarray(counts, dtype=np.int64),
                                      np.asarray(increments, dtype=np.float64),
                                      float(alpha), np.uint64(seed), out))


def cheby_push_rw(g: Graph, alpha: float, s: int, cfg: RandomWalkConfig,
                  K: Optional[int] = None, *, sampler: Callable = alpha_walk_sampler) -> Estimate:
    """Chebyshev push with threshold ``r_max`` followed by residual walks.

    ``K`` defaults to the Chebyshev truncation for tolerance ``r_max``.
    ``sampler`` has the signature of :func:`alpha_walk_sampler`.
    """
    cfg.check(g.n)
    if not math.isclose(cfg.alpha, alpha):
        raise ValueError("cfg.alpha differs from alpha")
    t0 = time.perf_counter()
    kernel = Kernel.ppr(alpha)
    if K is None:
        K = plan_truncation(kernel, cfg.r_max).K
    phase1 = cheby_push(g, kernel, s, K, cfg.r_max)
    pi_hat = phase1.y_hat.copy()
    res = compute_residual(g, alpha, pi_hat, s)
    counts = np.ceil(np.abs(res.values) * cfg.W).astype(np.int64)
    increments = res.values / counts
    steps = sampler(g, res.nodes, counts, increments, alpha, cfg.seed, pi_hat) if len(res) else 0
    elapsed = time.perf_counter() - t0
    stats = dict(algorithm="chebypush-rw", iterations=K, push_work=phase1.stats["push_work"],
                 walks=int(counts.sum()), walk_steps=int(steps), wall_time=elapsed,
                 phase1=phase1.y_hat, residual=res,
                 params=dict(kernel=kernel.descriptor(), source=int(s), K=K, W=cfg.W,
                             r_max=cfg.r_max, eps_r=cfg.eps_r, delta=cfg.delta, seed=cfg.seed))
    return Estimate(pi_hat, stats)
