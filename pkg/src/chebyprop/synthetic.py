"""Small deterministic graph generators for tests, demos and benchmarks."""

import numpy as np

from .graph import Graph, from_edges

__all__ = ["path", "star", "ring", "ring_with_chords", "preferential_attachment", "grid"]


def path(n: int) -> Graph:
    return from_edges(np.stack([np.arange(n - 1), np.arange(1, n)], axis=1))


def star(leaves: int) -> Graph:
    """Center 0 joined to nodes 1..leaves."""
    return from_edges(np.stack([np.zeros(leaves, dtype=np.int64), np.arange(1, leaves + 1)], axis=1))


def ring(n: int) -> Graph:
    i = np.arange(n)
    return from_edges(np.stack([i, (i + 1) % n], axis=1))


def ring_with_chords(n: int, chords: int, seed=0) -> Graph:
    """A cycle on ``n`` nodes plus ``chords`` uniformly random extra edges.

    Node ids are preserved (the cycle introduces them in order).
    """
    rng = np.random.default_rng(seed)
    i = np.arange(n)
    cycle = np.stack([i, (i + 1) % n], axis=1)
    extra = rng.integers(0, n, size=(chords, 2))
    return from_edges(np.concatenate([cycle, extra]))


def preferential_attachment(n: int, m: int, seed=0) -> Graph:
    """Barabasi-Albert style graph: each new node links to ``m`` existing
    nodes chosen proportionally to degree. Heavy-tailed degrees."""
    rng = np.random.default_rng(seed)
    edges = np.empty(((n - m - 1) * m + m * (m + 1) // 2, 2), dtype=np.int64)
    # start from a clique on m+1 nodes
    e = 0
    for u in range(m + 1):
        for v in range(u + 1, m + 1):
            edges[e] = (u, v)
            e += 1
    ends = np.empty(2 * edges.shape[0], dtype=np.int64)
    ends[: 2 * e] = edges[:e].ravel()
    n_ends = 2 * e
    for u in range(m + 1, n):
        picks = set()
        while len(picks) < m:
            picks.add(int(ends[rng.integers(0, n_ends)]))
        for v in sorted(picks):
            edges[e] = (v, u)
            ends[n_ends] = v
            ends[n_ends + 1] = u
            n_ends += 2
            e += 1
    return from_edges(edges[:e])


def grid(rows: int, cols: int) -> Graph:
    idx = np.arange(rows * cols).reshape(rows, cols)
    horiz = np.stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()], axis=1)
    vert = np.stack([idx[:-1, :].ravel(), idx[1:, :].ravel()], axis=1)
    return from_edges(np.concatenate([horiz, vert]))
