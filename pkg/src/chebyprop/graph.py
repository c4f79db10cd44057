"""Immutable CSR storage for undirected simple graphs and the random-walk
matrix-vector primitives every solver builds on.

The random-walk matrix is ``P = A D^-1`` (column stochastic), so
``(P x)(v) = sum_{u in N(v)} x(u) / d_u``.
"""

from __future__ import annotations

import hashlib
import io
import os
import struct
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable

import numpy as np
import scipy.sparse as sp

__all__ = [
    "Graph",
    "NodeSet",
    "GraphFormatError",
    "GraphStructureError",
    "from_edges",
    "load_edge_list",
    "write_edge_list",
    "read_csr_cache",
    "write_csr_cache",
    "apply_walk",
    "apply_walk_from_subset",
]

CSR_MAGIC = b"CPGR"
CSR_VERSION = 1


class GraphFormatError(ValueError):
    """Malformed edge-list input."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class GraphStructureError(ValueError):
    """Input parses but does not describe a usable graph."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph in CSR form.

    ``neighbors[offsets[u]:offsets[u+1]]`` lists the neighbours of ``u`` in
    ascending order. ``labels[u]`` is the id ``u`` carried in the source file.
    """

    offsets: np.ndarray
    neighbors: np.ndarray
    labels: np.ndarray = None
    _adj: sp.csr_matrix = field(default=None, repr=False)

    def __post_init__(self):
        offsets = np.ascontiguousarray(self.offsets, dtype=np.int64)
        neighbors = np.ascontiguousarray(self.neighbors, dtype=np.int64)
        n = offsets.shape[0] - 1
        labels = self.labels
        if labels is None:
            labels = np.arange(n, dtype=np.int64)
        labels = np.ascontiguousarray(labels, dtype=np.int64)
        for arr in (offsets, neighbors, labels):
            arr.setflags(write=False)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "neighbors", neighbors)
        object.__setattr__(self, "labels", labels)
        degrees = np.diff(offsets)
        degrees.setflags(write=False)
        object.__setattr__(self, "degrees", degrees)
        adj = sp.csr_matrix(
            (np.ones(neighbors.shape[0]), neighbors, offsets), shape=(n, n)
        )
        object.__setattr__(self, "_adj", adj)

    @property
    def n(self) -> int:
        return self.offsets.shape[0] - 1

    @property
    def m(self) -> int:
        return self.neighbors.shape[0] // 2

    @property
    def adjacency(self) -> sp.csr_matrix:
        return self._adj

    def neighbors_of(self, u: int) -> np.ndarray:
        return self.neighbors[self.offsets[u]:self.offsets[u + 1]]

    def volume(self, nodes) -> int:
        nodes = np.asarray(nodes, dtype=np.int64)
        return int(self.degrees[nodes].sum())

    def fingerprint(self) -> str:
        """Content hash of the CSR arrays (labels excluded)."""
        h = hashlib.sha256()
        h.update(struct.pack("<QQ", self.n, self.m))
        h.update(self.offsets.astype("<i8").tobytes())
        h.update(self.neighbors.astype("<i8").tobytes())
        return h.hexdigest()[:16]

    def to_dense(self) -> np.ndarray:
        return self._adj.toarray()

    def walk_matrix(self) -> np.ndarray:
        """Dense ``P = A D^-1``; for small graphs and test oracles."""
        return self.to_dense() / self.degrees[None, :]

    def validate(self):
        """Raise ``GraphStructureError`` if any CSR invariant is broken."""
        n = self.n
        if n < 1:
            raise GraphStructureError("graph has no nodes")
        if self.offsets[0] != 0 or self.offsets[-1] != self.neighbors.shape[0]:
            raise GraphStructureError("offsets do not span the neighbour array")
        if np.any(self.degrees < 1):
            raise GraphStructureError("isolated node present")
        if self.neighbors.size and (self.neighbors.min() < 0 or self.neighbors.max() >= n):
            raise GraphStructureError("neighbour id out of range")
        rows = np.repeat(np.arange(n), self.degrees)
        if np.any(rows == self.neighbors):
            raise GraphStructureError("self-loop present")
        # strictly increasing within each row => sorted and duplicate-free
        same_row = rows[1:] == rows[:-1]
        if np.any(np.diff(self.neighbors)[same_row] <= 0):
            raise GraphStructureError("neighbour lists not sorted/unique")
        if (self._adj != self._adj.T).nnz:
            raise GraphStructureError("adjacency is not symmetric")


@dataclass(frozen=True)
class NodeSet:
    """A set of node ids with its cached volume (sum of degrees)."""

    members: np.ndarray
    vol: int

    @classmethod
    def of(cls, g: Graph, nodes: Iterable[int]) -> "NodeSet":
        members = np.unique(np.fromiter(nodes, dtype=np.int64))
        return cls(members, g.volume(members))

    def __len__(self):
        return self.members.shape[0]

    def __contains__(self, u):
        i = np.searchsorted(self.members, u)
        return i < len(self.members) and self.members[i] == u


def from_edges(edges, *, labels_in_order=True) -> Graph:
    """Build a cleaned ``Graph`` from an ``(E, 2)`` array of integer ids.

    Edges are symmetrised, duplicates and self-loops dropped, and the ids
    that survive are compacted to ``[0, n)`` in order of first appearance.
    """
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    edges = edges[edges[:, 0] != edges[:, 1]]
    if edges.shape[0] == 0:
        raise GraphStructureError("graph is empty after removing self-loops")
    flat = edges.ravel()
    uniq, first, inverse = np.unique(flat, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.shape[0])
    compact = rank[inverse.ravel()].reshape(-1, 2)
    labels = uniq[order]
    n = labels.shape[0]

    both = np.concatenate([compact, compact[:, ::-1]])
    key = both[:, 0] * n + both[:, 1]
    key = np.unique(key)
    rows, cols = np.divmod(key, n)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=offsets[1:])
    return Graph(offsets, cols, labels)


def _read_text(source) -> str:
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return fh.read().decode()
    data = source.read()
    return data.decode() if isinstance(data, bytes) else data


def load_edge_list(source) -> Graph:
    """Parse a SNAP-style edge list (path, bytes stream or text stream).

    Lines holding two whitespace-separated integers are edges; blank lines
    and lines starting with ``#`` are skipped. Extra columns are ignored.
    """
    text = _read_text(source)
    pairs = []
    append = pairs.append
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 2:
            raise GraphFormatError(f"expected two node ids, got {line!r}", lineno)
        try:
            append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise GraphFormatError(f"non-integer token in {line!r}", lineno) from None
    if not pairs:
        raise GraphStructureError("no edges in input")
    g = from_edges(np.array(pairs, dtype=np.int64))
    return g


def _intro_order_edges(g: Graph) -> np.ndarray:
    """Edges (u < v) ordered so that first appearance reproduces ids 0..n-1.

    Falls back to plain row order when the graph's ids were not produced
    by first-seen compaction.
    """
    n = g.n
    rows = np.repeat(np.arange(n), g.degrees)
    upper = rows < g.neighbors
    all_edges = np.stack([rows[upper], g.neighbors[upper]], axis=1)
    seen = np.zeros(n, dtype=bool)
    intro = []
    for k in range(n):
        if seen[k]:
            continue
        nb = g.neighbors_of(k)
        if nb.size and nb[0] < k:
            intro.append((nb[0], k))
            seen[k] = True
        elif k + 1 < n and np.searchsorted(nb, k + 1) < nb.size and nb[np.searchsorted(nb, k + 1)] == k + 1:
            intro.append((k, k + 1))
            seen[k] = seen[k + 1] = True
        else:
            return all_edges
    intro = np.array(intro, dtype=np.int64).reshape(-1, 2)
    lo = np.minimum(intro[:, 0], intro[:, 1])
    hi = np.maximum(intro[:, 0], intro[:, 1])
    used = np.zeros(all_edges.shape[0], dtype=bool)
    pos = np.searchsorted(all_edges[:, 0] * n + all_edges[:, 1], lo * n + hi)
    used[pos] = True
    return np.concatenate([intro, all_edges[~used]])


def write_edge_list(g: Graph, dest, *, original_labels=False):
    """Write each undirected edge once. Reloading the output of a graph built
    by :func:`load_edge_list` or :func:`from_edges` yields identical CSR."""
    edges = _intro_order_edges(g)
    if original_labels:
        edges = g.labels[edges]
    buf = io.StringIO()
    buf.write(f"# n={g.n} m={g.m}\n")
    np.savetxt(buf, edges, fmt="%d", delimiter="\t")
    payload = buf.getvalue()
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w") as fh:
            fh.write(payload)
    elif isinstance(dest, io.TextIOBase):
        dest.write(payload)
    else:
        dest.write(payload.encode())


def write_csr_cache(g: Graph, dest):
    """Binary layout (little endian): ``b"CPGR"``, u32 version, u64 n,
    u64 m, then ``n+1`` int64 offsets and ``2m`` int64 neighbour ids."""
    header = CSR_MAGIC + struct.pack("<IQQ", CSR_VERSION, g.n, g.m)
    body = g.offsets.astype("<i8").tobytes() + g.neighbors.astype("<i8").tobytes()
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "wb") as fh:
            fh.write(header + body)
    else:
        dest.write(header + body)


def read_csr_cache(source) -> Graph:
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            data = fh.read()
    else:
        data = source.read()
    if data[:4] != CSR_MAGIC:
        raise GraphFormatError("bad magic in CSR cache")
    version, n, m = struct.unpack_from("<IQQ", data, 4)
    if version != CSR_VERSION:
        raise GraphFormatError(f"unsupported CSR cache version {version}")
    start = 4 + struct.calcsize("<IQQ")
    expected = start + 8 * (n + 1) + 8 * 2 * m
    if len(data) != expected:
        raise GraphFormatError("truncated CSR cache")
    offsets = np.frombuffer(data, dtype="<i8", count=n + 1, offset=start)
    neighbors = np.frombuffer(data, dtype="<i8", count=2 * m, offset=start + 8 * (n + 1))
    return Graph(offsets.copy(), neighbors.copy())


def _check_len(g: Graph, x: np.ndarray):
    if x.shape[0] != g.n:
        raise ValueError(f"vector has length {x.shape[0]}, graph has {g.n} nodes")


def apply_walk(g: Graph, x) -> np.ndarray:
    """Return ``P x = A D^-1 x``."""
    x = np.asarray(x, dtype=np.float64)
    _check_len(g, x)
    return g.adjacency @ (x / g.degrees)


def apply_walk_from_subset(g: Graph, x, s, scale, accum) -> int:
    """``accum += scale * P (x restricted to s)``, in place.

    Returns the work done, i.e. the volume of ``s``.
    """
    x = np.asarray(x, dtype=np.float64)
    _check_len(g, x)
    _check_len(g, accum)
    members = s.members if isinstance(s, NodeSet) else np.asarray(s, dtype=np.int64)
    if members.size == 0:
        return 0
    sub = g.adjacency[:, members]
    accum += sub @ (scale * x[members] / g.degrees[members])
    return int(g.degrees[members].sum())
