"""Ground truth, error metrics and query-set selection."""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .graph import Graph
from .kernels import Kernel, plan_truncation
from .solvers import power_method

__all__ = [
    "ErrorReport",
    "GroundTruth",
    "measure",
    "truth_truncation",
    "ground_truth",
    "select_sources",
    "cache_dir",
    "truth_path",
    "write_truth",
    "read_truth",
    "cached_ground_truth",
]

TRUTH_TAIL = 1e-20
CUSTOM_TAIL = 1e-18
_MAGIC = b"CPGT"
_VERSION = 1


@dataclass(frozen=True)
class ErrorReport:
    l1: float
    l2: float
    deg_norm_inf: float
    argmax_node: int


@dataclass(frozen=True)
class GroundTruth:
    vector: np.ndarray
    kernel: Kernel
    source: int
    truncation: int


def measure(truth, estimate, g: Graph) -> ErrorReport:
    truth = np.asarray(truth, dtype=np.float64)
    estimate = np.asarray(estimate, dtype=np.float64)
    if truth.shape != estimate.shape or truth.shape != (g.n,):
        raise ValueError("truth, estimate and graph sizes differ")
    diff = np.abs(truth - estimate)
    scaled = diff / g.degrees
    u = int(np.argmax(scaled))
    # scale before squaring so tiny differences do not underflow
    top = diff.max()
    l2 = float(top * np.sqrt(np.sum((diff / top) ** 2))) if top > 0 else 0.0
    return ErrorReport(float(diff.sum()), l2, float(scaled[u]), u)


def truth_truncation(kernel: Kernel) -> int:
    """Taylor length whose tail is at most 1e-20: ``ceil(ln(1e20)/alpha)``
    for PPR, ``ceil(2 t ln(1e20))`` for HKPR."""
    if kernel.family == "ppr":
        return math.ceil(math.log(1.0 / TRUTH_TAIL) / kernel.alpha)
    if kernel.family == "hkpr":
        return math.ceil(2.0 * kernel.t * math.log(1.0 / TRUTH_TAIL))
    return plan_truncation(kernel, CUSTOM_TAIL).N


def ground_truth(g: Graph, kernel: Kernel, s: int) -> GroundTruth:
    N = truth_truncation(kernel)
    y = power_method(g, kernel, s, N).y_hat
    return GroundTruth(y, kernel, int(s), N)


def select_sources(g: Graph, strategy: str, count: int, seed=0) -> list:
    if not 0 <= count <= g.n:
        raise ValueError(f"count must lie in [0, {g.n}]")
    if strategy == "uniform":
        rng = np.random.default_rng(seed)
        return [int(u) for u in rng.choice(g.n, size=count, replace=False)]
    if strategy in ("top_degree", "topdeg"):
        # stable sort on -degree keeps smaller ids first among ties
        order = np.argsort(-g.degrees, kind="stable")
        return [int(u) for u in order[:count]]
    raise ValueError(f"unknown source strategy {strategy!r}")


def cache_dir(override=None) -> Path:
    if override is not None:
        return Path(override)
    env = os.environ.get("CHEBYPROP_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "chebyprop"


def truth_path(g: Graph, kernel: Kernel, s: int, directory=None) -> Path:
    desc = kernel.descriptor().replace(":", "_").replace("=", "")
    return cache_dir(directory) / f"{g.fingerprint()}-{desc}-{int(s)}.cpgt"


def write_truth(path, truth: GroundTruth):
    desc = truth.kernel.descriptor().encode()
    vec = np.ascontiguousarray(truth.vector, dtype="<f8")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    with open(tmp, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, len(desc)))
        fh.write(desc)
        fh.write(struct.pack("<QQ", truth.source, vec.shape[0]))
        fh.write(vec.tobytes())
    os.replace(tmp, path)


def read_truth(path, kernel: Kernel, s: int, n: int) -> Optional[GroundTruth]:
    """Load a cached truth; ``None`` if missing, corrupt or for another query."""
    try:
        data = Path(path).read_bytes()
    except FileNotFoundError:
        return None
    try:
        if data[:4] != _MAGIC:
            return None
        version, dlen = struct.unpack_from("<II", data, 4)
        if version != _VERSION:
            return None
        off = 12 + dlen
        desc = data[12:off].decode()
        source, size = struct.unpack_from("<QQ", data, off)
        off += 16
        if desc != kernel.descriptor() or source != s or size != n or len(data) != off + 8 * n:
            return None
    except (struct.error, UnicodeDecodeError):
        return None
    vec = np.frombuffer(data, dtype="<f8", count=n, offset=off).astype(np.float64)
    return GroundTruth(vec, kernel, int(s), truth_truncation(kernel))


def cached_ground_truth(g: Graph, kernel: Kernel, s: int, directory=None):
    """Return ``(truth, generated)``; computes and stores the truth when the
    cache entry is missing or unusable."""
    path = truth_path(g, kernel, s, directory)
    truth = read_truth(path, kernel, s, g.n)
    if truth is not None:
        return truth, False
    truth = ground_truth(g, kernel, s)
    write_truth(path, truth)
    return truth, True
