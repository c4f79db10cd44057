"""Propagation kernels: Taylor coefficients, Chebyshev coefficients and
truncation planning.

A kernel ``f`` on ``[-1, 1]`` has a Taylor series ``sum zeta_k x^k`` and a
Chebyshev series ``sum c_k T_k(x)``. For PPR and HKPR both coefficient
sequences are nonnegative and sum to one.
"""

from __future__ import annotations

import functools
import hashlib
import json
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import fft, stats

__all__ = [
    "Kernel",
    "KernelError",
    "NumericalError",
    "TruncationPlan",
    "ppr_cheby_coeffs",
    "hkpr_cheby_coeffs",
    "custom_cheby_coeffs",
    "taylor_coeffs",
    "plan_truncation",
    "parse_kernel",
]

TERM_CAP = 10**6
QUAD_NODE_CAP = 2**16


class KernelError(ValueError):
    """Bad kernel parameter."""


class NumericalError(ArithmeticError):
    """A numerical procedure failed to converge."""


@dataclass(frozen=True)
class Kernel:
    family: str
    alpha: Optional[float] = None
    t: Optional[float] = None
    taylor: Optional[tuple] = None
    func: Optional[Callable] = None

    @classmethod
    def ppr(cls, alpha: float) -> "Kernel":
        alpha = float(alpha)
        if not 0.0 < alpha < 1.0:
            raise KernelError(f"alpha must lie in (0, 1), got {alpha}")
        return cls("ppr", alpha=alpha)

    @classmethod
    def hkpr(cls, t: float) -> "Kernel":
        t = float(t)
        if not t >= 0.0 or math.isinf(t):
            raise KernelError(f"t must be a finite nonnegative number, got {t}")
        return cls("hkpr", t=t)

    @classmethod
    def custom(cls, taylor, func: Optional[Callable] = None) -> "Kernel":
        """Kernel given by its Taylor coefficients.

        ``func`` evaluates the kernel on ``[-1, 1]`` and is used for the
        Chebyshev coefficients; without it the Taylor polynomial is used.
        """
        taylor = tuple(float(z) for z in taylor)
        if not taylor or not all(math.isfinite(z) for z in taylor):
            raise KernelError("custom kernel needs a finite, nonempty coefficient list")
        return cls("custom", taylor=taylor, func=func)

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.family == "ppr":
            return self.alpha / (1.0 - (1.0 - self.alpha) * x)
        if self.family == "hkpr":
            return np.exp(-self.t * (1.0 - x))
        if self.func is not None:
            return self.func(x)
        return np.polynomial.polynomial.polyval(x, self.taylor)

    def taylor_coeffs(self, N: int) -> np.ndarray:
        return taylor_coeffs(self, N)

    def cheby_coeffs(self, K: int) -> np.ndarray:
        if self.family == "ppr":
            return ppr_cheby_coeffs(self.alpha, K)
        if self.family == "hkpr":
            return hkpr_cheby_coeffs(self.t, K)
        return _custom_cheby_cached(self, K).copy()

    def descriptor(self) -> str:
        if self.family == "ppr":
            return f"ppr:alpha={self.alpha!r}"
        if self.family == "hkpr":
            return f"hkpr:t={self.t!r}"
        digest = hashlib.sha256(np.asarray(self.taylor).tobytes()).hexdigest()[:12]
        return f"custom:taylor={digest}"


@dataclass(frozen=True)
class TruncationPlan:
    K: int
    N: int
    epsilon: float
    tail_bound: float
    taylor_tail: float


def ppr_cheby_coeffs(alpha: float, K: int) -> np.ndarray:
    """``[gamma, 2 gamma beta, 2 gamma beta^2, ...]`` of length ``K + 1``."""
    if not 0.0 < alpha < 1.0:
        raise KernelError(f"alpha must lie in (0, 1), got {alpha}")
    if K < 0:
        raise KernelError("K must be nonnegative")
    root = math.sqrt(2.0 * alpha - alpha * alpha)
    gamma = alpha / root
    # (1 - root) / (1 - alpha), rewritten to stay finite as alpha -> 1
    beta = (1.0 - alpha) / (1.0 + root)
    c = 2.0 * gamma * beta ** np.arange(K + 1, dtype=np.float64)
    c[0] = gamma
    return c


def _ppr_params(alpha):
    root = math.sqrt(2.0 * alpha - alpha * alpha)
    return alpha / root, (1.0 - alpha) / (1.0 + root)


def _scaled_bessel_i(t: float, kmax: int) -> np.ndarray:
    """``e^-t I_k(t)`` for ``k = 0..kmax`` by Miller's backward recurrence,
    normalised with ``e^-t (I_0 + 2 sum_{k>=1} I_k) = 1``."""
    start = max(kmax, math.ceil(t)) + 40
    out = np.zeros(kmax + 1)
    i_hi, i_cur = 0.0, 1e-30
    total = 0.0
    for n in range(start, 0, -1):
        if n <= kmax:
            out[n] = i_cur
        total += 2.0 * i_cur
        i_lo = i_hi + (2.0 * n / t) * i_cur
        i_hi, i_cur = i_cur, i_lo
        if i_cur > 1e250:
            i_hi *= 1e-250
            i_cur *= 1e-250
            total *= 1e-250
            out *= 1e-250
    out[0] = i_cur
    total += i_cur
    return out / total


def hkpr_cheby_coeffs(t: float, K: int) -> np.ndarray:
    """``[e^-t I_0(t), 2 e^-t I_1(t), ...]`` of length ``K + 1``."""
    if not t > 0.0:
        raise KernelError(f"t must be positive, got {t}")
    if K < 0:
        raise KernelError("K must be nonnegative")
    c = _scaled_bessel_i(float(t), K)
    c[1:] *= 2.0
    return c


def _cheb_quadrature(values: np.ndarray) -> np.ndarray:
    # values sampled at x_j = cos(pi (j + 1/2) / M)
    M = values.shape[0]
    c = fft.dct(values, type=2) / M
    c[0] *= 0.5
    return c


def custom_cheby_coeffs(f: Callable, K: int) -> np.ndarray:
    """Chebyshev coefficients ``c_0..c_K`` of ``f`` by Gauss-Chebyshev
    quadrature, doubling the node count until ``c_0..c_K`` settle to 1e-12."""
    if K < 0:
        raise KernelError("K must be nonnegative")

    def sample(M):
        x = np.cos(np.pi * (np.arange(M) + 0.5) / M)
        try:
            y = np.asarray(f(x), dtype=np.float64)
            if y.shape != x.shape:
                raise ValueError
        except (TypeError, ValueError):
            y = np.array([float(f(xi)) for xi in x])
        if not np.all(np.isfinite(y)):
            raise NumericalError("kernel is not finite on [-1, 1]")
        return y

    M = 64
    while M < 2 * (K + 1):
        M *= 2
    prev = _cheb_quadrature(sample(M))[: K + 1]
    while True:
        M *= 2
        if M > QUAD_NODE_CAP:
            raise NumericalError(
                f"Chebyshev quadrature did not converge with {QUAD_NODE_CAP} nodes")
        cur = _cheb_quadrature(sample(M))[: K + 1]
        if np.max(np.abs(cur - prev)) <= 1e-12:
            return cur
        prev = cur


@functools.lru_cache(maxsize=64)
def _custom_cheby_cached(kernel: Kernel, K: int) -> np.ndarray:
    if kernel.func is None:
        # exact conversion of the Taylor polynomial
        c = np.polynomial.chebyshev.poly2cheb(np.asarray(kernel.taylor))
        out = np.zeros(K + 1)
        out[: min(K + 1, c.shape[0])] = c[: K + 1]
        return out
    return custom_cheby_coeffs(kernel, K)


def taylor_coeffs(kernel: Kernel, N: int) -> np.ndarray:
    """``zeta_0..zeta_N``."""
    if N < 0:
        raise KernelError("N must be nonnegative")
    k = np.arange(N + 1, dtype=np.float64)
    if kernel.family == "ppr":
        a = kernel.alpha
        return a * (1.0 - a) ** k
    if kernel.family == "hkpr":
        t = kernel.t
        z = np.empty(N + 1)
        z[0] = math.exp(-t)
        for i in range(N):
            z[i + 1] = z[i] * t / (i + 1)
        return z
    out = np.zeros(N + 1)
    src = np.asarray(kernel.taylor)[: N + 1]
    out[: src.shape[0]] = src
    return out


def _first_index_below(tails: np.ndarray, eps: float, lo: int) -> Optional[int]:
    idx = np.flatnonzero(tails[lo:] < eps)
    return int(idx[0]) + lo if idx.size else None


def _reverse_tails(c: np.ndarray) -> np.ndarray:
    """``out[j] = sum_{k > j} |c_k|``, summed smallest-first."""
    a = np.abs(c)
    out = np.zeros_like(a)
    out[:-1] = np.cumsum(a[::-1])[::-1][1:]
    return out


def _cheby_K(kernel: Kernel, eps: float):
    if kernel.family == "ppr":
        gamma, beta = _ppr_params(kernel.alpha)
        if beta == 0.0:
            return 1, 0.0
        scale = 2.0 * gamma / (1.0 - beta)
        # tail(K) = scale * beta^(K+1)
        guess = max(1, int(math.floor(math.log(eps / scale) / math.log(beta))) - 2)
        K = guess
        while scale * beta ** (K + 1) >= eps:
            K += 1
            if K > TERM_CAP:
                raise KernelError("Chebyshev tail does not reach epsilon within the term cap")
        while K > 1 and scale * beta ** K < eps:
            K -= 1
        return K, scale * beta ** (K + 1)

    M = 64
    if kernel.family == "hkpr":
        M = max(M, int(math.ceil(kernel.t + 10.0 * math.sqrt(kernel.t) + 50)))
    while True:
        c = kernel.cheby_coeffs(M)
        tails = _reverse_tails(c)
        K = _first_index_below(tails, eps, 1)
        settled = abs(c[-1]) < min(eps, 1e-30) * 1e-6 or np.all(c[-8:] == 0.0)
        if K is not None and (settled or K < M // 2):
            return K, float(tails[K])
        M *= 2
        if M > TERM_CAP:
            raise KernelError("Chebyshev tail does not reach epsilon within the term cap")


def _taylor_N(kernel: Kernel, eps: float):
    # N counts terms used: zeta_0..zeta_{N-1}; tail(N) = sum_{k >= N} |zeta_k|
    if kernel.family == "ppr":
        q = 1.0 - kernel.alpha
        N = max(1, int(math.floor(math.log(eps) / math.log(q))) - 2)
        while q ** N >= eps:
            N += 1
            if N > TERM_CAP:
                raise KernelError("Taylor tail does not reach epsilon within the term cap")
        while N > 1 and q ** (N - 1) < eps:
            N -= 1
        return N, q ** N
    if kernel.family == "hkpr":
        t = kernel.t
        N = 1
        sf = lambda n: float(stats.poisson.sf(n - 1, t)) if t > 0 else 0.0
        step = max(1, int(math.sqrt(t + 1)))
        while sf(N) >= eps:
            N += step
            if N > TERM_CAP:
                raise KernelError("Taylor tail does not reach epsilon within the term cap")
        while N > 1 and sf(N - 1) < eps:
            N -= 1
        return N, sf(N)
    z = np.asarray(kernel.taylor)
    tails = np.append(_reverse_tails(z), 0.0)  # tails[j] = sum_{k>j}; shift below
    # sum_{k >= N} |z_k| = tails[N-1]
    for N in range(1, z.shape[0] + 1):
        if tails[N - 1] < eps:
            return N, float(tails[N - 1])
    return z.shape[0], 0.0


def plan_truncation(kernel: Kernel, epsilon: float) -> TruncationPlan:
    """Smallest Chebyshev step ``K`` and Taylor step ``N`` whose exact
    coefficient tails fall below ``epsilon``."""
    if not 0.0 < epsilon < 1.0:
        raise KernelError(f"epsilon must lie in (0, 1), got {epsilon}")
    K, tail = _cheby_K(kernel, epsilon)
    N, ttail = _taylor_N(kernel, epsilon)
    return TruncationPlan(K=K, N=N, epsilon=epsilon, tail_bound=tail, taylor_tail=ttail)


def parse_kernel(spec: str) -> Kernel:
    """Parse ``"ppr:alpha=0.2"``, ``"hkpr:t=5"`` or ``"custom:file=c.json"``."""
    family, _, rest = spec.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise KernelError(f"malformed kernel parameter {item!r}")
        params[key.strip()] = value.strip()
    family = family.strip().lower()
    try:
        if family == "ppr":
            return Kernel.ppr(float(params["alpha"]))
        if family == "hkpr":
            return Kernel.hkpr(float(params["t"]))
        if family == "custom":
            with open(params["file"]) as fh:
                return Kernel.custom(json.load(fh))
    except KeyError as exc:
        raise KernelError(f"kernel {family!r} is missing parameter {exc}") from None
    except ValueError as exc:
        raise KernelError(str(exc)) from None
    raise KernelError(f"unknown kernel family {family!r}")
