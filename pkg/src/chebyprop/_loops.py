"""Compiled inner loops. Arrays only; the public wrappers live in
``solvers`` and ``bidirectional``."""

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@njit(cache=True, nogil=True)
def _scatter_seed(offsets, neighbors, deg, seed_nodes, seed_vals, scale, r, cand, flag, ncand):
    """r += scale * P x for a sparse seed; returns (ncand, work)."""
    work = 0
    for i in range(seed_nodes.shape[0]):
        u = seed_nodes[i]
        share = scale * seed_vals[i] / deg[u]
        work += deg[u]
        for j in range(offsets[u], offsets[u + 1]):
            v = neighbors[j]
            r[v] += share
            if not flag[v]:
                flag[v] = True
                cand[ncand] = v
                ncand += 1
    return ncand, work


@njit(cache=True, nogil=True)
def push_loop(offsets, neighbors, deg, seed_nodes, seed_vals, zeta, thresholds, N):
    """Taylor push. Residual below threshold at step k is dropped."""
    n = deg.shape[0]
    y = np.zeros(n)
    r_a = np.zeros(n)
    r_b = np.zeros(n)
    cand_a = np.empty(n, np.int64)
    cand_b = np.empty(n, np.int64)
    flag_a = np.zeros(n, np.bool_)
    flag_b = np.zeros(n, np.bool_)
    na = 0
    for i in range(seed_nodes.shape[0]):
        u = seed_nodes[i]
        r_a[u] += seed_vals[i]
        if not flag_a[u]:
            flag_a[u] = True
            cand_a[na] = u
            na += 1
    nb = 0
    work = 0
    steps = 0
    for k in range(N):
        steps = k + 1
        zk = zeta[k]
        th = thresholds[k]
        for i in range(na):
            u = cand_a[i]
            val = r_a[u]
            if abs(val) > th * deg[u]:
                y[u] += zk * val
                share = val / deg[u]
                work += deg[u]
                for j in range(offsets[u], offsets[u + 1]):
                    v = neighbors[j]
                    r_b[v] += share
                    if not flag_b[v]:
                        flag_b[v] = True
                        cand_b[nb] = v
                        nb += 1
            r_a[u] = 0.0
            flag_a[u] = False
        # swap roles
        r_a, r_b = r_b, r_a
        cand_a, cand_b = cand_b, cand_a
        flag_a, flag_b = flag_b, flag_a
        na = nb
        nb = 0
        if na == 0:
            break
    return y, steps, work


@njit(cache=True, nogil=True)
def cheby_push_loop(offsets, neighbors, deg, seed_nodes, seed_vals, c, eps_k, K,
                    lazy, by_degree, trace, cur_trace, new_trace, pushed_nodes, pushed_ptr):
    """Chebyshev push over two swapped residual buffers.

    Initial state: y = c_0 x, r_cur = P x, r_new = -x. Iteration k scans the
    candidates of r_cur and, for |r_cur(u)| > eps_k d_u, adds c_k r_cur(u)
    to y, adds 2 r_cur(u)/d_u to r_new over N(u) and negates r_cur(u).

    Candidates of a buffer are the nodes whose entry changed since the
    buffer was last scanned. With nondecreasing ``eps_k`` (``lazy``) an
    unchanged entry that failed the test before fails it again, so it is
    dropped from the list; otherwise every nonzero entry is kept.
    """
    n = deg.shape[0]
    y = np.zeros(n)
    r_cur = np.zeros(n)
    r_new = np.zeros(n)
    cand_cur = np.empty(n, np.int64)
    cand_new = np.empty(n, np.int64)
    flag_cur = np.zeros(n, np.bool_)
    flag_new = np.zeros(n, np.bool_)
    n_new = 0
    for i in range(seed_nodes.shape[0]):
        u = seed_nodes[i]
        y[u] += c[0] * seed_vals[i]
        r_new[u] -= seed_vals[i]
        if not flag_new[u]:
            flag_new[u] = True
            cand_new[n_new] = u
            n_new += 1
    n_cur, work = _scatter_seed(offsets, neighbors, deg, seed_nodes, seed_vals, 1.0,
                                r_cur, cand_cur, flag_cur, 0)
    n_pushed = 0
    for k in range(1, K + 1):
        ck = c[k]
        th = eps_k[k]
        keep = 0
        for i in range(n_cur):
            u = cand_cur[i]
            val = r_cur[u]
            limit = th * deg[u] if by_degree else th
            if abs(val) > limit:
                y[u] += ck * val
                share = 2.0 * val / deg[u]
                work += deg[u]
                for j in range(offsets[u], offsets[u + 1]):
                    v = neighbors[j]
                    r_new[v] += share
                    if not flag_new[v]:
                        flag_new[v] = True
                        cand_new[n_new] = v
                        n_new += 1
                r_cur[u] = -val
                cand_cur[keep] = u
                keep += 1
                if trace:
                    pushed_nodes[n_pushed] = u
                    n_pushed += 1
            elif not lazy and val != 0.0:
                cand_cur[keep] = u
                keep += 1
            else:
                flag_cur[u] = False
        n_cur = keep
        if trace:
            pushed_ptr[k + 1] = n_pushed
        r_cur, r_new = r_new, r_cur
        cand_cur, cand_new = cand_new, cand_cur
        flag_cur, flag_new = flag_new, flag_cur
        n_cur, n_new = n_new, n_cur
        if trace:
            cur_trace[k, :] = r_cur
            new_trace[k, :] = r_new
    return y, work


@njit(cache=True, nogil=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, nogil=True)
def stream_state(seed, v):
    """Initial state of the walk stream owned by node ``v``."""
    return _mix64(np.uint64(seed) ^ _mix64(np.uint64(v) + _GOLDEN))


@njit(cache=True, nogil=True, inline="always")
def _next_uniform(state):
    state = state + _GOLDEN
    return state, (_mix64(state) >> _S11) * _INV53


@njit(cache=True, nogil=True)
def walk_accumulate(offsets, neighbors, deg, starts, counts, increments, alpha, seed, out):
    """Run ``counts[i]`` alpha-walks from ``starts[i]``, adding
    ``increments[i]`` to ``out`` at each terminal. Returns total steps."""
    steps = 0
    for i in range(starts.shape[0]):
        v = starts[i]
        state = stream_state(seed, v)
        inc = increments[i]
        for _ in range(counts[i]):
            u = v
            while True:
                state, x = _next_uniform(state)
                if x < alpha:
                    break
                state, x = _next_uniform(state)
                d = deg[u]
                j = int(x * d)
                if j >= d:
                    j = d - 1
                u = neighbors[offsets[u] + j]
                steps += 1
            out[u] += inc
    return steps
