import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chebyprop.graph import apply_walk
from chebyprop.kernels import Kernel, plan_truncation
from chebyprop.solvers import (cheby_power, cheby_push, cheby_push_thresholds,
                               dense_chebyshev_terms, general_gp_matrix, general_gp_vector,
                               power_method, push, subset_recurrence_dense)
from chebyprop.synthetic import grid, path, preferential_attachment, ring, star

from conftest import random_connected

PPR = Kernel.ppr(0.2)


def exact_ppr(g, alpha, x):
    P = g.walk_matrix()
    return alpha * np.linalg.solve(np.eye(g.n) - (1 - alpha) * P, x)


def ref_push(g, zeta, s, N, eps):
    """Taylor push scanning every node each step."""
    r = np.zeros(g.n)
    r[s] = 1.0
    y = np.zeros(g.n)
    for k in range(N):
        nxt = np.zeros(g.n)
        for u in range(g.n):
            if abs(r[u]) > eps[k] * g.degrees[u]:
                y[u] += zeta[k] * r[u]
                for v in g.neighbors_of(u):
                    nxt[v] += r[u] / g.degrees[u]
        r = nxt
    return y


def ref_cheby_push(g, c, s, K, eps):
    """Chebyshev push with a full scan of V each iteration."""
    y = np.zeros(g.n)
    y[s] = c[0]
    cur = apply_walk(g, np.eye(g.n)[s])
    new = -np.eye(g.n)[s]
    for k in range(1, K + 1):
        for u in range(g.n):
            if abs(cur[u]) > eps[k] * g.degrees[u]:
                y[u] += c[k] * cur[u]
                for v in g.neighbors_of(u):
                    new[v] += 2 * cur[u] / g.degrees[u]
                cur[u] = -cur[u]
        cur, new = new, cur
    return y


def test_power_method_single_term():
    g = path(3)
    y = power_method(g, PPR, 1, 1).y_hat
    assert np.array_equal(y, [0, 0.2, 0])


def test_power_method_path_exact():
    g = path(3)
    y = power_method(g, PPR, 1, 200).y_hat
    assert np.abs(y - exact_ppr(g, 0.2, np.eye(3)[1])).sum() < 1e-10


def test_power_method_bad_source():
    with pytest.raises(ValueError):
        power_method(path(3), PPR, 3, 5)
    with pytest.raises(ValueError):
        power_method(path(3), PPR, 0, 0)


def test_push_star_hand_trace():
    # zeta = [1/2, 1/4, 1/8]; step 0 pushes the centre (1 > 0.3), step 1 the
    # leaves (1/3 > 0.1), step 2 the centre again with mass 1.
    g = star(3)
    y = push(g, Kernel.ppr(0.5), 0, 3, 0.1).y_hat
    assert np.allclose(y, [0.625, 1 / 12, 1 / 12, 1 / 12], atol=1e-15)
    # from a leaf at 0.4: the leaf passes (1 > 0.4), the centre then fails 1 > 1.2
    y = push(g, Kernel.ppr(0.5), 1, 3, 0.4).y_hat
    assert np.array_equal(y, [0, 0.5, 0, 0])


def test_push_large_thresholds():
    g = path(3)
    y = push(g, PPR, 1, 10, 1.0).y_hat
    assert np.array_equal(y, np.zeros(3))
    g = star(3)
    y = push(g, PPR, 1, 10, 1.0).y_hat  # leaf: 1 > 1 * 1 fails
    assert np.array_equal(y, np.zeros(4))
    y = push(g, PPR, 1, 10, 0.999).y_hat
    assert np.array_equal(y, [0, 0.2, 0, 0])


def test_push_matches_reference(rng):
    for _ in range(5):
        g = random_connected(25, 30, rng)
        N = 12
        eps = rng.uniform(0, 0.05, size=N)
        zeta = PPR.taylor_coeffs(N - 1)
        got = push(g, PPR, 3, N, eps).y_hat
        assert np.max(np.abs(got - ref_push(g, zeta, 3, N, eps))) < 1e-15


def test_push_zero_threshold_is_power_method(rng):
    g = random_connected(60, 90, rng)
    for kern in (PPR, Kernel.hkpr(5.0)):
        a = push(g, kern, 7, 40, 0.0).y_hat
        b = power_method(g, kern, 7, 40).y_hat
        assert np.max(np.abs(a - b)) < 1e-12


def test_cheby_power_first_terms():
    g = star(3)
    c = PPR.cheby_coeffs(1)
    y = cheby_power(g, PPR, 1, 1).y_hat
    assert np.allclose(y, c[0] * np.eye(4)[1] + c[1] * np.eye(4)[0])


def test_cheby_power_star_t3():
    g = star(3)
    r = cheby_power(g, PPR, 1, 3, record=True).stats["residuals"]
    assert np.allclose(r[3], [1, 0, 0, 0], atol=1e-15)
    T = dense_chebyshev_terms(g.walk_matrix(), 3)
    for k in range(4):
        assert np.allclose(r[k], T[k][:, 1], atol=1e-15)


def test_cheby_power_path_accuracy():
    g = path(3)
    K = plan_truncation(PPR, 1e-8).K
    y = cheby_power(g, PPR, 1, K).y_hat
    assert np.linalg.norm(y - exact_ppr(g, 0.2, np.eye(3)[1])) < 1e-8


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.integers(2, 30), st.integers(1, 25))
def test_chebyshev_mass_conservation(seed, n, K):
    g = random_connected(n, n, np.random.default_rng(seed))
    r = cheby_power(g, PPR, 0, K, record=True).stats["residuals"]
    assert np.all(np.abs(r.sum(axis=1) - 1) < 1e-9)


def test_thresholds_schedule():
    c = PPR.cheby_coeffs(4)
    eps = cheby_push_thresholds(c, 4, 1e-3)
    for k in range(5):
        assert eps[k] == pytest.approx(1e-3 / (16 * c[k:].sum()), rel=1e-14)
    assert np.all(np.diff(eps) > 0)
    c = np.array([1.0, 0.5, 0.0, 0.0])
    assert np.isinf(cheby_push_thresholds(c, 3, 1e-3)[2:]).all()
    assert not cheby_push_thresholds(c, 3, 0.0).any()


def test_cheby_push_worked_example():
    # seed e_v1 on the star; only c_3 matters for the residual trace
    g = star(3)
    for kwargs in (dict(thresholds=1 / 3 + 1e-12, by_degree=False),
                   dict(thresholds=[0, 0.3, 1 / 3 + 1e-12, 1 / 3 + 1e-12])):
        tr = cheby_push(g, [0, 0, 0, 1.0], 1, 3, 0.0, trace=True, **kwargs).stats["trace"]
        assert np.allclose(tr.r_cur[0], [1, 0, 0, 0], atol=1e-15)
        assert np.allclose(tr.r_cur[1], [0, -1 / 3, 2 / 3, 2 / 3], atol=1e-15)
        assert np.allclose(tr.r_cur[2], [5 / 3, 0, 0, 0], atol=1e-15)
        assert [p.tolist() for p in tr.pushed] == [[], [0], [2, 3], [0]]


def test_cheby_push_zero_eps_is_cheby_power(rng):
    for _ in range(4):
        g = random_connected(80, 120, rng)
        for kern in (PPR, Kernel.hkpr(5.0), Kernel.ppr(0.02)):
            a = cheby_push(g, kern, 11, 20, 0.0).y_hat
            b = cheby_power(g, kern, 11, 20).y_hat
            assert np.max(np.abs(a - b)) < 1e-12


@pytest.mark.parametrize("monotone", [True, False])
def test_cheby_push_matches_full_scan(rng, monotone):
    for _ in range(6):
        g = random_connected(30, 40, rng)
        K = 12
        c = PPR.cheby_coeffs(K)
        eps = cheby_push_thresholds(c, K, 1e-2) if monotone else rng.uniform(0, 0.02, K + 1)
        got = cheby_push(g, PPR, 4, K, 0.0, thresholds=eps).y_hat
        assert np.max(np.abs(got - ref_cheby_push(g, c, 4, K, eps))) < 1e-14


def test_subset_recurrence_full_sets():
    g = preferential_attachment(15, 2, seed=1)
    K = 8
    r_hat, deltas = subset_recurrence_dense(g, 3, [None] * K, K)
    T = dense_chebyshev_terms(g.walk_matrix(), K)
    for k in range(K + 1):
        assert np.allclose(r_hat[k], T[k][:, 3], atol=1e-14)
    assert not deltas.any()


def test_subset_recurrence_worked_sets():
    g = star(3)
    r_hat, _ = subset_recurrence_dense(g, 1, [None, [0], [2, 3]], 3)
    assert np.allclose(r_hat[2], [0, -1 / 3, 2 / 3, 2 / 3], atol=1e-15)
    assert np.allclose(r_hat[3], [5 / 3, 0, 0, 0], atol=1e-15)


def deviation_identity_holds(g, s, K, sets):
    r_hat, deltas = subset_recurrence_dense(g, s, sets, K)
    T = dense_chebyshev_terms(g.walk_matrix(), K)
    for k in range(K + 1):
        exact = T[k][:, s]
        corr = sum((2 * T[k - l] @ deltas[l] for l in range(1, k)), np.zeros(g.n))
        if np.max(np.abs(exact - r_hat[k] - corr)) > 1e-10:
            return False
    return True


def test_deviation_identity(rng):
    for _ in range(20):
        g = random_connected(10, 8, rng)
        K = 10
        sets = [None] + [np.flatnonzero(rng.random(g.n) < 0.6) for _ in range(K - 1)]
        assert deviation_identity_holds(g, 0, K, sets)


def buffers_match_recurrence(g, kern, s, K, eps_a, tol=1e-12):
    tr = cheby_push(g, kern, s, K, eps_a, trace=True).stats["trace"]
    sets = [None] + tr.pushed[1:] + [None]
    r_hat, _ = subset_recurrence_dense(g, s, sets, K + 1)
    for k in range(K + 1):
        if np.max(np.abs(tr.r_cur[k] - r_hat[k + 1])) > tol:
            return False
        if k >= 1:
            inside = np.zeros(g.n, dtype=bool)
            inside[tr.pushed[k]] = True
            expect = np.where(inside, -r_hat[k], r_hat[k])
            if np.max(np.abs(tr.r_new[k] - expect)) > tol:
                return False
    return True


def test_push_buffers_match_recurrence(rng):
    for _ in range(10):
        g = random_connected(15, 20, rng)
        assert buffers_match_recurrence(g, PPR, 2, 10, 1e-2)
        assert buffers_match_recurrence(g, Kernel.hkpr(5.0), 2, 10, 1e-3)


def test_push_work_monotone():
    g = preferential_attachment(2000, 4, seed=2)
    K = plan_truncation(PPR, 1e-10).K
    work = [cheby_push(g, PPR, 5, K, e).stats["push_work"] for e in (1e-2, 1e-4, 1e-6, 1e-8)]
    assert work == sorted(work)
    assert work[0] < K * 2 * g.m / 10


def iterations_to(g, kern, s, target):
    truth = power_method(g, kern, s, 600).y_hat
    r = cheby_power(g, kern, s, 300, record=True).stats["residuals"]
    c = kern.cheby_coeffs(300)
    y = np.cumsum(c[:, None] * r, axis=0)
    K = int(np.argmax(np.abs(y - truth).sum(axis=1) < target))
    zeta = kern.taylor_coeffs(600)
    x = np.eye(g.n)[s]
    acc = zeta[0] * x
    for N in range(1, 600):
        if np.abs(acc - truth).sum() < target:
            return K, N
        x = apply_walk(g, x)
        acc = acc + zeta[N] * x
    raise AssertionError("power method did not converge")


@pytest.mark.parametrize("kern", [Kernel.ppr(0.2), Kernel.ppr(0.02), Kernel.hkpr(5.0),
                                  Kernel.hkpr(20.0)], ids=lambda k: k.descriptor())
def test_convergence_ordering(kern):
    g = preferential_attachment(400, 3, seed=3)
    K, N = iterations_to(g, kern, 0, 1e-5)
    assert K < N


def test_general_gp_a_zero_is_plain():
    g = preferential_attachment(50, 2, seed=5)
    x = np.eye(g.n)[4]
    for method, kw in (("pw", dict(N=80)), ("chebypower", dict(K=30)),
                       ("chebypush", dict(K=30, eps_a=1e-6)), ("push", dict(N=80))):
        z = general_gp_vector(g, PPR, 0.0, x, method, **kw)
        plain = dict(pw=lambda: power_method(g, PPR, 4, 80),
                     chebypower=lambda: cheby_power(g, PPR, 4, 30),
                     chebypush=lambda: cheby_push(g, PPR, 4, 30, 1e-6),
                     push=lambda: push(g, PPR, 4, 80, 0.0))[method]().y_hat
        assert np.array_equal(z, plain)


def test_general_gp_regular_graph():
    g = ring(12)
    x = np.random.default_rng(0).normal(size=12)
    a = general_gp_vector(g, PPR, 0.5, x, "chebypower")
    b = general_gp_vector(g, PPR, 0.0, x, "chebypower")
    assert np.allclose(a, b, atol=1e-15)


def test_general_gp_symmetric_path():
    g = path(3)
    x = np.array([0.3, -1.0, 2.0])
    d = g.degrees.astype(float)
    S = np.diag(d ** -0.5) @ g.to_dense() @ np.diag(d ** -0.5)
    want = 0.2 * np.linalg.solve(np.eye(3) - 0.8 * S, x)
    for method in ("pw", "push", "chebypower", "chebypush"):
        assert np.max(np.abs(general_gp_vector(g, PPR, 0.5, x, method) - want)) < 1e-10


def test_general_gp_matrix():
    g = path(3)
    rng = np.random.default_rng(2)
    X = rng.normal(size=(3, 2))
    Z = general_gp_matrix(g, PPR, 0.5, X)
    d = g.degrees.astype(float)
    S = np.diag(d ** -0.5) @ g.to_dense() @ np.diag(d ** -0.5)
    assert np.max(np.abs(Z - 0.2 * np.linalg.solve(np.eye(3) - 0.8 * S, X))) < 1e-10
    g = grid(3, 3)
    X = np.eye(g.n)[:, :2]
    Z = general_gp_matrix(g, PPR, 0.3, X)
    assert np.array_equal(Z[:, 1], general_gp_vector(g, PPR, 0.3, X[:, 1]))
    X[:, 1] = 0
    assert not general_gp_matrix(g, PPR, 0.3, X)[:, 1].any()
    with pytest.raises(ValueError):
        general_gp_vector(g, PPR, 0.5, np.ones(3))
