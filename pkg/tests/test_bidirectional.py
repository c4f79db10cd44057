import math

import numpy as np
import pytest

from chebyprop import bidirectional as bd
from chebyprop.bidirectional import (RandomWalkConfig, alpha_random_walk, alpha_walk_sampler,
                                     cheby_push_rw, compute_residual)
from chebyprop.graph import from_edges
from chebyprop.solvers import Estimate
from chebyprop.synthetic import path, preferential_attachment

from conftest import random_connected


def exact_ppr_matrix(g, alpha):
    """Column v holds pi_v."""
    return alpha * np.linalg.inv(np.eye(g.n) - (1 - alpha) * g.walk_matrix())


def test_config_formulas():
    cfg = RandomWalkConfig.build(0.2, 1000, eps_r=0.5, seed=7)
    W = math.ceil(2 * (2 * 0.5 / 3 + 2) * math.log(1000) / (0.25 * 1e-3))
    assert cfg.W == W and cfg.delta == 1e-3
    assert cfg.r_max == pytest.approx(math.sqrt(0.2) / W, rel=1e-15)


@pytest.mark.parametrize("kw", [dict(eps_r=0.0), dict(eps_r=1.0), dict(delta=0.0),
                                dict(delta=1.0), dict(alpha=0.0), dict(alpha=1.0)])
def test_config_rejects(kw):
    args = dict(alpha=0.2, n=100, eps_r=0.5, delta=0.01) | kw
    with pytest.raises(ValueError):
        RandomWalkConfig.build(**args)


def test_config_checked_against_graph():
    g = path(5)
    cfg = RandomWalkConfig.build(0.2, 6)
    with pytest.raises(ValueError):
        cheby_push_rw(g, 0.2, 0, cfg)
    cfg = RandomWalkConfig.build(0.2, 5)
    with pytest.raises(ValueError):
        cheby_push_rw(g, 0.3, 0, cfg)
    bad = RandomWalkConfig(0.2, cfg.W, cfg.r_max * 2, cfg.eps_r, cfg.delta)
    with pytest.raises(ValueError):
        cheby_push_rw(g, 0.2, 0, bad)


def test_residual_examples():
    g = path(3)
    pi = exact_ppr_matrix(g, 0.2)[:, 1]
    assert np.max(np.abs(compute_residual(g, 0.2, pi, 1).to_dense(3))) < 1e-10
    r = compute_residual(g, 0.2, np.zeros(3), 2)
    assert r.nodes.tolist() == [2] and r.values.tolist() == [1.0]


def test_walk_stops_immediately_at_alpha_one():
    g = path(4)
    rng = np.random.default_rng(0)
    assert all(alpha_random_walk(g, 2, 1.0, rng) == 2 for _ in range(100))


def test_walk_terminal_distribution_single_edge():
    g = from_edges([[0, 1]])
    rng = np.random.default_rng(1)
    n = 100_000
    hits = sum(alpha_random_walk(g, 0, 0.5, rng) for _ in range(n))
    p = 1 / 3
    assert abs(hits / n - p) < 3 * math.sqrt(p * (1 - p) / n)


def test_compiled_walks_terminal_distribution_single_edge():
    g = from_edges([[0, 1]])
    n = 100_000
    out = np.zeros(2)
    alpha_walk_sampler(g, [0], [n], [1.0 / n], 0.5, 3, out)
    p = 1 / 3
    assert abs(out[1] - p) < 3 * math.sqrt(p * (1 - p) / n)
    assert out.sum() == pytest.approx(1.0, abs=1e-12)


def test_mean_walk_length():
    # length counts visited nodes, i.e. steps + 1; geometric with mean 1/alpha
    g = preferential_attachment(200, 2, seed=0)
    n = 100_000
    steps = alpha_walk_sampler(g, [0], [n], [0.0], 0.2, 11, np.zeros(g.n))
    assert abs((steps / n + 1) / 5 - 1) < 0.05


def _five_node():
    return from_edges([[0, 1], [1, 2], [2, 3], [3, 4], [4, 0], [0, 2]])


def _loose_config(g):
    # tiny W keeps r_max large, so phase 1 leaves a sizeable residual
    return RandomWalkConfig.build(0.2, g.n, eps_r=0.9, delta=0.9)


def test_residual_decomposition_invariant():
    g = _five_node()
    cfg = _loose_config(g)
    est = cheby_push_rw(g, 0.2, 0, cfg)
    r = est.stats["residual"].to_dense(g.n)
    assert np.abs(r).max() > 1e-4
    Pi = exact_ppr_matrix(g, 0.2)
    assert np.max(np.abs(Pi[:, 0] - (est.stats["phase1"] + Pi @ r))) < 1e-10


def test_residual_bound_after_push():
    g = preferential_attachment(3000, 4, seed=9)
    cfg = RandomWalkConfig.build(0.2, g.n, eps_r=0.5)
    for s in (0, 17, 2999):
        est = cheby_push_rw(g, 0.2, s, cfg)
        res = est.stats["residual"]
        assert np.all(np.abs(res.values) / g.degrees[res.nodes] <= cfg.r_max)


def test_unbiased_phase2():
    g = _five_node()
    cfg = _loose_config(g)
    runs = 10_000
    samples = np.array([cheby_push_rw(g, 0.2, 0, RandomWalkConfig(
        cfg.alpha, cfg.W, cfg.r_max, cfg.eps_r, cfg.delta, seed=i)).y_hat for i in range(runs)])
    first = cheby_push_rw(g, 0.2, 0, cfg)
    r = first.stats["residual"].to_dense(g.n)
    want = exact_ppr_matrix(g, 0.2) @ r
    got = samples - first.stats["phase1"]
    se = got.std(axis=0) / math.sqrt(runs)
    assert np.all(np.abs(got.mean(axis=0) - want) <= 4 * se + 1e-15)


def test_deterministic_and_seed_sensitive():
    g = random_connected(200, 300, np.random.default_rng(3))
    cfg = RandomWalkConfig.build(0.2, g.n, eps_r=0.5, seed=42)
    a = cheby_push_rw(g, 0.2, 5, cfg).y_hat
    b = cheby_push_rw(g, 0.2, 5, cfg).y_hat
    assert a.tobytes() == b.tobytes()
    other = RandomWalkConfig(cfg.alpha, cfg.W, cfg.r_max, cfg.eps_r, cfg.delta, seed=43)
    assert not np.array_equal(a, cheby_push_rw(g, 0.2, 5, other).y_hat)


def test_streams_are_per_node():
    g = random_connected(50, 60, np.random.default_rng(4))
    starts, counts, incs = np.array([3, 9]), np.array([500, 700]), np.array([1e-3, -2e-3])
    both = np.zeros(g.n)
    alpha_walk_sampler(g, starts, counts, incs, 0.2, 5, both)
    parts = np.zeros(g.n)
    for i in (1, 0):
        alpha_walk_sampler(g, starts[i:i + 1], counts[i:i + 1], incs[i:i + 1], 0.2, 5, parts)
    assert np.allclose(both, parts, atol=1e-15, rtol=0)


def test_zero_residual_launches_no_walks(monkeypatch):
    g = path(3)
    exact = 0.2 * np.linalg.solve(np.eye(3) - 0.8 * g.walk_matrix(), np.eye(3)[1])
    assert len(compute_residual(g, 0.2, exact, 1)) == 0
    monkeypatch.setattr(bd, "cheby_push",
                        lambda *a, **k: Estimate(exact.copy(), dict(push_work=0)))
    calls = []
    cfg = RandomWalkConfig.build(0.2, 3)
    est = cheby_push_rw(g, 0.2, 1, cfg, sampler=lambda *a: calls.append(a) or 0)
    assert est.stats["walks"] == 0 and not calls
    assert np.array_equal(est.y_hat, exact)


def test_pluggable_sampler():
    g = _five_node()
    cfg = _loose_config(g)
    seen = {}

    def sampler(g_, starts, counts, incs, alpha, seed, out):
        seen.update(starts=starts, counts=counts, incs=incs)
        return 0

    est = cheby_push_rw(g, 0.2, 0, cfg, sampler=sampler)
    assert np.array_equal(est.y_hat, est.stats["phase1"])
    res = est.stats["residual"]
    assert np.array_equal(seen["counts"], np.ceil(np.abs(res.values) * cfg.W))
    assert np.allclose(seen["incs"] * seen["counts"], res.values)
