import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netextremes.community import (IN, OUT, CommunityPartition, classify_new_nodes,
                                   directed_modularity, from_labels, louvain_directed,
                                   mean_excess, merge_to_count, pareto_mean_excess,
                                   rank_by_tail, stationarity_check, to_networkx)
from netextremes.errors import EmptyGraph, InsufficientExceedances
from netextremes.evt.tail import fixed_k_estimate
from netextremes.graph import ATTACHED, DirectedGraph

from conftest import graph_from_edges


def set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def labels_of(groups, n):
    a = np.empty(n, dtype=int)
    for c, grp in enumerate(groups):
        a[grp] = c
    return a


def brute_modularity(g, a):
    n, m = g.n_nodes, g.n_edges
    A = np.zeros((n, n))
    for s, d in zip(g.src, g.dst):
        A[s, d] += 1
    kout, kin = A.sum(1), A.sum(0)
    return sum(A[i, j] - kout[i] * kin[j] / m for i in range(n) for j in range(n)
               if a[i] == a[j]) / m


def best_partition(g):
    n = g.n_nodes
    return max(((brute_modularity(g, labels_of(p, n)), p) for p in set_partitions(
        list(range(n)))), key=lambda t: t[0])


def test_two_disjoint_two_cycles():
    g = graph_from_edges(4, [(0, 1), (1, 0), (2, 3), (3, 2)])
    q_best, groups = best_partition(g)
    assert q_best == pytest.approx(0.5)
    assert sorted(map(sorted, groups)) == [[0, 1], [2, 3]]
    p = louvain_directed(g, 0)
    assert p.assignment.tolist() == [0, 0, 1, 1]
    assert directed_modularity(g, p.assignment) == pytest.approx(0.5)


def test_complete_bidirectional_triangle():
    g = graph_from_edges(3, [(i, j) for i in range(3) for j in range(3) if i != j])
    _, groups = best_partition(g)
    assert len(groups) == 1
    assert louvain_directed(g, 1).n_communities == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_modularity_formula_matches_brute(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 8))
    edges = [tuple(int(v) for v in rng.choice(n, 2, replace=False))
             for _ in range(int(rng.integers(1, 15)))]
    g = graph_from_edges(n, edges)
    a = rng.integers(0, 3, n)
    assert directed_modularity(g, a) == pytest.approx(brute_modularity(g, a), abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_louvain_not_worse_than_singletons_and_deterministic(seed):
    rng = np.random.default_rng(seed)
    n = 30
    edges = [tuple(int(v) for v in rng.choice(n, 2, replace=False)) for _ in range(60)]
    g = graph_from_edges(n, edges)
    p1, p2 = louvain_directed(g, seed), louvain_directed(g, seed)
    assert np.array_equal(p1.assignment, p2.assignment)
    assert (directed_modularity(g, p1.assignment)
            >= directed_modularity(g, np.arange(n)) - 1e-12)
    assert (p1.assignment >= 0).all()


def test_louvain_small_exhaustive():
    rng = np.random.default_rng(3)
    for _ in range(5):
        g = graph_from_edges(7, [tuple(int(v) for v in rng.choice(7, 2, replace=False))
                                 for _ in range(12)])
        q_best, _ = best_partition(g)
        q = directed_modularity(g, louvain_directed(g, 0).assignment)
        assert q <= q_best + 1e-12 and q >= q_best - 0.1


def test_louvain_errors():
    with pytest.raises(EmptyGraph):
        louvain_directed(DirectedGraph.with_nodes(3))


def test_louvain_node_subset():
    g = graph_from_edges(5, [(0, 1), (1, 0), (2, 3), (3, 2), (4, 0)])
    p = louvain_directed(g, 0, nodes=[0, 1, 2, 3])
    assert p.assignment[4] == -1
    assert to_networkx(g, [0, 1]).number_of_edges() == 2


def test_partition_csv_and_merge(tmp_path):
    g = graph_from_edges(6, [(0, 1), (1, 0), (2, 3), (3, 4), (4, 2), (5, 4)])
    p = from_labels([0, 0, 1, 1, 1, 2])
    m = merge_to_count(p, g, 2)
    assert m.n_communities == 2 and m.assignment.tolist() == [0, 0, 1, 1, 1, 1]
    r = CommunityPartition(p.assignment, 3, [2, 3, 1])
    r.to_csv(tmp_path / "p.csv")
    back = CommunityPartition.from_csv(tmp_path / "p.csv")
    assert np.array_equal(back.assignment, r.assignment)
    assert back.rank.tolist() == [2, 3, 1]
    with pytest.raises(ValueError):
        CommunityPartition(p.assignment, 3, [1, 1, 2])


def test_rank_by_tail_orders_ascending():
    rng = np.random.default_rng(0)
    vals = np.concatenate([rng.pareto(3.0, 2000) + 1, rng.pareto(1.0, 2000) + 1])
    p = rank_by_tail(from_labels([0] * 2000 + [1] * 2000), vals,
                     lambda x: fixed_k_estimate(x, 200))
    assert p.rank.tolist() == [2, 1] and p.by_rank() == [1, 0]


def test_mean_excess_hand():
    c = mean_excess([1, 2, 3, 4], thresholds=[2], min_exceedances=1)
    assert c.values[0] == pytest.approx(1.5)


def test_mean_excess_insufficient():
    with pytest.raises(InsufficientExceedances):
        mean_excess(np.arange(50.0), quantiles=[0.5, 0.9])


def test_mean_excess_exponential_flat():
    ok = 0
    for s in range(40):
        x = np.random.default_rng(s).exponential(1.0, 10_000)
        ok += abs(mean_excess(x).slope) < 0.1
    assert ok / 40 >= 0.95


def test_mean_excess_pareto_slope():
    # gamma = 0.5 (tail index 2): e(u) = u / (alpha - 1), slope gamma / (1 - gamma) = 1
    slopes = [mean_excess(np.random.default_rng(s).random(10_000) ** -0.5).slope
              for s in range(20)]
    assert abs(np.median(slopes) - 1.0) <= 0.3


def test_pareto_mean_excess_quotient_form():
    assert pareto_mean_excess(2.0, 0.5) == pytest.approx((1 + 1.0) / 0.5)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.01, 100))
def test_mean_excess_homogeneity(seed, lam):
    x = np.random.default_rng(seed).pareto(2.0, 500) + 1
    us = np.quantile(x, [0.5, 0.7, 0.9])
    a = mean_excess(x, thresholds=us).values
    b = mean_excess(lam * x, thresholds=lam * us).values
    assert np.allclose(b, lam * a, rtol=1e-9)


def test_stationarity_proxy():
    rng = np.random.default_rng(2)
    assert stationarity_check(rng.random(20_000) ** -0.5).passed
    assert stationarity_check(rng.exponential(1, 20_000)).r2 >= 0


def seed_with_new(codes_spec, n_c=3, direction=IN):
    """One seed node per community, one new node per spec entry."""
    g = DirectedGraph.with_nodes(n_c)
    for links in codes_spec:
        v = g.add_node(1, ATTACHED)
        for c in links:
            if direction == IN:
                g.add_edge(c, v)
            else:
                g.add_edge(v, c)
    return g


def test_classify_examples():
    spec = [(0, 1, 2), (0, 2), (0, 1), (0,), (1, 2), (1,), (2,)]
    g = seed_with_new(spec)
    cl = classify_new_nodes(g, from_labels([0, 1, 2], g.n_nodes))
    assert cl.code_strings() == ["123", "103", "120", "100", "023", "020", "003"]
    assert cl.classes.tolist() == [1, 1, 1, 1, 2, 2, 3]


def test_classify_links_to_new_only_and_single():
    g = seed_with_new([(1,)])
    v = g.add_node(2, ATTACHED)
    g.add_edge(3, v)
    cl = classify_new_nodes(g, from_labels([0, 1, 2], g.n_nodes))
    assert cl.code_strings() == ["020", "000"]
    assert cl.classes.tolist() == [2, 4]
    assert cl.class_sizes().tolist() == [0, 1, 0, 1]


def test_classify_out_and_rank_digits():
    g = seed_with_new([(0,), (2,)], direction=OUT)
    part = CommunityPartition(np.array([0, 1, 2, -1, -1]), 3, [3, 1, 2])
    assert classify_new_nodes(g, part, direction=IN).classes.tolist() == [4, 4]
    cl = classify_new_nodes(g, part, direction=OUT)
    assert cl.code_strings() == ["003", "020"]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_classify_edge_order_invariance(seed):
    rng = np.random.default_rng(seed)
    spec = [tuple(rng.choice(3, int(rng.integers(0, 4)))) for _ in range(20)]
    g = seed_with_new(spec)
    part = from_labels([0, 1, 2], g.n_nodes)
    a = classify_new_nodes(g, part)
    perm = rng.permutation(g.n_edges)
    h = g.copy()
    h.src = [g.src[i] for i in perm]
    h.dst = [g.dst[i] for i in perm]
    b = classify_new_nodes(h, part)
    assert np.array_equal(a.codes, b.codes)
    assert a.class_sizes().sum() == 20
