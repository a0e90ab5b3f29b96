import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netextremes.errors import InvalidOrdering, NoLinkedCommunity
from netextremes.evt.tail import hill
from netextremes.theory import (CommunityStats, SeriesMatrix, block_permutation,
                                dominance_diagnostics, domino_step, ln_dn, predict_columns,
                                predict_indices, predictions_to_json, synth_matrix,
                                theory_helpers)


def test_domino_sum_and_max():
    m = SeriesMatrix.from_rows([[1.0, 2.0]], q=0.1)
    assert np.allclose(domino_step(m, 0.5, "sum").rows()[0], [1.6, 1.1])
    assert np.allclose(domino_step(m, 0.5, "max").rows()[0], [1.0, 1.0])
    with pytest.raises(ValueError):
        domino_step(m, 0.5, "median")


rows_st = st.lists(st.lists(st.floats(0, 100, allow_nan=False), min_size=1, max_size=6),
                   min_size=1, max_size=8)


@settings(max_examples=60, deadline=None)
@given(rows_st, st.floats(0.05, 0.95), st.floats(0, 1), st.sampled_from(["sum", "max"]))
def test_domino_properties(rows, c, q, kind):
    m = SeriesMatrix.from_rows(rows, q=q)
    out = domino_step(m, c, kind)
    assert out.n_rows == m.n_rows
    assert out.lengths.tolist() == m.lengths.tolist()
    for r in out.rows():
        assert np.all(np.diff(r) <= 1e-9)
        assert np.all(r >= q - 1e-12)


def test_synth_matrix_determinism_and_single_column():
    a = synth_matrix([(1.0, 1.0, True), (2.5, 0.5, True)], 500, rng_seed=3)
    b = synth_matrix([(1.0, 1.0, True), (2.5, 0.5, True)], 500, rng_seed=3)
    assert np.array_equal(a.values, b.values)
    one = synth_matrix([(1.0, 1.0, True)], 20000, rng_seed=1)
    assert one.width == 1
    assert hill(one.column(0), 1000) == pytest.approx(1.0, abs=0.1)


def test_synth_row_lengths_clipped():
    m = synth_matrix([(1, 1, True)] * 3, 100, row_length=lambda r, n: r.integers(0, 10, n))
    assert m.lengths.min() >= 1 and m.lengths.max() <= 3
    assert np.all(m.values[np.arange(3)[None, :] >= m.lengths[:, None]] == 0)


def test_sum_tail_follows_heaviest_column():
    m = synth_matrix([(1.0, 1.0, True), (2.5, 1.0, True), (4.0, 1.0, True)], 5000, rng_seed=0)
    s = domino_step(m, 0.85, "sum").column(0)
    assert hill(s, 250) == pytest.approx(1.0, abs=0.2)


def test_predict_single_community():
    (p,) = predict_indices({"a": CommunityStats(2.0, 0.7)}, {1: ["a"]})
    assert (p.k_pred, p.theta_pr, p.theta_mlm, p.basis) == (2.0, 0.7, 0.7, "Prop1(i)")


def three_communities():
    return [CommunityStats(1.0, 0.5, max_score=100.0), CommunityStats(1.0, 0.9, max_score=50.0),
            CommunityStats(3.0, 0.8, max_score=10.0)]


def test_predict_tied_dominating():
    (p,) = predict_indices(three_communities(), {1: [0, 1, 2]}, tie_tol=0.0)
    assert p.k_pred == 1.0 and p.theta_mlm == 0.5 and p.theta_pr == 0.5
    assert sorted(p.dominating_set) == [0, 1] and p.basis == "T3"
    (p,) = predict_indices(three_communities(), {1: [0, 1, 2]}, independent=False, tie_tol=0.0)
    assert p.theta_pr == "undefined" and p.theta_mlm == 0.5


def test_predict_ci_overlap_ties():
    stats = {0: CommunityStats(1.0, 0.5, ci=(0.8, 1.2), max_score=1.0),
             1: CommunityStats(1.1, 0.9, ci=(0.9, 1.4), max_score=9.0),
             2: CommunityStats(2.0, 0.3, ci=(1.8, 2.2), max_score=5.0)}
    (p,) = predict_indices(stats, {0: [0, 1, 2]})
    assert sorted(p.dominating_set) == [0, 1] and p.theta_mlm == 0.9


def test_predict_nonstationary_undefined():
    (p,) = predict_indices([CommunityStats(1.0, 0.5, stationary=False)], {0: [0]})
    assert p.theta_pr == "undefined" and p.k_pred == 1.0


def test_predict_errors():
    with pytest.raises(NoLinkedCommunity):
        predict_indices(three_communities(), {1: []})
    with pytest.raises(NoLinkedCommunity):
        predict_indices(three_communities(), {1: [7]})


def test_predict_k_scale_invariant(rng):
    data = [rng.pareto(k, 3000) + 1 for k in (1.0, 2.0)]
    ks = []
    for lam in (1.0, 37.0):
        stats = [CommunityStats(1 / hill(lam * d, 150), 1.0, max_score=float(lam * d.max()))
                 for d in data]
        ks.append(predict_indices(stats, {0: [0, 1]})[0].k_pred)
    assert ks[0] == pytest.approx(ks[1], rel=1e-12)


def test_predict_columns_suffix_minimum():
    preds = predict_columns([(1.0, 0.5, True), (2.0, 0.7, True), (3.0, 1.0, True)])
    assert [p.k_pred for p in preds] == [1.0, 2.0, 3.0]
    assert [p.theta_pr for p in preds] == [0.5, 0.7, 1.0]


def test_json_shape(tmp_path):
    preds = predict_indices(three_communities(), {1: [0, 1, 2], 2: [2]}, tie_tol=0.0)
    s = predictions_to_json(preds, tmp_path / "p.json")
    rows = json.loads(s)
    assert json.loads((tmp_path / "p.json").read_text()) == rows
    assert set(rows[0]) >= {"class", "k_pred", "theta_pred", "dominating_set", "basis"}
    assert rows[1]["theta_pred"] == 0.8


def test_theory_helpers():
    c0, l_n, d_n = theory_helpers(1, 2, 1000, 5)
    assert c0 == pytest.approx(1 / 3)
    assert d_n <= 5 and d_n <= l_n
    assert ln_dn(1000, 0.3, 5) == (7, 5)
    c0, l_n, d_n = theory_helpers(1, 20, 1000, 5, chi=0.3)
    assert (l_n, d_n) == (7, 5)
    with pytest.raises(InvalidOrdering):
        theory_helpers(2, 1, 100, 5)
    with pytest.raises(ValueError):
        theory_helpers(1, 2, 100, 5, chi=0.5)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 5), st.floats(0.1, 5), st.integers(2, 10 ** 6), st.floats(1.01, 50))
def test_dn_bounds(a, b, n, C):
    if abs(a - b) < 1e-3:
        return
    k1, k = min(a, b), max(a, b)
    _, l_n, d_n = theory_helpers(k1, k, n, C)
    assert d_n <= C and d_n <= l_n


def test_dominance_diagnostics(rng):
    cols = [rng.pareto(1.0, 10000), rng.pareto(2.0, 10000), rng.pareto(1.5, 10000)]
    rep = dominance_diagnostics(cols)
    off = rep.ratios[~np.eye(3, dtype=bool)]
    assert rep.a2_pass and off.max() <= 0.1
    assert rep.a4_candidate == int(np.argmax([c.max() for c in cols]))
    dup = dominance_diagnostics([cols[0], cols[0].copy()])
    assert dup.ratios[0, 1] == pytest.approx(1.0) and not dup.a2_pass
    json.dumps(rep.as_dict())


def test_block_permutation():
    m = SeriesMatrix.from_rows([[0, 1, 0], [2, 0, 0], [0, 0, 3], [4, 5, 6], [0, 0, 0]], q=0.1)
    out, perm, starts = block_permutation(m)
    assert perm.tolist() == [1, 3, 0, 2, 4]
    assert starts.tolist() == [0, 2, 3, 4]
    assert out.values[0, 0] == 2 and out.values[2, 1] == 1
