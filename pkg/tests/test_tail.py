import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netextremes.errors import DataError, TiesAtCutoff
from netextremes.evt.tail import fixed_k_estimate, hill, hill_plot, k_grid, select_k_bootstrap


def test_hill_hand():
    assert hill([1, np.e, np.e], 2) == pytest.approx(1.0)


def test_hill_pareto_quantile_grid():
    n = 10_000
    x = (np.arange(1, n + 1) / (n + 1)) ** -0.5
    assert abs(hill(x, 500) - 2.0) <= 0.1


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.floats(1e-3, 1e3), st.integers(1, 150))
def test_hill_scale_invariant(seed, lam, k):
    x = np.random.default_rng(seed).pareto(1.5, 200) + 1
    assert hill(lam * x, k) == pytest.approx(hill(x, k), rel=1e-9)


def test_hill_errors():
    with pytest.raises(TiesAtCutoff):
        hill([1, 2, 5, 5, 5], 2)
    with pytest.raises(DataError):
        hill([1, 2, 3], 3)
    with pytest.raises(DataError):
        hill([-1, -2, 1, 2, 3], 1)  # 40% non-positive
    # a single non-positive value out of 200 is dropped silently
    x = np.r_[0.0, np.arange(1, 200.0)]
    assert hill(x, 10) == hill(x[1:], 10)


def test_hill_plot_matches_hill():
    x = np.random.default_rng(0).pareto(2, 300) + 1
    ks, a = hill_plot(x, [5, 50, 100])
    assert np.allclose(a, [hill(x, k) for k in ks])


def test_k_grid():
    ks = k_grid(1000)
    assert ks[0] == 5 and ks[-1] == 500 and np.all(np.diff(ks) > 0)


def test_bootstrap_calibration_pareto2():
    est = [select_k_bootstrap(np.random.default_rng(s).random(10_000) ** -0.5, B=200,
                              rng_seed=s).alpha_hat for s in range(20)]
    assert 1.8 <= np.median(est) <= 2.2


@pytest.mark.parametrize("mode", ["single", "double"])
def test_bootstrap_determinism_and_ci(mode):
    x = np.random.default_rng(5).pareto(1.5, 2000) + 1
    a = select_k_bootstrap(x, B=200, mode=mode, rng_seed=3)
    b = select_k_bootstrap(x, B=200, mode=mode, rng_seed=3)
    assert a == b
    assert 1 <= a.k_used < a.n == 2000
    assert a.ci[0] <= a.alpha_hat <= a.ci[1]
    assert a.k_selection == ("bootstrap" if mode == "single" else "double_bootstrap")
    assert 1.0 < a.alpha_hat < 2.2


def test_bootstrap_errors():
    with pytest.raises(DataError):
        select_k_bootstrap(np.arange(1, 10.0))
    with pytest.raises(ValueError):
        select_k_bootstrap(np.arange(1, 200.0), mode="triple")


def test_fixed_k():
    x = np.random.default_rng(1).pareto(2, 500) + 1
    t = fixed_k_estimate(x, 50)
    assert t.alpha_hat == hill(x, 50) and t.k_selection == "fixed"
    assert set(t.as_dict()) >= {"alpha_hat", "k", "ci_lo", "ci_hi", "level", "n"}
