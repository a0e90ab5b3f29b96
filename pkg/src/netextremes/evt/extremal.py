"""Extremal-index estimation for sequences.

Threshold-based estimators only: the intervals estimator, the K-gaps
maximum-likelihood estimator, threshold screening with a Cramer-von Mises
discrepancy, and a plateau search over a threshold grid.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import AllGapsZero, DataError, TooFewExceedances, ZeroDenominator

# 0.95 quantile of the asymptotic Cramer-von Mises null distribution
CVM_CRITICAL_95 = 0.461


@dataclass
class InterExceedanceTimes:
    times: np.ndarray
    L: int
    exceedance_rate: float

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.int64)
        if (self.times < 1).any():
            raise DataError("inter-exceedance times must be >= 1")


@dataclass
class ExtremalEstimate:
    theta_hat: float
    estimator: str
    threshold: float
    aggregation: str = "single"
    flagged: bool = False
    extra: dict = field(default_factory=dict)

    def as_dict(self):
        d = {"theta_hat": self.theta_hat, "estimator": self.estimator,
             "threshold": self.threshold, "aggregation": self.aggregation,
             "flagged": self.flagged}
        d.update(self.extra)
        return d


def inter_exceedance_times(series, u: float) -> InterExceedanceTimes:
    """Gaps ``S_{i+1} - S_i`` between the positions where ``series > u``."""
    x = np.asarray(series, dtype=float)
    pos = np.flatnonzero(x > u)
    return InterExceedanceTimes(np.diff(pos), len(pos), len(pos) / len(x) if len(x) else 0.0)


def intervals_raw(times, exclude_ones: bool = False) -> float:
    """Unclipped intervals estimate (theta^1 or theta^2 by the max-gap rule)."""
    t = np.asarray(times, dtype=float)
    if exclude_ones:
        t = t[t != 1]
    if len(t) < 2:
        raise TooFewExceedances(f"need at least 2 inter-exceedance times, got {len(t)}")
    m = len(t)
    if t.max() <= 2:
        return 2.0 * t.sum() ** 2 / (m * np.sum(t ** 2))
    denom = m * np.sum((t - 1) * (t - 2))
    if denom == 0:
        raise ZeroDenominator("all inter-exceedance times are 1 or 2")
    return 2.0 * np.sum(t - 1) ** 2 / denom


def intervals_estimator(times, exclude_ones: bool = False) -> float:
    """Ferro-Segers intervals estimator, clipped to at most 1.

    ``times`` is an :class:`InterExceedanceTimes` or a plain array of gaps.
    """
    t = times.times if isinstance(times, InterExceedanceTimes) else times
    return float(min(1.0, intervals_raw(t, exclude_ones)))


def kgaps_estimator(times, exceedance_rate: float | None = None, K: int = 0) -> float:
    """Suveges-Davison K-gaps maximum-likelihood estimate.

    With K-gaps ``S = max(T - K, 0)`` the log-likelihood is
    ``a log(1 - theta) + b log(theta) - c theta`` with ``a`` the number of
    zero gaps, ``b = 2 * (number of non-zero gaps)`` and
    ``c = sum(rate * S)``; the estimate is the root of its score in [0, 1].
    """
    if isinstance(times, InterExceedanceTimes):
        rate = times.exceedance_rate if exceedance_rate is None else exceedance_rate
        t = times.times
    else:
        t = np.asarray(times)
        rate = exceedance_rate
    if rate is None:
        raise ValueError("exceedance_rate is required with a plain array of times")
    if K < 0:
        raise ValueError("K must be non-negative")
    if len(t) < 2:
        raise TooFewExceedances(f"need at least 2 inter-exceedance times, got {len(t)}")
    s = np.maximum(np.asarray(t, dtype=float) - K, 0.0)
    n_c = int(np.count_nonzero(s))
    a = len(s) - n_c
    b = 2.0 * n_c
    c = float(np.sum(rate * s))
    if c == 0:
        raise AllGapsZero(f"every {K}-gap is zero")
    h = (a + b) / c + 1.0
    disc = h * h - 4.0 * b / c
    # disc = ((a+b)/c - 1)^2 + 4a/c >= 0 for a, b, c >= 0
    assert disc >= -1e-12
    theta = 0.5 * (h - np.sqrt(max(disc, 0.0)))
    return float(np.clip(theta, 0.0, 1.0))


def estimate_at(series, u, estimator: str = "intervals", K: int = 0,
                exclude_ones: bool = False) -> float:
    iet = inter_exceedance_times(series, u)
    if estimator == "intervals":
        return intervals_estimator(iet, exclude_ones)
    if estimator == "kgaps":
        return kgaps_estimator(iet, K=K)
    raise ValueError(f"unknown estimator {estimator!r}")


def cvm_discrepancy(iet: InterExceedanceTimes, theta: float, pilot: float | None = None) -> float:
    """Cramer-von Mises statistic of normalised gaps against the limit law.

    Normalised gaps ``Y = rate * T`` tend to a mixture of an atom at 0
    (weight 1 - theta) and an exponential with rate theta (weight theta).
    Only the ``k = floor(pilot * m)`` largest gaps are compared, with the
    exponential part ``1 - exp(-theta y)``, so the atom does not enter the
    statistic.
    """
    y = np.sort(iet.exceedance_rate * iet.times.astype(float))
    m = len(y)
    pilot = theta if pilot is None else pilot
    k = int(np.floor(pilot * m))
    if k < 1 or theta <= 0:
        return np.inf
    top = y[m - k:]
    cdf = 1.0 - np.exp(-theta * top)
    i = np.arange(1, k + 1)
    return float(1.0 / (12 * k) + np.sum((cdf - (2 * i - 1) / (2.0 * k)) ** 2))


@dataclass
class DiscrepancyResult:
    thresholds: np.ndarray
    thetas: np.ndarray
    statistics: np.ndarray
    accepted: np.ndarray
    theta1: float
    theta2: float
    fallback: bool = False

    def estimates(self, estimator: str) -> list[ExtremalEstimate]:
        acc = self.thresholds[self.accepted]
        u_min = float(acc.min()) if len(acc) else float("nan")
        name = f"{estimator}_dis"
        return [
            ExtremalEstimate(self.theta1, name, u_min, "theta1", self.fallback,
                             {"n_accepted": int(self.accepted.sum())}),
            ExtremalEstimate(self.theta2, name, u_min, "theta2", self.fallback,
                             {"n_accepted": int(self.accepted.sum())}),
        ]


def default_quantile_grid(size: int = 20, lo: float = 0.80, hi: float = 0.99) -> np.ndarray:
    return np.linspace(lo, hi, size)


def discrepancy_thresholds(series, estimator: str = "intervals", quantiles=None, K: int = 0,
                           critical: float = CVM_CRITICAL_95,
                           exclude_ones: bool = False) -> DiscrepancyResult:
    """Screen a threshold grid with the discrepancy statistic and aggregate.

    ``theta1`` averages the estimates over the accepted thresholds and
    ``theta2`` takes the estimate at the lowest accepted threshold.  If no
    threshold is accepted both fall back to the estimate at the 95% quantile
    and ``fallback`` is set.
    """
    x = np.asarray(series, dtype=float)
    qs = default_quantile_grid() if quantiles is None else np.asarray(quantiles, dtype=float)
    if (qs <= 0.5).any() or (qs >= 0.995 + 1e-12).any():
        raise ValueError("threshold quantiles must lie within (0.5, 0.995]")
    us = np.quantile(x, qs)
    thetas = np.full(len(us), np.nan)
    stats = np.full(len(us), np.inf)
    for i, u in enumerate(us):
        iet = inter_exceedance_times(x, u)
        try:
            th = (intervals_estimator(iet, exclude_ones) if estimator == "intervals"
                  else kgaps_estimator(iet, K=K))
            pilot = intervals_estimator(iet)
        except DataError:
            continue
        thetas[i] = th
        stats[i] = cvm_discrepancy(iet, th, pilot)
    accepted = np.isfinite(thetas) & (stats <= critical)
    if accepted.any():
        t1 = float(np.mean(thetas[accepted]))
        t2 = float(thetas[accepted][np.argmin(us[accepted])])
        return DiscrepancyResult(us, thetas, stats, accepted, t1, t2, False)
    u95 = np.quantile(x, 0.95)
    fb = estimate_at(x, u95, estimator, K, exclude_ones)
    return DiscrepancyResult(us, thetas, stats, accepted, fb, fb, True)


def select_K(series, quantiles=None, K_grid=range(6), critical: float = CVM_CRITICAL_95):
    """Pick K for the K-gaps estimator by the discrepancy rule.

    Each K is scored by the mean discrepancy over its accepted thresholds
    (more accepted thresholds first); returns ``(K, DiscrepancyResult)``.
    """
    best = None
    for K in K_grid:
        res = discrepancy_thresholds(series, "kgaps", quantiles, K=K, critical=critical)
        n_acc = int(res.accepted.sum())
        score = (-n_acc, float(np.mean(res.statistics[res.accepted])) if n_acc else np.inf)
        if best is None or score < best[0]:
            best = (score, K, res)
    return best[1], best[2]


@dataclass
class PlateauResult:
    theta_hat: float
    start: int
    stop: int
    fallback: bool


def find_plateau(values, tol: float = 0.005, window: int | None = None) -> PlateauResult | None:
    """Longest run of a moving-average-smoothed curve with steps below ``tol``.

    Returns ``None`` when no two successive smoothed values are within
    ``tol``.  ``start:stop`` indexes the original values covered by the run.
    """
    v = np.asarray(values, dtype=float)
    w = window or int(np.ceil(len(v) / 10))
    w = max(1, min(w, len(v)))
    sm = np.convolve(v, np.ones(w) / w, mode="valid")
    close = np.abs(np.diff(sm)) < tol
    best_len, best_start, run_start = 0, None, None
    for i, ok in enumerate(close):
        if ok:
            if run_start is None:
                run_start = i
            if i - run_start + 1 > best_len:
                best_len, best_start = i - run_start + 1, run_start
        else:
            run_start = None
    if best_start is None:
        return None
    # smoothed index j covers original indices j .. j + w - 1
    start, stop = best_start, best_start + best_len + w
    return PlateauResult(float(np.mean(v[start:stop])), start, stop, False)


def plateau_theta(series, quantiles=None, tol: float = 0.005) -> ExtremalEstimate:
    """Intervals estimates over a threshold grid averaged over their plateau."""
    x = np.asarray(series, dtype=float)
    qs = default_quantile_grid(40, 0.80, 0.99) if quantiles is None else np.asarray(quantiles)
    if len(qs) < 10:
        raise ValueError("plateau search needs at least 10 thresholds")
    us = np.quantile(x, qs)
    th = []
    for u in us:
        try:
            th.append(intervals_estimator(inter_exceedance_times(x, u)))
        except DataError:
            th.append(np.nan)
    th = np.asarray(th)
    ok = np.isfinite(th)
    res = find_plateau(th[ok], tol) if ok.sum() >= 2 else None
    if res is None:
        u95 = float(np.quantile(x, 0.95))
        return ExtremalEstimate(intervals_estimator(inter_exceedance_times(x, u95)),
                                "plateau", u95, "single", True)
    u_used = us[ok][res.start:res.stop]
    return ExtremalEstimate(res.theta_hat, "plateau", float(u_used.min()), "single", False,
                            {"plateau_length": int(res.stop - res.start)})


def armax_series(n: int, theta: float, rng_seed=0) -> np.ndarray:
    """ARMAX process ``X_t = max((1 - theta) X_{t-1}, theta Z_t)``.

    ``Z`` is iid unit Frechet and ``X_0 = Z_0``, so the process is
    stationary with unit Frechet margins and extremal index ``theta``.
    """
    if not (0 < theta <= 1):
        raise ValueError("theta must lie in (0, 1]")
    rng = np.random.default_rng(rng_seed)
    z = -1.0 / np.log(rng.random(n))
    if theta == 1:
        return z
    x = np.empty(n)
    prev = z[0]
    x[0] = prev
    a = 1.0 - theta
    for t in range(1, n):
        prev = max(a * prev, theta * z[t])
        x[t] = prev
    return x
