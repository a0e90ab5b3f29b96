"""Hill estimation of the tail index with bootstrap choice of ``k``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError, TiesAtCutoff

MAX_NONPOSITIVE_FRACTION = 0.01


@dataclass
class TailEstimate:
    alpha_hat: float
    k_used: int
    ci: tuple[float, float]
    level: float
    n: int
    method: str = "hill"
    k_selection: str = "bootstrap"

    def as_dict(self):
        return {
            "alpha_hat": self.alpha_hat, "k": self.k_used, "ci_lo": self.ci[0],
            "ci_hi": self.ci[1], "level": self.level, "n": self.n,
            "method": self.method, "k_selection": self.k_selection,
        }


def positive_sample(sample) -> np.ndarray:
    x = np.asarray(sample, dtype=float).ravel()
    keep = x > 0
    dropped = len(x) - int(keep.sum())
    if dropped and dropped > MAX_NONPOSITIVE_FRACTION * len(x):
        raise DataError(f"{dropped} of {len(x)} values are non-positive")
    return x[keep]


def hill(sample, k: int) -> float:
    """Hill estimate of the tail index from the ``k`` largest observations.

    ``alpha = 1 / mean(log(X_(n-i+1) / X_(n-k)))`` for i = 1..k, where
    ``X_(n-k)`` is the (k+1)-th largest value.
    """
    x = np.sort(positive_sample(sample))
    n = len(x)
    if not (1 <= k < n):
        raise DataError(f"k must satisfy 1 <= k < n (k={k}, n={n})")
    cutoff = x[n - k - 1]
    if cutoff == x[-1]:
        raise TiesAtCutoff(f"the {k + 1} largest values are all equal")
    return 1.0 / np.mean(np.log(x[n - k:] / cutoff))


def hill_curve(sorted_desc: np.ndarray, ks: np.ndarray) -> np.ndarray:
    """Reciprocal Hill statistic (gamma = 1/alpha) for each ``k`` in ``ks``.

    Works along the last axis, so a (B, n) stack of resamples sorted in
    descending order gives a (B, len(ks)) result.
    """
    logs = np.log(sorted_desc)
    csum = np.cumsum(logs, axis=-1)
    ks = np.asarray(ks)
    return csum[..., ks - 1] / ks - logs[..., ks]


def hill_plot(sample, ks=None):
    """(k, alpha_hat) pairs for a Hill plot; ties at the cutoff give NaN."""
    x = np.sort(positive_sample(sample))[::-1]
    n = len(x)
    ks = np.arange(1, n) if ks is None else np.asarray(ks)
    with np.errstate(divide="ignore"):
        gam = hill_curve(x, ks)
        alpha = np.where(gam > 0, 1.0 / np.where(gam > 0, gam, 1.0), np.nan)
    return ks, alpha


def k_grid(n: int, size: int = 40, k_min: int | None = None, frac: float = 0.5) -> np.ndarray:
    k_min = k_min or 5
    k_max = max(k_min + 1, int(frac * n))
    return np.unique(np.geomspace(k_min, k_max, size).astype(int))


def _resample_sorted(rng, x, size, B):
    idx = rng.integers(0, len(x), size=(B, size))
    return -np.sort(-x[idx], axis=1)


def _gamma_safe(gam):
    return np.where(gam > 0, gam, np.nan)


def _single_bootstrap_k(rng, x, B, ks, pilot):
    """k minimising bootstrap MSE of alpha_hat(k) against the pilot value."""
    res = _resample_sorted(rng, x, len(x), B)
    with np.errstate(divide="ignore", invalid="ignore"):
        alphas = 1.0 / _gamma_safe(hill_curve(res, ks))
        mse = np.nanmean((alphas - pilot) ** 2, axis=0)
    mse = np.where(np.isnan(mse), np.inf, mse)
    return int(ks[int(np.argmin(mse))])


def _double_bootstrap_k(rng, x, B):
    """Danielsson-de Haan-Peng-de Vries double bootstrap for the Hill k.

    Uses the auxiliary statistic ``M2 - 2 * gamma**2`` whose bootstrap MSE
    is minimised at resample sizes n1 = n**0.9 and n2 = n1**2 / n, then
    extrapolates the two minimisers to the full sample.
    """
    n = len(x)
    n1 = int(n ** 0.9)
    n2 = max(int(n1 * n1 / n), 10)

    def kstar(size):
        ks = k_grid(size, size=40, k_min=2, frac=0.9)
        res = _resample_sorted(rng, x, size, B)
        logs = np.log(res)
        lc = np.cumsum(logs, axis=1)
        lc2 = np.cumsum(logs ** 2, axis=1)
        cut = logs[:, ks]
        m1 = lc[:, ks - 1] / ks - cut
        m2 = lc2[:, ks - 1] / ks - 2 * cut * lc[:, ks - 1] / ks + cut ** 2
        mse = np.mean((m2 - 2 * m1 ** 2) ** 2, axis=0)
        return int(ks[int(np.argmin(mse))])

    k1 = kstar(n1)
    k2 = max(kstar(n2), 1)
    if k1 < 2:
        return max(1, int(np.sqrt(n)))
    l1, ln1 = np.log(k1), np.log(n1)
    denom = 2 * ln1 - l1
    if denom <= 0:
        return max(1, int(np.sqrt(n)))
    k = (k1 ** 2 / k2) * ((l1 ** 2) / denom ** 2) ** ((ln1 - l1) / ln1)
    return int(np.clip(round(k), 2, n - 2))


def percentile_ci(rng, x, k, B, level):
    res = _resample_sorted(rng, x, len(x), B)
    with np.errstate(divide="ignore", invalid="ignore"):
        alphas = 1.0 / _gamma_safe(hill_curve(res, np.array([k]))[:, 0])
    alphas = alphas[np.isfinite(alphas)]
    if len(alphas) == 0:
        return (np.nan, np.nan)
    tail = (1.0 - level) / 2.0
    lo, hi = np.quantile(alphas, [tail, 1.0 - tail])
    return float(lo), float(hi)


def select_k_bootstrap(sample, B: int = 500, mode: str = "single", rng_seed=0,
                       level: float = 0.975, pilot_k: int | None = None) -> TailEstimate:
    """Hill estimate with bootstrap-selected ``k`` and a percentile interval.

    Parameters
    ----------
    sample : array_like
        Positive observations (up to 1% non-positive values are dropped).
    B : int
        Number of bootstrap resamples for both the k search and the interval.
    mode : {"single", "double"}
        ``single`` picks k on a log-spaced grid by minimising the bootstrap
        mean squared error of the Hill estimate against a pilot estimate at
        ``pilot_k`` (default ``sqrt(n)``).  ``double`` uses the
        sub-sample double bootstrap.
    level : float
        Coverage of the two-sided percentile interval.
    """
    x = positive_sample(sample)
    n = len(x)
    if n < 20:
        raise DataError(f"bootstrap k selection needs at least 20 observations, got {n}")
    rng = np.random.default_rng(rng_seed)
    xs = np.sort(x)[::-1]
    if mode == "single":
        ks = k_grid(n)
        ks = ks[ks < n - 1]
        pk = pilot_k or max(2, int(np.sqrt(n)))
        valid = xs[ks] < xs[0]
        if not valid.any():
            raise TiesAtCutoff("all candidate cutoffs tie with the maximum")
        ks = ks[valid]
        with np.errstate(divide="ignore"):
            pilot_gamma = hill_curve(xs, np.array([pk]))[0]
        if not pilot_gamma > 0:
            pilot_gamma = hill_curve(xs, ks[-1:])[0]
        k = _single_bootstrap_k(rng, x, B, ks, 1.0 / pilot_gamma)
    elif mode == "double":
        k = _double_bootstrap_k(rng, x, B)
        while k < n - 1 and xs[k] == xs[0]:
            k += 1
    else:
        raise ValueError(f"unknown mode {mode!r}")
    alpha = hill(x, k)
    lo, hi = percentile_ci(rng, x, k, B, level)
    lo = min(lo, alpha) if np.isfinite(lo) else alpha
    hi = max(hi, alpha) if np.isfinite(hi) else alpha
    sel = "bootstrap" if mode == "single" else "double_bootstrap"
    return TailEstimate(float(alpha), int(k), (lo, hi), level, n, "hill", sel)


def fixed_k_estimate(sample, k: int) -> TailEstimate:
    x = positive_sample(sample)
    a = hill(x, k)
    return TailEstimate(a, int(k), (a, a), 0.0, len(x), "hill", "fixed")
