"""Dependence diagnostics for paired samples: distance correlation with a
permutation test, and the angular edf of the largest polar radii."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import LengthMismatch


def _centered_distances(v: np.ndarray) -> np.ndarray:
    d = np.abs(v[:, None] - v[None, :])
    return d - d.mean(axis=0)[None, :] - d.mean(axis=1)[:, None] + d.mean()


def _dcor_from(A, B, vx, vy):
    if vx <= 0 or vy <= 0:
        return 0.0
    r2 = np.mean(A * B) / np.sqrt(vx * vy)
    return float(np.sqrt(np.clip(r2, 0.0, 1.0)))


def distance_correlation(x, y) -> float:
    """Sample distance correlation (Szekely-Rizzo-Bakirov), in [0, 1]."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise LengthMismatch(f"samples have lengths {len(x)} and {len(y)}")
    A = _centered_distances(x)
    B = _centered_distances(y)
    return _dcor_from(A, B, np.mean(A * A), np.mean(B * B))


def distance_correlation_test(x, y, permutations: int = 499, rng_seed=0) -> tuple[float, float]:
    """Distance correlation and its permutation p-value.

    The p-value is the fraction of the ``permutations`` shuffles of ``y``
    whose distance correlation with ``x`` is at least the observed one.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if len(x) != len(y):
        raise LengthMismatch(f"samples have lengths {len(x)} and {len(y)}")
    if len(x) < 10:
        raise ValueError("distance correlation test needs at least 10 pairs")
    A = _centered_distances(x)
    B = _centered_distances(y)
    vx, vy = np.mean(A * A), np.mean(B * B)
    obs = _dcor_from(A, B, vx, vy)
    rng = np.random.default_rng(rng_seed)
    hits = 0
    for _ in range(permutations):
        p = rng.permutation(len(y))
        # double centring commutes with relabelling, so permute B directly
        if _dcor_from(A, B[np.ix_(p, p)], vx, vy) >= obs:
            hits += 1
    return obs, hits / permutations


@dataclass
class AngularEdf:
    angles: np.ndarray  # sorted
    middle_mass: float
    outer_mass: float
    k: int

    def edf(self, t):
        """Empirical distribution function of the angles at ``t``."""
        return np.searchsorted(self.angles, t, side="right") / len(self.angles)


def angular_edf(x, y, k: int | None = None) -> AngularEdf:
    """Angles ``atan2(y, x)`` of the ``k`` points with the largest radii.

    Mass concentrated near pi/4 points to total dependence, near 0 and pi/2
    to asymptotic independence.  ``middle_mass`` is the share of angles in
    [pi/6, pi/3] and ``outer_mass`` the rest.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if len(x) != len(y):
        raise LengthMismatch(f"samples have lengths {len(x)} and {len(y)}")
    n = len(x)
    k = n if k is None else int(k)
    if not (1 <= k <= n):
        raise ValueError(f"k must lie in [1, n], got {k}")
    r = np.hypot(x, y)
    top = np.argsort(-r, kind="stable")[:k]
    ang = np.sort(np.arctan2(y[top], x[top]))
    mid = float(np.mean((ang >= np.pi / 6) & (ang <= np.pi / 3)))
    return AngularEdf(ang, mid, 1.0 - mid, k)
