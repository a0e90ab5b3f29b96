"""Node influence scores: scale-free PageRank and the Max-Linear Model."""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import EmptyGraph, NoConvergenceWarning
from .graph import DirectedGraph

LITERAL = "literal"
REDISTRIBUTE = "redistribute"


@dataclass(frozen=True)
class PrParams:
    c: float = 0.85
    tol: float = 1e-10
    max_iter: int = 1000
    dangling_mode: str = LITERAL

    def validate(self):
        if not (0 < self.c < 1):
            raise ValueError(f"damping factor must lie in (0, 1), got {self.c}")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.dangling_mode not in (LITERAL, REDISTRIBUTE):
            raise ValueError(f"unknown dangling_mode {self.dangling_mode!r}")


@dataclass
class ScoreVector:
    values: np.ndarray
    kind: str  # "pagerank" | "mlm"
    scale: str = "scale-free"
    iterations: int = 0
    converged: bool = True

    def __len__(self):
        return len(self.values)

    def to_csv(self, path, extra=None):
        extra = extra or {}
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["node_id", "score", *extra])
            for i, v in enumerate(self.values):
                w.writerow([i, repr(float(v)), *extra.values()])

    @classmethod
    def from_csv(cls, path, kind="pagerank"):
        ids, vals = [], []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                ids.append(int(row["node_id"]))
                vals.append(float(row["score"]))
        out = np.zeros(max(ids) + 1 if ids else 0)
        out[ids] = vals
        return cls(out, kind)


def transition_matrix(g: DirectedGraph) -> sparse.csr_matrix:
    """``M[i, j] = mult(j -> i) / D_j``; parallel edges add up."""
    n = g.n_nodes
    src, dst = g.edge_arrays()
    out_deg = g.out_degrees()
    data = 1.0 / out_deg[src] if len(src) else np.zeros(0)
    return sparse.csr_matrix((data, (dst, src)), shape=(n, n))


def pagerank(g: DirectedGraph, p: PrParams = PrParams()) -> ScoreVector:
    """Scale-free PageRank by fixed-point iteration from the all-ones vector.

    Each sweep computes ``R_i <- sum_{j->i} c R_j / D_j + (1 - c)``.  In
    ``redistribute`` mode the mass ``c * R_j`` of every dangling node is
    spread evenly over all nodes first, so the scores sum to ``n``.
    Iteration stops once the sup-norm change drops below ``p.tol``; hitting
    ``p.max_iter`` first returns the last iterate flagged as not converged.
    """
    p.validate()
    n = g.n_nodes
    if n == 0:
        raise EmptyGraph("PageRank of an empty graph")
    M = transition_matrix(g)
    dangling = g.out_degrees() == 0
    redistribute = p.dangling_mode == REDISTRIBUTE and dangling.any()
    r = np.ones(n)
    converged = False
    it = 0
    for it in range(1, p.max_iter + 1):
        new = p.c * (M @ r) + (1.0 - p.c)
        if redistribute:
            new += p.c * r[dangling].sum() / n
        delta = np.max(np.abs(new - r))
        r = new
        if delta < p.tol:
            converged = True
            break
    if not converged:
        warnings.warn(f"PageRank stopped after {it} iterations (change {delta:.3g} >= tol)",
                      NoConvergenceWarning, stacklevel=2)
    return ScoreVector(r, "pagerank", "scale-free", it, converged)


def max_linear(g: DirectedGraph, p: PrParams = PrParams(), q=None) -> ScoreVector:
    """Minimal solution of ``X_i = max(c * max_{j->i} X_j, q_i)``.

    Iterates from ``X = q``.  Each sweep can only raise values along edges
    and every cycle shrinks by ``c < 1``, so the iteration settles.

    ``q`` defaults to ``1 - c`` everywhere, the scale-free personalisation.
    """
    p.validate()
    n = g.n_nodes
    if n == 0:
        raise EmptyGraph("Max-Linear scores of an empty graph")
    q = np.full(n, 1.0 - p.c) if q is None else np.asarray(q, dtype=float)
    if q.shape != (n,) or (q <= 0).any():
        raise ValueError("personalisation must be a positive vector of length n")
    src, dst = g.edge_arrays()
    x = q.copy()
    converged = False
    it = 0
    for it in range(1, max(p.max_iter, n + 1) + 1):
        new = q.copy()
        np.maximum.at(new, dst, p.c * x[src])
        delta = np.max(np.abs(new - x))
        x = new
        if delta < p.tol:
            converged = True
            break
    return ScoreVector(x, "mlm", "scale-free", it, converged)
