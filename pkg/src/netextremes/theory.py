"""Doubly indexed series, domino recursions and index predictions.

A :class:`SeriesMatrix` holds ragged rows ``Y[n, 0:N_n]`` plus a
personalisation ``Q_n`` per row.  One domino step maps column ``j`` to the
damped sum (or maximum) of the row suffix starting at ``j``.  The prediction
rules assign to a class of new nodes the minimum tail index of the
communities it links to, and the extremal index of the dominating community.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InvalidOrdering, NoLinkedCommunity
from .evt.extremal import armax_series

SUM, MAX = "sum", "max"
UNDEFINED = "undefined"


@dataclass
class ColumnSpec:
    k: float
    theta: float = 1.0
    stationary: bool = True


@dataclass
class SeriesMatrix:
    values: np.ndarray  # (n_rows, width), zero beyond each row length
    lengths: np.ndarray
    q: np.ndarray
    column_meta: list = field(default_factory=list)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.lengths = np.asarray(self.lengths, dtype=np.int64)
        self.q = np.broadcast_to(np.asarray(self.q, dtype=float), (self.n_rows,)).copy()
        if self.values.ndim != 2 or len(self.lengths) != self.n_rows:
            raise ValueError("values must be 2-D with one length per row")
        if (self.lengths < 1).any() or (self.lengths > self.width).any():
            raise ValueError("row lengths must lie in [1, width]")
        self.values[self._pad_mask()] = 0.0

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def _pad_mask(self):
        return np.arange(self.width)[None, :] >= self.lengths[:, None]

    @classmethod
    def from_rows(cls, rows, q, column_meta=None):
        lengths = [len(r) for r in rows]
        vals = np.zeros((len(rows), max(lengths)))
        for i, r in enumerate(rows):
            vals[i, :len(r)] = r
        return cls(vals, lengths, q, list(column_meta or []))

    def rows(self) -> list[np.ndarray]:
        return [self.values[i, :n].copy() for i, n in enumerate(self.lengths)]

    def column(self, j: int) -> np.ndarray:
        """Entries of column ``j`` over the rows long enough to have one."""
        return self.values[self.lengths > j, j]

    def copy(self) -> "SeriesMatrix":
        return SeriesMatrix(self.values.copy(), self.lengths.copy(), self.q.copy(),
                            list(self.column_meta))


def domino_step(m: SeriesMatrix, c: float, kind: str = SUM) -> SeriesMatrix:
    """One iteration of the domino recursion.

    ``sum``: ``Y'[i, j] = c * sum_{s >= j} Y[i, s] + Q_i``;
    ``max``: ``Y'[i, j] = max(c * max_{s >= j} Y[i, s], Q_i)``,
    for ``j < N_i``.  Row lengths and ``Q`` are unchanged.
    """
    if m.n_rows == 0:
        raise ValueError("empty matrix")
    rev = m.values[:, ::-1]
    if kind == SUM:
        out = c * np.cumsum(rev, axis=1)[:, ::-1] + m.q[:, None]
    elif kind == MAX:
        # padding zeros never exceed the non-negative row entries
        out = np.maximum(c * np.maximum.accumulate(rev, axis=1)[:, ::-1], m.q[:, None])
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return SeriesMatrix(out, m.lengths.copy(), m.q.copy(), list(m.column_meta))


def pareto_from_uniform(u, k: float):
    return (1.0 - np.asarray(u)) ** (-1.0 / k)


def synth_column(n: int, spec: ColumnSpec, rng_seed=0) -> np.ndarray:
    """Stationary Pareto(k) column, ARMAX-clustered when ``theta < 1``.

    A unit Frechet ARMAX series is mapped monotonically to Pareto(k)
    margins, which keeps its extremal index.  A non-stationary column
    switches to tail index ``2 k`` halfway through.
    """
    rng = np.random.default_rng(rng_seed)
    if spec.theta < 1:
        f = armax_series(n, spec.theta, rng)
        u = np.exp(-1.0 / f)
    else:
        u = rng.random(n)
    x = pareto_from_uniform(u, spec.k)
    if not spec.stationary:
        h = n // 2
        x[h:] = pareto_from_uniform(u[h:], 2.0 * spec.k)
    return x


def synth_matrix(specs, n: int, row_length=None, rng_seed=0, q: float = 0.15) -> SeriesMatrix:
    """Random SeriesMatrix with one column per spec.

    Parameters
    ----------
    specs : sequence of ColumnSpec or (k, theta, stationary) tuples
    row_length : callable, optional
        ``row_length(rng, n)`` returns raw row lengths, clipped to
        ``[1, len(specs)]``.  By default every row is full.
    q : float
        Personalisation shared by all rows.
    """
    specs = [s if isinstance(s, ColumnSpec) else ColumnSpec(*s) for s in specs]
    if not specs:
        raise ValueError("at least one column spec is required")
    ss = np.random.SeedSequence(int(rng_seed))
    children = ss.spawn(len(specs) + 1)
    cols = [synth_column(n, s, np.random.default_rng(ch)) for s, ch in zip(specs, children)]
    vals = np.column_stack(cols)
    w = len(specs)
    if row_length is None:
        lengths = np.full(n, w)
    else:
        lengths = np.clip(np.asarray(row_length(np.random.default_rng(children[-1]), n)), 1, w)
    return SeriesMatrix(vals, lengths, np.full(n, q), specs)


def plant_zeros(m: SeriesMatrix, column: int, rows) -> SeriesMatrix:
    """Copy of ``m`` with zeros at ``(rows, column)``."""
    out = m.copy()
    out.values[np.asarray(rows), column] = 0.0
    return out


def block_permutation(m: SeriesMatrix, column_order=None):
    """Reorder rows into blocks led by their first non-zero dominating column.

    ``column_order`` lists columns from heaviest to lightest tail (default
    left to right).  Rows with a non-zero entry in the first listed column
    form block 1, rows zero there but non-zero in the second form block 2,
    and so on; rows zero in every listed column come last.  Order within a
    block is preserved.  Returns ``(matrix, perm, block_starts)``.
    """
    order = list(range(m.width)) if column_order is None else list(column_order)
    nz = m.values[:, order] != 0
    lead = np.where(nz.any(axis=1), np.argmax(nz, axis=1), len(order))
    perm = np.argsort(lead, kind="stable")
    starts = np.searchsorted(lead[perm], np.arange(len(order) + 1))
    out = SeriesMatrix(m.values[perm], m.lengths[perm], m.q[perm], list(m.column_meta))
    return out, perm, starts


@dataclass
class CommunityStats:
    k: float
    theta: float | None = None
    stationary: bool = True
    max_score: float = float("nan")
    ci: tuple[float, float] | None = None
    name: str = ""


@dataclass
class TheoryPrediction:
    cls: int
    k_pred: float
    theta_pr: float | str
    theta_mlm: float | str
    dominating_set: list
    basis: str

    def as_dict(self):
        return {"class": self.cls, "k_pred": self.k_pred, "theta_pred": self.theta_pr,
                "theta_pred_mlm": self.theta_mlm, "dominating_set": list(self.dominating_set),
                "basis": self.basis}


def _ties(stats, linked, kmin_c, tie_tol):
    ref = stats[kmin_c]
    dom = []
    for c in linked:
        s = stats[c]
        if tie_tol is not None:
            same = abs(s.k - ref.k) <= tie_tol
        elif s.ci is not None and ref.ci is not None:
            same = s.ci[0] <= ref.ci[1] and ref.ci[0] <= s.ci[1]
        else:
            same = s.k == ref.k
        if same:
            dom.append(c)
    return dom


def predict_indices(communities, classes, independent=True, tie_tol: float | None = None):
    """Tail and extremal index predictions for classes of new nodes.

    Parameters
    ----------
    communities : mapping or sequence of CommunityStats
        Per-community tail index, extremal index, stationarity flag, sample
        maximum score and (optionally) confidence interval.
    classes : mapping class -> iterable of linked community keys
    independent : bool or mapping
        Outcome of the weak-dependence diagnostics among dominating
        communities, globally or per class.
    tie_tol : float, optional
        Communities whose tail index is within ``tie_tol`` of the minimum
        share it.  By default, overlapping confidence intervals (or exact
        equality when intervals are missing) define a tie.

    Returns
    -------
    list of TheoryPrediction
        The predicted tail index is the minimum over linked communities.
        With one dominating community its extremal index is passed on.
        With several, the MLM gets the extremal index of the dominating
        community with the largest maximum, and PageRank the same value
        only when ``independent`` holds; otherwise "undefined".  A
        non-stationary dominating community also makes the extremal index
        "undefined".
    """
    stats = dict(communities) if isinstance(communities, dict) else dict(enumerate(communities))
    out = []
    for cls, linked in classes.items():
        linked = [c for c in linked]
        if not linked:
            raise NoLinkedCommunity(f"class {cls} links to no community")
        missing = [c for c in linked if c not in stats]
        if missing:
            raise NoLinkedCommunity(f"class {cls} links to unknown communities {missing}")
        kmin_c = min(linked, key=lambda c: stats[c].k)
        dom = _ties(stats, linked, kmin_c, tie_tol)
        k_pred = float(min(stats[c].k for c in linked))
        indep = independent.get(cls, True) if isinstance(independent, dict) else bool(independent)
        if len(dom) == 1:
            s = stats[dom[0]]
            th = s.theta if (s.stationary and s.theta is not None) else UNDEFINED
            out.append(TheoryPrediction(cls, k_pred, th, th, dom, "Prop1(i)"))
            continue
        top = max(dom, key=lambda c: stats[c].max_score)
        s = stats[top]
        ok = all(stats[c].stationary for c in dom) and s.theta is not None
        th_mlm = s.theta if ok else UNDEFINED
        th_pr = th_mlm if indep else UNDEFINED
        out.append(TheoryPrediction(cls, k_pred, th_pr, th_mlm, dom, "T3"))
    return out


def predict_columns(meta, tie_tol: float = 0.0):
    """Predictions for every column of a domino iterate.

    Column ``j`` aggregates the row suffix from ``j`` on, so its tail index
    is the minimum over columns ``j, j+1, ...`` of the seed matrix.
    """
    meta = [m if isinstance(m, ColumnSpec) else ColumnSpec(*m) for m in meta]
    stats = {j: CommunityStats(m.k, m.theta, m.stationary, float(len(meta) - j))
             for j, m in enumerate(meta)}
    classes = {j: list(range(j, len(meta))) for j in range(len(meta))}
    preds = predict_indices(stats, classes, True, tie_tol)
    for p in preds:
        if p.basis == "T3":
            p.basis = "Prop1(ii)"
    return preds


def predictions_to_json(preds, path=None) -> str:
    s = json.dumps([p.as_dict() for p in preds], indent=2, default=float)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(s + "\n")
    return s


def chi0(k1: float, k: float) -> float:
    if not (0 < k1 < k):
        raise InvalidOrdering(f"need 0 < k1 < k, got k1={k1}, k={k}")
    return (k - k1) / (k1 * (k + 1))


def theory_helpers(k1: float, k: float, n: int, C: float, chi: float | None = None):
    """``(chi0, l_n, d_n)`` with ``l_n = floor(n**chi)`` and ``d_n = min(C, l_n)``.

    ``chi`` must lie in ``(0, chi0)`` and defaults to ``chi0 / 2``.
    """
    c0 = chi0(k1, k)
    if n < 2 or C <= 1:
        raise ValueError("need n >= 2 and C > 1")
    chi = c0 / 2 if chi is None else chi
    if not (0 < chi < c0):
        raise ValueError(f"chi must lie in (0, {c0:.6g}), got {chi}")
    l_n = int(np.floor(n ** chi + 1e-12))
    return c0, l_n, min(C, l_n)


def ln_dn(n: int, chi: float, C: float):
    """``l_n = floor(n**chi)`` and ``d_n = min(C, l_n)`` for a given ``chi``."""
    l_n = int(np.floor(n ** chi + 1e-12))
    return l_n, min(C, l_n)


@dataclass
class DominanceReport:
    ratios: np.ndarray
    a2_pass: bool
    spread: float
    same_dependence: bool
    maxima: np.ndarray
    order: np.ndarray  # ascending maxima
    a4_candidate: int

    def as_dict(self):
        d = asdict(self)
        d["ratios"] = self.ratios.tolist()
        d["maxima"] = self.maxima.tolist()
        d["order"] = self.order.tolist()
        return d


def dominance_diagnostics(columns, u=None, quantile: float = 0.95,
                          tol: float = 0.1) -> DominanceReport:
    """Weak-dependence and maxima-ordering report for dominating columns.

    ``ratios[i, j] = P(X_i > u_i, X_j > u_j) / min(P(X_i > u_i), P(X_j > u_j))``
    estimated over the common length of the columns; values near 0 point to
    weak tail dependence.  ``u`` is a common threshold or one per column;
    by default each column's ``quantile``.  ``a4_candidate`` is the column
    with the largest sample maximum.
    """
    cols = [np.asarray(c, dtype=float) for c in columns]
    if len(cols) < 2:
        raise ValueError("need at least two columns")
    n = min(len(c) for c in cols)
    X = np.column_stack([c[:n] for c in cols])
    if u is None:
        u = np.quantile(X, quantile, axis=0)
    u = np.broadcast_to(np.asarray(u, dtype=float), (X.shape[1],))
    E = X > u[None, :]
    p = E.mean(axis=0)
    joint = (E[:, :, None] & E[:, None, :]).mean(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        R = joint / np.minimum(p[:, None], p[None, :])
    R = np.nan_to_num(R)
    off = R[~np.eye(len(cols), dtype=bool)]
    maxima = np.array([c.max() for c in cols])
    order = np.argsort(maxima, kind="stable")
    spread = float(off.max() - off.min())
    return DominanceReport(R, bool((off <= tol).all()), spread, spread <= tol, maxima, order,
                           int(order[-1]))
