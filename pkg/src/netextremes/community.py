"""Communities of a seed graph, their mean-excess diagnostics, and the
encoding of newly attached nodes by the communities they link to."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import networkx as nx
import numpy as np
from scipy import stats

from .errors import EmptyGraph, InsufficientExceedances
from .evt.tail import TailEstimate, select_k_bootstrap
from .graph import DirectedGraph

IN, OUT = "in", "out"
UNASSIGNED = -1


@dataclass
class CommunityPartition:
    """Node to community map.

    ``assignment[v]`` is a 0-based community index or -1 for nodes outside
    the partition (e.g. attached nodes).  ``rank[c]`` is the 1-based
    position of community ``c`` when communities are sorted by ascending
    tail index; it is the identity until :func:`rank_by_tail` is applied.
    """
    assignment: np.ndarray
    n_communities: int
    rank: np.ndarray | None = None
    tail: list = field(default_factory=list)

    def __post_init__(self):
        self.assignment = np.asarray(self.assignment, dtype=np.int64)
        if self.rank is None:
            self.rank = np.arange(1, self.n_communities + 1)
        self.rank = np.asarray(self.rank, dtype=np.int64)
        if sorted(self.rank.tolist()) != list(range(1, self.n_communities + 1)):
            raise ValueError("rank must be a bijection onto 1..N_C")

    def members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == c)

    def sizes(self) -> np.ndarray:
        a = self.assignment[self.assignment >= 0]
        return np.bincount(a, minlength=self.n_communities)

    def by_rank(self) -> list[int]:
        """Community indices ordered by rank (heaviest tail first)."""
        return [int(c) for c in np.argsort(self.rank)]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["node_id", "community", "rank"])
            for v, c in enumerate(self.assignment.tolist()):
                w.writerow([v, c, self.rank[c] if c >= 0 else ""])

    @classmethod
    def from_csv(cls, path):
        ids, comm, ranks = [], [], {}
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                v, c = int(row["node_id"]), int(row["community"])
                ids.append(v)
                comm.append(c)
                if c >= 0 and row.get("rank"):
                    ranks[c] = int(row["rank"])
        a = np.full(max(ids) + 1 if ids else 0, UNASSIGNED)
        a[ids] = comm
        n_c = int(a.max()) + 1 if len(a) and a.max() >= 0 else 0
        rank = [ranks.get(c, c + 1) for c in range(n_c)] if len(ranks) == n_c else None
        return cls(a, n_c, rank)


def from_labels(labels, n_nodes: int | None = None) -> CommunityPartition:
    """Partition from per-node labels; nodes beyond ``len(labels)`` are unassigned."""
    labels = np.asarray(labels, dtype=np.int64)
    n = len(labels) if n_nodes is None else n_nodes
    a = np.full(n, UNASSIGNED)
    a[:len(labels)] = labels
    return CommunityPartition(a, int(labels.max()) + 1 if len(labels) else 0)


def to_networkx(g: DirectedGraph, nodes=None) -> nx.DiGraph:
    """Weighted simple DiGraph; edge weight is the multiplicity."""
    G = nx.DiGraph()
    keep = None if nodes is None else set(int(v) for v in nodes)
    G.add_nodes_from(range(g.n_nodes) if keep is None else sorted(keep))
    for s, d in zip(g.src, g.dst):
        if keep is not None and (s not in keep or d not in keep):
            continue
        if G.has_edge(s, d):
            G[s][d]["weight"] += 1
        else:
            G.add_edge(s, d, weight=1)
    return G


def directed_modularity(g: DirectedGraph, assignment, resolution: float = 1.0) -> float:
    """``Q = (1/m) sum_ij [A_ij - k_i^out k_j^in / m] delta(c_i, c_j)``.

    Only nodes with ``assignment >= 0`` and edges between them are counted.
    """
    a = np.asarray(assignment)
    src, dst = g.edge_arrays()
    keep = (a[src] >= 0) & (a[dst] >= 0)
    src, dst = src[keep], dst[keep]
    m = len(src)
    if m == 0:
        raise EmptyGraph("modularity of a graph without edges")
    inside = np.count_nonzero(a[src] == a[dst])
    n_c = int(a.max()) + 1
    k_out = np.bincount(a[src], minlength=n_c).astype(float)
    k_in = np.bincount(a[dst], minlength=n_c).astype(float)
    return float(inside / m - resolution * np.sum(k_out * k_in) / m ** 2)


def _canonical(groups, n) -> np.ndarray:
    # community ids ordered by their smallest member
    groups = sorted((sorted(grp) for grp in groups), key=lambda s: s[0])
    a = np.full(n, UNASSIGNED)
    for c, grp in enumerate(groups):
        a[grp] = c
    return a


def louvain_directed(g: DirectedGraph, rng_seed=0, resolution: float = 1.0,
                     nodes=None) -> CommunityPartition:
    """Directed-modularity Louvain partition (networkx implementation).

    ``nodes`` restricts the partition to a node subset (e.g. the seed
    nodes); other nodes stay unassigned.  Communities are numbered by their
    smallest node id.
    """
    if g.n_edges == 0:
        raise EmptyGraph("Louvain needs at least one edge")
    G = to_networkx(g, nodes)
    if G.number_of_edges() == 0:
        raise EmptyGraph("no edges among the selected nodes")
    groups = nx.community.louvain_communities(G, weight="weight", resolution=resolution,
                                              seed=rng_seed)
    a = _canonical(groups, g.n_nodes)
    singletons = _canonical([[v] for v in G.nodes], g.n_nodes)
    if directed_modularity(g, a, resolution) < directed_modularity(g, singletons, resolution):
        a = singletons
    return CommunityPartition(a, int(a.max()) + 1)


def merge_to_count(p: CommunityPartition, g: DirectedGraph, n_target: int) -> CommunityPartition:
    """Merge smallest communities until ``n_target`` remain.

    The smallest community joins the community it shares most edges with,
    or the next smallest one if it has no external edges.
    """
    if n_target < 1:
        raise ValueError("n_target must be >= 1")
    a = p.assignment.copy()
    src, dst = g.edge_arrays()
    while True:
        labels = np.unique(a[a >= 0])
        if len(labels) <= n_target:
            break
        sizes = np.array([np.count_nonzero(a == c) for c in labels])
        small = labels[np.lexsort((labels, sizes))[0]]
        ends = np.concatenate([a[dst][a[src] == small], a[src][a[dst] == small]])
        ends = ends[(ends >= 0) & (ends != small)]
        if len(ends):
            vals, cnt = np.unique(ends, return_counts=True)
            target = vals[np.argmax(cnt)]
        else:
            others = labels[labels != small]
            target = others[np.argmin([np.count_nonzero(a == c) for c in others])]
        a[a == small] = target
    members = [np.flatnonzero(a == c).tolist() for c in np.unique(a[a >= 0])]
    a = _canonical(members, len(a)) if members else a
    return CommunityPartition(a, len(members))


def rank_by_tail(p: CommunityPartition, values, tail_fn=None) -> CommunityPartition:
    """Estimate each community's tail index from ``values`` and rank them.

    ``tail_fn(sample) -> TailEstimate`` defaults to the bootstrap Hill
    estimator with 500 resamples.
    """
    values = np.asarray(getattr(values, "values", values), dtype=float)
    tail_fn = tail_fn or (lambda x: select_k_bootstrap(x, B=500))
    est: list[TailEstimate] = [tail_fn(values[p.members(c)]) for c in range(p.n_communities)]
    order = np.argsort([e.alpha_hat for e in est], kind="stable")
    rank = np.empty(p.n_communities, dtype=np.int64)
    rank[order] = np.arange(1, p.n_communities + 1)
    return CommunityPartition(p.assignment.copy(), p.n_communities, rank, est)


@dataclass
class MeanExcessCurve:
    thresholds: np.ndarray
    values: np.ndarray
    slope: float
    intercept: float
    r2: float

    def as_rows(self):
        return [{"threshold": float(u), "mean_excess": float(e)}
                for u, e in zip(self.thresholds, self.values)]


def mean_excess(sample, thresholds=None, quantiles=None,
                min_exceedances: int = 10) -> MeanExcessCurve:
    """Sample mean excess ``e_n(u) = mean(X_i - u | X_i > u)`` with a line fit.

    Thresholds are given directly or as sample quantiles (default the
    50%..95% grid in steps of 2.5%).
    """
    x = np.asarray(sample, dtype=float).ravel()
    if thresholds is None:
        qs = np.linspace(0.5, 0.95, 19) if quantiles is None else np.asarray(quantiles)
        thresholds = np.quantile(x, qs)
    us = np.unique(np.asarray(thresholds, dtype=float))
    xs = np.sort(x)
    counts = len(xs) - np.searchsorted(xs, us, side="right")
    if (counts < min_exceedances).any():
        u_bad = us[np.argmax(counts < min_exceedances)]
        raise InsufficientExceedances(
            f"threshold {u_bad:.6g} has fewer than {min_exceedances} exceedances")
    tail_sums = np.concatenate([np.cumsum(xs[::-1])[::-1], [0.0]])
    starts = len(xs) - counts
    e = tail_sums[starts] / counts - us
    if len(us) >= 2 and np.ptp(e) > 0:
        fit = stats.linregress(us, e)
        slope, intercept, r2 = float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2)
    elif len(us) >= 2:
        slope, intercept, r2 = 0.0, float(e[0]), 1.0
    else:
        slope, intercept, r2 = float("nan"), float("nan"), float("nan")
    return MeanExcessCurve(us, e, slope, intercept, r2)


def pareto_mean_excess(u, gamma: float):
    """Mean excess ``(1 + gamma u) / (1 - gamma)`` of a Pareto-type law, gamma < 1."""
    return (1.0 + gamma * np.asarray(u, dtype=float)) / (1.0 - gamma)


@dataclass
class StationarityCheck:
    passed: bool
    r2: float
    curve: MeanExcessCurve


def stationarity_check(sample, r2_min: float = 0.9, quantiles=None) -> StationarityCheck:
    """Numeric stand-in for a visual mean-excess inspection.

    Passes when a straight line explains at least ``r2_min`` of the
    variation of the mean-excess curve over the 50%..95% quantile grid.
    This is a heuristic diagnostic, not a test with a controlled level.
    """
    curve = mean_excess(sample, quantiles=quantiles)
    return StationarityCheck(bool(curve.r2 >= r2_min), curve.r2, curve)


@dataclass
class Classification:
    nodes: np.ndarray
    codes: np.ndarray  # (n_new, N_C) digits
    classes: np.ndarray  # 1..N_C+1
    n_communities: int
    direction: str

    def code_strings(self) -> list[str]:
        sep = "" if self.n_communities < 10 else "-"
        return [sep.join(str(d) for d in row) for row in self.codes]

    def class_sizes(self) -> np.ndarray:
        return np.bincount(self.classes, minlength=self.n_communities + 2)[1:]

    def members(self, k: int) -> np.ndarray:
        return self.nodes[self.classes == k]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["node_id", "direction", "code", "class"])
            for v, code, k in zip(self.nodes.tolist(), self.code_strings(), self.classes.tolist()):
                w.writerow([v, self.direction, code, k])


def classify_new_nodes(g: DirectedGraph, partition: CommunityPartition, new_nodes=None,
                       direction: str = IN) -> Classification:
    """Encode attached nodes by the ranked communities they link to.

    A node's code has one digit per community rank; digit ``i`` is set to
    ``i`` when the node has an edge with a member of the rank-``i``
    community.  ``direction="in"`` uses edges from community members to the
    node and ``"out"`` edges from the node to community members.  Edges to
    or from nodes outside the partition do not set digits.  The class is the
    position of the first non-zero digit, or ``N_C + 1`` for an all-zero code.

    ``new_nodes`` defaults to all nodes of origin "attached"; an
    :class:`EvolutionLog` is accepted as well.
    """
    if direction not in (IN, OUT):
        raise ValueError(f"direction must be 'in' or 'out', got {direction!r}")
    if new_nodes is None:
        new_nodes = g.attached_nodes()
    elif hasattr(new_nodes, "attached"):
        new_nodes = new_nodes.attached()
    nodes = np.asarray(new_nodes, dtype=np.int64)
    n_c = partition.n_communities
    a = np.full(g.n_nodes, UNASSIGNED)
    a[:len(partition.assignment)] = partition.assignment[:g.n_nodes]
    pos = np.full(g.n_nodes, -1)
    pos[nodes] = np.arange(len(nodes))
    codes = np.zeros((len(nodes), n_c), dtype=np.int64)
    src, dst = g.edge_arrays()
    if direction == IN:
        node_end, other_end = dst, src
    else:
        node_end, other_end = src, dst
    hit = (pos[node_end] >= 0) & (a[other_end] >= 0)
    rows = pos[node_end[hit]]
    digits = partition.rank[a[other_end[hit]]]
    codes[rows, digits - 1] = digits
    nz = codes > 0
    classes = np.where(nz.any(axis=1), np.argmax(nz, axis=1) + 1, n_c + 1)
    return Classification(nodes, codes, classes, n_c, direction)
