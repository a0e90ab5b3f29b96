"""Inter-exceedance times on graphs and the modified intervals estimator.

A graph analogue of the gap between exceedances is the edge length of a
simple path in the undirected view that starts and ends at exceedance nodes
and passes only through non-exceedance nodes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NoExceedances, SingleExceedance, SingleGapSetEmpty
from ..graph import DirectedGraph
from .extremal import ExtremalEstimate, InterExceedanceTimes, intervals_estimator

UNORDERED = "unordered"
ORDERED = "ordered"


@dataclass
class GraphInterExceedances(InterExceedanceTimes):
    truncated: int = 0
    n_exceedance_nodes: int = 0


def _score_values(scores) -> np.ndarray:
    return np.asarray(getattr(scores, "values", scores), dtype=float)


def graph_inter_exceedances(g: DirectedGraph, scores, u: float, max_len: int = 10,
                            pairs: str = UNORDERED,
                            exclude_single_edges: bool = True) -> GraphInterExceedances:
    """Edge lengths of exceedance-free simple paths between exceedance nodes.

    Parameters
    ----------
    g : DirectedGraph
        Edge direction and multiplicity are ignored.
    scores : ScoreVector or array_like
        Node values; node ``v`` exceeds when ``scores[v] > u``.
    max_len : int
        Paths longer than this many edges are not followed; the number of
        abandoned partial paths is reported in ``truncated``.
    pairs : {"unordered", "ordered"}
        ``unordered`` records each path once; ``ordered`` records it once
        from each end, i.e. for every ordered pair ``x -> y``.
    exclude_single_edges : bool
        Drop paths made of a single edge (two adjacent exceedances).
    """
    x = _score_values(scores)
    if len(x) != g.n_nodes:
        raise ValueError("one score per node is required")
    if pairs not in (UNORDERED, ORDERED):
        raise ValueError(f"unknown pairs mode {pairs!r}")
    exc = x > u
    exc_nodes = np.flatnonzero(exc)
    if len(exc_nodes) == 0:
        raise NoExceedances(f"no node score exceeds u={u}")
    if len(exc_nodes) == 1:
        raise SingleExceedance("only one node exceeds the threshold")

    nbrs = g.undirected_neighbors()
    min_len = 2 if exclude_single_edges else 1
    times = []
    truncated = 0
    for s in exc_nodes.tolist():
        on_path = np.zeros(g.n_nodes, dtype=bool)
        on_path[s] = True
        # iterative DFS: stack of (node, depth, neighbour iterator)
        stack = [(s, 0, iter(nbrs[s]))]
        while stack:
            v, depth, it = stack[-1]
            w = next(it, None)
            if w is None:
                stack.pop()
                on_path[v] = False
                continue
            if on_path[w]:
                continue
            if exc[w]:
                if depth + 1 >= min_len and (pairs == ORDERED or w > s):
                    times.append(depth + 1)
                continue
            if depth + 1 >= max_len:
                truncated += 1
                continue
            on_path[w] = True
            stack.append((w, depth + 1, iter(nbrs[w])))
        on_path[s] = False
    if not times:
        raise SingleGapSetEmpty("no exceedance-free path of admissible length")
    times = np.sort(np.asarray(times, dtype=np.int64))
    return GraphInterExceedances(times, len(times) + 1, len(exc_nodes) / g.n_nodes,
                                 truncated, len(exc_nodes))


def modified_intervals(g: DirectedGraph, scores, u: float, max_len: int = 10,
                       exclude_ones: bool = False, pairs: str = UNORDERED,
                       exclude_single_edges: bool = True) -> ExtremalEstimate:
    """Intervals estimator applied to the graph inter-exceedance times."""
    iet = graph_inter_exceedances(g, scores, u, max_len, pairs, exclude_single_edges)
    theta = intervals_estimator(iet, exclude_ones)
    return ExtremalEstimate(theta, "modified_intervals", float(u), "single", False,
                            {"n_times": int(len(iet.times)), "truncated": iet.truncated,
                             "n_exceedance_nodes": iet.n_exceedance_nodes})
