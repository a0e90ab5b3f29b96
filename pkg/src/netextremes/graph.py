"""Directed multigraph storage and SNAP edge-list I/O.

Nodes get dense integer ids in order of appearance.  Every node carries the
evolution step at which it appeared and whether it belongs to the seed
network or was attached later.  Edges are kept as two parallel lists so that
downstream numeric code can grab them as arrays without copying structure.
"""
from __future__ import annotations

import csv
import logging
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError, SelfLoop, UnknownNode

logger = logging.getLogger(__name__)

SEED = "seed"
ATTACHED = "attached"


class DirectedGraph:
    """Directed multigraph with per-node degree counters.

    Parallel edges are allowed, self-loops are not.
    """

    def __init__(self):
        self.src: list[int] = []
        self.dst: list[int] = []
        self.in_deg: list[int] = []
        self.out_deg: list[int] = []
        self.step: list[int] = []
        self.origin: list[str] = []

    @classmethod
    def with_nodes(cls, n, step=0, origin=SEED):
        g = cls()
        for _ in range(n):
            g.add_node(step, origin)
        return g

    def __repr__(self):
        return f"DirectedGraph(n_nodes={self.n_nodes}, n_edges={self.n_edges})"

    @property
    def n_nodes(self) -> int:
        return len(self.in_deg)

    @property
    def n_edges(self) -> int:
        return len(self.src)

    def add_node(self, step: int = 0, origin: str = SEED) -> int:
        v = len(self.in_deg)
        self.in_deg.append(0)
        self.out_deg.append(0)
        self.step.append(step)
        self.origin.append(origin)
        return v

    def add_edge(self, src: int, dst: int) -> None:
        n = len(self.in_deg)
        if not (0 <= src < n):
            raise UnknownNode(f"unknown source node {src}")
        if not (0 <= dst < n):
            raise UnknownNode(f"unknown target node {dst}")
        if src == dst:
            raise SelfLoop(f"self-loop at node {src}")
        self.src.append(src)
        self.dst.append(dst)
        self.out_deg[src] += 1
        self.in_deg[dst] += 1

    def in_degrees(self) -> np.ndarray:
        return np.asarray(self.in_deg, dtype=np.int64)

    def out_degrees(self) -> np.ndarray:
        return np.asarray(self.out_deg, dtype=np.int64)

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.asarray(self.src, dtype=np.int64),
                np.asarray(self.dst, dtype=np.int64))

    def multiplicity(self, src: int, dst: int) -> int:
        return sum(1 for s, d in zip(self.src, self.dst) if s == src and d == dst)

    def copy(self) -> "DirectedGraph":
        g = DirectedGraph()
        g.src = list(self.src)
        g.dst = list(self.dst)
        g.in_deg = list(self.in_deg)
        g.out_deg = list(self.out_deg)
        g.step = list(self.step)
        g.origin = list(self.origin)
        return g

    def seed_nodes(self) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.origin) == SEED)

    def attached_nodes(self) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.origin) == ATTACHED)

    def undirected_neighbors(self) -> list[list[int]]:
        """Simple undirected adjacency: parallel and antiparallel edges collapse."""
        nbrs = [set() for _ in range(self.n_nodes)]
        for s, d in zip(self.src, self.dst):
            nbrs[s].add(d)
            nbrs[d].add(s)
        return [sorted(x) for x in nbrs]

    def induced_subgraph(self, nodes) -> tuple["DirectedGraph", np.ndarray]:
        """Subgraph on ``nodes`` relabelled densely in the given order.

        Returns the subgraph and the array mapping new ids to old ids.
        """
        nodes = np.asarray(list(dict.fromkeys(int(v) for v in nodes)), dtype=np.int64)
        index = {int(v): i for i, v in enumerate(nodes)}
        sub = DirectedGraph()
        for v in nodes:
            sub.add_node(self.step[v], self.origin[v])
        for s, d in zip(self.src, self.dst):
            if s in index and d in index:
                sub.add_edge(index[s], index[d])
        return sub, nodes

    def bfs_ball(self, root: int, radius: int) -> np.ndarray:
        """Nodes within ``radius`` undirected hops of ``root``, in BFS order."""
        if not (0 <= root < self.n_nodes):
            raise UnknownNode(f"unknown root node {root}")
        nbrs = self.undirected_neighbors()
        dist = {root: 0}
        order = [root]
        queue = deque([root])
        while queue:
            v = queue.popleft()
            if dist[v] == radius:
                continue
            for w in nbrs[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    order.append(w)
                    queue.append(w)
        return np.asarray(order, dtype=np.int64)


@dataclass
class SnapIngest:
    graph: DirectedGraph
    id_map: dict[int, int] = field(default_factory=dict)
    skipped_self_loops: int = 0

    def original_ids(self) -> np.ndarray:
        inv = np.empty(len(self.id_map), dtype=np.int64)
        for orig, dense in self.id_map.items():
            inv[dense] = orig
        return inv


def _parse_header_nodes(line: str) -> int | None:
    # SNAP headers look like "# Nodes: 685230 Edges: 7600595"
    parts = line.lstrip("#").replace(":", " ").split()
    for i, tok in enumerate(parts[:-1]):
        if tok.lower() == "nodes":
            try:
                return int(parts[i + 1])
            except ValueError:
                return None
    return None


def ingest_snap(path, preserve_ids: bool = False) -> SnapIngest:
    """Read a SNAP-style edge list.

    Parameters
    ----------
    path : str or Path
        Whitespace separated ``FromNodeId ToNodeId`` lines; ``#`` starts a
        comment line.
    preserve_ids : bool
        Keep the file's integer ids instead of re-indexing by first
        appearance.  Ids must then be dense; a ``# Nodes: N`` header (as
        written by :func:`write_snap`) fixes the node count so isolated
        trailing nodes survive a round trip.

    Returns
    -------
    SnapIngest
        The graph, the original-to-dense id map and the number of self-loop
        lines that were skipped.
    """
    path = Path(path)
    g = DirectedGraph()
    id_map: dict[int, int] = {}
    skipped = 0
    declared_nodes = None
    edges = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                if declared_nodes is None:
                    declared_nodes = _parse_header_nodes(stripped)
                continue
            parts = stripped.split()
            if len(parts) < 2:
                raise ParseError(path, lineno, stripped)
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(path, lineno, stripped) from None
            if a < 0 or b < 0:
                raise ParseError(path, lineno, stripped)
            edges.append((lineno, a, b))

    if preserve_ids:
        n = declared_nodes if declared_nodes is not None else 0
        for _, a, b in edges:
            n = max(n, a + 1, b + 1)
        for _ in range(n):
            g.add_node(0, SEED)
        id_map = {i: i for i in range(n)}
        for _, a, b in edges:
            if a == b:
                skipped += 1
                continue
            g.add_edge(a, b)
    else:
        for _, a, b in edges:
            for v in (a, b):
                if v not in id_map:
                    id_map[v] = g.add_node(0, SEED)
            if a == b:
                skipped += 1
                continue
            g.add_edge(id_map[a], id_map[b])
    if skipped:
        logger.warning("%s: skipped %d self-loop edge(s)", path, skipped)
    return SnapIngest(g, id_map, skipped)


def write_snap(g: DirectedGraph, path) -> None:
    """Write edges in insertion order with a SNAP-style header."""
    with open(path, "w") as fh:
        fh.write("# Directed graph\n")
        fh.write(f"# Nodes: {g.n_nodes} Edges: {g.n_edges}\n")
        fh.write("# FromNodeId\tToNodeId\n")
        for s, d in zip(g.src, g.dst):
            fh.write(f"{s}\t{d}\n")


def write_nodes_csv(g: DirectedGraph, path, labels=None) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        header = ["node_id", "step", "origin"]
        if labels is not None:
            header.append("label")
        w.writerow(header)
        for v in range(g.n_nodes):
            row = [v, g.step[v], g.origin[v]]
            if labels is not None:
                row.append(int(labels[v]))
            w.writerow(row)


def read_nodes_csv(g: DirectedGraph, path) -> np.ndarray | None:
    """Restore step/origin metadata in place; returns the label column if any."""
    labels = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            v = int(row["node_id"])
            while v >= g.n_nodes:
                g.add_node()
            g.step[v] = int(row["step"])
            g.origin[v] = row["origin"]
            if "label" in row and row["label"] not in (None, ""):
                labels.append(int(row["label"]))
    return np.asarray(labels, dtype=np.int64) if labels else None
