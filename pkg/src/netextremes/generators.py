"""Seed networks: Thorny Branching Trees built from power-law bi-degree
sequences, and multi-component seeds joined by a few random cross edges."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSpec, StubMatchFailure
from .graph import SEED, DirectedGraph


@dataclass(frozen=True)
class BiDegreeSpec:
    n: int
    iota_in: float
    iota_out: float
    rng_seed: int = 0

    def validate(self):
        if self.n < 2:
            raise DegenerateSpec(f"need at least 2 nodes, got n={self.n}")
        if self.iota_in <= 1 or self.iota_out <= 1:
            raise DegenerateSpec("tail indices must exceed 1 (finite mean degrees)")


@dataclass(frozen=True)
class SeedSpec:
    components: tuple[BiDegreeSpec, ...]
    cross_edges: int = 0
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    def validate(self):
        if not self.components:
            raise DegenerateSpec("seed needs at least one component")
        if self.cross_edges < 0:
            raise DegenerateSpec("cross_edges must be non-negative")
        if self.cross_edges and len(self.components) < 2:
            raise DegenerateSpec("cross edges need at least two components")
        for c in self.components:
            c.validate()


@dataclass
class Seed:
    graph: DirectedGraph
    labels: np.ndarray
    component_edges: list[int] = field(default_factory=list)


def derived_seed(seed: int, stream: int) -> int:
    """Independent child seed for a named sub-stream of ``seed``."""
    return int(np.random.SeedSequence([int(seed), int(stream)]).generate_state(1)[0])


def discrete_pareto(rng, n, iota):
    """Integer draws with ``P(D >= k) = k**-iota`` for k = 1, 2, ..."""
    u = 1.0 - rng.random(n)  # (0, 1]
    return np.floor(u ** (-1.0 / iota)).astype(np.int64)


def sample_bidegree(spec: BiDegreeSpec) -> tuple[np.ndarray, np.ndarray]:
    """Draw in- and out-degree sequences with equal sums.

    Both sequences are discrete Pareto with the requested tail indices.  The
    sequence with the smaller total is then incremented at uniformly chosen
    positions until the totals agree, which perturbs the tails only slightly.
    """
    spec.validate()
    rng = np.random.default_rng(spec.rng_seed)
    d_in = discrete_pareto(rng, spec.n, spec.iota_in)
    d_out = discrete_pareto(rng, spec.n, spec.iota_out)
    gap = int(d_in.sum() - d_out.sum())
    short = d_out if gap > 0 else d_in
    if gap:
        pos = rng.integers(0, spec.n, size=abs(gap))
        np.add.at(short, pos, 1)
    return d_in, d_out


def build_tbt(in_deg, out_deg, rng_seed=0, retry_factor=100) -> DirectedGraph:
    """Thorny Branching Tree on a prescribed bi-degree sequence.

    Node 0 is the root.  A breadth-first tree is grown in which every other
    node sends one edge to its parent, using one of its out-stubs and one of
    the parent's in-stubs; children are drawn from the nodes not yet placed
    with probability proportional to out-degree, as when a free out-stub is
    picked uniformly.  The leftover stubs (the thorns) are paired uniformly at
    random, configuration-model style.  A pairing that would create a
    self-loop is re-drawn by swapping targets with a random other pair, so the
    realised degrees equal the requested ones exactly.
    """
    d_in = np.asarray(in_deg, dtype=np.int64)
    d_out = np.asarray(out_deg, dtype=np.int64)
    n = len(d_in)
    if len(d_out) != n or n == 0:
        raise DegenerateSpec("degree sequences must be non-empty and of equal length")
    if d_in.sum() != d_out.sum():
        raise DegenerateSpec("in- and out-degree sums differ")
    if (d_in < 0).any() or (d_out < 0).any():
        raise DegenerateSpec("negative degree")
    if n > 1 and (d_out[1:] < 1).any():
        raise StubMatchFailure("every non-root node needs an out-stub for its parent edge")

    rng = np.random.default_rng(rng_seed)
    g = DirectedGraph.with_nodes(n, step=0, origin=SEED)
    in_left = d_in.copy()
    out_left = d_out.copy()

    # a tree edge uses a uniformly chosen free out-stub, so children are drawn
    # size-biased by out-degree: the first appearance of each node in a
    # shuffled list of non-root out-stubs gives the order
    stubs = rng.permutation(np.repeat(np.arange(1, n), d_out[1:]))
    _, first = np.unique(stubs, return_index=True)
    pending = list(stubs[np.sort(first)])
    pending.reverse()  # pop() from the end keeps the drawn order
    queue = [0]
    head = 0
    while pending:
        if head == len(queue):
            raise StubMatchFailure("tree skeleton stalled: placed nodes have no free in-stubs")
        parent = queue[head]
        head += 1
        for _ in range(int(in_left[parent])):
            if not pending:
                break
            child = int(pending.pop())
            g.add_edge(child, parent)
            in_left[parent] -= 1
            out_left[child] -= 1
            queue.append(child)

    out_stubs = np.repeat(np.arange(n), out_left)
    in_stubs = rng.permutation(np.repeat(np.arange(n), in_left))
    m = len(out_stubs)
    budget = retry_factor * max(2 * m, 1)
    tries = 0
    for i in range(m):
        while out_stubs[i] == in_stubs[i]:
            tries += 1
            if tries > budget or m == 1:
                raise StubMatchFailure(f"could not avoid self-loops after {tries} resamples")
            j = int(rng.integers(0, m))
            if out_stubs[j] != in_stubs[i] and out_stubs[i] != in_stubs[j]:
                in_stubs[i], in_stubs[j] = in_stubs[j], in_stubs[i]
    for s, t in zip(out_stubs.tolist(), in_stubs.tolist()):
        g.add_edge(s, t)
    return g


def tbt_from_spec(spec: BiDegreeSpec) -> DirectedGraph:
    d_in, d_out = sample_bidegree(spec)
    return build_tbt(d_in, d_out, rng_seed=derived_seed(spec.rng_seed, 1))


def build_seed(spec: SeedSpec) -> Seed:
    """Disjoint TBTs plus ``cross_edges`` random edges between components.

    Each cross edge picks its source uniformly among all nodes and its target
    uniformly among the nodes of the other components.
    """
    spec.validate()
    g = DirectedGraph()
    labels = []
    comp_edges = []
    offset = 0
    for ci, comp in enumerate(spec.components):
        tbt = tbt_from_spec(comp)
        for _ in range(tbt.n_nodes):
            g.add_node(0, SEED)
        for s, d in zip(tbt.src, tbt.dst):
            g.add_edge(s + offset, d + offset)
        labels.extend([ci] * tbt.n_nodes)
        comp_edges.append(tbt.n_edges)
        offset += tbt.n_nodes
    labels = np.asarray(labels, dtype=np.int64)

    if spec.cross_edges:
        rng = np.random.default_rng(derived_seed(spec.rng_seed, 2))
        n = g.n_nodes
        for _ in range(spec.cross_edges):
            s = int(rng.integers(0, n))
            others = np.flatnonzero(labels != labels[s])
            t = int(others[rng.integers(0, len(others))])
            g.add_edge(s, t)
    return Seed(g, labels, comp_edges)
