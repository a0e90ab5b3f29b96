"""Linear preferential attachment with the alpha/beta/gamma schemes.

Each step draws one scheme trinomially:

* alpha: a new node ``v`` links to an existing ``w`` chosen with probability
  ``(I(w) + delta_in) / (e + delta_in * N)``;
* beta: a new edge ``v -> w`` between existing nodes, ``v`` drawn by
  out-degree weights and ``w`` by in-degree weights, independently;
* gamma: an existing ``w`` drawn by out-degree weights links to a new node.

``e`` is the current edge count and ``N`` the current node count.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGraph, DegenerateSpec
from .graph import ATTACHED, DirectedGraph

ALPHA, BETA, GAMMA = "alpha", "beta", "gamma"
SCHEMES = (ALPHA, BETA, GAMMA)


@dataclass(frozen=True)
class PaParams:
    alpha: float = 0.4
    beta: float = 0.2
    gamma: float = 0.4
    delta_in: float = 1.0
    delta_out: float = 1.0
    steps: int = 1

    def validate(self):
        probs = (self.alpha, self.beta, self.gamma)
        if min(probs) < 0 or abs(sum(probs) - 1.0) > 1e-12:
            raise DegenerateSpec(f"scheme probabilities must be >= 0 and sum to 1, got {probs}")
        if self.delta_in < 0 or self.delta_out < 0:
            raise DegenerateSpec("delta parameters must be non-negative")
        if self.steps < 1:
            raise DegenerateSpec("steps must be >= 1")

    def degree_tail_indices(self) -> tuple[float, float]:
        """Limiting in/out-degree tail indices of the linear PA model."""
        a, b, c = self.alpha, self.beta, self.gamma
        iota_in = (1 + self.delta_in * (a + c)) / (a + b) if a + b > 0 else np.inf
        iota_out = (1 + self.delta_out * (a + c)) / (b + c) if b + c > 0 else np.inf
        return iota_in, iota_out


@dataclass
class StepRecord:
    step: int
    scheme: str
    new_node: int | None
    src: int
    dst: int


@dataclass
class EvolutionLog:
    schemes: list[str] = field(default_factory=list)
    new_nodes: list[int | None] = field(default_factory=list)
    srcs: list[int] = field(default_factory=list)
    dsts: list[int] = field(default_factory=list)
    first_step: int = 1

    def __len__(self):
        return len(self.schemes)

    def append(self, rec: StepRecord):
        self.schemes.append(rec.scheme)
        self.new_nodes.append(rec.new_node)
        self.srcs.append(rec.src)
        self.dsts.append(rec.dst)

    def records(self):
        for i in range(len(self)):
            yield StepRecord(self.first_step + i, self.schemes[i], self.new_nodes[i],
                             self.srcs[i], self.dsts[i])

    def attached(self) -> list[int]:
        """New node ids in order of appearance."""
        return [v for v in self.new_nodes if v is not None]

    def to_csv(self, path, extra=None):
        extra = extra or {}
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "scheme", "new_node", "src", "dst", *extra])
            for r in self.records():
                w.writerow([r.step, r.scheme, "" if r.new_node is None else r.new_node,
                            r.src, r.dst, *extra.values()])

    @classmethod
    def from_csv(cls, path):
        log = cls()
        with open(path, newline="") as fh:
            for i, row in enumerate(csv.DictReader(fh)):
                if i == 0:
                    log.first_step = int(row["step"])
                nn = row["new_node"]
                log.schemes.append(row["scheme"])
                log.new_nodes.append(int(nn) if nn != "" else None)
                log.srcs.append(int(row["src"]))
                log.dsts.append(int(row["dst"]))
        return log


def attachment_probabilities(g: DirectedGraph, p: PaParams, scheme: str):
    """Exact selection probabilities for one step on the current graph.

    alpha/gamma return a length-N vector over existing nodes.  beta returns
    the N x N product-form matrix ``P_out(v) * P_in(w)`` before the
    self-pair is discarded.
    """
    n, e = g.n_nodes, g.n_edges
    p_in = (g.in_degrees() + p.delta_in) / (e + p.delta_in * n)
    p_out = (g.out_degrees() + p.delta_out) / (e + p.delta_out * n)
    if scheme == ALPHA:
        return p_in
    if scheme == GAMMA:
        return p_out
    if scheme == BETA:
        return np.outer(p_out, p_in)
    raise ValueError(f"unknown scheme {scheme!r}")


def _draw_fast(rng, endpoints, n, delta):
    # (deg(w) + delta) / (e + delta*n) is a two-part mixture: the endpoint of a
    # uniformly chosen edge, or a uniformly chosen node.
    e = len(endpoints)
    total = e + delta * n
    u, v = rng.random(2)
    if u * total < e:
        return endpoints[min(int(v * e), e - 1)]
    return min(int(v * n), n - 1)


def _draw_scan(rng, degrees, delta):
    w = np.asarray(degrees, dtype=float) + delta
    c = np.cumsum(w)
    return int(np.searchsorted(c, rng.random() * c[-1], side="right"))


def _draw(rng, g, direction, delta, sampler):
    n = g.n_nodes
    if g.n_edges + delta * n <= 0:
        raise DegenerateGraph("all attachment weights are zero (delta = 0 and no edges)")
    if sampler == "scan":
        return _draw_scan(rng, g.in_deg if direction == "in" else g.out_deg, delta)
    return _draw_fast(rng, g.dst if direction == "in" else g.src, n, delta)


def pa_step(g: DirectedGraph, p: PaParams, rng, step: int | None = None,
            sampler: str = "fast") -> StepRecord:
    """Apply one attachment step to ``g`` in place and describe it."""
    if g.n_nodes < 1:
        raise DegenerateGraph("graph has no nodes")
    step = g.n_edges if step is None else step
    r = rng.random()
    if r < p.alpha:
        w = _draw(rng, g, "in", p.delta_in, sampler)
        v = g.add_node(step, ATTACHED)
        g.add_edge(v, w)
        return StepRecord(step, ALPHA, v, v, w)
    if r < p.alpha + p.beta:
        if g.n_nodes < 2:
            raise DegenerateGraph("beta step needs two distinct nodes")
        while True:
            v = _draw(rng, g, "out", p.delta_out, sampler)
            w = _draw(rng, g, "in", p.delta_in, sampler)
            if v != w:
                break
        g.add_edge(v, w)
        return StepRecord(step, BETA, None, v, w)
    w = _draw(rng, g, "out", p.delta_out, sampler)
    v = g.add_node(step, ATTACHED)
    g.add_edge(w, v)
    return StepRecord(step, GAMMA, v, w, v)


def evolve(g: DirectedGraph, p: PaParams, rng_seed=0, checkpoints=(), callback=None,
           sampler: str = "fast") -> EvolutionLog:
    """Run ``p.steps`` attachment steps on ``g`` in place.

    Step numbers continue from the largest appearance step already in the
    graph.  ``callback(k, g)`` is invoked after every step ``k`` (1-based
    within this run) listed in ``checkpoints``.
    """
    p.validate()
    rng = np.random.default_rng(rng_seed)
    start = (max(g.step) if g.n_nodes else 0) + 1
    log = EvolutionLog(first_step=start)
    marks = set(checkpoints)
    for k in range(p.steps):
        log.append(pa_step(g, p, rng, step=start + k, sampler=sampler))
        if callback is not None and (k + 1) in marks:
            callback(k + 1, g)
    return log
