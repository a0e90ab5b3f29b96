"""Config-driven pipeline: seed graph, communities, attachment, scores,
tail and extremal index estimates, predictions, and plot-ready tables."""
from __future__ import annotations

import copy
import csv
import hashlib
import json
import logging
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from .attachment import PaParams, evolve
from .community import (IN, OUT, classify_new_nodes, from_labels, louvain_directed,
                        merge_to_count, rank_by_tail, stationarity_check)
from .errors import DataError, NetExtremesError, NoConvergenceWarning
from .evt.extremal import (discrepancy_thresholds, estimate_at, plateau_theta, select_K)
from .evt.graph_intervals import modified_intervals
from .evt.tail import hill_plot, k_grid, select_k_bootstrap
from .generators import BiDegreeSpec, SeedSpec, build_seed, derived_seed
from .graph import ingest_snap
from .influence import PrParams, max_linear, pagerank
from .theory import CommunityStats, dominance_diagnostics, predict_indices, predictions_to_json

log = logging.getLogger(__name__)

DEFAULT_CONFIG = {
    "rng_seed": 0,
    "seed_graph": {
        "type": "tbt",
        "components": [
            {"n": 800, "iota_in": 3.8, "iota_out": 2.0},
            {"n": 800, "iota_in": 2.5, "iota_out": 2.5},
            {"n": 800, "iota_in": 3.0, "iota_out": 4.5},
        ],
        "cross_edges": 100,
    },
    "pa": {"alpha": 0.4, "beta": 0.2, "gamma": 0.4, "delta_in": 1.0, "delta_out": 1.0,
           "steps": 6866},
    "pagerank": {"c": 0.85, "tol": 1e-10, "max_iter": 1000, "dangling_mode": "literal"},
    "estimators": {
        "bootstrap_B": 500,
        "level": 0.975,
        "k_mode": "single",
        "u_quantiles": [0.80, 0.99, 20],
        "K_grid": [0, 1, 2, 3, 4, 5],
        "exclude_ones": False,
        "max_path_len": 6,
        "graph_u_quantile": 0.95,
        "extremal": True,
    },
    "communities": {"source": "components", "target_count": None},
    "checkpoints": 20,
    "outputs": None,
}


def deep_update(base: dict, upd: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in upd.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "seed_graph":
            out[k] = deep_update(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass
class ExperimentConfig:
    raw: dict = field(default_factory=lambda: copy.deepcopy(DEFAULT_CONFIG))

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        cfg = cls(deep_update(DEFAULT_CONFIG, d))
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def validate(self):
        sg = self.raw["seed_graph"]
        sg.setdefault("type", "snap" if "path" in sg else "tbt")
        if sg.get("type") not in ("tbt", "snap"):
            raise ValueError("seed_graph.type must be 'tbt' or 'snap'")
        if sg["type"] == "snap" and "path" not in sg:
            raise ValueError("snap seed graph needs a path")
        if sg["type"] == "tbt" and "path" in sg:
            raise ValueError("give either TBT components or a snap path, not both")
        self.pa_params().validate()
        self.pr_params().validate()

    def with_seed(self, seed: int) -> "ExperimentConfig":
        raw = copy.deepcopy(self.raw)
        raw["rng_seed"] = int(seed)
        return ExperimentConfig(raw)

    @property
    def rng_seed(self) -> int:
        return int(self.raw["rng_seed"])

    def pa_params(self) -> PaParams:
        return PaParams(**self.raw["pa"])

    def pr_params(self) -> PrParams:
        return PrParams(**self.raw["pagerank"])

    @property
    def est(self) -> dict:
        return self.raw["estimators"]

    def quantile_grid(self) -> np.ndarray:
        q = self.est["u_quantiles"]
        if len(q) == 3 and float(q[2]).is_integer() and q[2] > 1:
            return np.linspace(q[0], q[1], int(q[2]))
        return np.asarray(q, dtype=float)

    def config_hash(self) -> str:
        """Short hash of the canonical config (output directory excluded)."""
        d = {k: v for k, v in self.raw.items() if k != "outputs"}
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


class StageError(NetExtremesError):
    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class ResultsBundle:
    config_hash: str
    rng_seed: int
    table1: list = field(default_factory=list)
    table2: list = field(default_factory=list)
    mean_excess: list = field(default_factory=list)
    hill_curves: list = field(default_factory=list)
    edge_ratio: list = field(default_factory=list)
    predictions: list = field(default_factory=list)
    evolution_log: object = None
    classes: dict = field(default_factory=dict)
    converged: bool = True
    failed_stage: str | None = None

    def rows(self, name):
        return getattr(self, name)

    def write(self, out_dir):
        os.makedirs(out_dir, exist_ok=True)
        stamp = {"rng_seed": self.rng_seed, "config_hash": self.config_hash}
        for name in ("table1", "table2", "mean_excess", "hill_curves", "edge_ratio"):
            _write_rows(os.path.join(out_dir, f"{name}.csv"), getattr(self, name), stamp)
        with open(os.path.join(out_dir, "predictions.json"), "w") as fh:
            json.dump({**stamp, "predictions": [p.as_dict() for p in self.predictions]},
                      fh, indent=2, default=float)
            fh.write("\n")
        if self.evolution_log is not None:
            self.evolution_log.to_csv(os.path.join(out_dir, "evolution_log.csv"), stamp)
        for direction, cl in self.classes.items():
            _write_rows(os.path.join(out_dir, f"classes_{direction}.csv"),
                        [{"node_id": int(v), "code": c, "class": int(k)}
                         for v, c, k in zip(cl.nodes, cl.code_strings(), cl.classes)], stamp)
        with open(os.path.join(out_dir, "status.json"), "w") as fh:
            json.dump({**stamp, "converged": self.converged, "failed_stage": self.failed_stage,
                       "partial": self.failed_stage is not None}, fh, indent=2)
            fh.write("\n")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def _write_rows(path, rows, stamp):
    keys = []
    for r in rows:
        for k in r:
            if k not in keys:
                keys.append(k)
    keys += [k for k in stamp if k not in keys]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys, restval="")
        w.writeheader()
        for r in rows:
            w.writerow({k: _fmt(v) for k, v in {**r, **stamp}.items()})


def _tail_row(values, cfg: ExperimentConfig, seed):
    """Bootstrap Hill estimate, or NaNs when the sample is too small."""
    try:
        t = select_k_bootstrap(values, B=cfg.est["bootstrap_B"], mode=cfg.est["k_mode"],
                               rng_seed=seed, level=cfg.est["level"])
        return t, {"alpha_hat": t.alpha_hat, "ci_lo": t.ci[0], "ci_hi": t.ci[1], "k": t.k_used}
    except DataError as e:
        return None, {"alpha_hat": np.nan, "ci_lo": np.nan, "ci_hi": np.nan, "k": "",
                      "note": type(e).__name__}


def _theta_rows(series, cfg: ExperimentConfig, entity, phase, graph=None, scores=None):
    """Extremal index of a series by every configured estimator."""
    qs = cfg.quantile_grid()
    x = np.asarray(series, dtype=float)
    rows = []

    def row(estimator, agg):
        return {"entity": entity, "phase": phase, "estimator": estimator, "aggregation": agg,
                "n": len(x)}

    def add(estimator, agg, fn):
        r = row(estimator, agg)
        try:
            th, extra = fn()
            r.update({"theta_hat": th, **extra})
        except (DataError, ValueError) as e:
            r.update({"theta_hat": np.nan, "note": type(e).__name__})
        rows.append(r)

    if len(x) < 2:
        # empty classes (e.g. no new nodes) get placeholder rows only
        for est, agg in (("plateau", "single"), ("intervals_dis", "theta1"),
                         ("kgaps_dis", "theta1"), ("kgaps_Kgrid", "theta1"),
                         ("intervals", "single")):
            rows.append({**row(est, agg), "theta_hat": np.nan, "note": "EmptySample"})
        return rows

    def plateau():
        e = plateau_theta(x)
        return e.theta_hat, {"flagged": e.flagged}

    add("plateau", "single", plateau)
    for est, K in (("intervals", 0), ("kgaps", 0)):
        try:
            d = discrepancy_thresholds(x, est, qs, K=K, exclude_ones=cfg.est["exclude_ones"])
        except (DataError, ValueError) as e:
            rows.append({**row(f"{est}_dis", "theta1"), "theta_hat": np.nan,
                         "note": type(e).__name__})
            continue
        for agg, th in (("theta1", d.theta1), ("theta2", d.theta2)):
            rows.append({**row(f"{est}_dis", agg), "theta_hat": th, "flagged": d.fallback,
                         "n_accepted": int(d.accepted.sum())})

    def kgrid():
        K, d = select_K(x, qs, cfg.est["K_grid"])
        return d.theta1, {"K": K, "flagged": d.fallback}

    add("kgaps_Kgrid", "theta1", kgrid)

    def single():
        u = np.quantile(x, 0.95)
        return estimate_at(x, u, "intervals"), {"threshold": u}

    add("intervals", "single", single)
    if graph is not None:
        def modint():
            u = float(np.quantile(scores, cfg.est["graph_u_quantile"]))
            e = modified_intervals(graph, scores, u, cfg.est["max_path_len"])
            return e.theta_hat, {"threshold": u, "truncated": e.extra["truncated"],
                                 "n_times": e.extra["n_times"]}
        add("modified_intervals", "single", modint)
    return rows


class _Stage:
    def __init__(self, bundle):
        self.bundle = bundle
        self.name = None

    def __call__(self, name):
        self.name = name
        log.info("stage %s", name)
        return self

    def __enter__(self):
        return self

    def __exit__(self, et, ev, tb):
        if ev is not None and not isinstance(ev, StageError) and isinstance(ev, Exception):
            self.bundle.failed_stage = self.name
            raise StageError(self.name, ev) from ev
        return False


def _scores(g, cfg, bundle):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NoConvergenceWarning)
        pr = pagerank(g, cfg.pr_params())
    if caught or not pr.converged:
        bundle.converged = False
    return pr


def build_seed_graph(cfg: ExperimentConfig):
    """Seed graph and (for TBT seeds) component labels."""
    sg = cfg.raw["seed_graph"]
    if sg["type"] == "tbt":
        comps = tuple(BiDegreeSpec(c["n"], c["iota_in"], c["iota_out"],
                                   derived_seed(cfg.rng_seed, 100 + i))
                      for i, c in enumerate(sg["components"]))
        seed = build_seed(SeedSpec(comps, sg.get("cross_edges", 0), derived_seed(cfg.rng_seed, 1)))
        return seed.graph, seed.labels
    ing = ingest_snap(sg["path"])
    g = ing.graph
    mode = sg.get("extraction", "full")
    if mode == "induced":
        nodes = sg.get("nodes")
        if nodes is None:
            nodes = np.arange(min(int(sg.get("max_nodes", g.n_nodes)), g.n_nodes))
        else:
            nodes = [ing.id_map[int(v)] for v in nodes]
        g, _ = g.induced_subgraph(nodes)
    elif mode == "bfs":
        root = ing.id_map[int(sg.get("root", ing.original_ids()[0]))]
        g, _ = g.induced_subgraph(g.bfs_ball(root, int(sg.get("radius", 2))))
    elif mode != "full":
        raise ValueError(f"unknown extraction {mode!r}")
    return g, None


def run_experiment(config: ExperimentConfig | dict, out_dir=None) -> ResultsBundle:
    """Run the full pipeline; writes the bundle when ``out_dir`` is given.

    On a stage failure the partial bundle is written (flagged in
    ``status.json``) and :class:`StageError` is raised.
    """
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_dict(config)
    out_dir = out_dir or cfg.raw.get("outputs")
    seed = cfg.rng_seed
    bundle = ResultsBundle(cfg.config_hash(), seed)
    stage = _Stage(bundle)
    try:
        _pipeline(cfg, bundle, stage)
    except StageError:
        if out_dir:
            bundle.write(out_dir)
        raise
    if out_dir:
        bundle.write(out_dir)
    return bundle


def _pipeline(cfg: ExperimentConfig, bundle: ResultsBundle, stage):
    seed = cfg.rng_seed
    est = cfg.est
    with stage("seed"):
        g, labels = build_seed_graph(cfg)
        n_seed = g.n_nodes
        e_init = g.n_edges

    with stage("communities"):
        cc = cfg.raw["communities"]
        if labels is not None and cc.get("source", "components") == "components":
            part = from_labels(labels)
        else:
            part = louvain_directed(g, derived_seed(seed, 3))
        if cc.get("target_count"):
            part = merge_to_count(part, g, int(cc["target_count"]))

    with stage("score_seed"):
        pr0 = _scores(g, cfg, bundle)

    with stage("stationarity"):
        stationary = {}
        for c in range(part.n_communities):
            vals = pr0.values[part.members(c)]
            try:
                chk = stationarity_check(vals)
                stationary[c] = chk.passed
                for u, e in zip(chk.curve.thresholds, chk.curve.values):
                    bundle.mean_excess.append({"entity": f"community_{c}", "phase": "before",
                                               "threshold": u, "mean_excess": e,
                                               "r2": chk.r2, "passed": chk.passed})
            except DataError:
                stationary[c] = False

    with stage("tail_ranking"):
        part = rank_by_tail(part, pr0.values, lambda x: select_k_bootstrap(
            x, B=est["bootstrap_B"], mode=est["k_mode"], rng_seed=derived_seed(seed, 4),
            level=est["level"]))
        for c in range(part.n_communities):
            vals = pr0.values[part.members(c)]
            ks, al = hill_plot(vals, k_grid(len(vals), size=40, k_min=2, frac=0.9))
            for k, a in zip(ks, al):
                bundle.hill_curves.append({"entity": f"community_{c}", "phase": "before",
                                           "k": int(k), "alpha_hat": a})

    pa = cfg.pa_params()
    n_cp = int(cfg.raw.get("checkpoints", 20))
    marks = sorted(set(int(round(i * pa.steps / n_cp)) for i in range(1, n_cp + 1)) - {0})

    def curve_point(k, graph):
        pr = _scores(graph, cfg, bundle)
        ratio = (graph.n_edges - e_init) / e_init
        for c in range(part.n_communities):
            t, row = _tail_row(pr.values[part.members(c)], cfg, derived_seed(seed, 5))
            bundle.edge_ratio.append({"entity": f"community_{c}", "rank": int(part.rank[c]),
                                      "step": k, "edges_added": graph.n_edges - e_init,
                                      "edge_ratio": ratio, **row})

    with stage("evolve"):
        g0 = g.copy()
        curve_point(0, g)
        evo = evolve(g, pa, derived_seed(seed, 6), checkpoints=marks, callback=curve_point)
        bundle.evolution_log = evo

    with stage("classify"):
        cls_in = classify_new_nodes(g, part, evo, IN)
        cls_out = classify_new_nodes(g, part, evo, OUT)
        bundle.classes = {IN: cls_in, OUT: cls_out}

    with stage("score_final"):
        pr1 = _scores(g, cfg, bundle)
        # uniform q makes the max-recursion constant; personalise by PageRank instead
        mlm1 = max_linear(g, cfg.pr_params(), q=pr1.values)

    with stage("estimate"):
        tails = {}
        for c in range(part.n_communities):
            members = part.members(c)
            for phase, vals in (("before", pr0.values[members]), ("after", pr1.values[members])):
                t, row = _tail_row(vals, cfg, derived_seed(seed, 7))
                tails[(c, phase)] = t
                bundle.table1.append({"entity": f"community_{c}", "kind": "community",
                                      "rank": int(part.rank[c]), "direction": "",
                                      "phase": phase, "n": len(members), "score": "pagerank",
                                      **row})
        for direction, cl in bundle.classes.items():
            for k in range(1, part.n_communities + 2):
                nodes = cl.members(k)
                for score, sv in (("pagerank", pr1), ("mlm", mlm1)):
                    t, row = _tail_row(sv.values[nodes], cfg, derived_seed(seed, 8))
                    bundle.table1.append({"entity": f"class_{k}", "kind": "class", "rank": k,
                                          "direction": direction, "phase": "after",
                                          "n": len(nodes), "score": score, **row})
        if est.get("extremal", True):
            for c in range(part.n_communities):
                members = part.members(c)
                for phase, graph, sc in (("before", g0, pr0.values), ("after", g, pr1.values)):
                    sub, _ = graph.induced_subgraph(members)
                    bundle.table2 += _theta_rows(sc[members], cfg, f"community_{c}", phase,
                                                 sub, sc[members])
            for direction, cl in bundle.classes.items():
                for k in range(1, part.n_communities + 2):
                    nodes = cl.members(k)
                    bundle.table2 += _theta_rows(pr1.values[nodes], cfg, f"class_{k}_{direction}",
                                                 "after")
                    bundle.table2 += _theta_rows(mlm1.values[nodes], cfg,
                                                 f"class_{k}_{direction}_mlm", "after")

    with stage("predict"):
        stats = {}
        for c in range(part.n_communities):
            t = tails[(c, "before")]
            theta = _theta_of(bundle.table2, f"community_{c}")
            stats[int(part.rank[c])] = CommunityStats(
                t.alpha_hat if t else np.inf, theta, stationary[c],
                float(pr0.values[part.members(c)].max()), t.ci if t else None, f"community_{c}")
        classes = {}
        for k in range(1, part.n_communities + 1):
            codes = bundle.classes[IN].codes[bundle.classes[IN].classes == k]
            linked = sorted(set(int(d) for d in np.unique(codes) if d > 0))
            if linked:
                classes[k] = linked
        indep = {}
        for p in predict_indices(stats, classes, True):
            if len(p.dominating_set) > 1:
                cols = [pr0.values[part.members(part.by_rank()[r - 1])]
                        for r in p.dominating_set]
                indep[p.cls] = dominance_diagnostics(cols).a2_pass
        bundle.predictions = predict_indices(stats, classes, indep)
        bundle.predictions_json = predictions_to_json(bundle.predictions)
    bundle.n_seed = n_seed
    bundle.partition = part
    bundle.graph = g
    return bundle


def _theta_of(rows, entity):
    for r in rows:
        if (r["entity"] == entity and r["phase"] == "before" and r["estimator"] == "intervals_dis"
                and r["aggregation"] == "theta1" and np.isfinite(r.get("theta_hat", np.nan))):
            return float(r["theta_hat"])
    return None
