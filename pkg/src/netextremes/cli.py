"""Command line interface.

Every subcommand reads and writes plain files (SNAP edge lists, CSV, JSON)
so pipeline stages can be run one at a time.  Exit status: 0 success,
1 usage error, 2 data error, 3 PageRank did not converge.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import warnings

import numpy as np

from . import __version__
from .attachment import PaParams, evolve
from .community import (CommunityPartition, classify_new_nodes, from_labels, louvain_directed,
                        merge_to_count)
from .errors import DataError, NoConvergenceWarning
from .evt.extremal import (discrepancy_thresholds, estimate_at, inter_exceedance_times,
                           kgaps_estimator, plateau_theta)
from .evt.graph_intervals import modified_intervals
from .evt.tail import fixed_k_estimate, select_k_bootstrap
from .experiment import ExperimentConfig, StageError, run_experiment
from .generators import BiDegreeSpec, SeedSpec, build_seed
from .graph import ingest_snap, read_nodes_csv, write_nodes_csv, write_snap
from .influence import PrParams, ScoreVector, max_linear, pagerank
from .theory import CommunityStats, predict_indices

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CONVERGENCE = 0, 1, 2, 3

log = logging.getLogger("netextremes")


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    """ArgumentParser that exits with status 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_config(path):
    if not path:
        return {}
    with open(path) as fh:
        return json.load(fh)


def _out_path(args, name):
    if not args.out:
        return None
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _emit(args, name, obj):
    """JSON (default) or single-row CSV of a flat dict, to --out or stdout."""
    path = _out_path(args, name + (".csv" if args.format == "csv" else ".json"))
    if args.format == "csv":
        rows = obj if isinstance(obj, list) else [obj]
        keys = list(dict.fromkeys(k for r in rows for k in r))
        fh = open(path, "w", newline="") if path else sys.stdout
        w = csv.DictWriter(fh, fieldnames=keys, restval="")
        w.writeheader()
        for r in rows:
            w.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v
                        for k, v in r.items()})
        if path:
            fh.close()
    else:
        text = json.dumps(obj, indent=2, default=float)
        if path:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        else:
            print(text)


def _read_graph(path, nodes_csv=None):
    ing = ingest_snap(path, preserve_ids=True)
    labels = read_nodes_csv(ing.graph, nodes_csv) if nodes_csv else None
    return ing.graph, labels


def _read_scores(path, column="score"):
    ids, vals = [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            if column not in row:
                raise UsageError(f"{path} has no column {column!r}")
            ids.append(int(row["node_id"]) if "node_id" in row else len(ids))
            vals.append(float(row[column]))
    out = np.full(max(ids) + 1 if ids else 0, np.nan)
    out[ids] = vals
    return out


def _parse_u(spec: str, values) -> float:
    """Threshold as a number or as ``qNN`` (the NN% sample quantile)."""
    if spec.lower().startswith("q"):
        q = float(spec[1:])
        return float(np.quantile(values, q / 100.0 if q > 1 else q))
    return float(spec)


def _pr_params(args, cfg):
    d = dict(cfg.get("pagerank", {}))
    for k in ("c", "tol", "max_iter", "dangling_mode"):
        v = getattr(args, k, None)
        if v is not None:
            d[k] = v
    return PrParams(**d)


# subcommands -------------------------------------------------------------

def cmd_generate_seed(args):
    cfg = _load_config(args.config)
    sg = cfg.get("seed_graph", {})
    comps = sg.get("components")
    if args.components:
        comps = []
        for part in args.components.split(","):
            n, a, b = part.split(":")
            comps.append({"n": int(n), "iota_in": float(a), "iota_out": float(b)})
    if not comps:
        raise UsageError("give --components or a config with seed_graph.components")
    seed = args.seed if args.seed is not None else cfg.get("rng_seed", 0)
    cross = args.cross_edges if args.cross_edges is not None else sg.get("cross_edges", 0)
    spec = SeedSpec(tuple(BiDegreeSpec(c["n"], c["iota_in"], c["iota_out"], seed * 1000 + i)
                          for i, c in enumerate(comps)), cross, seed)
    s = build_seed(spec)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    write_snap(s.graph, os.path.join(out, "graph.snap"))
    write_nodes_csv(s.graph, os.path.join(out, "nodes.csv"), s.labels)
    log.info("seed: %d nodes, %d edges", s.graph.n_nodes, s.graph.n_edges)
    return EXIT_OK


def cmd_ingest(args):
    ing = ingest_snap(args.input)
    g = ing.graph
    keep = None
    if args.extract == "induced":
        if args.max_nodes is None:
            raise UsageError("--extract induced needs --max-nodes")
        keep = np.arange(min(args.max_nodes, g.n_nodes))
    elif args.extract == "bfs":
        if args.root is None:
            raise UsageError("--extract bfs needs --root")
        keep = g.bfs_ball(ing.id_map[args.root], args.radius)
    orig = ing.original_ids()
    if keep is not None:
        g, old = g.induced_subgraph(keep)
        orig = orig[old]
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    write_snap(g, os.path.join(out, "graph.snap"))
    write_nodes_csv(g, os.path.join(out, "nodes.csv"))
    with open(os.path.join(out, "id_map.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node_id", "original_id"])
        w.writerows(enumerate(orig.tolist()))
    if ing.skipped_self_loops:
        print(f"skipped {ing.skipped_self_loops} self-loop edge(s)", file=sys.stderr)
    return EXIT_OK


def cmd_evolve(args):
    cfg = _load_config(args.config)
    g, labels = _read_graph(args.graph, args.nodes)
    d = dict(cfg.get("pa", {}))
    for k in ("alpha", "beta", "gamma", "delta_in", "delta_out", "steps"):
        v = getattr(args, k)
        if v is not None:
            d[k] = v
    p = PaParams(**d)
    seed = args.seed if args.seed is not None else cfg.get("rng_seed", 0)
    evo = evolve(g, p, seed)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    write_snap(g, os.path.join(out, "graph.snap"))
    if labels is not None:
        labels = np.concatenate([labels, np.full(g.n_nodes - len(labels), -1)])
    write_nodes_csv(g, os.path.join(out, "nodes.csv"), labels)
    evo.to_csv(os.path.join(out, "evolution_log.csv"), {"rng_seed": seed})
    return EXIT_OK


def _write_scores(args, sv: ScoreVector, name):
    if args.format == "json":
        _emit(args, name, {"kind": sv.kind, "iterations": sv.iterations,
                           "converged": sv.converged, "scores": sv.values.tolist()})
        return
    path = _out_path(args, name + ".csv")
    if path:
        sv.to_csv(path)
    else:
        w = csv.writer(sys.stdout)
        w.writerow(["node_id", "score"])
        for i, v in enumerate(sv.values):
            w.writerow([i, repr(float(v))])


def cmd_pagerank(args):
    g, _ = _read_graph(args.graph)
    p = _pr_params(args, _load_config(args.config))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NoConvergenceWarning)
        sv = pagerank(g, p)
    _write_scores(args, sv, "pagerank")
    if not sv.converged:
        print(f"PageRank did not converge in {sv.iterations} iterations", file=sys.stderr)
        return EXIT_CONVERGENCE
    return EXIT_OK


def cmd_mlm(args):
    g, _ = _read_graph(args.graph)
    p = _pr_params(args, _load_config(args.config))
    _write_scores(args, max_linear(g, p), "mlm")
    return EXIT_OK


def cmd_communities(args):
    g, labels = _read_graph(args.graph, args.nodes)
    seed = args.seed if args.seed is not None else 0
    if args.use_labels:
        if labels is None:
            raise UsageError("--use-labels needs --nodes with a label column")
        part = from_labels(labels[labels >= 0], g.n_nodes)
    else:
        nodes = g.seed_nodes() if args.seed_only else None
        part = louvain_directed(g, seed, nodes=nodes)
    if args.target_count:
        part = merge_to_count(part, g, args.target_count)
    if args.rank_scores:
        from .community import rank_by_tail
        sc = _read_scores(args.rank_scores)
        part = rank_by_tail(part, sc, lambda x: select_k_bootstrap(x, B=args.B, rng_seed=seed))
    path = _out_path(args, "partition.csv") or "partition.csv"
    part.to_csv(path)
    summary = {"n_communities": part.n_communities, "sizes": part.sizes().tolist(),
               "rank": part.rank.tolist()}
    if part.tail:
        summary["tail"] = [t.as_dict() for t in part.tail]
    _emit(args, "communities", summary)
    return EXIT_OK


def cmd_classify(args):
    g, _ = _read_graph(args.graph, args.nodes)
    part = CommunityPartition.from_csv(args.partition)
    cl = classify_new_nodes(g, part, None, args.direction)
    path = _out_path(args, f"classes_{args.direction}.csv") or f"classes_{args.direction}.csv"
    cl.to_csv(path)
    _emit(args, f"class_sizes_{args.direction}",
          {"direction": args.direction, "class_sizes": cl.class_sizes().tolist()})
    return EXIT_OK


def _select_nodes(values, args):
    if getattr(args, "nodes_from", None):
        ids = [int(r["node_id"]) for r in csv.DictReader(open(args.nodes_from, newline=""))
               if args.cls is None or int(r.get("class", -1)) == args.cls]
        return values[ids]
    return values[np.isfinite(values)]


def cmd_tail(args):
    x = _select_nodes(_read_scores(args.input, args.column), args)
    if args.k == "auto":
        t = select_k_bootstrap(x, B=args.B, mode=args.mode, rng_seed=args.seed or 0,
                               level=args.level)
    else:
        t = fixed_k_estimate(x, int(args.k))
    _emit(args, "tail", t.as_dict())
    return EXIT_OK


def cmd_extremal(args):
    x = _read_scores(args.input, args.column)
    est = args.estimator
    if est == "modified-intervals":
        if not args.graph:
            raise UsageError("--estimator modified-intervals needs --graph")
        g, _ = _read_graph(args.graph)
        u = _parse_u(args.u, x)
        e = modified_intervals(g, x, u, args.max_len, args.exclude_ones)
        _emit(args, "extremal", e.as_dict())
        return EXIT_OK
    x = _select_nodes(x, args)
    if est in ("intervals", "kgaps"):
        u = _parse_u(args.u, x)
        if est == "intervals":
            th = estimate_at(x, u, "intervals", exclude_ones=args.exclude_ones)
        else:
            th = kgaps_estimator(inter_exceedance_times(x, u), K=args.K)
        _emit(args, "extremal", {"theta_hat": th, "estimator": est, "threshold": u,
                                 "aggregation": "single"})
    elif est in ("intervals-dis", "kgaps-dis"):
        d = discrepancy_thresholds(x, est.split("-")[0], K=args.K,
                                   exclude_ones=args.exclude_ones)
        _emit(args, "extremal", [e.as_dict() for e in d.estimates(est.split("-")[0])])
    elif est == "plateau":
        _emit(args, "extremal", plateau_theta(x).as_dict())
    return EXIT_OK


def cmd_predict(args):
    with open(args.communities) as fh:
        comm = json.load(fh)
    with open(args.classes) as fh:
        classes = json.load(fh)
    if isinstance(comm, dict):
        comm = [{"community": k, **v} for k, v in comm.items()]
    stats = {}
    for c in comm:
        key = int(c["community"])
        theta = c.get("theta")
        stats[key] = CommunityStats(float(c["k"]), None if theta in (None, "undefined") else
                                    float(theta), bool(c.get("stationary", True)),
                                    float(c.get("max_score", np.nan)),
                                    tuple(c["ci"]) if c.get("ci") else None, str(key))
    cls_map = {int(k): [int(v) for v in vs] for k, vs in classes.items()}
    preds = predict_indices(stats, cls_map, not args.dependent, args.tie_tol)
    _emit(args, "predictions", [p.as_dict() for p in preds])
    return EXIT_OK


def cmd_run_experiment(args):
    raw = _load_config(args.config)
    if args.seed is not None:
        raw["rng_seed"] = args.seed
    cfg = ExperimentConfig.from_dict(raw)
    out = args.out or raw.get("outputs") or "results"
    bundle = run_experiment(cfg, out)
    print(json.dumps({"out": out, "config_hash": bundle.config_hash,
                      "rng_seed": bundle.rng_seed, "converged": bundle.converged}))
    return EXIT_OK if bundle.converged else EXIT_CONVERGENCE


# parser ------------------------------------------------------------------

def build_parser() -> Parser:
    common = Parser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--seed", type=int, default=None, help="rng seed")
    common.add_argument("--out", help="output directory (stdout if omitted where possible)")
    common.add_argument("--format", choices=("csv", "json"), default=None,
                        help="output format (scores default to csv, everything else to json)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = Parser(prog="netextremes", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=Parser)

    s = sub.add_parser("generate-seed", parents=[common], help="TBT seed graph")
    s.add_argument("--components", help="comma separated n:iota_in:iota_out")
    s.add_argument("--cross-edges", type=int)
    s.set_defaults(func=cmd_generate_seed)

    s = sub.add_parser("ingest", parents=[common], help="read a SNAP edge list")
    s.add_argument("--input", required=True)
    s.add_argument("--extract", choices=("full", "induced", "bfs"), default="full")
    s.add_argument("--max-nodes", type=int, help="induced: first N nodes by appearance")
    s.add_argument("--root", type=int, help="bfs: original id of the root")
    s.add_argument("--radius", type=int, default=2)
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("evolve", parents=[common], help="preferential attachment")
    s.add_argument("--graph", required=True)
    s.add_argument("--nodes", help="nodes.csv with step/origin/label")
    for k in ("alpha", "beta", "gamma", "delta_in", "delta_out"):
        s.add_argument(f"--{k.replace('_', '-')}", dest=k, type=float)
    s.add_argument("--steps", type=int)
    s.set_defaults(func=cmd_evolve)

    for name, fn in (("pagerank", cmd_pagerank), ("mlm", cmd_mlm)):
        s = sub.add_parser(name, parents=[common], help=f"{name} scores")
        s.add_argument("--graph", required=True)
        s.add_argument("--c", type=float)
        s.add_argument("--tol", type=float)
        s.add_argument("--max-iter", dest="max_iter", type=int)
        s.add_argument("--dangling", dest="dangling_mode", choices=("literal", "redistribute"))
        s.set_defaults(func=fn, default_format="csv")

    s = sub.add_parser("communities", parents=[common], help="directed Louvain partition")
    s.add_argument("--graph", required=True)
    s.add_argument("--nodes")
    s.add_argument("--use-labels", action="store_true", help="use the label column instead")
    s.add_argument("--seed-only", action="store_true", help="partition seed nodes only")
    s.add_argument("--target-count", type=int)
    s.add_argument("--rank-scores", help="scores.csv used to rank by tail index")
    s.add_argument("--B", type=int, default=500)
    s.set_defaults(func=cmd_communities)

    s = sub.add_parser("classify", parents=[common], help="encode attached nodes")
    s.add_argument("--graph", required=True)
    s.add_argument("--nodes", required=True)
    s.add_argument("--partition", required=True)
    s.add_argument("--direction", choices=("in", "out"), default="in")
    s.set_defaults(func=cmd_classify)

    def score_input(s):
        s.add_argument("--input", required=True, help="scores CSV (node_id, score)")
        s.add_argument("--column", default="score")
        s.add_argument("--nodes-from", help="CSV with node_id (and class) to restrict to")
        s.add_argument("--class", dest="cls", type=int)

    s = sub.add_parser("tail", parents=[common], help="Hill tail index")
    score_input(s)
    s.add_argument("--k", default="auto")
    s.add_argument("--B", type=int, default=500)
    s.add_argument("--mode", choices=("single", "double"), default="single")
    s.add_argument("--level", type=float, default=0.975)
    s.set_defaults(func=cmd_tail)

    s = sub.add_parser("extremal", parents=[common], help="extremal index")
    score_input(s)
    s.add_argument("--estimator", default="intervals",
                   choices=("intervals", "kgaps", "intervals-dis", "kgaps-dis", "plateau",
                            "modified-intervals"))
    s.add_argument("--graph")
    s.add_argument("--scores", dest="input_alias", help=argparse.SUPPRESS)
    s.add_argument("--u", default="q95", help="threshold value or qNN quantile")
    s.add_argument("--K", type=int, default=1)
    s.add_argument("--max-len", type=int, default=10)
    s.add_argument("--exclude-ones", action="store_true")
    s.set_defaults(func=cmd_extremal)

    s = sub.add_parser("predict", parents=[common], help="tail/extremal index predictions")
    s.add_argument("--communities", required=True)
    s.add_argument("--classes", required=True)
    s.add_argument("--dependent", action="store_true",
                   help="dominating communities failed the weak-dependence check")
    s.add_argument("--tie-tol", type=float)
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("run-experiment", parents=[common], help="full pipeline")
    s.set_defaults(func=cmd_run_experiment)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    # "--scores" is accepted as an alias of "--input" for extremal
    if argv and argv[0] == "extremal" and "--scores" in argv and "--input" not in argv:
        argv[argv.index("--scores")] = "--input"
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    if args.format is None:
        args.format = getattr(args, "default_format", "json")
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as e:
        print(f"netextremes {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as e:
        print(f"netextremes {args.command}: {e}", file=sys.stderr)
        return EXIT_DATA if isinstance(e.cause, DataError) else EXIT_USAGE
    except DataError as e:
        print(f"netextremes {args.command}: data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except (OSError, ValueError, KeyError) as e:
        print(f"netextremes {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
