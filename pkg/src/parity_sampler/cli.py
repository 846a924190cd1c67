"""Command-line front end: ``parity-sampler {sample,verify,lattice,enumerate,bench}``."""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, lattice, oracle, suite
from ._jit import backend_name
from .corpus import named_graph
from .even import EvenWeights, even_sampler
from .graph import Graph, GraphError, odd_vertex_set, read_edge_list
from .rc import CftpSource, RCSpec, depth_histogram

EXACT_CHECKS = ("high-temp", "cyclic", "converse", "forward")


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def config_hash(args: argparse.Namespace) -> str:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("output", "func")}
    blob = json.dumps(cfg, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def meta(args: argparse.Namespace) -> dict:
    command = args.command
    if getattr(args, "lattice_command", None):
        command += " " + args.lattice_command
    return {"version": __version__, "seed": getattr(args, "seed", None),
            "config_hash": config_hash(args), "command": command}


def emit(text: str, args: argparse.Namespace) -> None:
    if getattr(args, "output", None):
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def dump_json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def load_graph(args: argparse.Namespace) -> tuple[str, Graph]:
    if getattr(args, "graph_file", None):
        return str(args.graph_file), read_edge_list(args.graph_file, getattr(args, "dual_map_file", None))
    return args.graph, named_graph(args.graph)


def load_pe(path: str, g: Graph) -> tuple[float, ...]:
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        data = data.get("p", data.get("per_edge_p"))
    if not isinstance(data, list) or len(data) != g.n_edges:
        raise ValueError(f"{path}: expected a list of {g.n_edges} edge probabilities")
    return tuple(float(x) for x in data)


# --- sample ---------------------------------------------------------------------

def cmd_sample(args) -> int:
    name, g = load_graph(args)
    if args.pe_file:
        p = EvenWeights(g, load_pe(args.pe_file, g))
        p_out = list(p.per_edge_p)
    else:
        p = args.p
        p_out = p
    draw, src = even_sampler(g, p, args.backend)
    rng = np.random.default_rng(args.seed)
    samples = []
    for _ in range(args.n):
        s = draw(rng)
        if odd_vertex_set(g, s):
            raise AssertionError("sampler produced a non-even set")
        samples.append(s.hex())
    depths = list(src.depths) if isinstance(src, CftpSource) else []
    head = meta(args)
    head.update({"graph": name, "vertices": g.n_vertices, "edges": g.n_edges, "p": p_out,
                 "backend": args.backend, "n": args.n})
    if args.format == "json":
        emit(dump_json({"meta": head, "samples": samples, "cftp_depths": depths}), args)
    else:
        lines = [f"# {k}: {json.dumps(v)}" for k, v in sorted(head.items())]
        lines.append("index,config,cftp_depth")
        for i, s in enumerate(samples):
            lines.append(f"{i},{s},{depths[i] if i < len(depths) else ''}")
        emit("\n".join(lines) + "\n", args)
    return 0


# --- verify ---------------------------------------------------------------------

def _verify_graphs(args) -> dict[str, Graph]:
    if args.graph_file:
        name, g = load_graph(args)
        return {name: g}
    if args.graph:
        return {n: named_graph(n) for n in args.graph.split(",")}
    return suite.corpus_graphs()


def cmd_verify(args) -> int:
    only = args.only
    results: list[dict] = []
    summary: dict[str, dict] = {}
    checks = EXACT_CHECKS if only is None else (only,)
    for check in checks:
        if check in EXACT_CHECKS:
            graphs = _verify_graphs(args)
            kw = {}
            if check == "high-temp" and args.beta:
                kw["betas"] = _floats(args.beta)
            if args.p:
                key = {"cyclic": "cyclic_ps", "converse": "converse_ps", "forward": "forward_ps"}.get(check)
                if key:
                    kw[key] = _floats(args.p)
            recs = suite.exact_identity_suite(graphs, only=check, **kw)
            worst = max((r["deviation"] for r in recs), default=0.0)
            summary[check] = {"items": len(recs), "max_deviation": worst,
                              "tolerance": suite.EXACT_TOL, "passed": worst < suite.EXACT_TOL}
        elif check == "bracket":
            recs = suite.bracket_suite(_verify_graphs(args), trajectories=args.trajectories, seed=args.seed)
            bad = sum(r["violations"] + r["singleton_mismatch"] for r in recs)
            summary[check] = {"items": len(recs), "sandwiches": sum(r["sandwiches"] for r in recs),
                              "violations": bad, "passed": bad == 0}
        elif check == "cftp":
            graphs = _verify_graphs(args) if (args.graph or args.graph_file) else {"path-3": named_graph("path-3")}
            w = _ints(args.w) if args.w else None
            recs = [suite.cftp_suite(g, r, w, args.n, args.seed, name)
                    for name, g in graphs.items() for r in _floats(args.r)]
            ok = all(r["failed"] == 0 and r["tv"] < 0.01 and r["pvalue"] > 1e-4 for r in recs)
            summary[check] = {"items": len(recs), "passed": ok}
        elif check == "sampler":
            graphs = _verify_graphs(args) if (args.graph or args.graph_file) else {"k4": named_graph("k4")}
            ps = _floats(args.p) if args.p else [0.1, 0.3, 0.5, 0.7, 0.9]
            recs = [suite.sampler_suite(g, p, args.n, args.seed, args.backend, name)
                    for name, g in graphs.items() for p in ps]
            ok = all(r["odd_samples"] == 0 and r["tv"] < 0.01 and r["pvalue"] > 1e-4 for r in recs)
            summary[check] = {"items": len(recs), "passed": ok}
        else:  # pragma: no cover - argparse restricts choices
            raise ValueError(check)
        results += recs
    passed = all(s["passed"] for s in summary.values())
    emit(dump_json({"meta": meta(args), "summary": summary, "passed": passed, "results": results}), args)
    return 0 if passed else 1


# --- lattice --------------------------------------------------------------------

def cmd_lattice_scan(args) -> int:
    if args.config:
        cfg = json.loads(Path(args.config).read_text())
        args.sizes = cfg.get("sizes", args.sizes)
        args.p = cfg.get("p_grid", args.p)
        args.reps = int(cfg.get("replicates", args.reps))
        args.seed = int(cfg.get("seed", args.seed))
        args.free = cfg.get("lattice", "square-wired") == "square-free"
    sizes = lattice.parse_sizes(args.sizes if isinstance(args.sizes, str) else ",".join(args.sizes))
    grid = lattice.parse_p_grid(args.p) if isinstance(args.p, str) else [float(x) for x in args.p]
    rows = lattice.phase_scan(sizes, grid, args.reps, args.seed, wired=not args.free,
                              mark_pc=args.mark_pc, timing=args.timing)
    m = meta(args)
    header = f"parity-sampler {m['version']} config_hash={m['config_hash']} seed={m['seed']}"
    emit(lattice.rows_to_csv(rows, header), args)
    return 0


def cmd_lattice_crossing(args) -> int:
    rng = np.random.default_rng(args.seed)
    est = lattice.rhombus_crossing(args.n, args.beta, args.reps, rng)
    out = {"meta": meta(args), "n": args.n, "beta": args.beta, "replicates": est.replicates,
           "hits": est.hits, "estimate": est.estimate, "stderr": est.stderr, "target": 0.5,
           "mean_cftp_depth": est.mean_depth}
    emit(dump_json(out), args)
    return 0


# --- enumerate / bench ----------------------------------------------------------

def cmd_enumerate(args) -> int:
    name, g = load_graph(args)
    if args.measure == "even":
        weights = load_pe(args.pe_file, g) if args.pe_file else args.p
        dist = oracle.enumerate_even(g, weights)
    elif args.measure == "rc":
        w = _ints(args.w) if args.w else None
        dist = oracle.enumerate_rc(RCSpec.uniform(g, args.r, w))
    else:
        dist = oracle.enumerate_ising(g, args.beta)
    head = meta(args)
    head.update({"graph": name, "measure": args.measure, "normalizer": dist.normalizer})
    lines = [f"# {k}: {json.dumps(v)}" for k, v in sorted(head.items())]
    emit("\n".join(lines) + "\n" + dist.to_csv(), args)
    return 0


def cmd_bench(args) -> int:
    name, g = load_graph(args)
    spec = RCSpec.uniform(g, args.r)
    src = CftpSource(spec)
    rng = np.random.default_rng(args.seed)
    src(rng)  # compile outside the timed region
    src.depths.clear()
    t0 = time.perf_counter()
    for _ in range(args.n):
        src(rng)
    wall = time.perf_counter() - t0
    out = {"graph": name, "r": args.r, "n": args.n, "backend": backend_name(),
           "wall_s": wall, "samples_per_s": args.n / wall if wall > 0 else None,
           "depth_histogram": {str(k): v for k, v in depth_histogram(src.depths).items()}}
    emit(dump_json(out), args)
    return 0


# --- parser ---------------------------------------------------------------------

def _graph_args(p: argparse.ArgumentParser, required: bool = True, default: str | None = None):
    grp = p.add_mutually_exclusive_group(required=required and default is None)
    grp.add_argument("--graph", default=default, help="named graph, e.g. k4, cycle-5, wired-grid-2-2")
    grp.add_argument("--graph-file", help="edge-list file: 'V E' then one 'u v' per line")
    p.add_argument("--dual-map-file", help="optional companion file of 'edge dual_edge' lines")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="parity-sampler", description=__doc__)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw even subgraphs")
    _graph_args(p)
    pg = p.add_mutually_exclusive_group(required=True)
    pg.add_argument("--p", type=float, help="common edge probability")
    pg.add_argument("--pe-file", help="JSON list of per-edge probabilities")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--backend", choices=["cftp", "exact"], default="cftp")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--output")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("verify", help="check identities and sampler laws against enumeration")
    p.add_argument("--only", choices=list(EXACT_CHECKS) + ["bracket", "cftp", "sampler"])
    p.add_argument("--graph", help="comma-separated graph names (default: the small corpus)")
    p.add_argument("--graph-file")
    p.add_argument("--dual-map-file")
    p.add_argument("--beta", help="comma-separated inverse temperatures")
    p.add_argument("--p", help="comma-separated edge probabilities")
    p.add_argument("--r", default="0.5", help="comma-separated random-cluster weights (cftp)")
    p.add_argument("--w", help="comma-separated conditioning vertices (cftp)")
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--trajectories", type=int, default=1000)
    p.add_argument("--backend", choices=["cftp", "exact"], default="cftp")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("lattice", help="square-lattice and rhombus experiments")
    lsub = p.add_subparsers(dest="lattice_command", required=True)
    q = lsub.add_parser("scan", help="face statistics across a p grid (CSV)")
    q.add_argument("--sizes", default="16x16", help="comma list of AxB cell counts, e.g. 8x8,16x16")
    q.add_argument("--p", default="0.05:0.5:0.05", help="start:stop:step (inclusive) or comma list")
    q.add_argument("--reps", type=int, default=10)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--free", action="store_true", help="free boundary instead of wired")
    q.add_argument("--mark-pc", action="store_true", help="add a p_c column")
    q.add_argument("--timing", action="store_true", help="record wall_ms (breaks byte-identical reruns)")
    q.add_argument("--config", help='JSON {"lattice", "sizes": ["16x16"], "p_grid", "replicates", "seed"}')
    q.add_argument("--output")
    q.set_defaults(func=cmd_lattice_scan)
    q = lsub.add_parser("crossing", help="left-right + crossing of the triangular rhombus")
    q.add_argument("--n", type=int, default=8)
    q.add_argument("--beta", type=float, default=0.2)
    q.add_argument("--reps", type=int, default=10_000)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--output")
    q.set_defaults(func=cmd_lattice_crossing)

    p = sub.add_parser("enumerate", help="exact law as CSV (config hex, probability)")
    _graph_args(p)
    p.add_argument("--measure", choices=["even", "rc", "ising"], default="even")
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--pe-file")
    p.add_argument("--r", type=float, default=0.5)
    p.add_argument("--w")
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--output")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("bench", help="time CFTP draws with the active kernel backend")
    _graph_args(p, default="k4")
    p.add_argument("--r", type=float, default=0.6)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, GraphError, OSError, oracle.EnumerationCapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
