"""Command-line front end.

Subcommands: ``thresholds`` (critical densities / core predictions),
``gen`` (write a random instance file), ``strip`` (run the queue engine),
``solve`` (GF(2) elimination), ``clusters`` (solution-space geometry of a
small instance), ``experiment`` (seeded ensembles) and ``bench`` (compare
the compiled and pure kernels).
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import thresholds as th
from .instances import gen_ap_instance, gen_uniform, read_instance, write_instance
from .stripping import last_free, parallel_strip, slow_strip
from .gf2 import Gf2System, eliminate
from .kernels import BACKEND, get_backend


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def cmd_thresholds(args) -> int:
    cp = th.critical_point(args.r, args.k)
    c = args.c if args.c is not None else cp.c_crit
    pred = th.core_prediction(args.r, args.k, c)
    print(
        ",".join(
            _fmt(x)
            for x in (cp.c_crit, cp.mu_crit, pred.mu, pred.alpha, pred.beta, pred.zeta)
        )
    )
    return 0


def cmd_gen(args) -> int:
    m = args.m if args.m is not None else int(round(args.c * args.n))
    if args.model == "uniform":
        inst = gen_uniform(args.n, m, args.r, args.seed)
    else:
        inst = gen_ap_instance(
            args.n, m, args.r, args.seed, condition_simple=(args.model == "ap-simple")
        )
    write_instance(inst, args.out)
    print(f"wrote {args.out}: n={inst.n} m={inst.m} r={inst.r} model={inst.model_tag}")
    return 0


def cmd_strip(args) -> int:
    inst = read_instance(args.infile)
    h = inst.hypergraph()
    st = slow_strip(h, args.k)
    pt = parallel_strip(h, args.k)
    core = st.core_vertices()
    print(
        f"n={h.n} m={h.m} k={args.k} core_vertices={core.size} "
        f"core_edges={st.core_edges().size} rounds={pt.i_max} steps={st.n_steps} "
        f"free={st.free.size}"
    )
    if st.free.size:
        i_star, u_star = last_free(st)
        print(f"i_star={i_star} u_star={u_star}")
    if args.emit_levels:
        with open(args.emit_levels, "w") as fh:
            fh.write("vertex,level,front_step\n")
            for v in range(h.n):
                fh.write(f"{v},{st.level[v]},{st.front_step[v]}\n")
        print(f"levels -> {args.emit_levels}")
    if args.emit_digraph:
        with open(args.emit_digraph, "w") as fh:
            for u, v in zip(st.arc_src, st.arc_dst):
                fh.write(f"{u} {v}\n")
        print(f"digraph -> {args.emit_digraph}")
    return 0


def cmd_solve(args) -> int:
    inst = read_instance(args.infile)
    res = eliminate(Gf2System.from_instance(inst))
    print("SAT" if res.satisfiable else "UNSAT")
    print(f"rank={res.rank} nullity={res.nullity}")
    if res.satisfiable and inst.n <= args.all_if_small:
        from .clusters import enumerate_solutions

        for row in enumerate_solutions(inst, limit=1 << min(res.nullity, 30)):
            print("".join(str(int(b)) for b in row))
    return 0


def cmd_clusters(args) -> int:
    from .clusters import analyze_clusters

    inst = read_instance(args.infile)
    info = analyze_clusters(inst, max_solutions=args.max_solutions)
    print(
        "solutions={solutions} free={free_count} clusters={cluster_count} "
        "cluster_size={cluster_size} f_within={f_within} g_between={g_between} "
        "core_vertices={core_vertices} cycle_mass={cycle_mass}".format(
            **{k: ("NA" if v is None else v) for k, v in info.items()}
        )
    )
    return 0


def cmd_experiment(args) -> int:
    from .experiments import (
        parse_config,
        run_ensemble,
        write_dat_files,
        write_summary_json,
        write_trials_csv,
    )

    cfg = parse_config(args.config)
    os.makedirs(args.out_dir, exist_ok=True)
    records, summary = run_ensemble(cfg)
    csv_path = os.path.join(args.out_dir, "trials.csv")
    json_path = os.path.join(args.out_dir, "summary.json")
    write_trials_csv(records, csv_path)
    write_summary_json(summary, json_path)
    print(f"wrote {csv_path} ({len(records)} trials) and {json_path}")
    if args.emit_dat:
        for p in write_dat_files(records, args.out_dir):
            print(f"wrote {p}")
    failures = summary.get("failures", 0)
    if failures:
        print(f"WARNING: {failures} failed trials", file=sys.stderr)
    return 0


def cmd_bench(args) -> int:
    from .instances import gen_uniform
    from .stripping import reach_sizes, slow_strip, parallel_strip
    import xorlab.stripping as stripping_mod

    inst = gen_uniform(args.n, int(round(args.c * args.n)), args.r, args.seed)
    h = inst.hypergraph()
    names = ["cython", "python"] if BACKEND == "cython" else ["python"]
    print(f"n={args.n} m={h.m} r={args.r} active_backend={BACKEND}")
    print(f"{'backend':<8} {'slow_strip':>12} {'parallel':>12} {'reach':>12}")
    for name in names:
        try:
            backend = get_backend(name)
        except ImportError:
            continue
        orig = stripping_mod.kernels
        stripping_mod.kernels = backend
        try:
            times = []
            t0 = time.perf_counter()
            st = slow_strip(h, args.k)
            times.append(time.perf_counter() - t0)
            t0 = time.perf_counter()
            parallel_strip(h, args.k)
            times.append(time.perf_counter() - t0)
            t0 = time.perf_counter()
            reach_sizes(st)
            times.append(time.perf_counter() - t0)
        finally:
            stripping_mod.kernels = orig
        print(
            f"{name:<8} {times[0] * 1e3:>10.1f}ms {times[1] * 1e3:>10.1f}ms "
            f"{times[2] * 1e3:>10.1f}ms"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="xorlab")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("thresholds", help="critical density and core predictions")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--c", type=float, default=None)
    p.set_defaults(fn=cmd_thresholds)

    p = sub.add_parser("gen", help="write a random instance file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--r", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model", choices=["uniform", "ap", "ap-simple"], default="uniform")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("strip", help="run the stripping engines on a file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--emit-levels", default=None)
    p.add_argument("--emit-digraph", default=None)
    p.set_defaults(fn=cmd_strip)

    p = sub.add_parser("solve", help="GF(2) elimination")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--all-if-small", type=int, default=0)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("clusters", help="solution-space geometry (small instances)")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--max-solutions", type=int, default=65536)
    p.set_defaults(fn=cmd_clusters)

    p = sub.add_parser("experiment", help="run a seeded ensemble from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--emit-dat", action="store_true")
    p.set_defaults(fn=cmd_experiment)

    p = sub.add_parser("bench", help="compare compiled and pure kernels")
    p.add_argument("--n", type=int, default=1 << 16)
    p.add_argument("--c", type=float, default=0.9)
    p.add_argument("--r", type=int, default=3)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--seed", type=int, default=1)
    p.set_defaults(fn=cmd_bench)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "gen" and args.m is None and args.c is None:
        print("gen: need --m or --c", file=sys.stderr)
        return 2
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
