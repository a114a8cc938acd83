"""Seeded measurement ensembles over random instances.

One trial = generate, strip with both engines, and record core counts, the
degree-2 contraction ratio, flippable-cycle mass, round counts, reachability
depth and the structure around the last free vertex.  Trials are
deterministic given (base seed, n, trial index) no matter how many workers
run them.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from . import thresholds
from .clusters import build_aux_graph, aux_blocks
from .instances import derive_seed, gen_ap, gen_uniform, gen_ap_instance, project
from .stripping import parallel_strip, reach_sizes, slow_strip

CSV_COLUMNS = [
    "n", "c", "seed", "Q", "core_edges", "Q2", "Lambda", "flip_mass",
    "flip_disjoint", "i_max", "max_reach", "max_reach_free", "i_star",
    "gap", "t_path_ok", "runtime_ms",
]

ALL_MEASUREMENTS = frozenset({"core", "flip", "reach", "gap"})

REACH_CAP = 1_000_000  # visit budget for the last-free-vertex diagnostics


@dataclass(frozen=True)
class ExperimentConfig:
    r: int = 3
    k: int = 2
    model: str = "uniform"  # uniform | ap | ap-simple
    density: str = "absolute"  # absolute | offset (c = c_crit +/- n^-delta)
    c: float | None = None
    delta: float | None = None
    sign: int = 1
    n_list: tuple[int, ...] = ()
    trials: int = 0
    base_seed: int = 0
    measurements: frozenset = ALL_MEASUREMENTS
    workers: int = 1

    def __post_init__(self):
        if self.density == "offset":
            if self.delta is None or not (0.0 < self.delta < 0.5):
                raise ValueError("offset density needs delta in (0, 1/2)")
            if self.sign not in (1, -1):
                raise ValueError("offset sign must be +1 or -1")
        elif self.density == "absolute":
            if self.c is None or self.c <= 0:
                raise ValueError("absolute density needs c > 0")
        else:
            raise ValueError(f"unknown density mode {self.density!r}")
        if self.model not in ("uniform", "ap", "ap-simple"):
            raise ValueError(f"unknown model {self.model!r}")
        if not self.measurements <= ALL_MEASUREMENTS:
            raise ValueError(f"unknown measurements {set(self.measurements) - ALL_MEASUREMENTS}")

    def density_at(self, n: int) -> float:
        if self.density == "absolute":
            return float(self.c)
        cp = thresholds.critical_point(self.r, self.k)
        return cp.c_crit + self.sign * n ** (-self.delta)


def parse_config(path) -> ExperimentConfig:
    """Flat ``key = value`` file; '#' starts a comment."""
    raw: dict[str, str] = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {line!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            raw[key] = val
    kw: dict = {}
    if "r" in raw:
        kw["r"] = int(raw["r"])
    if "k" in raw:
        kw["k"] = int(raw["k"])
    if "model" in raw:
        kw["model"] = raw["model"]
    if "density" in raw:
        kw["density"] = raw["density"]
    if "c" in raw:
        kw["c"] = float(raw["c"])
    if "delta" in raw:
        kw["delta"] = float(raw["delta"])
    if "sign" in raw:
        kw["sign"] = 1 if raw["sign"] in ("+", "+1", "1") else -1
    if "n" in raw:
        kw["n_list"] = tuple(int(s) for s in raw["n"].replace(",", " ").split())
    if "trials" in raw:
        kw["trials"] = int(raw["trials"])
    if "base_seed" in raw:
        kw["base_seed"] = int(raw["base_seed"])
    if "measurements" in raw:
        val = raw["measurements"].strip()
        kw["measurements"] = (
            ALL_MEASUREMENTS
            if val == "all"
            else frozenset(s.strip() for s in val.replace(",", " ").split())
        )
    if "workers" in raw:
        kw["workers"] = int(raw["workers"])
    return ExperimentConfig(**kw)


@dataclass
class TrialRecord:
    n: int
    c: float
    seed: int
    Q: int = -1
    core_edges: int = -1
    Q2: int = -1
    Lambda: int = -1
    flip_mass: int = -1
    flip_disjoint: bool = False
    i_max: int = -1
    max_reach: int = -1
    max_reach_free: int = -1
    i_star: int = -1
    gap: int = -1
    t_path_ok: bool = False
    runtime_ms: int = -1
    # diagnostics beyond the CSV schema
    ok: bool = True
    error: str = ""
    max_degree: int = -1
    degree_hist: dict = field(default_factory=dict)
    contraction_frac: float = float("nan")
    unique_in_window: bool = False
    chi_path_ok: bool | None = None
    path_len: int = -1

    def csv_row(self) -> list:
        return [
            self.n, f"{self.c:.10g}", self.seed, self.Q, self.core_edges,
            self.Q2, self.Lambda, self.flip_mass, int(self.flip_disjoint),
            self.i_max, self.max_reach, self.max_reach_free, self.i_star,
            self.gap, int(self.t_path_ok), self.runtime_ms,
        ]


def _make_hypergraph(model: str, n: int, m: int, r: int, seed: int):
    if model == "uniform":
        return gen_uniform(n, m, r, seed).hypergraph()
    if model == "ap":
        return project(gen_ap(n, m, r, seed))
    if model == "ap-simple":
        return gen_ap_instance(n, m, r, seed, condition_simple=True).hypergraph()
    raise ValueError(f"unknown model {model!r}")


def _bounded_closure(n, ptr, dst, start, cap):
    """Closure from start following the CSR arcs; None when cap is hit."""
    seen = {int(start)}
    stack = [int(start)]
    while stack:
        x = stack.pop()
        for y in dst[ptr[x] : ptr[x + 1]]:
            y = int(y)
            if y not in seen:
                if len(seen) >= cap:
                    return None
                seen.add(y)
                stack.append(y)
    return seen


def _cycle_tokens(h, st):
    """Map each core vertex on a flippable cycle to the minimal vertex of its
    block (the designated free variable), plus mass/disjoint flags."""
    aux = build_aux_graph(h, core=st)
    token: dict[int, int] = {}
    disjoint = True
    for blk in aux_blocks(aux):
        if len(blk) < 2:
            continue
        nodes = set()
        verts = []
        for lid in blk:
            v, a, b = aux.links[lid]
            verts.append(v)
            nodes.update((a, b))
        if len(blk) != len(nodes):
            disjoint = False
        rep = min(verts)
        for v in verts:
            token[v] = rep
    return token, disjoint


def _chi_on_path(h, st, path, u_star, cycle_token, cap=REACH_CAP):
    """chi(v) for each path vertex via memoised recursion over the consumed
    equations; core vertices contribute nothing (off cycles) or their cycle
    token.  Returns None when the recursion exceeds the visit budget."""
    cons_edge = np.full(st.n, -1, dtype=np.int64)
    consumed = np.flatnonzero(st.edge_consumer >= 0)
    cons_edge[st.edge_consumer[consumed]] = consumed
    core = st.core_mask
    memo: dict[int, frozenset] = {}

    def resolve(v0):
        stack = [v0]
        while stack:
            v = stack[-1]
            if v in memo:
                stack.pop()
                continue
            if core[v]:
                memo[v] = frozenset({cycle_token[v]}) if v in cycle_token else frozenset()
                stack.pop()
                continue
            e = cons_edge[v]
            if e < 0:  # free vertex
                memo[v] = frozenset({v})
                stack.pop()
                continue
            ents = [int(x) for x in h.edges_array[e]]
            missing = [x for x in ents if x != v and x not in memo]
            if missing:
                if len(memo) > cap:
                    return False
                stack.extend(missing)
                continue
            acc: set = set()
            skipped = False
            for x in ents:
                if x == v and not skipped:
                    skipped = True
                    continue
                acc ^= memo[x]
            memo[v] = frozenset(acc)
            stack.pop()
        return True

    out = {}
    for v in path:
        if not resolve(int(v)):
            return None
        out[int(v)] = memo[int(v)]
    return out


def measure_trial(
    r: int, k: int, model: str, n: int, c: float, seed: int, measurements=ALL_MEASUREMENTS
) -> TrialRecord:
    t0 = time.perf_counter()
    rec = TrialRecord(n=n, c=c, seed=seed)
    m = int(round(c * n))
    h = _make_hypergraph(model, n, m, r, seed)
    pt = parallel_strip(h, k)
    st = slow_strip(h, k)
    if not np.array_equal(pt.level, st.level):
        raise RuntimeError("engine disagreement on stripping levels")
    rec.i_max = st.i_max
    rec.max_degree = int(h.degree.max(initial=0))

    core_mask = st.core_mask
    core_edge_ids = st.core_edges()
    if "core" in measurements:
        coredeg = np.zeros(n, dtype=np.int64)
        if core_edge_ids.size:
            cnt = np.bincount(h.edges_array[core_edge_ids].ravel(), minlength=n)
            coredeg[: len(cnt)] = cnt
        rec.Q = int(core_mask.sum())
        rec.core_edges = int(core_edge_ids.size)
        rec.Q2 = int(np.count_nonzero(coredeg[core_mask] == 2))
        rec.Lambda = int(coredeg[core_mask].sum())
        hist = np.bincount(coredeg[core_mask]) if rec.Q else np.zeros(1, np.int64)
        rec.degree_hist = {int(j): int(cj) for j, cj in enumerate(hist) if cj}
        sizes = pt.level_sizes()
        ratios = []
        lo, hi = n ** 0.5, n ** 0.9  # contraction regime: mid-sized rounds
        for i in range(2, len(sizes)):
            if lo <= sizes[i - 1] <= hi:
                ratios.append(sizes[i] / sizes[i - 1])
        rec.contraction_frac = (
            float(np.mean([x < 1 for x in ratios])) if ratios else float("nan")
        )

    cycle_token: dict[int, int] = {}
    if "flip" in measurements:
        cycle_token, disjoint = _cycle_tokens(h, st)
        rec.flip_mass = len(cycle_token)
        rec.flip_disjoint = bool(disjoint)

    if "reach" in measurements:
        sources, sizes = reach_sizes(st)
        if sources.size:
            rec.max_reach = int(sizes.max())
            free_mask = np.zeros(n, dtype=bool)
            free_mask[st.free] = True
            sel = free_mask[sources]
            rec.max_reach_free = int(sizes[sel].max()) if sel.any() else 0
        else:
            rec.max_reach = 0
            rec.max_reach_free = 0

    if "gap" in measurements:
        free = st.free
        if free.size:
            levels = st.level[free]
            i_star = int(levels.max())
            u_star = int(free[levels == i_star].min())
            rec.i_star = i_star
            below = levels[levels < i_star]
            gap = i_star - int(below.max()) if below.size else i_star
            rec.gap = gap
            rec.unique_in_window = int((levels == i_star).sum()) == 1
            target = max(1, i_star - gap)
            path = [u_star]
            ok = True
            x = u_star
            for lvl in range(i_star - 1, target - 1, -1):
                cand = st.out_neighbors(x)
                cand = cand[st.level[cand] == lvl]
                if cand.size == 0:
                    ok = False
                    break
                x = int(cand.min())
                path.append(x)
            rec.path_len = len(path)
            if ok and len(path) > 1:
                w = path[-1]
                optr, odst = st.out_csr()
                iptr, idst = st.in_csr()
                r_u = _bounded_closure(st.n, optr, odst, u_star, REACH_CAP)
                t_w = _bounded_closure(st.n, iptr, idst, w, REACH_CAP)
                if r_u is None or t_w is None:
                    ok = False
                else:
                    twu = r_u & t_w
                    want_levels = list(range(target, i_star + 1))
                    got_levels = sorted(int(st.level[v]) for v in twu)
                    ok = got_levels == want_levels
                    if ok:
                        members = set(twu)
                        by_level = {int(st.level[v]): v for v in twu}
                        for lvl in want_levels:
                            v = by_level[lvl]
                            outs = {int(y) for y in st.out_neighbors(v)} & members
                            ins = {int(y) for y in st.in_neighbors(v)} & members
                            want_out = set() if lvl == target else {by_level[lvl - 1]}
                            want_in = set() if lvl == i_star else {by_level[lvl + 1]}
                            if outs != want_out or ins != want_in:
                                ok = False
                                break
                rec.t_path_ok = bool(ok)
                if rec.t_path_ok:
                    chi = _chi_on_path(h, st, path, u_star, cycle_token)
                    if chi is None:
                        rec.chi_path_ok = None
                    else:
                        rec.chi_path_ok = all(
                            chi[v] == frozenset({u_star}) for v in path
                        )
            else:
                # single-level window: the path is just u_star itself
                rec.t_path_ok = bool(ok and len(path) == 1)
                rec.chi_path_ok = rec.t_path_ok or None

    rec.runtime_ms = int(1000 * (time.perf_counter() - t0))
    return rec


def _run_one(args):
    cfg, n, trial = args
    seed = derive_seed(cfg.base_seed, n, trial)
    c = cfg.density_at(n)
    try:
        return measure_trial(
            cfg.r, cfg.k, cfg.model, n, c, seed, measurements=cfg.measurements
        )
    except Exception as exc:  # captured as a failed record
        rec = TrialRecord(n=n, c=c, seed=seed, ok=False, error=str(exc))
        return rec


def run_ensemble(cfg: ExperimentConfig):
    """One record per (n, trial); deterministic regardless of worker count."""
    tasks = [(cfg, n, t) for n in cfg.n_list for t in range(cfg.trials)]
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(_run_one, tasks, chunksize=1))
    else:
        records = [_run_one(t) for t in tasks]
    return records, summarize(records, cfg)


def fit_loglog(xs, ys) -> tuple[float, float]:
    """Least-squares slope/intercept of log y against log x."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 3:
        raise ValueError("degenerate fit: need at least 3 points")
    if np.any(ys <= 0) or np.any(xs <= 0):
        raise ValueError("degenerate fit: nonpositive values")
    slope, intercept = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(slope), float(intercept)


def _per_n(records, value, filt=lambda r: True):
    out: dict[int, list] = {}
    for r in records:
        if r.ok and filt(r):
            out.setdefault(r.n, []).append(value(r))
    return out


def compare_core_sizes(records, pred=None, r=None, k=2):
    """Relative deviations of core vertex/edge counts from the predicted
    fractions; empty-core records are excluded and counted."""
    devs_v, devs_e = [], []
    skipped = 0
    cache: dict[float, object] = {}
    for rec in records:
        if not rec.ok or rec.Q < 0:
            continue
        if rec.Q == 0:
            skipped += 1
            continue
        if pred is not None:
            p = pred
        else:
            if rec.c not in cache:
                cache[rec.c] = thresholds.core_prediction(r, k, rec.c)
            p = cache[rec.c]
        devs_v.append(abs(rec.Q - p.alpha * rec.n) / rec.n)
        devs_e.append(abs(rec.core_edges - p.beta * rec.n) / rec.n)
    return {
        "trials": len(devs_v),
        "empty_core_excluded": skipped,
        "mean_vertex_dev": float(np.mean(devs_v)) if devs_v else float("nan"),
        "max_vertex_dev": float(np.max(devs_v)) if devs_v else float("nan"),
        "mean_edge_dev": float(np.mean(devs_e)) if devs_e else float("nan"),
        "max_edge_dev": float(np.max(devs_e)) if devs_e else float("nan"),
    }


def q2_ratio(records, r: int):
    """Contraction ratios 2(r-1)Q2/Lambda and the log-log fit of their
    deficit 1 - ratio against n (median per size)."""
    ratios = []
    for rec in records:
        if rec.ok and rec.Q > 0 and rec.Lambda > 0:
            ratios.append((rec.n, rec.seed, 2 * (r - 1) * rec.Q2 / rec.Lambda))
    per_n = {}
    for n, _, ratio in ratios:
        per_n.setdefault(n, []).append(1.0 - ratio)
    med = {n: float(np.median(v)) for n, v in sorted(per_n.items())}
    slope, intercept = fit_loglog(list(med), list(med.values()))
    return {
        "ratios": ratios,
        "all_below_one": all(x[2] < 1 for x in ratios),
        "median_deficit_by_n": med,
        "fit_slope": slope,
        "fit_intercept": intercept,
    }


def flip_mass(records):
    """Cycle-mass statistics and the disjointness rate."""
    masses = [r.flip_mass for r in records if r.ok and r.flip_mass >= 0]
    with_core = [r for r in records if r.ok and r.Q > 0 and r.flip_mass >= 0]
    per_n = _per_n(records, lambda r: r.flip_mass / r.n, lambda r: r.flip_mass >= 0)
    mean_by_n = {n: float(np.mean(v)) for n, v in sorted(per_n.items())}
    ns = sorted(mean_by_n)
    return {
        "mean_mass": float(np.mean(masses)) if masses else 0.0,
        "max_mass": int(np.max(masses)) if masses else 0,
        "disjoint_rate": (
            float(np.mean([r.flip_disjoint for r in with_core])) if with_core else 1.0
        ),
        "mass_over_n_by_n": mean_by_n,
        "mass_fraction_decreasing": all(
            mean_by_n[a] >= mean_by_n[b] for a, b in zip(ns, ns[1:])
        ),
    }


def iteration_scaling(records):
    """Fit of log(median i_max / log n) against log n."""
    per_n = _per_n(records, lambda r: r.i_max, lambda r: r.i_max > 0)
    med = {n: float(np.median(v)) for n, v in sorted(per_n.items())}
    corrected = {n: v / math.log(n) for n, v in med.items()}
    slope, intercept = fit_loglog(list(corrected), list(corrected.values()))
    return {
        "median_i_max_by_n": med,
        "fit_slope": slope,
        "fit_intercept": intercept,
        "median_nondecreasing": all(
            med[a] <= med[b] for a, b in zip(sorted(med), sorted(med)[1:])
        ),
    }


def reach_depth(records, delta: float | None = None, slack: float = 10.0):
    """Distribution of max reach sizes; with delta, the fraction of trials
    reaching at least n^(delta/2)/slack."""
    per_n = _per_n(records, lambda r: r.max_reach, lambda r: r.max_reach >= 0)
    med = {n: float(np.median(v)) for n, v in sorted(per_n.items())}
    per_n_free = _per_n(records, lambda r: r.max_reach_free, lambda r: r.max_reach_free >= 0)
    med_free = {n: float(np.median(v)) for n, v in sorted(per_n_free.items())}
    out = {
        "median_max_reach_by_n": med,
        "median_max_reach_free_by_n": med_free,
        "median_nondecreasing": all(
            med[a] <= med[b] for a, b in zip(sorted(med), sorted(med)[1:])
        ),
        "free_below_total": all(
            r.max_reach_free <= r.max_reach
            for r in records
            if r.ok and r.max_reach >= 0
        ),
    }
    if delta is not None:
        rates = {}
        for n, vals in per_n.items():
            thresh = n ** (delta / 2.0) / slack
            rates[n] = float(np.mean([v >= thresh for v in vals]))
        out["threshold_rate_by_n"] = rates
    return out


def free_gap_diagnostics(records):
    """Aggregate rates for the last-free-vertex structure."""
    valid = [r for r in records if r.ok and r.i_star >= 0]
    with_window = [r for r in valid if r.path_len > 1]
    chi_checked = [r for r in with_window if r.chi_path_ok is not None and r.t_path_ok]
    return {
        "trials_with_free": len(valid),
        "unique_in_window_rate": (
            float(np.mean([r.unique_in_window for r in valid])) if valid else float("nan")
        ),
        "t_path_rate": (
            float(np.mean([r.t_path_ok for r in with_window])) if with_window else float("nan")
        ),
        "chi_path_rate": (
            float(np.mean([bool(r.chi_path_ok) for r in chi_checked]))
            if chi_checked
            else float("nan")
        ),
        "median_gap": float(np.median([r.gap for r in valid])) if valid else float("nan"),
        "median_i_star": float(np.median([r.i_star for r in valid])) if valid else float("nan"),
    }


def summarize(records, cfg: ExperimentConfig) -> dict:
    summary: dict = {
        "config": {
            **{k: (sorted(v) if isinstance(v, frozenset) else
                   list(v) if isinstance(v, tuple) else v)
               for k, v in asdict(cfg).items()},
        },
        "failures": sum(not r.ok for r in records),
        "trials": len(records),
        "empty_core_rate_by_n": {},
    }
    per_n_empty = _per_n(records, lambda r: r.Q == 0, lambda r: r.Q >= 0)
    summary["empty_core_rate_by_n"] = {
        n: float(np.mean(v)) for n, v in sorted(per_n_empty.items())
    }
    if "core" in cfg.measurements:
        try:
            summary["core_sizes"] = compare_core_sizes(records, r=cfg.r, k=cfg.k)
        except ValueError as exc:
            summary["core_sizes"] = {"error": str(exc)}
        try:
            summary["q2_ratio"] = {
                k: v for k, v in q2_ratio(records, cfg.r).items() if k != "ratios"
            }
        except ValueError as exc:
            summary["q2_ratio"] = {"error": str(exc)}
        try:
            summary["iteration_scaling"] = iteration_scaling(records)
        except ValueError as exc:
            summary["iteration_scaling"] = {"error": str(exc)}
    if "flip" in cfg.measurements:
        summary["flip_mass"] = flip_mass(records)
    if "reach" in cfg.measurements:
        summary["reach_depth"] = reach_depth(
            records, delta=cfg.delta if cfg.density == "offset" else None
        )
    if "gap" in cfg.measurements:
        summary["free_gap"] = free_gap_diagnostics(records)
    return summary


def write_trials_csv(records, path) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for rec in records:
            fh.write(",".join(str(x) for x in rec.csv_row()) + "\n")


def write_summary_json(summary: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


def write_dat_files(records, out_dir) -> list[str]:
    """Gnuplot-style two-column files of per-n medians."""
    wrote = []
    series = {
        "imax.dat": _per_n(records, lambda r: r.i_max, lambda r: r.i_max >= 0),
        "max_reach.dat": _per_n(records, lambda r: r.max_reach, lambda r: r.max_reach >= 0),
        "core_q.dat": _per_n(records, lambda r: r.Q, lambda r: r.Q >= 0),
        "flip_mass.dat": _per_n(records, lambda r: r.flip_mass, lambda r: r.flip_mass >= 0),
    }
    for name, data in series.items():
        if not data:
            continue
        p = os.path.join(out_dir, name)
        with open(p, "w") as fh:
            fh.write("# n median\n")
            for n in sorted(data):
                fh.write(f"{n} {float(np.median(data[n])):.6g}\n")
        wrote.append(p)
    return wrote
