"""Flippable cycles, solution enumeration and cluster geometry.

Degree-2 vertices thread hyperedges together: the auxiliary multigraph has
one node per hyperedge and one link per degree-2 vertex joining its two
incident edges.  A vertex lies on a flippable cycle iff its link is not a
bridge, and the biconnected blocks of the auxiliary graph tell the whole
story: a block that is itself a cycle carries exactly one flippable cycle,
a denser block puts every one of its links on two or more cycles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gf2 import Gf2Error, Gf2System, eliminate
from .instances import Hypergraph, XorsatInstance


@dataclass
class FlippableReport:
    cycles: list[tuple[tuple[int, ...], tuple[int, ...]]]  # (vertices, edges)
    on_cycle_vertices: frozenset
    disjoint: bool
    total_mass: int
    truncated: bool


@dataclass
class AuxGraph:
    """links[i] = (vertex, edge_a, edge_b); self-loop vertices (both
    incidences inside one edge) are excluded and listed separately."""

    links: list[tuple[int, int, int]]
    dropped: list[int]
    adj: dict[int, list[tuple[int, int]]]  # node -> [(link id, other node)]


def build_aux_graph(h: Hypergraph, core=None) -> AuxGraph:
    """Auxiliary multigraph of h, or of its core-induced subhypergraph when
    ``core`` (an object with core_mask/core_edge_mask) is given.  Degrees are
    counted within the chosen edge set."""
    if core is None:
        edge_ids = np.arange(h.m, dtype=np.int64)
        vertex_ok = np.ones(h.n, dtype=bool)
    else:
        edge_ids = np.flatnonzero(core.core_edge_mask)
        vertex_ok = np.asarray(core.core_mask, dtype=bool)
    if edge_ids.size == 0 or h.m == 0:
        return AuxGraph(links=[], dropped=[], adj={})
    flat_v = h.edges_array[edge_ids].ravel()
    flat_e = np.repeat(edge_ids, h.r)
    deg = np.bincount(flat_v, minlength=h.n)
    cand = vertex_ok & (deg == 2)
    sel = cand[flat_v]
    vv = flat_v[sel]
    ee = flat_e[sel]
    order = np.argsort(vv, kind="stable")  # keeps each vertex's edges in id order
    vv = vv[order]
    ee = ee[order]
    v2 = vv[0::2]
    ea = ee[0::2]
    eb = ee[1::2]
    selfloop = ea == eb
    dropped = [int(v) for v in v2[selfloop]]
    links = list(
        zip(
            (int(x) for x in v2[~selfloop]),
            (int(x) for x in ea[~selfloop]),
            (int(x) for x in eb[~selfloop]),
        )
    )
    adj: dict[int, list[tuple[int, int]]] = {}
    for lid, (_, a, b) in enumerate(links):
        adj.setdefault(a, []).append((lid, b))
        adj.setdefault(b, []).append((lid, a))
    return AuxGraph(links=links, dropped=dropped, adj=adj)


def aux_blocks(aux: AuxGraph) -> list[set[int]]:
    """Biconnected blocks as sets of link ids (iterative DFS, parallel links
    are distinct edges)."""
    disc: dict[int, int] = {}
    low: dict[int, int] = {}
    blocks: list[set[int]] = []
    timer = 0
    for start in aux.adj:
        if start in disc:
            continue
        disc[start] = low[start] = timer
        timer += 1
        stack = [(start, -1)]
        it = {start: 0}
        estack: list[int] = []
        while stack:
            v, entry_link = stack[-1]
            alist = aux.adj[v]
            if it[v] < len(alist):
                lid, w = alist[it[v]]
                it[v] += 1
                if lid == entry_link:
                    continue
                if w not in disc:
                    disc[w] = low[w] = timer
                    timer += 1
                    it[w] = 0
                    estack.append(lid)
                    stack.append((w, lid))
                elif disc[w] < disc[v]:
                    estack.append(lid)
                    if disc[w] < low[v]:
                        low[v] = disc[w]
            else:
                stack.pop()
                if stack:
                    parent = stack[-1][0]
                    if low[v] < low[parent]:
                        low[parent] = low[v]
                    if low[v] >= disc[parent]:
                        blk = set()
                        while True:
                            lid = estack.pop()
                            blk.add(lid)
                            if lid == entry_link:
                                break
                        blocks.append(blk)
    return blocks


def _block_summary(aux: AuxGraph):
    """(on-cycle link ids, disjoint flag): a link is on a cycle iff its block
    has two or more links; cycles are pairwise vertex-disjoint iff every such
    block is itself a single cycle (#links == #nodes)."""
    on_cycle: set[int] = set()
    disjoint = True
    for blk in aux_blocks(aux):
        if len(blk) < 2:
            continue
        nodes = set()
        for lid in blk:
            _, a, b = aux.links[lid]
            nodes.update((a, b))
        on_cycle.update(blk)
        if len(blk) != len(nodes):
            disjoint = False
    return on_cycle, disjoint


def flippable_vertices(h: Hypergraph) -> set[int]:
    """Vertices lying on at least one flippable cycle (bridge test)."""
    aux = build_aux_graph(h)
    on_cycle, _ = _block_summary(aux)
    return {aux.links[lid][0] for lid in on_cycle}


def cycle_space_dim(aux: AuxGraph) -> int:
    """#links - #touched nodes + #components of the auxiliary graph; equals
    the number of independent flippable cycles."""
    parent: dict[int, int] = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    nodes = set()
    for _, a, b in aux.links:
        nodes.update((a, b))
    for u in nodes:
        parent[u] = u
    for _, a, b in aux.links:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    comps = len({find(u) for u in nodes})
    return len(aux.links) - len(nodes) + comps


def _enumerate_cycles(aux: AuxGraph, cap: int):
    """All simple cycles of the auxiliary multigraph (2-cycles from parallel
    links included), each exactly once, stopping at ``cap``.

    Each cycle is discovered from its minimal node only (other nodes must
    exceed it) and in one canonical direction (first link id below last)."""
    cycles = []
    for s in sorted(aux.adj):
        path_nodes = [s]
        path_links: list[int] = []
        used: set[int] = set()
        on_path = {s}
        iters = [0]
        while iters:
            v = path_nodes[-1]
            alist = aux.adj[v]
            i = iters[-1]
            if i < len(alist):
                iters[-1] += 1
                lid, w = alist[i]
                if lid in used:
                    continue
                if w == s:
                    if path_links and path_links[0] < lid:
                        cycles.append((list(path_nodes), path_links + [lid]))
                        if len(cycles) >= cap:
                            return cycles, True
                    continue
                if w < s or w in on_path:
                    continue
                used.add(lid)
                path_links.append(lid)
                path_nodes.append(w)
                on_path.add(w)
                iters.append(0)
            else:
                iters.pop()
                path_nodes.pop()
                on_path.discard(v)
                if path_links:
                    used.discard(path_links.pop())
    return cycles, False


def enumerate_flippable_cycles(h: Hypergraph, cap: int = 10000, core=None) -> FlippableReport:
    """Exhaustive cycle list (small inputs); mass/disjointness stay exact via
    the block decomposition even when the list is truncated."""
    aux = build_aux_graph(h, core=core)
    on_cycle_ids, disjoint_blocks = _block_summary(aux)
    raw, truncated = _enumerate_cycles(aux, cap)
    cycles = []
    for node_path, link_path in raw:
        verts = tuple(aux.links[lid][0] for lid in link_path)
        edges = tuple(node_path)
        cycles.append((verts, edges))
    if not truncated:
        seen: dict[int, int] = {}
        disjoint = True
        for ci, (verts, _) in enumerate(cycles):
            for v in verts:
                if v in seen and seen[v] != ci:
                    disjoint = False
                seen[v] = ci
    else:
        disjoint = disjoint_blocks
    on_cycle = frozenset(aux.links[lid][0] for lid in on_cycle_ids)
    return FlippableReport(
        cycles=cycles,
        on_cycle_vertices=on_cycle,
        disjoint=disjoint,
        total_mass=len(on_cycle),
        truncated=truncated,
    )


def core_flippable(h: Hypergraph, core, cap: int = 10000) -> FlippableReport:
    """Flippable cycles of the core-induced subhypergraph (degrees counted
    within the core)."""
    return enumerate_flippable_cycles(h, cap=cap, core=core)


def core_cycle_stats(h: Hypergraph, core) -> tuple[int, bool, frozenset]:
    """(mass, disjoint, on-cycle vertices) without cycle enumeration; exact
    at any scale."""
    aux = build_aux_graph(h, core=core)
    on_cycle_ids, disjoint = _block_summary(aux)
    verts = frozenset(aux.links[lid][0] for lid in on_cycle_ids)
    return len(verts), disjoint, verts


def _pack_rows(rows: np.ndarray) -> np.ndarray:
    s, n = rows.shape
    width = max(1, (n + 63) // 64)
    padded = np.zeros((s, width * 64), dtype=np.uint8)
    padded[:, :n] = rows
    return np.packbits(padded, axis=1, bitorder="little").view(np.uint64)


def hamming_cross(a: np.ndarray, b: np.ndarray, chunk: int = 2048) -> np.ndarray:
    """Pairwise Hamming distances between two 0/1 row sets."""
    pa, pb = _pack_rows(a), _pack_rows(b)
    out = np.empty((len(a), len(b)), dtype=np.int64)
    for i in range(0, len(a), chunk):
        x = pa[i : i + chunk, None, :] ^ pb[None, :, :]
        out[i : i + chunk] = np.bitwise_count(x).sum(axis=2)
    return out


def enumerate_solutions(
    inst: XorsatInstance, limit: int = 65536, method: str = "elim"
) -> np.ndarray:
    """Exact duplicate-free solution list, rows sorted lexicographically.

    method='elim' enumerates witness + nullspace combinations; 'brute'
    sweeps all 2^n assignments (n <= 25).
    """
    if method == "elim":
        res = eliminate(Gf2System.from_instance(inst))
        if not res.satisfiable:
            return np.zeros((0, inst.n), dtype=np.uint8)
        if res.solution_count > limit:
            raise Gf2Error(
                f"too many solutions ({res.solution_count} > limit {limit})"
            )
        nv = res.nullity
        combos = (
            (np.arange(1 << nv, dtype=np.uint64)[:, None] >> np.arange(nv, dtype=np.uint64))
            & np.uint64(1)
        ).astype(np.int64)
        sols = ((combos @ res.basis.astype(np.int64)) & 1).astype(np.uint8)
        sols ^= res.witness
        return np.unique(sols, axis=0)
    if method == "brute":
        if inst.n > 25:
            raise Gf2Error("brute enumeration capped at 25 variables")
        idx = np.arange(1 << inst.n, dtype=np.uint32)
        parity = np.zeros(idx.shape, dtype=np.uint32)
        sys = Gf2System.from_instance(inst)
        keep = np.ones(idx.shape, dtype=bool)
        for support, rhs in sys.rows:
            parity[:] = 0
            for v in support:
                parity ^= (idx >> np.uint32(v)) & np.uint32(1)
            keep &= parity == rhs
        sel = idx[keep]
        if sel.size > limit:
            raise Gf2Error(f"too many solutions ({sel.size} > limit {limit})")
        bits = ((sel[:, None] >> np.arange(inst.n, dtype=np.uint32)) & 1).astype(np.uint8)
        return np.unique(bits, axis=0)
    raise ValueError(f"unknown method {method!r}")


@dataclass
class ClusterGeometry:
    solutions: np.ndarray
    labels: np.ndarray
    cluster_count: int
    cluster_size: int
    free_count: int
    f_within: int
    g_between: int | None


def _mst_bottleneck(dist: np.ndarray) -> int:
    s = dist.shape[0]
    if s <= 1:
        return 0
    big = np.iinfo(np.int64).max
    best = dist[0].astype(np.int64).copy()
    in_tree = np.zeros(s, dtype=bool)
    in_tree[0] = True
    best[0] = big
    bottleneck = 0
    for _ in range(s - 1):
        j = int(np.argmin(best))
        bottleneck = max(bottleneck, int(best[j]))
        in_tree[j] = True
        best = np.minimum(best, dist[j])
        best[in_tree] = big
    return bottleneck


def partition_clusters(
    solutions, core_vertices, core_cycle_vertices
) -> ClusterGeometry:
    """Group solutions that agree on the core off the flippable cycles, then
    measure within-cluster connectivity and between-cluster separation."""
    sols = np.asarray(solutions, dtype=np.uint8)
    if sols.ndim != 2 or sols.shape[0] == 0:
        return ClusterGeometry(
            solutions=sols.reshape(0, -1),
            labels=np.zeros(0, dtype=np.int64),
            cluster_count=0,
            cluster_size=0,
            free_count=0,
            f_within=0,
            g_between=None,
        )
    proj_cols = sorted(set(int(v) for v in core_vertices) - set(int(v) for v in core_cycle_vertices))
    if proj_cols:
        _, labels = np.unique(sols[:, proj_cols], axis=0, return_inverse=True)
    else:
        labels = np.zeros(len(sols), dtype=np.int64)
    labels = labels.astype(np.int64)
    cluster_ids = np.unique(labels)
    sizes = np.bincount(labels)
    if len(set(sizes.tolist())) != 1:
        raise Gf2Error("cluster sizes differ; input is not a full solution set")
    size = int(sizes[0])
    if size & (size - 1):
        raise Gf2Error("cluster size is not a power of two")
    f_within = 0
    for cid in cluster_ids:
        members = sols[labels == cid]
        dist = hamming_cross(members, members)
        f_within = max(f_within, _mst_bottleneck(dist))
    g_between = None
    if len(cluster_ids) > 1:
        full = hamming_cross(sols, sols)
        cross = labels[:, None] != labels[None, :]
        g_between = int(full[cross].min())
    return ClusterGeometry(
        solutions=sols,
        labels=labels,
        cluster_count=len(cluster_ids),
        cluster_size=size,
        free_count=int(size).bit_length() - 1,
        f_within=f_within,
        g_between=g_between,
    )


def analyze_clusters(inst: XorsatInstance, max_solutions: int = 65536) -> dict:
    """End-to-end geometry summary of a small instance.

    The free count comes from the ordered elimination when the core cycles
    are disjoint, and from the cycle-space dimension of the auxiliary graph
    otherwise (the two agree whenever both are defined)."""
    from .gf2 import Gf2StructureError, free_structure, reference_core_solution
    from .stripping import slow_strip

    h = inst.hypergraph()
    st = slow_strip(h, 2)
    sols = enumerate_solutions(inst, limit=max_solutions)
    core = st.core_vertices()
    rep = core_flippable(h, st)
    out = {
        "solutions": int(len(sols)),
        "free_count": 0,
        "cluster_count": 0,
        "cluster_size": 0,
        "f_within": 0,
        "g_between": None,
        "core_vertices": int(core.size),
        "cycle_mass": rep.total_mass,
    }
    if not len(sols):
        return out
    geo = partition_clusters(sols, core, rep.on_cycle_vertices)
    free_count = None
    if not rep.truncated:
        sigma = reference_core_solution(inst, st)
        try:
            fs = free_structure(inst, st, rep.cycles, sigma)
            free_count = len(fs.free)
        except Gf2StructureError:
            free_count = None
    if free_count is None:
        free_count = int(st.free.size) + cycle_space_dim(build_aux_graph(h, core=st))
    out.update(
        free_count=int(free_count),
        cluster_count=geo.cluster_count,
        cluster_size=geo.cluster_size,
        f_within=geo.f_within,
        g_between=geo.g_between,
    )
    return out


class ConnectivityProfile:
    """Connected components of the solution graph joining pairs at Hamming
    distance at most f."""

    def __init__(self, solutions, f: int):
        sols = np.asarray(solutions, dtype=np.uint8)
        self.f = int(f)
        n = len(sols)
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        if n:
            dist = hamming_cross(sols, sols)
            for i, j in zip(*np.nonzero(dist <= self.f)):
                if i < j:
                    ri, rj = find(int(i)), find(int(j))
                    if ri != rj:
                        parent[ri] = rj
        roots = [find(i) for i in range(n)]
        _, self.labels = np.unique(roots, return_inverse=True)
        self.n_components = int(self.labels.max() + 1) if n else 0

    def is_f_connected(self, indices) -> bool:
        idx = list(indices)
        return len(set(self.labels[idx].tolist())) <= 1

    def f_separated(self, first, second) -> bool:
        a = set(self.labels[list(first)].tolist())
        b = set(self.labels[list(second)].tolist())
        return not (a & b)
