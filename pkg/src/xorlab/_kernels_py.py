"""Pure-Python stripping/reachability kernels.

These are the fallback twins of the compiled kernels in ``_kernels_cy``:
same signatures, same outputs, bit for bit.  All hypergraph inputs are flat
arrays: ``edges`` is an (m, r) int32 matrix of vertex ids (repeats allowed),
``inc_ptr``/``inc_edge`` is the vertex -> incident-edge CSR built with
multiplicity (a vertex occurring twice in an edge lists that edge twice).
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def slow_strip_kernel(n, m, r, k, edges, inc_ptr, inc_edge):
    """Run the FIFO one-edge-per-step stripping queue.

    Queue discipline: initially all light vertices (degree < k) in ascending
    index order; each step removes the lowest-indexed live edge at the front
    vertex; vertices lightened by that removal are appended in ascending
    index order; degree-zero front vertices are popped without a step.

    Returns (psi, level, front_step, edge_consumer, edge_step,
    arc_src, arc_dst, n_steps).  Steps are 0-indexed edge removals;
    ``front_step[v]`` is the step during which v first sits at the front
    (equal to the total step count if the queue drains afterwards), and is
    also the step during which v is removed.  ``level`` is 0 for core
    vertices and otherwise equals the round of the all-at-once stripping
    process that would remove v.  Arcs point from the r-1 cohabitants of a
    consumed edge to its consumer, deduplicated per edge.
    """
    deg = np.diff(inc_ptr).astype(np.int64)
    live_edge = np.ones(m, dtype=bool)
    level = np.zeros(n, dtype=np.int32)
    front_step = np.full(n, -1, dtype=np.int64)
    edge_consumer = np.full(m, -1, dtype=np.int32)
    edge_step = np.full(m, -1, dtype=np.int64)
    in_queue = np.zeros(n, dtype=bool)

    queue = [v for v in range(n) if deg[v] < k]
    for v in queue:
        in_queue[v] = True
        level[v] = 1

    arc_src = []
    arc_dst = []
    psi = []
    step = 0
    head = 0
    while head < len(queue):
        v = queue[head]
        if front_step[v] < 0:
            front_step[v] = step
        if deg[v] == 0:
            head += 1
            psi.append(v)
            continue
        e = -1
        for j in range(inc_ptr[v], inc_ptr[v + 1]):
            ei = inc_edge[j]
            if live_edge[ei] and (e < 0 or ei < e):
                e = ei
        live_edge[e] = False
        edge_consumer[e] = v
        edge_step[e] = step
        others = set()
        touched = set()
        for u in edges[e]:
            u = int(u)
            deg[u] -= 1
            touched.add(u)
            if u != v:
                others.add(u)
        for u in sorted(others):
            arc_src.append(u)
            arc_dst.append(v)
        newly = sorted(u for u in touched if not in_queue[u] and deg[u] < k)
        for u in newly:
            in_queue[u] = True
            level[u] = level[v] + 1
            queue.append(u)
        step += 1

    return (
        np.asarray(psi, dtype=np.int32),
        level,
        front_step,
        edge_consumer,
        edge_step,
        np.asarray(arc_src, dtype=np.int32),
        np.asarray(arc_dst, dtype=np.int32),
        step,
    )


def parallel_strip_kernel(n, m, r, k, edges, inc_ptr, inc_edge):
    """Strip all light vertices round by round until only the k-core is left.

    Returns (level, i_max, live_edge): level[v] = 0 for core vertices,
    otherwise the 1-based round in which v was removed; live_edge marks the
    edges of the k-core.
    """
    deg = np.diff(inc_ptr).astype(np.int64)
    live_edge = np.ones(m, dtype=bool)
    level = np.zeros(n, dtype=np.int32)
    removed = np.zeros(n, dtype=bool)

    frontier = [v for v in range(n) if deg[v] < k]
    i = 0
    while frontier:
        i += 1
        for v in frontier:
            level[v] = i
            removed[v] = True
        touched = set()
        for v in frontier:
            for j in range(inc_ptr[v], inc_ptr[v + 1]):
                e = inc_edge[j]
                if live_edge[e]:
                    live_edge[e] = False
                    for u in edges[e]:
                        u = int(u)
                        deg[u] -= 1
                        touched.add(u)
        frontier = sorted(
            u for u in touched if not removed[u] and deg[u] < k
        )
    return level, i, live_edge


def reach_sizes_kernel(n, out_ptr, out_dst, sources):
    """Count, for each source, the vertices reachable from it (inclusive)."""
    stamp = np.full(n, -1, dtype=np.int64)
    sizes = np.empty(len(sources), dtype=np.int64)
    stack = []
    for idx in range(len(sources)):
        s = int(sources[idx])
        stamp[s] = idx
        stack.append(s)
        count = 0
        while stack:
            x = stack.pop()
            count += 1
            for j in range(out_ptr[x], out_ptr[x + 1]):
                y = out_dst[j]
                if stamp[y] != idx:
                    stamp[y] = idx
                    stack.append(y)
        sizes[idx] = count
    return sizes
