"""Core stripping engines and the removal digraph.

Two engines expose the same terminal k-core: a round-based process that
removes every light vertex at once (recording the round sets S_1, S_2, ...)
and a FIFO queue refinement that removes one edge per step.  The queue
engine also builds the removal digraph: when an edge is consumed at the
deletion of vertex v, each of the other entries of that edge gets an arc
pointing to v.  Free vertices are the removed vertices with indegree zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .instances import Hypergraph


@dataclass
class ParallelTrace:
    """Outcome of the round-based stripping process."""

    n: int
    k: int
    level: np.ndarray  # 0 = core, otherwise the removal round (1-based)
    i_max: int
    core_edge_mask: np.ndarray

    @property
    def removed_mask(self) -> np.ndarray:
        return self.level > 0

    @property
    def core_mask(self) -> np.ndarray:
        return self.level == 0

    def core_vertices(self) -> np.ndarray:
        return np.flatnonzero(self.core_mask)

    def core_edges(self) -> np.ndarray:
        return np.flatnonzero(self.core_edge_mask)

    def level_sets(self) -> list[np.ndarray]:
        """[S_1, ..., S_i_max] as sorted index arrays."""
        return [np.flatnonzero(self.level == i) for i in range(1, self.i_max + 1)]

    def level_sizes(self) -> np.ndarray:
        if self.i_max == 0:
            return np.zeros(0, dtype=np.int64)
        return np.bincount(self.level[self.level > 0], minlength=self.i_max + 1)[1:]


@dataclass
class StripTrace:
    """Outcome of the queue engine: removal order, levels, step markers and
    the removal digraph.

    Steps are 0-indexed edge removals.  ``front_step[v]`` doubles as the
    removal step of v: the consuming vertex is deleted during the step that
    removes its last edge, and a vertex popped at degree zero belongs to the
    upcoming step (possibly ``n_steps`` if the queue drains at the end).
    """

    n: int
    m: int
    r: int
    k: int
    psi: np.ndarray
    level: np.ndarray
    i_max: int
    front_step: np.ndarray
    edge_consumer: np.ndarray
    edge_step: np.ndarray
    n_steps: int
    arc_src: np.ndarray
    arc_dst: np.ndarray
    _out_csr: tuple | None = field(default=None, repr=False)
    _in_csr: tuple | None = field(default=None, repr=False)

    @property
    def removal_step(self) -> np.ndarray:
        return self.front_step

    @property
    def removed_mask(self) -> np.ndarray:
        return self.level > 0

    @property
    def core_mask(self) -> np.ndarray:
        return self.level == 0

    @property
    def core_edge_mask(self) -> np.ndarray:
        return self.edge_consumer < 0

    def core_vertices(self) -> np.ndarray:
        return np.flatnonzero(self.core_mask)

    def core_edges(self) -> np.ndarray:
        return np.flatnonzero(self.core_edge_mask)

    @property
    def indegree(self) -> np.ndarray:
        return np.bincount(self.arc_dst, minlength=self.n)

    @property
    def outdegree(self) -> np.ndarray:
        return np.bincount(self.arc_src, minlength=self.n)

    @property
    def in_digraph(self) -> np.ndarray:
        """Mask of digraph vertices: removed ones plus core vertices that
        shared a removed edge (exactly the arc sources)."""
        mask = self.removed_mask.copy()
        mask[self.arc_src] = True
        return mask

    @property
    def free(self) -> np.ndarray:
        """Removed vertices with indegree zero, ascending."""
        return np.flatnonzero(self.removed_mask & (self.indegree == 0))

    @property
    def t_of_i(self) -> dict[int, int]:
        """Step during which the first vertex of each round reaches the front."""
        t = {}
        removed = self.removed_mask
        for i in range(1, self.i_max + 1):
            sel = removed & (self.level == i)
            t[i] = int(self.front_step[sel].min())
        return t

    @property
    def i_star(self):
        free = self.free
        return int(self.level[free].max()) if free.size else None

    @property
    def u_star(self):
        free = self.free
        if not free.size:
            return None
        top = self.level[free].max()
        return int(free[self.level[free] == top].min())

    def out_csr(self):
        if self._out_csr is None:
            self._out_csr = _build_csr(self.n, self.arc_src, self.arc_dst)
        return self._out_csr

    def in_csr(self):
        if self._in_csr is None:
            self._in_csr = _build_csr(self.n, self.arc_dst, self.arc_src)
        return self._in_csr

    def out_neighbors(self, v: int) -> np.ndarray:
        ptr, dst = self.out_csr()
        return dst[ptr[v] : ptr[v + 1]]

    def in_neighbors(self, v: int) -> np.ndarray:
        ptr, dst = self.in_csr()
        return dst[ptr[v] : ptr[v + 1]]


def _build_csr(n, src, dst):
    order = np.argsort(src, kind="stable")
    counts = np.bincount(src, minlength=n)
    ptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return ptr, dst[order].astype(np.int32)


def parallel_strip(h: Hypergraph, k: int) -> ParallelTrace:
    """Repeatedly remove all vertices of degree < k; terminal graph is the
    k-core."""
    if k < 2:
        raise ValueError("k must be at least 2")
    level, i_max, live_edge = kernels.parallel_strip_kernel(
        h.n, h.m, h.r, k, h.edges_array, h.inc_ptr, h.inc_edge
    )
    return ParallelTrace(n=h.n, k=k, level=level, i_max=i_max, core_edge_mask=live_edge)


def slow_strip(h: Hypergraph, k: int) -> StripTrace:
    """Run the FIFO queue engine and build the removal digraph."""
    if k < 2:
        raise ValueError("k must be at least 2")
    (
        psi,
        level,
        front_step,
        edge_consumer,
        edge_step,
        arc_src,
        arc_dst,
        n_steps,
    ) = kernels.slow_strip_kernel(
        h.n, h.m, h.r, k, h.edges_array, h.inc_ptr, h.inc_edge
    )
    i_max = int(level.max(initial=0))
    return StripTrace(
        n=h.n,
        m=h.m,
        r=h.r,
        k=k,
        psi=psi,
        level=level,
        i_max=i_max,
        front_step=front_step,
        edge_consumer=edge_consumer,
        edge_step=edge_step,
        n_steps=n_steps,
        arc_src=arc_src,
        arc_dst=arc_dst,
    )


def level_markers(pt: ParallelTrace, st: StripTrace) -> dict[int, int]:
    """Step markers t(i) after checking both traces tell the same story."""
    if (
        pt.n != st.n
        or pt.k != st.k
        or pt.i_max != st.i_max
        or not np.array_equal(pt.level, st.level)
        or not np.array_equal(pt.core_edge_mask, st.core_edge_mask)
    ):
        raise ValueError("inconsistent traces")
    return st.t_of_i


def _require_in_digraph(st: StripTrace, v: int):
    if v < 0 or v >= st.n or not st.in_digraph[v]:
        raise ValueError(f"vertex {v} is not in the removal digraph")


def reach_forward(st: StripTrace, v: int) -> set[int]:
    """All vertices reachable from v along arcs, v included."""
    _require_in_digraph(st, v)
    ptr, dst = st.out_csr()
    seen = {int(v)}
    stack = [int(v)]
    while stack:
        x = stack.pop()
        for y in dst[ptr[x] : ptr[x + 1]]:
            y = int(y)
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return seen


def reach_backward(st: StripTrace, w: int) -> set[int]:
    """T(w): all vertices that can reach w, w included."""
    _require_in_digraph(st, w)
    ptr, dst = st.in_csr()
    seen = {int(w)}
    stack = [int(w)]
    while stack:
        x = stack.pop()
        for y in dst[ptr[x] : ptr[x + 1]]:
            y = int(y)
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return seen


def restrict(st: StripTrace, w: int, u: int) -> set[int]:
    """T(w, u): the part of T(w) reachable from u (vertices on u -> w walks)."""
    _require_in_digraph(st, u)
    return reach_backward(st, w) & reach_forward(st, u)


def last_free(st: StripTrace) -> tuple[int, int]:
    """(i_star, u_star): the last round holding a free vertex, and its
    lowest-indexed free member."""
    free = st.free
    if not free.size:
        raise ValueError("no free vertices")
    return st.i_star, st.u_star


def reach_sizes(st: StripTrace, sources=None) -> tuple[np.ndarray, np.ndarray]:
    """|R+(v)| for each source (default: every digraph vertex)."""
    if sources is None:
        sources = np.flatnonzero(st.in_digraph)
    sources = np.asarray(sources, dtype=np.int32)
    ptr, dst = st.out_csr()
    sizes = kernels.reach_sizes_kernel(st.n, ptr, dst, sources)
    return sources, sizes


def verify_stripping(h: Hypergraph, k: int, st: StripTrace) -> bool:
    """Replay the removal order: every vertex must be light when deleted and
    exactly the non-core vertices must be deleted."""
    live = np.ones(h.m, dtype=bool)
    deleted = np.zeros(h.n, dtype=bool)
    for v in st.psi:
        v = int(v)
        incident = [e for e in h.incident_edges(v) if live[e]]
        if len(incident) >= k:
            return False
        for e in set(incident):
            live[e] = False
        deleted[v] = True
    if not np.array_equal(deleted, st.removed_mask):
        return False
    if not np.array_equal(live, st.core_edge_mask):
        return False
    # terminal graph is a k-core: every surviving vertex keeps degree >= k
    remaining = np.zeros(h.n, dtype=np.int64)
    for e in np.flatnonzero(live):
        for u in h.edges_array[e]:
            remaining[u] += 1
    return bool(np.all(remaining[~deleted] >= k))
