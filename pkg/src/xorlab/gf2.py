"""GF(2) linear algebra and the free-variable structure of a stripped system.

Elimination works on dense bit-packed rows (one uint64 word per 64
variables).  The free-variable structure follows the stripping order: the
designated vertex of each core flippable cycle and every indegree-zero
removed vertex are free; every other variable gets a single expression
v = z_v + sum of a subset chi(v) of the free variables, obtained by
eliminating the cycle equations first and then the consumed equations in
reverse removal order (each consumed equation pins its consumer).
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numpy as np

from .instances import XorsatInstance
from .stripping import StripTrace


class Gf2Error(ValueError):
    pass


class Gf2StructureError(Gf2Error):
    """The cycle family violates the assumptions of the ordered elimination."""


class Gf2System:
    """Rows are (support set, rhs bit); duplicate variables inside an
    equation cancel at construction (x + x = 0)."""

    def __init__(self, n_vars: int, rows):
        self.n_vars = int(n_vars)
        self.rows: list[tuple[frozenset, int]] = []
        for support, rhs in rows:
            odd = frozenset(v for v, cnt in Counter(support).items() if cnt % 2)
            if any(v < 0 or v >= self.n_vars for v in odd):
                raise Gf2Error("variable index out of range")
            self.rows.append((odd, int(rhs) & 1))

    @classmethod
    def from_instance(cls, inst: XorsatInstance, edge_indices=None) -> "Gf2System":
        idx = range(inst.m) if edge_indices is None else edge_indices
        return cls(
            inst.n,
            ((inst.vars_array[e].tolist(), int(inst.rhs[e])) for e in idx),
        )

    def packed(self) -> tuple[np.ndarray, np.ndarray]:
        nw = max(1, (self.n_vars + 63) // 64)
        mat = np.zeros((len(self.rows), nw), dtype=np.uint64)
        rhs = np.zeros(len(self.rows), dtype=np.uint8)
        for i, (support, b) in enumerate(self.rows):
            for v in support:
                mat[i, v >> 6] |= np.uint64(1) << np.uint64(v & 63)
            rhs[i] = b
        return mat, rhs


@dataclass
class Gf2Elimination:
    rank: int
    nullity: int
    satisfiable: bool
    witness: np.ndarray | None  # pivot variables take the row rhs, frees 0
    pivots: list[int]
    basis: np.ndarray  # (nullity, n) nullspace basis, one free column each

    @property
    def solution_count(self):
        return (1 << self.nullity) if self.satisfiable else 0


def _get_bit(row: np.ndarray, col: int) -> int:
    return int((row[col >> 6] >> np.uint64(col & 63)) & np.uint64(1))


def eliminate(sys: Gf2System) -> Gf2Elimination:
    """Reduced row echelon form with lowest-index pivots."""
    n = sys.n_vars
    mat, rhs = sys.packed()
    nrows = mat.shape[0]
    pivots: list[int] = []
    cur = 0
    for col in range(n):
        if cur == nrows:
            break
        w, b = col >> 6, np.uint64(col & 63)
        colbits = (mat[cur:, w] >> b) & np.uint64(1)
        hits = np.flatnonzero(colbits)
        if hits.size == 0:
            continue
        p = cur + int(hits[0])
        if p != cur:
            mat[[cur, p]] = mat[[p, cur]]
            rhs[[cur, p]] = rhs[[p, cur]]
        others = np.flatnonzero((mat[:, w] >> b) & np.uint64(1))
        others = others[others != cur]
        if others.size:
            mat[others] ^= mat[cur]
            rhs[others] ^= rhs[cur]
        pivots.append(col)
        cur += 1
    rank = cur
    satisfiable = not np.any(rhs[rank:])
    nullity = n - rank
    witness = None
    if satisfiable:
        witness = np.zeros(n, dtype=np.uint8)
        for i, col in enumerate(pivots):
            witness[col] = rhs[i]
    free_cols = sorted(set(range(n)) - set(pivots))
    basis = np.zeros((nullity, n), dtype=np.uint8)
    for bi, f in enumerate(free_cols):
        basis[bi, f] = 1
        for i, p in enumerate(pivots):
            basis[bi, p] = _get_bit(mat[i], f)
    return Gf2Elimination(
        rank=rank,
        nullity=nullity,
        satisfiable=satisfiable,
        witness=witness,
        pivots=pivots,
        basis=basis,
    )


@dataclass
class FreeStructure:
    """Free set F, per-variable support chi(v) in F and offset z_v relative
    to a reference core assignment."""

    n: int
    free: frozenset
    chi: dict[int, frozenset]
    z: dict[int, int]
    elimination_order: list[tuple[int, int]]  # (edge index, pivot vertex)
    _inverse: dict | None = field(default=None, repr=False)

    def chi_of(self, v: int) -> frozenset:
        return self.chi[v]

    def inverse(self) -> dict[int, frozenset]:
        if self._inverse is None:
            inv = defaultdict(set)
            for v, s in self.chi.items():
                for u in s:
                    inv[u].add(v)
            self._inverse = {u: frozenset(vs) for u, vs in inv.items()}
        return self._inverse


def _row_parity(inst: XorsatInstance, e: int, assignment: np.ndarray) -> int:
    p = 0
    for u in inst.vars_array[e]:
        p ^= int(assignment[u])
    return p


def _check_core_assignment(inst: XorsatInstance, st: StripTrace, sigma) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=np.uint8)
    if sigma.shape != (inst.n,):
        raise Gf2Error("core assignment must cover all variables")
    for e in np.flatnonzero(st.core_edge_mask):
        if _row_parity(inst, int(e), sigma) != int(inst.rhs[e]):
            raise Gf2Error(f"core assignment violates equation {int(e)}")
    return sigma


def _validate_cycles(inst: XorsatInstance, st: StripTrace, cycles):
    vertex_to_cycle: dict[int, int] = {}
    for ci, (verts, edges) in enumerate(cycles):
        for v in verts:
            if v in vertex_to_cycle:
                raise Gf2StructureError(
                    f"overlapping core flippable cycles: vertex {v} is on two"
                )
            vertex_to_cycle[v] = ci
        if len(verts) != len(edges):
            raise Gf2StructureError("cycle must have as many vertices as equations")
    for ci, (verts, edges) in enumerate(cycles):
        vset = set(verts)
        for e in edges:
            if st.edge_consumer[e] >= 0:
                raise Gf2StructureError(f"cycle equation {e} is not a core equation")
            for u in inst.vars_array[e]:
                u = int(u)
                if u in vertex_to_cycle and vertex_to_cycle[u] != ci and u not in vset:
                    raise Gf2StructureError(
                        "cycles interact through a shared equation"
                    )
    return vertex_to_cycle


def _walk_cycle(inst: XorsatInstance, verts, edges, sigma, cycle_vset):
    """Chain the two-variable reduced cycle equations starting from the
    lowest vertex; returns (designated u, {v: z_v}) with chi(v) = {u}."""
    verts = [int(v) for v in verts]
    edges = [int(e) for e in edges]
    # edge -> its two cycle vertices; vertex -> its two edges
    edges_of = defaultdict(list)
    t = len(verts)
    for i in range(t):
        # v_i sits in e_i and e_{i+1}
        edges_of[verts[i]].extend([edges[i], edges[(i + 1) % t]])
    u = min(verts)
    zmap = {u: 0}
    cur_v, cur_e = u, edges_of[u][1]
    for _ in range(t - 1):
        ents = [int(x) for x in inst.vars_array[cur_e]]
        b = int(inst.rhs[cur_e])
        nxt = None
        for x in ents:
            if x in cycle_vset:
                if x != cur_v:
                    nxt = x
            else:
                b ^= int(sigma[x])
        if nxt is None:
            raise Gf2StructureError("broken cycle chain")
        zmap[nxt] = zmap[cur_v] ^ b
        e1, e2 = edges_of[nxt]
        cur_e = e2 if e1 == cur_e else e1
        cur_v = nxt
    return u, zmap


def free_structure(
    inst: XorsatInstance, st: StripTrace, cycles, sigma
) -> FreeStructure:
    """Ordered elimination: cycle equations first, then consumed equations in
    reverse removal order.

    ``cycles`` is a list of (vertices, edges) core flippable cycles; they
    must be vertex-disjoint and must not share equations, otherwise the
    construction is refused.  ``sigma`` is any assignment satisfying the
    core equations; only z depends on it.
    """
    if st.k != 2:
        raise Gf2Error("free structure is defined for 2-core stripping")
    sigma = _check_core_assignment(inst, st, sigma)
    cycles = sorted(
        [(tuple(int(v) for v in vs), tuple(int(e) for e in es)) for vs, es in cycles],
        key=lambda ce: min(ce[0]),
    )
    _validate_cycles(inst, st, cycles)

    chi: dict[int, frozenset] = {}
    z: dict[int, int] = {}
    order: list[tuple[int, int]] = []
    designated = []

    for verts, edges in cycles:
        cycle_vset = set(verts)
        u, zmap = _walk_cycle(inst, verts, edges, sigma, cycle_vset)
        designated.append(u)
        for v in verts:
            chi[v] = frozenset({u})
            z[v] = zmap[v]
        for e in edges:
            order.append((e, -1))

    core = st.core_mask
    on_cycle = set().union(*(set(vs) for vs, _ in cycles)) if cycles else set()
    for w in np.flatnonzero(core):
        w = int(w)
        if w not in on_cycle:
            chi[w] = frozenset()
            z[w] = int(sigma[w])

    free_noncore = [int(v) for v in st.free]
    for v in free_noncore:
        chi[v] = frozenset({v})
        z[v] = 0

    consumed = np.flatnonzero(st.edge_consumer >= 0)
    for e in consumed[np.argsort(st.edge_step[consumed])][::-1]:
        e = int(e)
        v = int(st.edge_consumer[e])
        ents = [int(x) for x in inst.vars_array[e]]
        if ents.count(v) % 2 == 0:
            raise Gf2StructureError(
                f"consumer {v} cancels out of its own equation {e}"
            )
        zz = int(inst.rhs[e])
        cc: set = set()
        skipped_self = False
        for x in ents:
            if x == v and not skipped_self:
                skipped_self = True
                continue
            zz ^= z[x]
            cc ^= chi[x]
        chi[v] = frozenset(cc)
        z[v] = zz
        order.append((e, v))

    free = frozenset(free_noncore) | frozenset(designated)
    return FreeStructure(n=inst.n, free=free, chi=chi, z=z, elimination_order=order)


def chi_inverse(fs: FreeStructure, u: int) -> frozenset:
    """{v : u in chi(v)}; defined for free u and always contains u."""
    if u not in fs.free:
        raise Gf2Error(f"{u} is not a free variable")
    return fs.inverse().get(u, frozenset({u}))


def flip_free(solution, fs: FreeStructure, u: int):
    """Flip free variable u and update the dependent variables; involutive,
    and the support of the move is exactly chi_inverse(u)."""
    out = np.array(solution, dtype=np.uint8, copy=True)
    for v in chi_inverse(fs, u):
        out[v] ^= 1
    return out


def extend_core_solution(
    inst: XorsatInstance, st: StripTrace, sigma, free_choice=None
) -> np.ndarray:
    """Extend a core assignment to a full solution by back-substitution in
    reverse removal order; free vertices take ``free_choice`` (default 0)."""
    if st.k != 2:
        raise Gf2Error("extension follows 2-core stripping")
    sigma = _check_core_assignment(inst, st, sigma)
    x = np.zeros(inst.n, dtype=np.uint8)
    core = st.core_mask
    x[core] = sigma[core]
    free_choice = dict(free_choice or {})
    for v in st.free:
        x[int(v)] = int(free_choice.get(int(v), 0)) & 1
    consumed = np.flatnonzero(st.edge_consumer >= 0)
    for e in consumed[np.argsort(st.edge_step[consumed])][::-1]:
        e = int(e)
        v = int(st.edge_consumer[e])
        b = int(inst.rhs[e])
        skipped_self = False
        for u in inst.vars_array[e]:
            u = int(u)
            if u == v and not skipped_self:
                skipped_self = True
                continue
            b ^= int(x[u])
        x[v] = b
    return x


def reference_core_solution(inst: XorsatInstance, st: StripTrace) -> np.ndarray | None:
    """Core solution produced by elimination with zeroed free choices;
    None when the core subsystem (hence the instance) is unsatisfiable."""
    core_sys = Gf2System.from_instance(inst, np.flatnonzero(st.core_edge_mask))
    elim = eliminate(core_sys)
    if not elim.satisfiable:
        return None
    return elim.witness
