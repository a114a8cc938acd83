import itertools

import numpy as np
import pytest

from conftest import all_hypergraphs, hand_gadgets
from xorlab.clusters import (
    ConnectivityProfile,
    analyze_clusters,
    build_aux_graph,
    core_cycle_stats,
    core_flippable,
    cycle_space_dim,
    enumerate_flippable_cycles,
    enumerate_solutions,
    flippable_vertices,
    hamming_cross,
    partition_clusters,
)
from xorlab.gf2 import Gf2Error, Gf2StructureError, free_structure, reference_core_solution
from xorlab.instances import Hypergraph, XorsatInstance, derive_seed, gen_ap, make_rng, project
from xorlab.stripping import parallel_strip, slow_strip

GADGET_EDGES = [(0, 1, 2), (2, 3, 4), (4, 5, 0), (1, 3, 5)]


def brute_flippable(h: Hypergraph) -> set[int]:
    """Exhaustive oracle: try every subset of degree-2 vertices as a cycle
    per the definition (each vertex in exactly two of the incident edges,
    incident edges chainable into one circular order)."""
    report = enumerate_flippable_cycles(h, cap=100000)
    assert not report.truncated
    out = set()
    for verts, _ in report.cycles:
        out.update(verts)
    return out


def test_flippable_bridge_case():
    assert flippable_vertices(Hypergraph(5, [(0, 1, 2), (2, 3, 4)])) == set()


def test_flippable_gadget_all():
    assert flippable_vertices(Hypergraph(6, GADGET_EDGES)) == set(range(6))


def test_gadget_seven_cycles():
    rep = enumerate_flippable_cycles(Hypergraph(6, GADGET_EDGES))
    assert len(rep.cycles) == 7
    lengths = sorted(len(v) for v, _ in rep.cycles)
    assert lengths == [3, 3, 3, 3, 4, 4, 4]
    assert not rep.disjoint
    assert rep.total_mass == 6
    for verts, edges in rep.cycles:
        assert len(verts) == len(edges)


def test_two_parallel_links_single_two_cycle():
    rep = enumerate_flippable_cycles(Hypergraph(4, [(0, 1, 2), (0, 1, 3)]))
    assert len(rep.cycles) == 1
    verts, edges = rep.cycles[0]
    assert sorted(verts) == [0, 1]
    assert sorted(edges) == [0, 1]
    assert rep.disjoint


def test_forest_aux_graph_no_cycles():
    rep = enumerate_flippable_cycles(Hypergraph(7, [(0, 1, 2), (2, 3, 4), (4, 5, 6)]))
    assert rep.cycles == []
    assert rep.total_mass == 0


def test_cycle_layout_definition():
    # v_i lies in e_i and e_{i+1} (cyclically) and has degree exactly 2
    for h in [Hypergraph(6, GADGET_EDGES), Hypergraph(4, [(0, 1, 2), (0, 1, 3)])]:
        rep = enumerate_flippable_cycles(h)
        for verts, edges in rep.cycles:
            t = len(verts)
            for i, v in enumerate(verts):
                assert v in h.edges[edges[i]]
                assert v in h.edges[edges[(i + 1) % t]]
                assert h.degree[v] == 2


def test_self_loop_vertex_dropped():
    # both incidences of vertex 0 inside one edge: excluded from the analysis
    aux = build_aux_graph(Hypergraph(3, [(0, 0, 1), (1, 2, 2)]))
    assert aux.dropped == [0, 2]
    assert flippable_vertices(Hypergraph(3, [(0, 0, 1), (1, 2, 2)])) == set()


def test_bridge_detection_vs_enumeration_exhaustive_small():
    # the full <=5-edge sweep runs in acceptance; spot the n=5, m<=3 slice here
    for h in all_hypergraphs(5, 3):
        assert flippable_vertices(h) == brute_flippable(h)


def test_bridge_detection_vs_enumeration_random():
    for t in range(300):
        rng = make_rng(derive_seed(31, t))
        n = int(rng.integers(4, 14))
        m = int(rng.integers(0, 8))
        h = project(gen_ap(n, m, 3, derive_seed(31, t, 1)))
        assert flippable_vertices(h) == brute_flippable(h)


def test_block_disjoint_matches_enumeration():
    for t in range(300):
        rng = make_rng(derive_seed(37, t))
        n = int(rng.integers(4, 14))
        m = int(rng.integers(0, 8))
        h = project(gen_ap(n, m, 3, derive_seed(37, t, 1)))
        rep = enumerate_flippable_cycles(h, cap=100000)
        assert not rep.truncated
        seen = {}
        disjoint = True
        for ci, (verts, _) in enumerate(rep.cycles):
            for v in verts:
                if v in seen and seen[v] != ci:
                    disjoint = False
                seen[v] = ci
        aux = build_aux_graph(h)
        from xorlab.clusters import _block_summary

        _, blocks_disjoint = _block_summary(aux)
        assert rep.disjoint == disjoint == blocks_disjoint


def test_core_flippable_empty_core():
    h = Hypergraph(5, [(0, 1, 2), (2, 3, 4)])
    pt = parallel_strip(h, 2)
    rep = core_flippable(h, pt)
    assert rep.cycles == [] and rep.total_mass == 0


def test_core_flippable_gadget_with_pendants():
    # extra pendant edges raise vertex 0's degree in H but not in the core
    edges = GADGET_EDGES + [(0, 6, 7), (0, 8, 9)]
    h = Hypergraph(10, edges)
    pt = parallel_strip(h, 2)
    assert set(pt.core_vertices().tolist()) == set(range(6))
    rep = core_flippable(h, pt)
    assert len(rep.cycles) == 7
    assert rep.on_cycle_vertices == frozenset(range(6))
    mass, disjoint, verts = core_cycle_stats(h, pt)
    assert (mass, disjoint, verts) == (6, False, frozenset(range(6)))


def test_cycle_flip_closure(oracle_instances, gadgets):
    # flipping a flippable cycle of H preserves satisfaction outright (every
    # incident equation holds exactly two flipped vertices); flipping a CORE
    # cycle preserves the core equations and yields a solution after
    # re-extending the stripped part with the same free choices
    from xorlab.gf2 import extend_core_solution

    insts = list(oracle_instances[:80]) + [gadgets["gadget"], gadgets["gadget_tail"]]
    direct = extended = 0
    for inst in insts:
        h = inst.hypergraph()
        st = slow_strip(h, 2)
        sols = enumerate_solutions(inst, limit=4096)
        if not len(sols):
            continue
        whole = enumerate_flippable_cycles(h, cap=4096)
        if not whole.truncated:
            for verts, _ in whole.cycles:
                mask = np.zeros(inst.n, dtype=np.uint8)
                mask[list(verts)] = 1
                for x in sols[:8]:
                    assert inst.check(x ^ mask)
                    direct += 1
        rep = core_flippable(h, st)
        free = [int(v) for v in st.free]
        for verts, _ in rep.cycles[:8]:
            mask = np.zeros(inst.n, dtype=np.uint8)
            mask[list(verts)] = 1
            for x in sols[:8]:
                sigma2 = (x ^ mask).astype(np.uint8)
                y = extend_core_solution(
                    inst, st, sigma2, {v: int(x[v]) for v in free}
                )
                assert inst.check(y)
                # same cluster: the flip moved the core only on cycle vertices
                core = st.core_mask
                diff = np.flatnonzero((x != y) & core)
                assert set(diff.tolist()) <= set(rep.on_cycle_vertices)
                extended += 1
    assert direct > 50 and extended > 50


def test_enumerate_solutions_single_equation():
    inst = XorsatInstance(3, 3, [((0, 1, 2), 0)])
    sols = enumerate_solutions(inst)
    assert [tuple(s) for s in sols] == [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)]


def test_enumerate_solutions_unsat():
    inst = XorsatInstance(
        4, 3, [((0, 1, 2), 0), ((0, 1, 2), 1)], model_tag="ap-config"
    )
    assert len(enumerate_solutions(inst)) == 0
    assert len(enumerate_solutions(inst, method="brute")) == 0


def test_enumerate_solutions_limit():
    inst = XorsatInstance(5, 3, [((0, 1, 2), 0)])
    with pytest.raises(Gf2Error, match="too many"):
        enumerate_solutions(inst, limit=7)


def test_enumeration_dual_oracle(oracle_instances):
    for inst in oracle_instances[:60]:
        a = enumerate_solutions(inst, limit=1 << 13)
        b = enumerate_solutions(inst, limit=1 << 13, method="brute")
        assert np.array_equal(a, b)


def test_partition_single_equation():
    inst = XorsatInstance(3, 3, [((0, 1, 2), 0)])
    sols = enumerate_solutions(inst)
    geo = partition_clusters(sols, [], [])
    assert geo.cluster_count == 1
    assert geo.f_within == 2
    assert geo.g_between is None


def test_partition_empty_core_single_cluster(oracle_instances):
    for inst in oracle_instances[:40]:
        st = slow_strip(inst.hypergraph(), 2)
        if st.core_vertices().size:
            continue
        sols = enumerate_solutions(inst, limit=4096)
        if not len(sols):
            continue
        geo = partition_clusters(sols, [], [])
        assert geo.cluster_count == 1
        assert geo.cluster_size == len(sols)


def test_partition_gadget_tail_identity(gadgets):
    inst = gadgets["gadget_tail"]
    st = slow_strip(inst.hypergraph(), 2)
    rep = core_flippable(inst.hypergraph(), st)
    sols = enumerate_solutions(inst)
    geo = partition_clusters(sols, st.core_vertices(), rep.on_cycle_vertices)
    assert geo.cluster_count * geo.cluster_size == len(sols)
    assert geo.cluster_size == 2 ** geo.free_count


def test_connectivity_profile_extremes(oracle_instances):
    inst = oracle_instances[0]
    sols = enumerate_solutions(inst, limit=4096)
    if len(sols):
        assert ConnectivityProfile(sols, inst.n).n_components == 1
        assert ConnectivityProfile(sols, 0).n_components == len(sols)


def test_connectivity_monotone_coarsening(oracle_instances):
    for inst in oracle_instances[:200]:
        try:
            sols = enumerate_solutions(inst, limit=512)
        except Gf2Error:
            continue
        if len(sols) < 2:
            continue
        dists = hamming_cross(sols, sols)
        cuts = sorted(set(dists[dists > 0].tolist()))[:3]
        prev = None
        for f in [0] + cuts:
            comp = ConnectivityProfile(sols, f).n_components
            if prev is not None:
                assert comp <= prev
            prev = comp


def test_profile_queries():
    inst = XorsatInstance(3, 3, [((0, 1, 2), 0)])
    sols = enumerate_solutions(inst)
    prof = ConnectivityProfile(sols, 1)
    assert prof.is_f_connected([0])
    assert not prof.is_f_connected([0, 1])
    assert prof.f_separated([0], [1])
    prof2 = ConnectivityProfile(sols, 2)
    assert prof2.is_f_connected(range(4))
    assert not prof2.f_separated([0], [1])


def test_free_count_identity(oracle_instances):
    # cluster size is 2^(indegree-zero count + cycle-space dimension), with
    # the ordered elimination agreeing whenever the cycles are disjoint
    for inst in oracle_instances[:120]:
        st = slow_strip(inst.hypergraph(), 2)
        sols = enumerate_solutions(inst, limit=4096)
        if not len(sols):
            continue
        rep = core_flippable(inst.hypergraph(), st)
        geo = partition_clusters(sols, st.core_vertices(), rep.on_cycle_vertices)
        aux = build_aux_graph(inst.hypergraph(), core=st)
        expect = int(st.free.size) + cycle_space_dim(aux)
        assert geo.free_count == expect
        assert geo.cluster_count * geo.cluster_size == len(sols)
        sigma = reference_core_solution(inst, st)
        try:
            fs = free_structure(inst, st, rep.cycles, sigma)
            assert len(fs.free) == expect
        except Gf2StructureError:
            pass


def test_structural_cluster_construction(oracle_instances):
    # clusters = extensions of core solutions modulo cycle flips
    from xorlab.gf2 import Gf2System, eliminate

    tested = 0
    for inst in oracle_instances[:60]:
        st = slow_strip(inst.hypergraph(), 2)
        core = st.core_vertices()
        if core.size == 0:
            continue
        sols = enumerate_solutions(inst, limit=4096)
        if not len(sols):
            continue
        rep = core_flippable(inst.hypergraph(), st)
        geo = partition_clusters(sols, core, rep.on_cycle_vertices)
        # group core restrictions by off-cycle pattern
        off = sorted(set(core.tolist()) - set(rep.on_cycle_vertices))
        patterns = {tuple(x[off]) for x in sols}
        assert len(patterns) == geo.cluster_count
        tested += 1
    assert tested > 10


def test_g_between_equals_min_crossing_nullvector(oracle_instances):
    # definitional identity: the gap between clusters is the lightest full
    # nullspace vector whose off-cycle core restriction is nonzero; also at
    # least the lightest nonzero core-subsystem nullspace vector
    from xorlab.gf2 import Gf2System, eliminate

    tested = 0
    for inst in oracle_instances:
        if tested >= 25:
            break
        st = slow_strip(inst.hypergraph(), 2)
        core = st.core_vertices()
        if core.size == 0:
            continue
        sols = enumerate_solutions(inst, limit=2048)
        if len(sols) < 2:
            continue
        rep = core_flippable(inst.hypergraph(), st)
        geo = partition_clusters(sols, core, rep.on_cycle_vertices)
        if geo.cluster_count < 2:
            continue
        res = eliminate(Gf2System.from_instance(inst))
        if res.nullity > 11:
            continue
        off = sorted(set(core.tolist()) - set(rep.on_cycle_vertices))
        best_full = None
        best_core = None
        for bits in itertools.product([0, 1], repeat=res.nullity):
            if not any(bits):
                continue
            v = np.zeros(inst.n, dtype=np.uint8)
            for i, b in enumerate(bits):
                if b:
                    v ^= res.basis[i]
            if any(v[off]):
                w = int(v.sum())
                best_full = w if best_full is None else min(best_full, w)
            cw = int(v[core].sum())
            if cw:
                best_core = cw if best_core is None else min(best_core, cw)
        assert geo.g_between == best_full
        if best_core is not None:
            assert geo.g_between >= best_core
        tested += 1
    assert tested >= 15


def test_f_within_respects_pinned_path_bound(oracle_instances):
    # a pinned chain chi(v) = {u} forces every move through u to flip the
    # whole chain, so f_within is at least 1 + chain length
    from test_gf2 import pipeline

    tested = 0
    for inst in oracle_instances[:80]:
        st, rep, sigma, fs = pipeline(inst)
        if fs is None:
            continue
        sols = enumerate_solutions(inst, limit=4096)
        if not len(sols):
            continue
        geo = partition_clusters(sols, st.core_vertices(), rep.on_cycle_vertices)
        pinned = {}
        for v, s in fs.chi.items():
            if len(s) == 1 and v not in fs.free:
                (u,) = s
                pinned[u] = pinned.get(u, 0) + 1
        if fs.free:
            bound = 1 + max((pinned.get(u, 0) for u in fs.free), default=0)
            assert geo.f_within >= bound
            tested += 1
    assert tested > 20


def test_analyze_clusters_pipeline(gadgets):
    info = analyze_clusters(gadgets["gadget"])
    assert info["solutions"] == 8
    assert info["cluster_count"] == 1
    assert info["cluster_size"] == 8
    assert info["free_count"] == 3
    assert info["cycle_mass"] == 6
    assert info["core_vertices"] == 6
    info2 = analyze_clusters(gadgets["single"])
    assert info2["solutions"] == 4 and info2["free_count"] == 2
    unsat = XorsatInstance(4, 3, [((0, 1, 2), 0), ((0, 1, 2), 1)], model_tag="ap-config")
    info3 = analyze_clusters(unsat)
    assert info3["solutions"] == 0 and info3["cluster_count"] == 0
