# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled stripping/reachability kernels.

Twin of ``_kernels_py``: identical signatures and outputs.  See that module
for the queue-discipline contract; tie-breaking (ascending initial queue,
lowest live edge at the front, ascending enqueue of newly light vertices)
must match exactly so both backends produce bit-identical traces.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def slow_strip_kernel(n, m, r, k, edges, inc_ptr, inc_edge):
    cdef Py_ssize_t cn = n, cm = m, cr = r
    cdef long ck = k
    cdef cnp.int32_t[:, ::1] ced = np.ascontiguousarray(edges, dtype=np.int32)
    cdef cnp.int64_t[::1] cptr = np.ascontiguousarray(inc_ptr, dtype=np.int64)
    cdef cnp.int32_t[::1] cinc = np.ascontiguousarray(inc_edge, dtype=np.int32)

    deg_arr = np.diff(inc_ptr).astype(np.int64)
    cdef cnp.int64_t[::1] deg = deg_arr
    live_arr = np.ones(cm, dtype=np.uint8)
    cdef cnp.uint8_t[::1] live_edge = live_arr
    level_arr = np.zeros(cn, dtype=np.int32)
    cdef cnp.int32_t[::1] level = level_arr
    fs_arr = np.full(cn, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] front_step = fs_arr
    ec_arr = np.full(cm, -1, dtype=np.int32)
    cdef cnp.int32_t[::1] edge_consumer = ec_arr
    es_arr = np.full(cm, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] edge_step = es_arr
    inq_arr = np.zeros(cn, dtype=np.uint8)
    cdef cnp.uint8_t[::1] in_queue = inq_arr

    queue_arr = np.empty(cn, dtype=np.int32)
    cdef cnp.int32_t[::1] queue = queue_arr
    arc_cap = (cr - 1) * cm if cm > 0 else 1
    asrc_arr = np.empty(arc_cap, dtype=np.int32)
    adst_arr = np.empty(arc_cap, dtype=np.int32)
    cdef cnp.int32_t[::1] arc_src = asrc_arr
    cdef cnp.int32_t[::1] arc_dst = adst_arr

    cdef cnp.int32_t[::1] buf = np.empty(cr, dtype=np.int32)

    cdef Py_ssize_t head = 0, tail = 0, n_arcs = 0, n_psi = 0
    cdef long long step = 0
    cdef Py_ssize_t v, u, e, ei, j, t, nb, w
    cdef cnp.int32_t tmp

    psi_arr = np.empty(cn, dtype=np.int32)
    cdef cnp.int32_t[::1] psi = psi_arr

    for v in range(cn):
        if deg[v] < ck:
            queue[tail] = <cnp.int32_t> v
            tail += 1
            in_queue[v] = 1
            level[v] = 1

    while head < tail:
        v = queue[head]
        if front_step[v] < 0:
            front_step[v] = step
        if deg[v] == 0:
            head += 1
            psi[n_psi] = <cnp.int32_t> v
            n_psi += 1
            continue
        e = -1
        for j in range(cptr[v], cptr[v + 1]):
            ei = cinc[j]
            if live_edge[ei] and (e < 0 or ei < e):
                e = ei
        live_edge[e] = 0
        edge_consumer[e] = <cnp.int32_t> v
        edge_step[e] = step
        # distinct entries of edge e, ascending (insertion sort of <= r items)
        nb = 0
        for j in range(cr):
            u = ced[e, j]
            deg[u] -= 1
            t = 0
            while t < nb and buf[t] != u:
                t += 1
            if t == nb:
                buf[nb] = <cnp.int32_t> u
                nb += 1
        for j in range(1, nb):
            tmp = buf[j]
            t = j
            while t > 0 and buf[t - 1] > tmp:
                buf[t] = buf[t - 1]
                t -= 1
            buf[t] = tmp
        for j in range(nb):
            u = buf[j]
            if u != v:
                arc_src[n_arcs] = <cnp.int32_t> u
                arc_dst[n_arcs] = <cnp.int32_t> v
                n_arcs += 1
        for j in range(nb):
            u = buf[j]
            if (not in_queue[u]) and deg[u] < ck:
                in_queue[u] = 1
                level[u] = level[v] + 1
                queue[tail] = <cnp.int32_t> u
                tail += 1
        step += 1

    return (
        psi_arr[:n_psi].copy(),
        level_arr,
        fs_arr,
        ec_arr,
        es_arr,
        asrc_arr[:n_arcs].copy(),
        adst_arr[:n_arcs].copy(),
        int(step),
    )


def parallel_strip_kernel(n, m, r, k, edges, inc_ptr, inc_edge):
    cdef Py_ssize_t cn = n, cm = m, cr = r
    cdef long ck = k
    cdef cnp.int32_t[:, ::1] ced = np.ascontiguousarray(edges, dtype=np.int32)
    cdef cnp.int64_t[::1] cptr = np.ascontiguousarray(inc_ptr, dtype=np.int64)
    cdef cnp.int32_t[::1] cinc = np.ascontiguousarray(inc_edge, dtype=np.int32)

    deg_arr = np.diff(inc_ptr).astype(np.int64)
    cdef cnp.int64_t[::1] deg = deg_arr
    live_arr = np.ones(cm, dtype=np.uint8)
    cdef cnp.uint8_t[::1] live_edge = live_arr
    level_arr = np.zeros(cn, dtype=np.int32)
    cdef cnp.int32_t[::1] level = level_arr
    removed_arr = np.zeros(cn, dtype=np.uint8)
    cdef cnp.uint8_t[::1] removed = removed_arr

    front_arr = np.empty(cn, dtype=np.int32)
    nxt_arr = np.empty(cn, dtype=np.int32)
    mark_arr = np.zeros(cn, dtype=np.uint8)
    cdef cnp.int32_t[::1] front = front_arr
    cdef cnp.int32_t[::1] nxt = nxt_arr
    cdef cnp.uint8_t[::1] mark = mark_arr

    cdef Py_ssize_t nf = 0, nt, v, u, e, j, t, w
    cdef long i = 0

    for v in range(cn):
        if deg[v] < ck:
            front[nf] = <cnp.int32_t> v
            nf += 1

    while nf > 0:
        i += 1
        for t in range(nf):
            v = front[t]
            level[v] = <cnp.int32_t> i
            removed[v] = 1
        nt = 0
        for t in range(nf):
            v = front[t]
            for j in range(cptr[v], cptr[v + 1]):
                e = cinc[j]
                if live_edge[e]:
                    live_edge[e] = 0
                    for u in range(cr):
                        w = ced[e, u]
                        deg[w] -= 1
                        if not mark[w]:
                            mark[w] = 1
                            nxt[nt] = <cnp.int32_t> w
                            nt += 1
        nf = 0
        for t in range(nt):
            u = nxt[t]
            mark[u] = 0
            if (not removed[u]) and deg[u] < ck:
                front[nf] = <cnp.int32_t> u
                nf += 1
        # ascending order within the round (matches the python twin; the
        # outputs do not depend on it, but keep the loops identical)
        front_arr[:nf].sort()

    return level_arr, int(i), live_arr.view(bool)


def reach_sizes_kernel(n, out_ptr, out_dst, sources):
    cdef Py_ssize_t cn = n
    cdef cnp.int64_t[::1] cptr = np.ascontiguousarray(out_ptr, dtype=np.int64)
    cdef cnp.int32_t[::1] cdst = np.ascontiguousarray(out_dst, dtype=np.int32)
    cdef cnp.int32_t[::1] csrc = np.ascontiguousarray(sources, dtype=np.int32)

    stamp_arr = np.full(cn, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] stamp = stamp_arr
    stack_arr = np.empty(cn, dtype=np.int32)
    cdef cnp.int32_t[::1] stack = stack_arr
    sizes_arr = np.empty(len(sources), dtype=np.int64)
    cdef cnp.int64_t[::1] sizes = sizes_arr

    cdef Py_ssize_t idx, s, x, y, j, top
    cdef long long count

    for idx in range(csrc.shape[0]):
        s = csrc[idx]
        stamp[s] = idx
        stack[0] = <cnp.int32_t> s
        top = 1
        count = 0
        while top > 0:
            top -= 1
            x = stack[top]
            count += 1
            for j in range(cptr[x], cptr[x + 1]):
                y = cdst[j]
                if stamp[y] != idx:
                    stamp[y] = idx
                    stack[top] = <cnp.int32_t> y
                    top += 1
        sizes[idx] = count
    return sizes_arr
