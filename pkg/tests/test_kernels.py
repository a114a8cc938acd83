"""Bit-exact parity between the compiled and pure kernel backends."""

import numpy as np
import pytest

from xorlab import _kernels_py
from xorlab.instances import Hypergraph, derive_seed, gen_ap, gen_uniform, project
from xorlab.kernels import BACKEND

cython = pytest.importorskip("xorlab._kernels_cy")


def cases():
    rng_tags = range(120)
    for t in rng_tags:
        from xorlab.instances import make_rng

        rng = make_rng(derive_seed(4040, t))
        n = int(rng.integers(3, 60))
        m = int(rng.integers(0, int(1.3 * n) + 1))
        k = int(rng.integers(2, 4))
        if rng.integers(0, 2):
            h = project(gen_ap(n, m, 3, derive_seed(4040, t, 1)))
        else:
            from math import comb

            h = gen_uniform(n, min(m, comb(n, 3)), 3, derive_seed(4040, t, 2)).hypergraph()
        yield h, k


def test_active_backend_is_compiled():
    assert BACKEND == "cython"


def test_slow_strip_parity():
    for h, k in cases():
        args = (h.n, h.m, h.r, k, h.edges_array, h.inc_ptr, h.inc_edge)
        out_py = _kernels_py.slow_strip_kernel(*args)
        out_cy = cython.slow_strip_kernel(*args)
        assert out_py[7] == out_cy[7]  # step count
        for a, b in zip(out_py[:7], out_cy[:7]):
            assert np.array_equal(np.asarray(a), np.asarray(b))


def test_parallel_strip_parity():
    for h, k in cases():
        args = (h.n, h.m, h.r, k, h.edges_array, h.inc_ptr, h.inc_edge)
        lvl_py, imax_py, live_py = _kernels_py.parallel_strip_kernel(*args)
        lvl_cy, imax_cy, live_cy = cython.parallel_strip_kernel(*args)
        assert imax_py == imax_cy
        assert np.array_equal(lvl_py, lvl_cy)
        assert np.array_equal(live_py, live_cy)


def test_reach_parity():
    for h, k in cases():
        args = (h.n, h.m, h.r, k, h.edges_array, h.inc_ptr, h.inc_edge)
        psi, level, _, _, _, src, dst, _ = _kernels_py.slow_strip_kernel(*args)
        order = np.argsort(src, kind="stable")
        counts = np.bincount(src, minlength=h.n)
        ptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        adj = dst[order].astype(np.int32)
        sources = np.unique(np.concatenate([psi, src.astype(np.int32)])).astype(np.int32)
        a = _kernels_py.reach_sizes_kernel(h.n, ptr, adj, sources)
        b = cython.reach_sizes_kernel(h.n, ptr, adj, sources)
        assert np.array_equal(a, b)


def test_backend_env_override(monkeypatch):
    import importlib
    import xorlab.kernels as km

    monkeypatch.setenv("XORLAB_PURE", "1")
    mod = importlib.reload(km)
    assert mod.BACKEND == "python"
    monkeypatch.delenv("XORLAB_PURE")
    mod = importlib.reload(km)
    assert mod.BACKEND == "cython"
