"""Shared corpora and independent oracles for the test suite."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from xorlab.instances import XorsatInstance, derive_seed, gen_uniform, make_rng

ORACLE_SEED = 20250801
ORACLE_COUNT = 500
ORACLE_MAX_NULLITY = 12  # keeps exhaustive enumeration below 4096 solutions


def _draw_oracle_instance(trial: int) -> XorsatInstance:
    """Small r=3 instance with n, m <= 14 and a bounded solution count."""
    for attempt in itertools.count():
        rng = make_rng(derive_seed(ORACLE_SEED, trial, attempt))
        n = int(rng.integers(6, 15))
        max_m = min(14, (n * (n - 1) * (n - 2)) // 6)
        lo = max(1, n - ORACLE_MAX_NULLITY)
        m = int(rng.integers(lo, max_m + 1)) if lo <= max_m else max_m
        inst = gen_uniform(n, m, 3, derive_seed(ORACLE_SEED, trial, attempt, 1))
        if n - m <= ORACLE_MAX_NULLITY:
            return inst


@pytest.fixture(scope="session")
def oracle_instances() -> list[XorsatInstance]:
    return [_draw_oracle_instance(t) for t in range(ORACLE_COUNT)]


def hand_gadgets() -> dict[str, XorsatInstance]:
    """Named fixed instances used throughout the suite."""
    gadget = [((0, 1, 2), 0), ((2, 3, 4), 0), ((4, 5, 0), 0), ((1, 3, 5), 0)]
    tail = [((0, 6, 7), 0), ((0, 8, 9), 1)]
    return {
        "single": XorsatInstance(3, 3, [((0, 1, 2), 0)]),
        "single_odd": XorsatInstance(3, 3, [((0, 1, 2), 1)]),
        "path": XorsatInstance(5, 3, [((0, 1, 2), 0), ((2, 3, 4), 1)]),
        "gadget": XorsatInstance(6, 3, gadget),
        "gadget_tail": XorsatInstance(10, 3, gadget + tail),
        "two_cycle": XorsatInstance(4, 3, [((0, 1, 2), 0), ((0, 1, 3), 1)]),
    }


@pytest.fixture(scope="session")
def gadgets():
    return hand_gadgets()


def eliminate_sets(rows: list[tuple[set, int]], n: int):
    """Naive row-list RREF over GF(2) with set supports; independent oracle
    for the packed elimination.  Returns (rank, satisfiable)."""
    work = [(set(s), b) for s, b in rows]
    rank = 0
    for col in range(n):
        pivot = None
        for i in range(rank, len(work)):
            if col in work[i][0]:
                pivot = i
                break
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        psup, pb = work[rank]
        for i in range(len(work)):
            if i != rank and col in work[i][0]:
                sup, b = work[i]
                work[i] = (sup ^ psup, b ^ pb)
        rank += 1
        if rank == len(work):
            break
    sat = all(b == 0 for sup, b in work if not sup)
    return rank, sat


def all_hypergraphs(n: int, max_m: int, r: int = 3):
    """Every simple r-uniform hypergraph on [0, n) with at most max_m edges."""
    from xorlab.instances import Hypergraph

    universe = list(itertools.combinations(range(n), r))
    for m in range(max_m + 1):
        for combo in itertools.combinations(universe, m):
            yield Hypergraph(n, np.array(combo, dtype=np.int32).reshape(m, r))
