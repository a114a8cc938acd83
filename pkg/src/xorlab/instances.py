"""Random r-XORSAT instances and their hypergraphs.

Two generators are provided: uniformly chosen distinct r-subsets with fair
right-hand-side bits, and the allocation/partition configuration model whose
projection is a multihypergraph (repeated vertices inside an edge and
repeated edges are allowed and preserved).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

MODEL_UNIFORM = "uniform-simple"
MODEL_AP = "ap-config"


class InstanceFormatError(ValueError):
    """Malformed instance file."""


def derive_seed(*parts) -> int:
    """Mix integer parts into one 64-bit stream key (order-sensitive)."""
    ss = np.random.SeedSequence([int(p) & 0xFFFFFFFFFFFFFFFF for p in parts])
    return int(ss.generate_state(1, np.uint64)[0])


def make_rng(seed) -> np.random.Generator:
    """Counter-based generator so seeds index independent streams."""
    return np.random.Generator(np.random.Philox(seed))


class Hypergraph:
    """r-uniform multihypergraph with a vertex -> incident-edges index.

    Degrees count incidences: a vertex occurring twice in one edge
    contributes two.
    """

    def __init__(self, n: int, edges):
        self.n = int(n)
        arr = np.asarray(edges, dtype=np.int32)
        if arr.size == 0:
            arr = arr.reshape(0, arr.shape[1] if arr.ndim == 2 else 0)
        if arr.ndim != 2:
            raise ValueError("edges must be an (m, r) array")
        if arr.size and (arr.min() < 0 or arr.max() >= self.n):
            raise ValueError("vertex index out of range")
        self.edges_array = arr
        self.m = arr.shape[0]
        self.r = arr.shape[1]
        order = np.argsort(arr.ravel(), kind="stable") if arr.size else np.empty(0, np.int64)
        self.inc_edge = (order // max(self.r, 1)).astype(np.int32)
        counts = np.bincount(arr.ravel(), minlength=self.n) if arr.size else np.zeros(self.n, np.int64)
        self.inc_ptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self.degree = np.diff(self.inc_ptr).astype(np.int64)

    @property
    def edges(self) -> list[tuple[int, ...]]:
        return [tuple(int(x) for x in row) for row in self.edges_array]

    def incident_edges(self, v: int) -> np.ndarray:
        return self.inc_edge[self.inc_ptr[v] : self.inc_ptr[v + 1]]

    def __eq__(self, other):
        return (
            isinstance(other, Hypergraph)
            and self.n == other.n
            and self.edges_array.shape == other.edges_array.shape
            and np.array_equal(self.edges_array, other.edges_array)
        )

    def __repr__(self):
        return f"Hypergraph(n={self.n}, m={self.m}, r={self.r})"


class XorsatInstance:
    """System of m parity constraints, each on exactly r variables."""

    def __init__(self, n: int, r: int, equations, model_tag: str = MODEL_UNIFORM):
        self.n = int(n)
        self.r = int(r)
        self.model_tag = model_tag
        vars_list = []
        rhs_list = []
        for vs, b in equations:
            vars_list.append(tuple(int(x) for x in vs))
            rhs_list.append(int(b) & 1)
        self.vars_array = np.asarray(vars_list, dtype=np.int32).reshape(len(vars_list), self.r)
        self.rhs = np.asarray(rhs_list, dtype=np.uint8)
        self._validate()

    @classmethod
    def from_arrays(cls, n: int, r: int, vars_array, rhs, model_tag: str = MODEL_UNIFORM):
        inst = cls.__new__(cls)
        inst.n = int(n)
        inst.r = int(r)
        inst.model_tag = model_tag
        inst.vars_array = np.ascontiguousarray(vars_array, dtype=np.int32).reshape(-1, inst.r)
        inst.rhs = (np.asarray(rhs, dtype=np.uint8) & 1).reshape(-1)
        if inst.rhs.shape[0] != inst.vars_array.shape[0]:
            raise ValueError("rhs length must match equation count")
        inst._validate()
        return inst

    def _validate(self):
        if self.r < 3:
            raise ValueError("arity r must be at least 3")
        if self.vars_array.size and (
            self.vars_array.min() < 0 or self.vars_array.max() >= self.n
        ):
            raise ValueError("variable index out of range")
        if self.model_tag == MODEL_UNIFORM and self.m:
            srt = np.sort(self.vars_array, axis=1)
            if np.any(np.diff(srt, axis=1) == 0):
                raise ValueError("repeated variable inside an equation")
            if len(np.unique(srt, axis=0)) != self.m:
                raise ValueError("two equations share the same variable set")

    @property
    def m(self) -> int:
        return self.vars_array.shape[0]

    @property
    def c(self) -> float:
        return self.m / self.n if self.n else 0.0

    @property
    def equations(self) -> list[tuple[tuple[int, ...], int]]:
        return [
            (tuple(int(x) for x in row), int(b))
            for row, b in zip(self.vars_array, self.rhs)
        ]

    def hypergraph(self) -> Hypergraph:
        return Hypergraph(self.n, self.vars_array)

    def check(self, assignment) -> bool:
        """True iff the 0/1 assignment satisfies every equation."""
        a = np.asarray(assignment, dtype=np.uint8)
        if self.m == 0:
            return True
        parity = np.bitwise_xor.reduce(a[self.vars_array], axis=1)
        return bool(np.all(parity == self.rhs))

    def __eq__(self, other):
        return (
            isinstance(other, XorsatInstance)
            and self.n == other.n
            and self.r == other.r
            and self.model_tag == other.model_tag
            and self.vars_array.shape == other.vars_array.shape
            and np.array_equal(self.vars_array, other.vars_array)
            and np.array_equal(self.rhs, other.rhs)
        )

    def __repr__(self):
        return (
            f"XorsatInstance(n={self.n}, m={self.m}, r={self.r}, "
            f"model={self.model_tag!r})"
        )


@dataclass
class Configuration:
    """Allocation of r*m vertex-copies into n bins plus a partition into
    m parts of size r (parts hold copy indices)."""

    n: int
    r: int
    bin_of_copy: np.ndarray
    parts: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return self.parts.shape[0]


def gen_uniform(n: int, m: int, r: int, seed) -> XorsatInstance:
    """m distinct r-subsets drawn uniformly without replacement, fair RHS bits.

    Deterministic given (n, m, r, seed).
    """
    if r < 3:
        raise ValueError("arity r must be at least 3")
    total = comb(n, r)
    if m > total:
        raise ValueError(f"m={m} exceeds the {total} available {r}-subsets")
    rng = make_rng(seed)

    if total <= 4 * m or total <= 1 << 16:
        # dense regime: enumerate and take a random prefix of a permutation
        from itertools import combinations

        all_sets = list(combinations(range(n), r))
        idx = rng.permutation(total)[:m]
        rows = np.asarray([all_sets[i] for i in idx], dtype=np.int32).reshape(m, r)
    else:
        # rejection sampling; sorted rows are keyed by a mixed-radix integer
        # (or raw bytes when n**r would overflow) for the duplicate check
        arithmetic_keys = n ** r < 2 ** 62
        seen: set = set()
        parts = []
        count = 0
        while count < m:
            batch = rng.integers(0, n, size=(max(64, 2 * (m - count)), r))
            batch.sort(axis=1)
            batch = batch[np.all(np.diff(batch, axis=1) > 0, axis=1)]
            if arithmetic_keys:
                keys = batch[:, 0].astype(np.int64)
                for j in range(1, r):
                    keys = keys * n + batch[:, j]
                keylist = keys.tolist()
            else:
                keylist = [row.tobytes() for row in np.ascontiguousarray(batch)]
            fresh = []
            for i, key in enumerate(keylist):
                if key not in seen:
                    seen.add(key)
                    fresh.append(i)
                    count += 1
                    if count == m:
                        break
            parts.append(batch[fresh])
        rows = np.concatenate(parts).astype(np.int32)[:m]
    rhs = rng.integers(0, 2, size=m, dtype=np.uint8)
    return XorsatInstance.from_arrays(n, r, rows, rhs, model_tag=MODEL_UNIFORM)


def gen_ap(n: int, m: int, r: int, seed) -> Configuration:
    """Uniform allocation of the r*m copies to bins + uniform partition."""
    if r < 3:
        raise ValueError("arity r must be at least 3")
    if n < 1:
        raise ValueError("need at least one bin")
    rng = make_rng(seed)
    bins = rng.integers(0, n, size=r * m, dtype=np.int32)
    parts = rng.permutation(r * m).astype(np.int32).reshape(m, r)
    return Configuration(n=n, r=r, bin_of_copy=bins, parts=parts)


def project(conf: Configuration) -> Hypergraph:
    """Each part becomes an edge listing the bins of its copies (repeats
    preserved, entries sorted for a canonical form)."""
    edges = np.sort(conf.bin_of_copy[conf.parts], axis=1)
    return Hypergraph(conf.n, edges.reshape(conf.m, conf.r))


def is_simple(h: Hypergraph) -> bool:
    """No repeated vertex inside an edge, no two edges on the same set."""
    if h.m == 0:
        return True
    srt = np.sort(h.edges_array, axis=1)
    if np.any(np.diff(srt, axis=1) == 0):
        return False
    return len(np.unique(srt, axis=0)) == h.m


def instance_from_hypergraph(h: Hypergraph, seed, model_tag: str = MODEL_AP) -> XorsatInstance:
    """Attach independent fair RHS bits to the edges of h."""
    rng = make_rng(seed)
    rhs = rng.integers(0, 2, size=h.m, dtype=np.uint8)
    return XorsatInstance.from_arrays(h.n, h.r, h.edges_array, rhs, model_tag=model_tag)


def gen_ap_instance(
    n: int, m: int, r: int, seed, condition_simple: bool = False, max_tries: int = 1000
) -> XorsatInstance:
    """XORSAT instance over a configuration-model hypergraph.

    With ``condition_simple`` the configuration is redrawn (from derived
    streams) until its projection is simple.
    """
    for trial in range(max_tries):
        h = project(gen_ap(n, m, r, derive_seed(seed, trial)))
        if not condition_simple or is_simple(h):
            tag = MODEL_UNIFORM if condition_simple else MODEL_AP
            return instance_from_hypergraph(h, derive_seed(seed, trial, 1), model_tag=tag)
    raise RuntimeError("no simple configuration found")


def write_instance(inst: XorsatInstance, path) -> None:
    """Text format: '# model: TAG', 'p xor n m r', then 'e v1 .. vr b' lines."""
    with open(path, "w") as fh:
        fh.write(f"# model: {inst.model_tag}\n")
        fh.write(f"p xor {inst.n} {inst.m} {inst.r}\n")
        for vs, b in zip(inst.vars_array, inst.rhs):
            fh.write("e " + " ".join(str(int(v)) for v in vs) + f" {int(b)}\n")


def read_instance(path) -> XorsatInstance:
    """Parse the instance format; errors carry 1-based line numbers."""
    header = None
    model_tag = None
    equations = []
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("model:"):
                    model_tag = body.split(":", 1)[1].strip()
                continue
            fields = line.split()
            if fields[0] == "p":
                if header is not None:
                    raise InstanceFormatError(f"line {ln}: duplicate header")
                if len(fields) != 5 or fields[1] != "xor":
                    raise InstanceFormatError(f"line {ln}: malformed header")
                try:
                    header = tuple(int(x) for x in fields[2:])
                except ValueError:
                    raise InstanceFormatError(f"line {ln}: malformed header") from None
            elif fields[0] == "e":
                if header is None:
                    raise InstanceFormatError(f"line {ln}: equation before header")
                n, m, r = header
                try:
                    nums = [int(x) for x in fields[1:]]
                except ValueError:
                    raise InstanceFormatError(f"line {ln}: non-integer field") from None
                if len(nums) != r + 1:
                    raise InstanceFormatError(
                        f"line {ln}: wrong arity (expected {r} variables and a bit)"
                    )
                vs, b = nums[:-1], nums[-1]
                if any(v < 0 or v >= n for v in vs):
                    raise InstanceFormatError(f"line {ln}: index out of range")
                if b not in (0, 1):
                    raise InstanceFormatError(f"line {ln}: RHS must be 0 or 1")
                equations.append((tuple(vs), b))
            else:
                raise InstanceFormatError(f"line {ln}: unknown record {fields[0]!r}")
    if header is None:
        raise InstanceFormatError("line 1: missing header")
    n, m, r = header
    if len(equations) != m:
        raise InstanceFormatError(
            f"line {ln}: header promises {m} equations, found {len(equations)}"
        )
    if model_tag is None:
        # untagged files get the permissive tag: any instance is a valid
        # multihypergraph system, while uniform-simple adds constraints
        model_tag = MODEL_AP
    return XorsatInstance(n, r, equations, model_tag=model_tag)
