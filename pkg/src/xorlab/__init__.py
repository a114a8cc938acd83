"""Random r-XORSAT laboratory.

Instance generation (uniform and configuration models), 2-core stripping
with a parallel and a FIFO queue engine, the removal digraph with
reachability queries, threshold/core-size numerics, GF(2) elimination with
the ordered free-variable structure, flippable-cycle detection, exact
cluster geometry on small instances and a seeded measurement harness.
"""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
