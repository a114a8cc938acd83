"""Backend selection for the hot kernels.

The compiled extension is preferred; the pure-Python twin is used when the
extension is missing or when ``XORLAB_PURE=1`` is set in the environment.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("XORLAB_PURE") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND
slow_strip_kernel = _impl.slow_strip_kernel
parallel_strip_kernel = _impl.parallel_strip_kernel
reach_sizes_kernel = _impl.reach_sizes_kernel


def get_backend(name: str | None = None):
    """Return a kernel module: the active one, or 'python'/'cython' by name."""
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels_cy

        return _kernels_cy
    raise ValueError(f"unknown backend {name!r}")
