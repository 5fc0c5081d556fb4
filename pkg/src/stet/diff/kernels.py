"""Kernel selection: compiled extension when present, pure Python otherwise.

Set STET_FORCE_PY_KERNELS=1 to skip the extension (used by the benchmark and
the agreement tests).
"""

from __future__ import annotations

import os

from . import _match_py

if os.environ.get("STET_FORCE_PY_KERNELS") == "1":
    _impl = _match_py
    KERNEL_IMPL = "python"
else:
    try:
        from . import _match_cy as _impl  # type: ignore[no-redef]

        KERNEL_IMPL = "compiled"
    except ImportError:
        _impl = _match_py
        KERNEL_IMPL = "python"

subtree_hashes = _impl.subtree_hashes
assign_nearest = _impl.assign_nearest
