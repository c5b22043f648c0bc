"""Kernel dispatch: the compiled extension when importable, numpy otherwise.

Set ``NEUROPOP_PURE=1`` to force the fallback (used by the benchmark and by
the cross-backend tests).
"""

import os

from neuropop import _fallback

try:
    if os.environ.get("NEUROPOP_PURE"):
        raise ImportError("fallback forced by NEUROPOP_PURE")
    from neuropop import _core as _impl

    BACKEND = "compiled"
except ImportError:
    _impl = _fallback
    BACKEND = "python"

forward = _impl.forward
backward = _impl.backward
replicator_run = _impl.replicator_run
ipd_monte_carlo = _impl.ipd_monte_carlo

__all__ = ["BACKEND", "forward", "backward", "replicator_run", "ipd_monte_carlo"]
