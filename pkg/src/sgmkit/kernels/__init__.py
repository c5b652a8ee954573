"""Kernel backend selection.

The compiled extension (``_core``, built from ``_core.pyx``) is preferred;
the pure-Python twin (``_pykernels``) is the fallback. Both produce
bit-identical outputs. Selection happens once at import time and can be
forced with the ``SGMKIT_BACKEND`` environment variable (``native`` or
``python``).
"""

from __future__ import annotations

import os

_forced = os.environ.get("SGMKIT_BACKEND", "").strip().lower()
if _forced not in ("", "native", "python"):
    raise ImportError(
        f"SGMKIT_BACKEND={_forced!r} is not recognized (use 'native' or 'python')"
    )

if _forced == "python":
    from . import _pykernels as _impl

    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "native"
    except ImportError:
        if _forced == "native":
            raise
        from . import _pykernels as _impl

        BACKEND = "python"

SAD = _impl.SAD
ZSAD = _impl.ZSAD
CENSUS = _impl.CENSUS
RANK = _impl.RANK

census_transform = _impl.census_transform
rank_transform = _impl.rank_transform
cost_volume = _impl.cost_volume
match_cost_volume = _impl.match_cost_volume
aggregate = _impl.aggregate
aggregate_interleaved = _impl.aggregate_interleaved
match_disparity = _impl.match_disparity
median_filter = _impl.median_filter


def available_backends() -> list[str]:
    """Names of importable backends ('native' first when present)."""
    names = []
    try:
        from . import _core  # noqa: F401

        names.append("native")
    except ImportError:
        pass
    names.append("python")
    return names


def get_backend(name: str):
    """Return a specific backend module ('native' or 'python').

    Used by the cross-backend equivalence tests and the benchmark; raises
    ImportError when the requested backend is unavailable.
    """
    if name == "python":
        from . import _pykernels

        return _pykernels
    if name == "native":
        from . import _core

        return _core
    raise ValueError(f"unknown backend {name!r}")
