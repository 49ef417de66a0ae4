"""Split-kernel selection: compiled extension when available, numpy otherwise.

Set NEUROSEARCH_PURE_PY=1 to force the numpy path; ``set_backend`` switches at
runtime (used by the backend benchmark).
"""

from __future__ import annotations

import os

from . import _npsplit

_BACKENDS = {"numpy": _npsplit.scan_best_split}

if not os.environ.get("NEUROSEARCH_PURE_PY"):
    try:
        from . import _fastsplit

        _BACKENDS["compiled"] = _fastsplit.scan_best_split
    except ImportError:
        pass

_active = "compiled" if "compiled" in _BACKENDS else "numpy"


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def get_backend() -> str:
    return _active


def set_backend(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available (have {available_backends()})")
    _active = name


def scan_best_split(values, presort, in_node, g, h, sum_g, sum_h, lam):
    return _BACKENDS[_active](values, presort, in_node, g, h, sum_g, sum_h, lam)
