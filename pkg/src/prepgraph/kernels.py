"""Kernel backend selection.

The compiled ``_core`` extension is used when importable; otherwise, or when
``PREPGRAPH_PURE=1`` is set, the numpy/pure-Python ``_pycore`` twin is used.
Callers go through :func:`backend` so a switch with :func:`set_backend`
takes effect immediately.
"""

from __future__ import annotations

import logging
import os
from types import ModuleType

from . import _pycore

log = logging.getLogger(__name__)

try:
    from . import _core
except ImportError:  # extension not built
    _core = None

_BACKENDS = {"python": _pycore}
if _core is not None:
    _BACKENDS["compiled"] = _core

_active = "python" if (_core is None or os.environ.get("PREPGRAPH_PURE") == "1") else "compiled"


def available() -> list[str]:
    return sorted(_BACKENDS)


def set_backend(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {available()}")
    _active = name
    log.debug("kernel backend: %s", name)


def backend_name() -> str:
    return _active


def backend(name: str | None = None) -> ModuleType:
    return _BACKENDS[name or _active]
