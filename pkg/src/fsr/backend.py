"""Selects the splatting backend: compiled extension if built, numpy otherwise."""

from __future__ import annotations

try:
    from . import _splat as _impl

    BACKEND = "cython"
except ImportError:  # extension not built on this install
    from . import _splat_py as _impl

    BACKEND = "numpy"

splat_group = _impl.splat_group


def available_backends() -> dict:
    """Name -> splat_group callable for every importable backend."""
    from . import _splat_py

    out = {"numpy": _splat_py.splat_group}
    try:
        from . import _splat

        out["cython"] = _splat.splat_group
    except ImportError:
        pass
    return out
