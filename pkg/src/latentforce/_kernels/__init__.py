"""Kernel backend registry.

Two interchangeable implementations of the hot inner loops exist:

* ``compiled`` -- Cython extension (:mod:`latentforce._kernels._core`),
  built at install time; pairwise loops run without Python overhead and
  release the GIL.
* ``numpy``    -- pure-NumPy reference (:mod:`latentforce._kernels._numpy`).

The compiled backend is selected automatically when the extension
imported cleanly; otherwise the package falls back to NumPy.  The
``LATENTFORCE_KERNELS`` environment variable (``auto``, ``compiled`` or
``numpy``) overrides the choice at import time, and :func:`set_backend`
switches at runtime (used by the benchmark and the parity tests).
"""

from __future__ import annotations

import os

from latentforce._kernels import _numpy

try:
    from latentforce._kernels import _core
except ImportError:  # extension not built; NumPy fallback stays active
    _core = None

_BACKENDS = {"numpy": _numpy}
if _core is not None:
    _BACKENDS["compiled"] = _core

_KERNEL_NAMES = (
    "unweighted_loglik",
    "unweighted_forces",
    "cumulative_loglik",
    "cumulative_forces",
    "weighted_loglik",
    "weighted_forces",
)


class _Registry:
    def __init__(self, name: str):
        self.name = ""
        self.set(name)

    def set(self, name: str) -> None:
        if name == "auto":
            name = "compiled" if "compiled" in _BACKENDS else "numpy"
        if name not in _BACKENDS:
            raise ValueError(
                f"unknown kernel backend {name!r}; available: {sorted(_BACKENDS)}"
            )
        module = _BACKENDS[name]
        for fn in _KERNEL_NAMES:
            setattr(self, fn, getattr(module, fn))
        self.name = name


_registry = _Registry(os.environ.get("LATENTFORCE_KERNELS", "auto"))


def get_backend() -> str:
    """Name of the active kernel backend."""
    return _registry.name


def set_backend(name: str) -> str:
    """Activate a backend (``auto``, ``compiled`` or ``numpy``); returns the name."""
    _registry.set(name)
    return _registry.name


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def kernels():
    """The active backend's kernel namespace."""
    return _registry
