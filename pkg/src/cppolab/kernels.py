"""Kernel dispatch: the compiled ``_core`` extension when importable, else ``_pycore``.

Set ``CPPOLAB_PURE_PYTHON=1`` before import to force the fallback.
"""
import os

from . import _pycore

BACKEND = "python"
_impl = _pycore

if not os.environ.get("CPPOLAB_PURE_PYTHON"):
    try:
        from . import _core as _impl  # noqa: F811

        BACKEND = "compiled"
    except ImportError:
        _impl = _pycore

gae_kernel = _impl.gae
barrier_kernel = _impl.barrier

__all__ = ["BACKEND", "gae_kernel", "barrier_kernel"]
