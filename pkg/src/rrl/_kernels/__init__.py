"""Kernel selection: the compiled extension when built, numpy otherwise.

Set ``RRL_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("RRL_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

interval_tables = _impl.interval_tables
project_two_balls = _impl.project_two_balls
quad_ascent = _impl.quad_ascent
hinge_loss = _impl.hinge_loss
hinge_descent = _impl.hinge_descent

__all__ = [
    "BACKEND",
    "hinge_descent",
    "hinge_loss",
    "interval_tables",
    "project_two_balls",
    "quad_ascent",
]
