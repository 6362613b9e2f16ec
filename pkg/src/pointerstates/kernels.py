"""Kernel dispatch: the compiled extension when importable, numpy otherwise.

Set ``POINTERSTATES_PURE=1`` to force the numpy implementation.
"""

from __future__ import annotations

import os

from ._kernels_py import PHASE_TOL

if os.environ.get("POINTERSTATES_PURE"):
    from ._kernels_py import ensemble_sums, geometric_factors

    BACKEND = "python"
else:
    try:
        from ._kernels import ensemble_sums, geometric_factors

        BACKEND = "cython"
    except ImportError:
        from ._kernels_py import ensemble_sums, geometric_factors

        BACKEND = "python"

__all__ = ["BACKEND", "PHASE_TOL", "ensemble_sums", "geometric_factors"]
