"""Kernel backend selection.

Prefers the compiled extension; falls back to the numpy implementation
when the extension is missing (source checkout without a build) or when
``LCD_PURE_PYTHON=1`` is set. ``KERNEL_BACKEND`` names the active choice.
"""

import os

if os.environ.get("LCD_PURE_PYTHON", "") == "1":
    from . import _projection_kernels_py as _kernels
else:
    try:
        from . import _projection_kernels as _kernels  # type: ignore[attr-defined]
    except ImportError:
        from . import _projection_kernels_py as _kernels

KERNEL_BACKEND = _kernels.BACKEND
eval_h = _kernels.eval_h
newton_beta = _kernels.newton_beta
