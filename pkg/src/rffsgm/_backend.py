"""Pick the SGM kernel implementation at import time.

The compiled extension is used when it is importable, unless
``RFFSGM_PURE_PYTHON`` is set to a non-empty value other than ``0``.
"""

import os

from . import _sgm_py

_force_pure = os.environ.get("RFFSGM_PURE_PYTHON", "") not in ("", "0")

compiled_sgm_pass = None
if not _force_pure:
    try:
        from ._sgm_core import sgm_pass as compiled_sgm_pass
    except ImportError:  # extension not built
        compiled_sgm_pass = None

python_sgm_pass = _sgm_py.sgm_pass

if compiled_sgm_pass is not None:
    BACKEND = "compiled"
    sgm_pass = compiled_sgm_pass
else:
    BACKEND = "python"
    sgm_pass = python_sgm_pass


def get_sgm_pass(backend=None):
    """Return the kernel for ``backend`` (``"compiled"``, ``"python"`` or None for the default)."""
    if backend is None:
        return sgm_pass
    if backend == "python":
        return python_sgm_pass
    if backend == "compiled":
        if compiled_sgm_pass is None:
            raise ImportError("compiled SGM kernel is not available")
        return compiled_sgm_pass
    raise ValueError(f"unknown backend {backend!r}")
