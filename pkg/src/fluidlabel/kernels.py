"""Backend selection for the superpixel hot kernels.

The compiled extension is preferred; the numpy fallback is used when it is
missing or when FLUIDLABEL_PURE=1 is set (handy for benchmarking the two
against each other). Both expose the same three functions and produce
bit-identical outputs.
"""

from __future__ import annotations

import os

from . import _slic_py

if os.environ.get("FLUIDLABEL_PURE") == "1":
    _impl = _slic_py
else:
    try:
        from . import _slic_c as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _slic_py

BACKEND = _impl.BACKEND_NAME

assign_step = _impl.assign_step
update_step = _impl.update_step
label_components = _impl.label_components


def get_backend(name: str):
    """Return a specific kernel module by name ("compiled" or "python")."""
    if name == "python":
        return _slic_py
    if name == "compiled":
        from . import _slic_c

        return _slic_c
    raise ValueError(f"unknown kernel backend {name!r}")
