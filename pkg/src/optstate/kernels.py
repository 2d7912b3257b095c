"""Kernel backend selection.

The compiled extension is used when available; the pure-Python mirror
otherwise.  Setting OPTSTATE_PURE_PYTHON=1 forces the fallback (useful
for the kernel benchmark and for debugging).
"""

from __future__ import annotations

import os

if os.environ.get("OPTSTATE_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

BACKEND = _impl.BACKEND

doubling_rational_orbit = _impl.doubling_rational_orbit
doubling_float_orbit = _impl.doubling_float_orbit
rotation_orbit = _impl.rotation_orbit
halving_orbit = _impl.halving_orbit
may_leonard_orbit = _impl.may_leonard_orbit
cocycle_checkpoint_products = _impl.cocycle_checkpoint_products
window_products = _impl.window_products
visit_hits_circle = _impl.visit_hits_circle
visit_hits_euclid = _impl.visit_hits_euclid
