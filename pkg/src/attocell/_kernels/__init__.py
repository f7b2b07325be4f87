"""Hot-loop kernels with a compiled backend and a numpy fallback.

The Cython extension ``_core`` is used when it imports; otherwise, or when
``ATTOCELL_PURE_PYTHON=1`` is set, the numpy versions in ``_fallback`` are
used. Both produce bit-identical Monte Carlo draws. ``ATTOCELL_THREADS``
caps the OpenMP thread count of the compiled backend (0 or unset = all cores).
"""
from __future__ import annotations

import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if os.environ.get("ATTOCELL_PURE_PYTHON", "") != "1":
    try:
        from . import _core
    except ImportError:  # extension not built
        pass
    else:
        _impl = _core
        BACKEND = "compiled"


def thread_count() -> int:
    raw = os.environ.get("ATTOCELL_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"ATTOCELL_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError(f"ATTOCELL_THREADS must be >= 0, got {n}")
    return n if n > 0 else (os.cpu_count() or 1)


def backends() -> dict:
    """Available kernel modules keyed by name (for benchmarks and parity tests)."""
    found = {"python": _fallback}
    try:
        from . import _core
    except ImportError:
        pass
    else:
        found["compiled"] = _core
    return found


def lattice_row_sums(zx, zy, spacing, h, s, n, impl=None):
    impl = impl or _impl
    return impl.lattice_row_sums(float(zx), float(zy), float(spacing), float(h), float(s), int(n), thread_count())


def interference_draws(coef, key, slot0, n_slots, M, impl=None):
    impl = impl or _impl
    return impl.interference_draws(coef, int(key), int(slot0), int(n_slots), int(M), thread_count())
