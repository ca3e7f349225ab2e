"""Hot-kernel backend selection.

The compiled extension is preferred when present; the pure-numpy fallback is
selected otherwise. Set ``COST2TIME_BACKEND=pure`` or ``=native`` to force a
backend (forcing ``native`` raises if the extension is not built). Both
backends implement the same two entry points and produce identical results.
"""

from __future__ import annotations

import os

from . import pure as _pure

_requested = os.environ.get("COST2TIME_BACKEND", "").strip().lower()
if _requested not in ("", "pure", "native"):
    raise ImportError(
        f"COST2TIME_BACKEND={_requested!r} is not recognized (use 'pure' or 'native')"
    )

if _requested == "pure":
    _impl = _pure
else:
    try:
        from . import _native as _impl  # type: ignore[no-redef]
    except ImportError:
        if _requested == "native":
            raise ImportError(
                "COST2TIME_BACKEND=native but the compiled extension is not "
                "available; reinstall with Cython and a C compiler present"
            ) from None
        _impl = _pure

BACKEND = _impl.BACKEND_NAME
knn_select = _impl.knn_select
smo_solve = _impl.smo_solve


def backend_name() -> str:
    """Name of the kernel backend selected at import ('native' or 'pure')."""
    return BACKEND
