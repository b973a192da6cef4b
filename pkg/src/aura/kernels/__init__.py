"""Hot kernels for Lloyd iterations: nearest-centroid assignment and
centroid accumulation.

The compiled Cython extension is preferred when it was built; otherwise a
chunked numpy implementation is used. Both expose the same two functions
and the same tie-break rule (lowest centroid index wins). Set the
environment variable AURA_KERNELS=numpy before import to force the
fallback, e.g. for benchmarking.
"""

import os

from . import _lloyd_np

if os.environ.get("AURA_KERNELS", "").lower() == "numpy":
    _impl = _lloyd_np
else:
    try:
        from . import _lloyd_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _lloyd_np

BACKEND = "numpy" if _impl is _lloyd_np else "cython"

assign_nearest = _impl.assign_nearest
centroid_update = _impl.centroid_update
