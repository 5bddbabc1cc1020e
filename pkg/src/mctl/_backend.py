"""Select the compiled kernel core, falling back to numpy.

Set ``MCTL_PURE_PYTHON=1`` to force the fallback (used by the benchmark and
the backend-agreement tests).
"""
import os

if os.environ.get("MCTL_PURE_PYTHON", "") not in ("", "0"):
    from mctl import _pykernels as _impl

    BACKEND = "python"
else:
    try:
        from mctl import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        from mctl import _pykernels as _impl

        BACKEND = "python"

sq_dists = _impl.sq_dists
gaussian_gram = _impl.gaussian_gram
knn_adjacency = _impl.knn_adjacency
