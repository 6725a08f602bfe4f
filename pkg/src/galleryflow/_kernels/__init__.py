"""Kernel backend selection.

Hot inner loops (Jaccard matrix fill, UPGMA merges, silhouette sums) exist
twice: a numba @njit build and a pure-numpy fallback. The active backend is
chosen per call from the ``GALLERYFLOW_KERNELS`` environment variable:

    GALLERYFLOW_KERNELS=numba   force numba (error if unavailable)
    GALLERYFLOW_KERNELS=numpy   force the numpy fallback
    unset / auto                numba when importable, else numpy

``GALLERYFLOW_THREADS``, when set, caps numba's thread pool.

Both backends return identical merge/label structures; float reductions can
differ at the last ulp, so reports round to 12 significant digits before
serialization.
"""

from __future__ import annotations

import os

from . import numpy_impl

_numba_mod = None
_numba_failed: str | None = None


def _load_numba():
    global _numba_mod, _numba_failed
    if _numba_mod is None and _numba_failed is None:
        try:
            from . import numba_impl

            threads = os.environ.get("GALLERYFLOW_THREADS")
            if threads:
                import numba

                numba.set_num_threads(max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS)))
            _numba_mod = numba_impl
        except ImportError as exc:
            _numba_failed = str(exc)
    return _numba_mod


def backend_name() -> str:
    """Resolve the backend that would serve the next kernel call."""
    choice = os.environ.get("GALLERYFLOW_KERNELS", "auto").strip().lower() or "auto"
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        if _load_numba() is None:
            raise RuntimeError(f"GALLERYFLOW_KERNELS=numba but numba is unavailable: {_numba_failed}")
        return "numba"
    if choice == "auto":
        return "numba" if _load_numba() is not None else "numpy"
    raise RuntimeError(f"unknown GALLERYFLOW_KERNELS value {choice!r}")


def _impl():
    return _load_numba() if backend_name() == "numba" else numpy_impl


def jaccard_matrix(indptr, indices, n_cols):
    return _impl().jaccard_matrix(indptr, indices, n_cols)


def upgma_linkage(dist):
    return _impl().upgma_linkage(dist)


def silhouette_samples(dist, labels, k):
    return _impl().silhouette_samples(dist, labels, k)
