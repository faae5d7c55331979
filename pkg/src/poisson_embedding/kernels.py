"""Backend selection for the hot loops.

The compiled extension is used when it has been built; otherwise the numpy
fallback is imported.  Setting ``POISSON_EMBEDDING_PURE=1`` forces the fallback.
"""

import os

from . import _pykernels as python_backend

compiled_backend = None
if os.environ.get("POISSON_EMBEDDING_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:
        compiled_backend = None

_impl = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

inflection_indices = _impl.inflection_indices
eval_piecewise = _impl.eval_piecewise
sup_abs_gap = _impl.sup_abs_gap
max_abs_centered = _impl.max_abs_centered
ks_two_sample_sorted = _impl.ks_two_sample_sorted
