"""Hot loops with a compiled backend and a numpy fallback.

The Cython extension is used when it was built; setting FLOQUET_PT_PURE=1
forces the fallback.  ``BACKEND`` names the active implementation.
"""

import os

import numpy as np

from . import _fallback as fallback

compiled = None
if os.environ.get("FLOQUET_PT_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled
    except ImportError:  # extension not built
        compiled = None

_impl = compiled if compiled is not None else fallback
BACKEND = "cython" if compiled is not None else "numpy"


def chain_apply(mats, idx, kicks, y):
    return _impl.chain_apply(np.ascontiguousarray(mats, dtype=np.complex128),
                             np.ascontiguousarray(idx, dtype=np.intp),
                             np.ascontiguousarray(kicks, dtype=np.complex128),
                             np.ascontiguousarray(y, dtype=np.complex128))


def bloch_product(beta, h):
    return _impl.bloch_product(np.ascontiguousarray(beta, dtype=np.complex128),
                               np.ascontiguousarray(h, dtype=np.float64))
