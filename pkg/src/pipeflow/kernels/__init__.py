"""Assembly kernel backend selection.

Set PIPEFLOW_KERNELS=numpy to force the pure-numpy kernels,
PIPEFLOW_KERNELS=numba to require the compiled ones (raising if numba is
unavailable).  The default "auto" prefers numba and falls back to numpy.
Both backends implement identical semantics; benchmarks/bench_kernels.py
compares them.
"""

import os

from ..errors import ConfigurationError

_choice = os.environ.get("PIPEFLOW_KERNELS", "auto").lower()
if _choice not in ("auto", "numba", "numpy"):
    raise ConfigurationError(
        f"PIPEFLOW_KERNELS must be auto, numba or numpy, got {_choice!r}"
    )

if _choice == "numpy":
    from . import _numpy as _impl
else:
    try:
        from . import _numba as _impl
    except ImportError:
        if _choice == "numba":
            raise
        from . import _numpy as _impl

BACKEND = _impl.BACKEND
edge_residual = _impl.edge_residual
edge_jacobian = _impl.edge_jacobian
