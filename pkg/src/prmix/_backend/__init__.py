"""Backend selection for the hot numeric kernels.

Set PRMIX_BACKEND=numpy to force the pure-numpy path; PRMIX_BACKEND=numba
requires numba to import.  Default: numba when available, numpy otherwise.
"""

import os

from ..errors import ConfigError

_choice = os.environ.get("PRMIX_BACKEND", "").strip().lower()
if _choice not in ("", "numba", "numpy"):
    raise ConfigError(f"PRMIX_BACKEND must be 'numba' or 'numpy', got {_choice!r}")

if _choice == "numpy":
    from . import numpy_impl as _impl

    BACKEND = "numpy"
elif _choice == "numba":
    from . import numba_impl as _impl

    BACKEND = "numba"
else:
    try:
        from . import numba_impl as _impl

        BACKEND = "numba"
    except ImportError:
        from . import numpy_impl as _impl

        BACKEND = "numpy"

pr_recurse = _impl.pr_recurse
pava_decreasing = _impl.pava_decreasing


def get_impl(name):
    """Explicit backend lookup, used by the benchmark and agreement tests."""
    if name == "numpy":
        from . import numpy_impl

        return numpy_impl
    if name == "numba":
        from . import numba_impl

        return numba_impl
    raise ConfigError(f"unknown backend {name!r}")
