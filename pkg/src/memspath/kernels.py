"""Backend selection for the hot kernels.

Imports the compiled extension when it is available, otherwise the
pure-Python twin. Set MEMSPATH_PURE=1 to force the fallback (used by the
twin-equivalence tests and the benchmark).
"""

import os

from . import _pure

if os.environ.get("MEMSPATH_PURE") == "1":
    _impl = _pure
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _pure

BACKEND = _impl.BACKEND_NAME

run_vm = _impl.run_vm
count_box = _impl.count_box


def backends():
    """All importable backends, for equivalence tests and benchmarks."""
    found = {"pure": _pure}
    try:
        from . import _core

        found["compiled"] = _core
    except ImportError:
        pass
    return found
