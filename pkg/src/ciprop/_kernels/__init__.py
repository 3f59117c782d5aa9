"""Kernel backend selection.

Imports the compiled extension when it is available and falls back to the
numpy reference implementation otherwise. Set ``CIPROP_PURE_PYTHON=1`` to
force the fallback (useful for parity testing and debugging).
"""

import os

from . import _reference

if os.environ.get("CIPROP_PURE_PYTHON"):
    _impl = _reference
    IMPLEMENTATION = "python"
else:
    try:
        from . import _compiled as _impl

        IMPLEMENTATION = "compiled"
    except ImportError:
        _impl = _reference
        IMPLEMENTATION = "python"

biased_walks = _impl.biased_walks
sgns_train = _impl.sgns_train

__all__ = ["biased_walks", "sgns_train", "IMPLEMENTATION"]
