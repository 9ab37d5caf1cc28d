"""Hot inner loops, compiled when possible.

``BACKEND`` is ``"cython"`` when the extension imported, else ``"python"``.
Set ``PROSODYX_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

from . import _pykernels as python

if os.environ.get("PROSODYX_PURE_PYTHON"):
    compiled = None
else:
    try:
        from . import _ckernels as compiled
    except ImportError:
        compiled = None

_impl = compiled if compiled is not None else python
BACKEND = "cython" if compiled is not None else "python"

sinc_resample = _impl.sinc_resample
nccf = _impl.nccf
harmonic_excitation = _impl.harmonic_excitation
