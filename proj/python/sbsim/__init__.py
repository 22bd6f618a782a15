"""Bit-exact model of a sparse bit-serial systolic accelerator."""

import os as _os

_bundled = _os.path.join(_os.path.dirname(__file__), "configs")
if _os.path.isdir(_bundled):
    _os.environ.setdefault("SBSIM_CONFIG_DIR", _bundled)

from ._sbsim import *  # noqa: E402,F401,F403
from ._sbsim import FormatError  # noqa: E402,F401
