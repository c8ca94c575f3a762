"""Mixing-time diagnostics for noising diffusions.

Point clouds are numpy arrays of shape (n, d), one point per row.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401

__version__ = "0.1.0"
