"""Unsupervised joint image matching and object discovery as optimization.

The heavy lifting lives in the compiled extension; this package simply
re-exports it.
"""

from ._codisc import *  # noqa: F401,F403
from ._codisc import __doc__  # noqa: F401
