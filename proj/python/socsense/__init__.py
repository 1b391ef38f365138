"""DeGroot opinion dynamics, steady-state sensing and sparse trust recovery.

Thin wrapper over the compiled core; see the project README for the CLI
and the C++ API.
"""

from ._socsense import *  # noqa: F401,F403
from ._socsense import __doc__  # noqa: F401
