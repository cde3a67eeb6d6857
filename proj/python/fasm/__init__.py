"""Factor-augmented smoothing for discretized functional data.

The heavy lifting lives in the compiled _core module. Installed wheels place
it inside this package; in a build tree it sits on PYTHONPATH instead, so both
locations are tried.
"""

try:
    from ._core import *  # noqa: F401,F403
    from ._core import __doc__ as _core_doc
except ImportError:
    from _core import *  # noqa: F401,F403
    from _core import __doc__ as _core_doc

__doc__ = _core_doc
__version__ = "0.1.0"
