"""Bounded-rational serial perception-action channels.

Analytic self-consistent solver and online score-function gradient trainer;
see the compiled extension for the full surface.
"""

try:
    from ._serpa import *  # noqa: F401,F403  (installed wheel layout)
    from . import _serpa as _impl
except ImportError:  # development layout: extension on PYTHONPATH
    from _serpa import *  # noqa: F401,F403
    import _serpa as _impl

__doc__ = _impl.__doc__
