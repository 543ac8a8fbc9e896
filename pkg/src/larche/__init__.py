"""Cahn-Larché phase-field laboratory and its sharp-interface limit.

Modules: ``potential`` (double wells), ``profile`` (transition profiles),
``elasticity``, ``geometry``, ``phasefield`` (evolution), ``sharpref``
(sharp-interface references and residual meters), ``approx`` (approximate
solutions), ``spectral`` (H^-1 lower bounds), ``studies`` (sweeps) and
``cli``.
"""

__version__ = "0.1.0"

from .grid import Grid2D
from .potential import DoubleWell, validate
from .profile import Profiles

__all__ = ["DoubleWell", "Grid2D", "Profiles", "validate", "__version__"]
