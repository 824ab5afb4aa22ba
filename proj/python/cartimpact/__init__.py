"""Impacting pendulum on a cart: hybrid simulation, periodic orbits and Floquet analysis."""

from ._cartimpact import *  # noqa: F401,F403
from ._cartimpact import CartImpactError, __doc__  # noqa: F401

__version__ = "0.1.0"
