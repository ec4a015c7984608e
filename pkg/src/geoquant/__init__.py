"""Spatial quantiles of finite-dimensional empirical measures."""

from .asymptotics import *  # noqa: F401,F403
from .estimators import SpatialDepth, SpatialQuantile
from .measure import *  # noqa: F401,F403
from .objective import *  # noqa: F401,F403
from .solver import *  # noqa: F401,F403
from . import asymptotics, measure, objective, solver

__version__ = "0.1.0"

__all__ = [
    *measure.__all__,
    *objective.__all__,
    *solver.__all__,
    *asymptotics.__all__,
    "SpatialQuantile",
    "SpatialDepth",
]
