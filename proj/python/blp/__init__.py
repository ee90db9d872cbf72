"""Branching Levy process extremes: GW numerics, stable sampling, tree simulation and limit laws."""

from ._core import *  # noqa: F401,F403
from ._core import ConfigError, LimitLawBundle, OffspringLaw, Rng, StableMotionParams, SlowVariation

__all__ = [name for name in dir() if not name.startswith("_")]


def reference_bundle():
    """Yule splitting at rate 1 with symmetric 1.5-stable motion, c_* = 1."""
    return LimitLawBundle(OffspringLaw.yule(1.0), StableMotionParams.from_c_star(1.5, 1.0))
