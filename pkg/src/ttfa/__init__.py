"""Twisted time-frequency analysis on R^{2n} and the Heisenberg group."""

from .grid import BoxGrid, MixedNormSpec, PhaseField, SampledField
from .kernels import backend
from .twist import TwistParameter

__version__ = "0.1.0"

__all__ = ["BoxGrid", "SampledField", "PhaseField", "MixedNormSpec", "TwistParameter", "backend"]
