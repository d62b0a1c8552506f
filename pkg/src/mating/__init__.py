"""Computational companion for matings of a Siegel quadratic polynomial with a parabolic one."""
from .circle import (Angle, BinarySequence, RotationNumber, binary_expansion, double,
                     from_binary, negate, parabolic_cycle)
from .maps import MatingRational, ParaQuad, SiegelQuad
from .theta import parse_theta

__version__ = "0.1.0"

__all__ = [
    "Angle", "BinarySequence", "RotationNumber", "binary_expansion", "double", "from_binary",
    "negate", "parabolic_cycle", "MatingRational", "ParaQuad", "SiegelQuad", "parse_theta",
]
