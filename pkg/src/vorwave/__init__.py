"""Steady water waves with vorticity: laminar flows, height-function waves, flow-force diagnostics."""

from .errors import DomainError, NumericalError
from .vorticity import VorticityFn, classify, make_vorticity, parse_inline

__all__ = ["DomainError", "NumericalError", "VorticityFn", "classify", "make_vorticity", "parse_inline"]
__version__ = "0.1.0"
