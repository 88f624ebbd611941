"""Numerical tools for Schwarz-type inequalities of linear maps between matrix algebras."""
from .maps import MapRep, load_map, save_map
from .numerics import DEFAULT_TOL, ToleranceConfig
from .verdicts import CheckVerdict, Status

__all__ = ["MapRep", "load_map", "save_map", "DEFAULT_TOL", "ToleranceConfig", "CheckVerdict", "Status"]
__version__ = "0.1.0"
