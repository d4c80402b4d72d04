"""Numerical bounds on the minimum energy-per-bit of massive random access
over quasi-static Rayleigh fading, with and without receiver CSI."""

from rab.bound_csir import eb_csir_ach, eb_csir_conv
from rab.bound_nocsi import eb_nocsi_ach, eb_nocsi_ach_known_activity, eb_nocsi_conv
from rab.numerics import DEFAULT_QUADRATURE, DEFAULT_SEARCH, QuadratureSpec, SearchOptions
from rab.results import BoundResult
from rab.specfun import EnergyPerBit, SystemParams
from rab.tdma import tdma_eb

__version__ = "0.1.0"

__all__ = [
    "BoundResult",
    "DEFAULT_QUADRATURE",
    "DEFAULT_SEARCH",
    "EnergyPerBit",
    "QuadratureSpec",
    "SearchOptions",
    "SystemParams",
    "eb_csir_ach",
    "eb_csir_conv",
    "eb_nocsi_ach",
    "eb_nocsi_ach_known_activity",
    "eb_nocsi_conv",
    "tdma_eb",
]
