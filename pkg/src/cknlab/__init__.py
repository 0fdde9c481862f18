"""Numerical lab for weighted Hardy, Heisenberg and Caffarelli-Kohn-Nirenberg identities."""

from .closedform import CknParams, ckn_sharp_constant, extremal_norms, gamma_moment
from .errors import CknLabError, NumericalError, ValidationError
from .profiles import GaussPowerTerm, ModeFunction, RadialProfile, gaussian, random_profile, witness

__version__ = "0.1.0"

__all__ = [
    "CknLabError", "CknParams", "GaussPowerTerm", "ModeFunction", "NumericalError", "RadialProfile",
    "ValidationError", "ckn_sharp_constant", "extremal_norms", "gamma_moment", "gaussian",
    "random_profile", "witness",
]
