"""Desk-scale numerics for p-adic harmonic analysis and stochastics.

Subpackages follow the pipeline: exact Q_p arithmetic (`padic`), finite-level
Haar/Fourier analysis (`grid`), Vladimirov-type pseudodifferential operators
and heat measures (`pseudodiff`), q-Gaussian measures and Wiener processes
(`qgaussian`), Poisson/Levy processes on pavings (`levy`), antiderivational
geodesics and the exponential map (`geodesic`), stochastic antiderivational
equations (`sde`), and the batch CLI (`cli`).
"""

__version__ = "0.1.0"

from . import errors
from .padic import (
    PAdicNumber,
    Ball,
    UnitCharacter,
    char_chi,
    char_phase,
    frac_part,
    mult_character,
    set_default_precision,
    get_default_precision,
)

__all__ = [
    "errors",
    "PAdicNumber",
    "Ball",
    "UnitCharacter",
    "char_chi",
    "char_phase",
    "frac_part",
    "mult_character",
    "set_default_precision",
    "get_default_precision",
    "__version__",
]
