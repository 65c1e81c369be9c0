"""Unitarizability of low-dimensional simple representations of the braid group B3."""

from .errors import B3RepError
from .spectra import Spectrum, Verdict, spectrum_from_angles, unitarizable, mu_closed, q_value
from .rep_builder import RepPair, build_d2, build_newton
from .algebra_tools import gram_form, unitarize

__all__ = [
    "B3RepError",
    "Spectrum",
    "Verdict",
    "spectrum_from_angles",
    "unitarizable",
    "mu_closed",
    "q_value",
    "RepPair",
    "build_d2",
    "build_newton",
    "gram_form",
    "unitarize",
]

__version__ = "0.1.0"
