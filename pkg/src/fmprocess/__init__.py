"""Noncommutative Fornasini-Marchesini systems and truncated weak Markov processes."""

from .errors import (FMError, InputError, DimensionError, MultiplicityError, SchemaError,
                     DepthError, ValidationError)
from .freeword import Word, enumerate_words
from .fmsystem import FMSystem, evolve, transfer_coeff, transfer_coefficients, \
    observability_gramian
from .process import TruncatedProcess, dilate, represent
from .cascade import GammaCascade, build_cascade, extension_gamma, recover_gamma
from .completeness import ACReport, ac_check
from .markov import MarkovChainSpec, scattering_ac

__version__ = "0.1.0"
