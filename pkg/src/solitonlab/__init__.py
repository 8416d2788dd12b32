"""Exact N-soliton fields of the mixed coupled NLS system and independent numerical checks."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .numkit import Grid1D, lu_factor_invert, uniform_grid
from .soliton import (FieldGrid, FieldSample, GeneralSpectralDatum, SolitonData, SpectralDatum,
                      build_M, eval_fields, eval_fields_general, eval_grid, min_abs_detM,
                      one_soliton_closed, reconstruct_P1, theta, two_soliton_closed)

__all__ = [
    "Grid1D", "lu_factor_invert", "uniform_grid", "FieldGrid", "FieldSample",
    "GeneralSpectralDatum", "SolitonData", "SpectralDatum", "build_M", "eval_fields",
    "eval_fields_general", "eval_grid", "min_abs_detM", "one_soliton_closed", "reconstruct_P1",
    "theta", "two_soliton_closed",
]
