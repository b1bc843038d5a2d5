"""Steiner symmetrization of coercive convex functions.

Exact algorithms for piecewise-linear functions on the line, grid
algorithms in two dimensions, and the Legendre-transform machinery for
volume-product experiments.
"""
from .convex1d import (WALL, InvalidFunctionError, PLConvex1D, WidthProfile,
                       exp_integral, inf_convolve, legendre, supinf_oracle,
                       symmetrize_amk, symmetrize_new, validate, width_profile)
from .gridnd import Direction, GridFn, NonConvexSectionError, llt_legendre, steiner_symmetrize
from .santalo import NotEvenError, SantaloReport, santalo_product

__version__ = "0.1.0"

__all__ = [
    "WALL", "InvalidFunctionError", "PLConvex1D", "WidthProfile", "exp_integral",
    "inf_convolve", "legendre", "supinf_oracle", "symmetrize_amk", "symmetrize_new",
    "validate", "width_profile", "Direction", "GridFn", "NonConvexSectionError",
    "llt_legendre", "steiner_symmetrize", "NotEvenError", "SantaloReport",
    "santalo_product",
]
