"""Numerical SU(2) Hitchin fields on the plane and their L^2 moduli geometry."""

from .asymptotics import constant_c, norm_pk, singular_metric, upsilon
from .core import MINUS, PLUS, ComplexPoly, Cubic, Factorization, factorize, moduli_dimension, roots
from .elliptic import Field2D, GridSpec, solve_psi
from .errors import ConvergenceError, HitchinError
from .geometry import gauge_project, omega_at, surface_scan
from .radial import flux, scan_B, solve_radial

__version__ = "0.1.0"

__all__ = [
    "MINUS",
    "PLUS",
    "ComplexPoly",
    "ConvergenceError",
    "Cubic",
    "Factorization",
    "Field2D",
    "GridSpec",
    "HitchinError",
    "constant_c",
    "factorize",
    "flux",
    "gauge_project",
    "moduli_dimension",
    "norm_pk",
    "omega_at",
    "roots",
    "scan_B",
    "singular_metric",
    "solve_psi",
    "solve_radial",
    "surface_scan",
    "upsilon",
]
