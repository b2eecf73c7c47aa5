"""Numerical engine for pseudo-differential calculus built on biorthogonal eigenbases.

Model operators on the interval (0, 1) supply eigenvalues and paired eigenfunction
families ``u_xi`` / ``v_xi``.  On top of them the package implements the coefficient
transforms, symbol quantization, difference operators, asymptotic expansions, and
parametrix checks, each verified against dense-matrix and quadrature references.
"""

__version__ = "0.1.0"

from .spectral_model import (  # noqa: F401
    Grid,
    SpectralModel,
    build_dirichlet_model,
    build_h_model,
    build_periodic_model,
    gauss_legendre_grid,
    trapezoid_grid,
    weight_table,
)
