"""Exact distribution of the maximum of a stationary AR(2) process via the
spectral expansion of a two-step Fredholm kernel."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .model import (ARParams, InitialLaw, InnovationModel, clipped_initial, gaussian_innovation,  # noqa: F401
                    initial_law, logistic_innovation, make_innovation, stationary_moments,
                    validate_params)
from .quadrature import QuadratureGrid, gauss_legendre_1d, integrate, tensor_grid, truncation_box  # noqa: F401
from .kernel import KernelContext, gamma, kernel_K, kernel_row_at_infinity  # noqa: F401
from .spectral import DiscreteOperator, Spectrum, build_operator, eig, r_at_infinity, weight_B  # noqa: F401
from .maxdist import (MaxCdfExpansion, build_expansion, cdf_at, cdf_direct, decay_law,  # noqa: F401
                      discretize)
from .mc import McEstimate, compare, simulate_max_cdf  # noqa: F401
