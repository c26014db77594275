"""rectiflat: multiscale flatness coefficients and Carleson sums on finite
weighted point clouds in abstract metric, Euclidean, and Heisenberg ambients."""

from .core import (Ambient, FiniteMetricMeasureSpace, GeneratorSpec,
                   build_space, diam, generate, horizontal_lift)
from .coeffs import (CoefficientValue, IotaBracket, beta, iota_estimate,
                     iota_plane, kappa, menger_curvature, triangular_excess)
from .dyadic import DyadicSystem, build_dyadic
from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = [
    "Ambient", "FiniteMetricMeasureSpace", "GeneratorSpec", "build_space",
    "diam", "generate", "horizontal_lift", "CoefficientValue", "IotaBracket",
    "beta", "iota_estimate", "iota_plane", "kappa", "menger_curvature",
    "triangular_excess", "DyadicSystem", "build_dyadic", "KERNEL_BACKEND",
    "__version__",
]
