"""Left-tail asymptotics of the largest real eigenvalue of real Ginibre matrices.

Submodules
----------
special     theta-type sums, zeta(3/2) and Euler's constant with error bounds
constants   the edge and bulk constants and the tail slope
predictor   the tail prediction and its summand-level ingredients
walks       Gaussian walks, bridges and identity checks by Monte Carlo
transfer    deterministic exit probabilities by transfer operator
brownian    Brownian trivariate law and capped-range formulas
ginibre     real Ginibre sampling
abm         annihilating Brownian motions
tails       empirical tail curves and two-sample tests
mc          estimates and reproducible random streams
"""

__version__ = "0.1.0"

from .constants import c_bulk, c_edge, kappa
from .errors import AccuracyError, ConvergenceError, DomainError, GtailError
from .predictor import predict
from .special import omega

__all__ = [
    "__version__",
    "c_edge",
    "c_bulk",
    "kappa",
    "predict",
    "omega",
    "GtailError",
    "DomainError",
    "ConvergenceError",
    "AccuracyError",
]
