"""Jenkins-Serrin minimal graphs in the homogeneous spaces E(kappa, tau)."""

from .geometry import ModelParams

__version__ = "0.1.0"
__all__ = ["ModelParams", "__version__"]
