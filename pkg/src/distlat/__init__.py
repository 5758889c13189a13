"""Delaunay networks on Poisson and Gaussian-analytic-function samples in the
Euclidean plane and the hyperbolic plane, with random walks and
amenability experiments."""

__version__ = "0.1.0"

from .geometry import EUC, HYP, SpaceKind  # noqa: E402

__all__ = ["EUC", "HYP", "SpaceKind", "__version__"]
