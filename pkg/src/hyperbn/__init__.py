"""Radial solutions of -Lap u - lam u = |u|^(p-2) u on hyperbolic space."""

__version__ = "0.1.0"

from .geometry import Params, make_params  # noqa: E402

__all__ = ["Params", "make_params", "__version__"]
