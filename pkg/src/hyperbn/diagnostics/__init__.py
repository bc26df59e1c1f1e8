"""Quantitative checks on computed radial profiles."""

from .annulus import annulus_gradient_scaling, annulus_integrals, predicted_alpha
from .decay import decay_exponent, default_tail_window, fit_tail_decay, uniform_bound_ratios
from .energy import energy_G, energy_J, euclidean_terms, hyperbolic_terms, nehari_residual
from .pohozaev import PohozaevReport, global_pohozaev, pohozaev_check
from .quadrature import radial_integral, sphere_area
from .sobolev import (
    FamilyControls,
    QuotientEstimate,
    euclidean_sobolev_constant,
    minimize_quotient,
    sobolev_quotient,
    talenti_profile,
)

__all__ = [
    "annulus_gradient_scaling",
    "annulus_integrals",
    "predicted_alpha",
    "decay_exponent",
    "default_tail_window",
    "fit_tail_decay",
    "uniform_bound_ratios",
    "energy_G",
    "energy_J",
    "euclidean_terms",
    "hyperbolic_terms",
    "nehari_residual",
    "PohozaevReport",
    "global_pohozaev",
    "pohozaev_check",
    "radial_integral",
    "sphere_area",
    "FamilyControls",
    "QuotientEstimate",
    "euclidean_sobolev_constant",
    "minimize_quotient",
    "sobolev_quotient",
    "talenti_profile",
]
