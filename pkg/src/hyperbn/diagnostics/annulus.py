"""Gradient mass of ``v`` in thin annuli next to the boundary sphere."""

from __future__ import annotations

import math

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from ..geometry import geodesic_radius
from ..radial_ode import EUCLIDEAN, RadialProfile
from .quadrature import cumulative_radial_integral, sphere_area


def annulus_integrals(profile: RadialProfile, eps_list) -> np.ndarray:
    """omega * int_{1-2eps}^{1-eps} v_s^2 s^(N-1) ds for each eps."""
    if profile.gauge != EUCLIDEAN:
        raise ValueError("annulus integrals need a euclidean-v profile")
    eps = np.asarray(eps_list, dtype=float)
    if np.any(eps <= 0) or np.any(eps >= 0.2):
        raise ValueError("eps values must lie in (0, 0.2)")
    N = profile.params.N
    r = profile.radii
    with np.errstate(divide="ignore"):
        f = profile.derivs**2 * (1.0 + np.cosh(r)) * np.tanh(0.5 * r) ** (N - 1)
    F = cumulative_radial_integral(r, f, N - 1)
    spline = CubicHermiteSpline(r, F, f)
    # the complement route keeps 1 - s exact for tiny eps
    r_in = geodesic_radius(1.0 - 2.0 * eps, 2.0 * eps)
    r_out = geodesic_radius(1.0 - eps, eps)
    if np.any(r_out > r[-1]) or np.any(r_in < r[0]):
        raise ValueError("annulus reaches past the stored profile; shrink eps or extend r_max")
    return sphere_area(N) * (spline(r_out) - spline(r_in))


def annulus_gradient_scaling(profile: RadialProfile, eps_list) -> float:
    """Least-squares slope of log(annulus integral) against log(eps)."""
    eps = np.asarray(eps_list, dtype=float)
    if eps.size < 2:
        raise ValueError("need at least two eps values")
    vals = annulus_integrals(profile, eps)
    if np.any(vals <= 0):
        raise ValueError("annulus integral vanished; cannot fit a power")
    return float(np.polyfit(np.log(eps), np.log(vals), 1)[0])


def predicted_alpha(N: int, lam: float) -> float:
    """Exponent implied by a fast-rate tail: 2 c_fast - N + 1."""
    return math.sqrt((N - 1) ** 2 - 4.0 * lam)
