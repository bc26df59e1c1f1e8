"""Energy functionals in both gauges and the Nehari balance."""

from __future__ import annotations

import math

import numpy as np

from ..geometry import Params
from ..radial_ode import EUCLIDEAN, HYPERBOLIC, RadialProfile
from .quadrature import radial_integral, sphere_area


def log_sinh(r):
    r = np.asarray(r, dtype=float)
    return r + np.log(-np.expm1(-2.0 * r)) - math.log(2.0)


def _weighted(f_abs, log_w):
    # f_abs * exp(log_w) without overflowing the weight
    with np.errstate(divide="ignore"):
        return np.exp(np.log(f_abs) + log_w)


def _check(profile: RadialProfile, gauge: str):
    if profile.gauge != gauge:
        raise ValueError(f"expected a {gauge} profile, got {profile.gauge}")
    if profile.meta.get("shot_class") not in (None, "Decay"):
        raise ValueError("energies need a decaying profile")


def hyperbolic_terms(profile: RadialProfile, params: Params) -> dict:
    """Gradient, L^2 and L^p integrals of ``u`` with the hyperbolic volume."""
    _check(profile, HYPERBOLIC)
    r, u, up = profile.radii, profile.values, profile.derivs
    lw = (params.N - 1) * log_sinh(r)
    tail = profile.decaying
    om = sphere_area(params.N)
    pw = params.N - 1
    grad = om * radial_integral(r, _weighted(up**2, lw), pw, tail)
    l2 = om * radial_integral(r, _weighted(u**2, lw), pw, tail)
    lp = om * radial_integral(r, _weighted(np.abs(u) ** params.p, lw), pw, tail)
    return {"grad": grad, "l2": l2, "lp": lp}


def euclidean_terms(profile: RadialProfile, params: Params) -> dict:
    """The three integrals of the conformally changed functional for ``v``."""
    _check(profile, EUCLIDEAN)
    r, v, vr = profile.radii, profile.values, profile.derivs
    N = params.N
    logW = np.log1p(np.cosh(r))
    log_s = (N - 1) * np.log(np.tanh(0.5 * r))
    tail = profile.decaying
    om = sphere_area(N)
    pw = N - 1
    # ds = dr / W and v_s = W v_r
    grad = om * radial_integral(r, _weighted(vr**2, logW + log_s), pw, tail)
    l2w = om * radial_integral(r, _weighted(v**2, logW + log_s), pw, tail)
    lpw = om * radial_integral(r, _weighted(np.abs(v) ** params.p,
                                            (params.q - 1) * logW + log_s), pw, tail)
    return {"grad": grad, "l2w": l2w, "lpw": lpw}


def energy_J(profile: RadialProfile, params: Params) -> float:
    if not np.any(profile.values):
        return 0.0
    t = hyperbolic_terms(profile, params)
    return 0.5 * t["grad"] - 0.5 * params.lam * t["l2"] - t["lp"] / params.p


def energy_G(profile: RadialProfile, params: Params) -> float:
    if not np.any(profile.values):
        return 0.0
    t = euclidean_terms(profile, params)
    return 0.5 * t["grad"] - 0.5 * params.lambda_tilde * t["l2w"] - t["lpw"] / params.p


def nehari_residual(profile: RadialProfile, params: Params) -> float:
    """(grad - lam L2 - Lp) relative to the largest of the three."""
    t = hyperbolic_terms(profile, params)
    parts = (t["grad"], params.lam * t["l2"], t["lp"])
    scale = max(abs(x) for x in parts)
    if scale == 0:
        return 0.0
    return (parts[0] - parts[1] - parts[2]) / scale
