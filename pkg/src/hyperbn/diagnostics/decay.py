"""Tail rates and weighted sup bounds."""

from __future__ import annotations

import math

import numpy as np

from ..radial_ode import RadialProfile, count_sign_changes


def decay_exponent(N: int, lam: float) -> tuple[float, float]:
    """Return ``(c_lambda, c_lin)``.

    ``c_lin = ((N-1) + sqrt((N-1)^2 - 4 lam))/2`` is the fast root of the
    frozen linearization; ``c_lambda`` caps it at ``(N+2)/2``.
    """
    disc = (N - 1) ** 2 - 4.0 * lam
    if not disc > 0:
        raise ValueError("lambda must be below (N-1)^2/4")
    c_lin = 0.5 * ((N - 1) + math.sqrt(disc))
    return min(c_lin, 0.5 * (N + 2)), c_lin


def default_tail_window(profile: RadialProfile, floor: float = 1e-12,
                        fraction: float = 0.3) -> tuple[float, float]:
    """Last ``fraction`` of the monotone tail, stopping where ``|u|`` drops
    below ``floor`` times the peak of the outermost lobe."""
    r = profile.radii
    a = np.abs(profile.values)
    if a.max() == 0:
        raise ValueError("profile is identically zero")
    sg = np.sign(profile.values)
    flips = np.nonzero((sg[1:] * sg[:-1]) < 0)[0]
    i0 = int(flips[-1]) + 1 if flips.size else 0
    amax = a[i0:].max()
    below = i0 + np.nonzero(a[i0:] < floor * amax)[0]
    i_b = int(below[0]) if below.size else r.size - 1
    i_b = max(i_b, 1)
    # start of the tail: last point before i_b where |u| was still growing
    grow = np.nonzero(np.diff(a[: i_b + 1]) > 0)[0]
    i_a = int(grow[-1]) + 1 if grow.size else 0
    i_a = min(i_a, i_b - 1)
    r_a, r_b = r[i_a], r[i_b]
    return float(r_b - fraction * (r_b - r_a)), float(r_b)


def fit_tail_decay(profile: RadialProfile, window: tuple[float, float] | None = None) -> float:
    """Negated least-squares slope of ``log|u|`` against ``r`` on ``window``."""
    if window is None:
        window = default_tail_window(profile)
    r_a, r_b = window
    r = profile.radii
    if r_a < r[0] or r_b > r[-1] or not r_a < r_b:
        raise ValueError("window must lie inside the profile support")
    sel = (r >= r_a) & (r <= r_b)
    u = profile.values[sel]
    if u.size < 2:
        raise ValueError("window holds fewer than two samples")
    if np.any(u == 0) or count_sign_changes(u) > 0:
        raise ValueError("window contains a node")
    slope = np.polyfit(r[sel], np.log(np.abs(u)), 1)[0]
    return float(-slope)


def uniform_bound_ratios(profile: RadialProfile) -> tuple[float, float]:
    """sup |u| s^(N/2) (1-s^2)^(-(N-1)/2) and sup |u| (1-s^2)^(-(N-1)/2).

    Uses ``(1-s^2)^(-1/2) = cosh(r/2)`` so nothing cancels near the boundary.
    """
    if len(profile) == 0:
        raise ValueError("empty profile")
    if profile.gauge != "hyperbolic-u":
        raise ValueError("bound ratios need the hyperbolic gauge")
    N = profile.params.N
    r = profile.radii
    a = np.abs(profile.values)
    if not np.any(a):
        return 0.0, 0.0
    # log form avoids overflow of cosh^(N-1) on long profiles
    with np.errstate(divide="ignore"):
        log_a = np.log(a)
        log_s = 0.5 * N * np.log(np.tanh(0.5 * r))
    log_c = (N - 1) * (0.5 * r + np.log1p(np.exp(-r)) - math.log(2.0))
    r52 = float(np.exp(np.max(log_a + log_c)))
    r51 = float(np.exp(np.max(log_a + log_c + log_s)))
    return r51, r52
