"""Radial quadrature on sampled profiles."""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import cumulative_simpson, simpson
from scipy.special import gammaln


def sphere_area(N: int) -> float:
    """Area of the unit sphere S^(N-1) in R^N, 2 pi^(N/2) / Gamma(N/2)."""
    return float(math.exp(math.log(2.0) + 0.5 * N * math.log(math.pi) - gammaln(0.5 * N)))


def tail_estimate(r: np.ndarray, f: np.ndarray, span: float = 1.0) -> float:
    """Integral of a positive, exponentially decaying integrand beyond ``r[-1]``.

    The rate is read off the last ``span`` of samples; zero when the
    integrand is not decaying there.
    """
    if r.size < 3 or f[-1] <= 0:
        return 0.0
    j = int(np.searchsorted(r, r[-1] - span))
    j = min(j, r.size - 2)
    if f[j] <= 0:
        return 0.0
    rate = (math.log(f[j]) - math.log(f[-1])) / (r[-1] - r[j])
    if not rate > 0:
        return 0.0
    return float(f[-1] / rate)


def origin_cap(r: np.ndarray, f: np.ndarray, power: float) -> float:
    """Integral over [0, r[0]] for an integrand behaving like r^power."""
    return float(f[0] * r[0] / (power + 1.0)) if r[0] > 0 else 0.0


def radial_integral(r, f, power: float = 0.0, tail: bool = False) -> float:
    """Simpson rule on the sample grid plus origin and optional tail pieces."""
    r = np.asarray(r, dtype=float)
    f = np.asarray(f, dtype=float)
    total = float(simpson(f, x=r)) + origin_cap(r, f, power)
    if tail:
        total += tail_estimate(r, f)
    return total


def cumulative_radial_integral(r, f, power: float = 0.0) -> np.ndarray:
    """Running integral from the origin at every sample."""
    r = np.asarray(r, dtype=float)
    f = np.asarray(f, dtype=float)
    out = np.empty_like(f)
    out[0] = 0.0
    if f.size > 1:
        out[1:] = cumulative_simpson(f, x=r)
    return out + origin_cap(r, f, power)
