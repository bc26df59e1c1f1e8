"""Coordinates on the ball model of hyperbolic space.

The canonical radial variable throughout the package is the geodesic
distance ``r`` to the origin.  The Euclidean radius in the unit ball is
``s = tanh(r/2)`` and the conformal factor of the metric is
``2/(1 - s^2) = 1 + cosh r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

__all__ = [
    "Params",
    "HalfSpacePoint",
    "make_params",
    "resolve_exponent",
    "critical_exponent",
    "ball_to_halfspace",
    "halfspace_to_ball",
    "mobius_map",
    "geodesic_radius",
    "euclidean_radius",
    "conformal_weight",
    "weight_from_geodesic",
    "gauge_transform",
]


def critical_exponent(N: int) -> float:
    """Critical Sobolev exponent 2N/(N-2)."""
    return 2.0 * N / (N - 2)


@dataclass(frozen=True)
class Params:
    """Problem instance ``-Lap_B u - lam u = |u|^(p-2) u`` with derived constants.

    ``lam`` is the spectral parameter (``lambda`` is reserved in Python).
    """

    N: int
    lam: float
    p: float

    @property
    def p_crit(self) -> float:
        return critical_exponent(self.N)

    @property
    def lambda_tilde(self) -> float:
        return self.lam - self.N * (self.N - 2) / 4.0

    @property
    def eta(self) -> float:
        return self.N * (self.N - 2) / 4.0 - self.lam

    @property
    def q(self) -> float:
        if self.is_critical:
            return 0.0
        return (2.0 * self.N - self.p * (self.N - 2)) / 2.0

    @property
    def window(self) -> tuple[float, float]:
        N = self.N
        return (N * (N - 2) / 4.0, (N - 1) ** 2 / 4.0)

    @property
    def in_window(self) -> bool:
        lo, hi = self.window
        return lo < self.lam < hi

    @property
    def is_critical(self) -> bool:
        return self.p == self.p_crit

    @property
    def spectral_gap(self) -> float:
        """sqrt((N-1)^2 - 4 lam); the distance between the two tail rates."""
        return math.sqrt((self.N - 1) ** 2 - 4.0 * self.lam)

    @property
    def fast_rate(self) -> float:
        """Decay rate of finite-energy tails, ((N-1) + gap)/2."""
        return ((self.N - 1) + self.spectral_gap) / 2.0

    @property
    def slow_rate(self) -> float:
        return ((self.N - 1) - self.spectral_gap) / 2.0

    def with_p(self, p: float) -> "Params":
        return make_params(self.N, self.lam, p)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "lambda": self.lam,
            "p": self.p,
            "p_crit": self.p_crit,
            "lambda_tilde": self.lambda_tilde,
            "eta": self.eta,
            "q": self.q,
            "window": list(self.window),
            "in_window": self.in_window,
        }


def resolve_exponent(N: int, p: float | str) -> float:
    """Turn ``"critical"`` into 2N/(N-2); pass numbers through."""
    if isinstance(p, str):
        if p.strip().lower() in ("critical", "crit", "2*"):
            return critical_exponent(N)
        return float(p)
    return float(p)


def make_params(N: int, lam: float, p: float | str) -> Params:
    """Validate and build a :class:`Params`.

    Raises ``ValueError`` for ``N < 3`` or ``p`` outside ``(2, 2N/(N-2)]``.
    """
    if int(N) != N or N < 3:
        raise ValueError(f"dimension must be an integer >= 3, got {N!r}")
    N = int(N)
    p = resolve_exponent(N, p)
    pc = critical_exponent(N)
    if not (p > 2.0):
        raise ValueError(f"exponent p must exceed 2, got {p}")
    if p > pc:
        # within a couple of ulps of 2N/(N-2) counts as critical
        if p - pc <= 4 * np.spacing(pc):
            p = pc
        else:
            raise ValueError(f"exponent p={p} exceeds the critical exponent {pc}")
    elif pc - p <= 4 * np.spacing(pc):
        p = pc
    lam = float(lam)
    if not math.isfinite(lam):
        raise ValueError("lambda must be finite")
    return Params(N=N, lam=lam, p=p)


class HalfSpacePoint(NamedTuple):
    """Point(s) of the upper half space: ``horizontal`` has N-1 coordinates."""

    horizontal: np.ndarray
    height: np.ndarray | float

    def as_array(self) -> np.ndarray:
        h = np.asarray(self.height, dtype=float)
        return np.concatenate([np.asarray(self.horizontal, dtype=float), h[..., None]], axis=-1)


def mobius_map(x: np.ndarray) -> np.ndarray:
    """The isometry M between ball and half space, acting on R^N coordinates.

    M(x) = (2x', 1 - |x|^2) / ((1 + x_N)^2 + |x'|^2).  It is its own inverse.
    """
    x = np.asarray(x, dtype=float)
    xh, xn = x[..., :-1], x[..., -1]
    den = (1.0 + xn) ** 2 + np.sum(xh * xh, axis=-1)
    out = np.empty_like(x)
    out[..., :-1] = 2.0 * xh / den[..., None]
    out[..., -1] = (1.0 - np.sum(x * x, axis=-1)) / den
    return out


def ball_to_halfspace(x: np.ndarray) -> HalfSpacePoint:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] < 2:
        raise ValueError("points need at least two coordinates")
    if np.any(np.sum(x * x, axis=-1) >= 1.0):
        raise ValueError("ball points must satisfy |x| < 1")
    y = mobius_map(x)
    return HalfSpacePoint(y[..., :-1], y[..., -1])


def halfspace_to_ball(y: HalfSpacePoint | np.ndarray) -> np.ndarray:
    arr = y.as_array() if isinstance(y, HalfSpacePoint) else np.asarray(y, dtype=float)
    if np.any(arr[..., -1] <= 0.0):
        raise ValueError("half-space points must have positive height")
    return mobius_map(arr)


def geodesic_radius(s, one_minus_s=None):
    """Hyperbolic distance to the origin, ``r = 2 artanh(s)``.

    Near the boundary ``s`` loses all precision in double arithmetic; pass the
    complement ``1 - s`` explicitly to keep it.
    """
    s = np.asarray(s, dtype=float)
    if one_minus_s is None:
        if np.any(s < 0) or np.any(s >= 1):
            raise ValueError("euclidean radius must lie in [0, 1)")
        out = 2.0 * np.arctanh(s)
    else:
        d = np.asarray(one_minus_s, dtype=float)
        if np.any(d <= 0) or np.any(d > 1) or np.any(s < 0):
            raise ValueError("need 0 <= s and 0 < 1 - s <= 1")
        out = np.log(2.0 - d) - np.log(d)
    return out[()] if out.ndim == 0 else out


def euclidean_radius(r, return_complement: bool = False):
    """Inverse of :func:`geodesic_radius`; optionally also ``1 - s``."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("geodesic radius must be non-negative")
    s = np.tanh(0.5 * r)
    s = s[()] if s.ndim == 0 else s
    if not return_complement:
        return s
    d = 2.0 / (np.exp(r) + 1.0)
    return s, (d[()] if d.ndim == 0 else d)


def conformal_weight(s, exponent: float):
    """(2/(1 - s^2))**exponent for Euclidean radius s in [0, 1)."""
    s = np.asarray(s, dtype=float)
    if np.any(s >= 1) or np.any(s < 0):
        raise ValueError("euclidean radius must lie in [0, 1)")
    out = (2.0 / (1.0 - s * s)) ** exponent
    return out[()] if out.ndim == 0 else out


def weight_from_geodesic(r, exponent: float = 1.0):
    """Same weight in the geodesic variable: (1 + cosh r)**exponent."""
    r = np.asarray(r, dtype=float)
    out = (1.0 + np.cosh(r)) ** exponent
    return out[()] if out.ndim == 0 else out


_GAUGES = {"hyperbolic-u": "euclidean-v", "euclidean-v": "hyperbolic-u"}


def gauge_transform(profile, direction: str, params: Params):
    """Switch a radial profile between ``u`` and ``v = (1 + cosh r)^k u``,
    ``k = (N-2)/2``.

    ``direction`` is ``"to_euclidean"`` or ``"to_hyperbolic"``.  Derivatives
    stay with respect to ``r``: ``v' = w^k (u' + k tanh(r/2) u)``.
    """
    source = {"to_euclidean": "hyperbolic-u", "to_hyperbolic": "euclidean-v"}.get(direction)
    if source is None:
        raise ValueError(f"unknown direction {direction!r}")
    if profile.gauge != source:
        raise ValueError(f"profile is in gauge {profile.gauge!r}, expected {source!r}")
    k = (params.N - 2) / 2.0
    r = profile.radii
    th = np.tanh(0.5 * r)
    if direction == "to_euclidean":
        w = weight_from_geodesic(r, k)
        vals = w * profile.values
        ders = w * (profile.derivs + k * th * profile.values)
    else:
        w = weight_from_geodesic(r, -k)
        vals = w * profile.values
        ders = w * profile.derivs - k * th * vals
    return replace(profile, values=np.asarray(vals, dtype=float), meta=dict(profile.meta),
                   derivs=np.asarray(ders, dtype=float), gauge=_GAUGES[source])
