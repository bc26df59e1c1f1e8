"""The model linear problem ``-v'' + eta v / r^2 = f`` on (0, 1) and radial
Dirichlet eigenvalues of the Euclidean unit ball.

With ``r = e^t`` and ``theta(t) = v(e^t)`` the operator becomes
``theta'' - theta' - eta theta = -e^(2t) f``, whose homogeneous solutions
are ``e^(m t)`` for the roots of ``m^2 - m - eta = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import _dop853
from .radial_ode import count_sign_changes

__all__ = [
    "LinearODESolution",
    "characteristic_exponents",
    "variation_of_parameters",
    "bound_constants",
    "is_resonant",
    "radial_dirichlet_eigenvalues",
    "energy_level_bound",
]

T_CUT = -40.0


def characteristic_exponents(eta: float) -> tuple[float, float]:
    if eta < 0:
        raise ValueError("eta must be non-negative")
    root = math.sqrt(4.0 * eta + 1.0)
    return 0.5 * (1.0 + root), 0.5 * (1.0 - root)


def is_resonant(eta: float) -> bool:
    """m2 + 1 = 0 (eta = 2): the r^(m1) coefficient picks up a log."""
    _, m2 = characteristic_exponents(eta)
    return abs(m2 + 1.0) < 1e-12


@dataclass
class LinearODESolution:
    eta: float
    m1: float
    m2: float
    grid: np.ndarray
    v_values: np.ndarray
    dv_values: np.ndarray
    C1: float
    C2: float
    M: float
    v1_at_0: float
    tail_bound: float

    def bound(self) -> np.ndarray:
        """C1 r^m1 + C2 r^2 on the grid."""
        r = self.grid
        return self.C1 * r**self.m1 + self.C2 * r**2

    def to_dict(self) -> dict:
        return {
            "eta": self.eta, "m1": self.m1, "m2": self.m2, "C1": self.C1, "C2": self.C2,
            "M": self.M, "v1_at_0": self.v1_at_0, "tail_bound": self.tail_bound,
            "grid": self.grid.tolist(), "v": self.v_values.tolist(),
        }


def bound_constants(M: float, eta: float, v1_at_0: float = 0.0) -> tuple[float, float]:
    """Constants with ``|v(r)| <= C1 r^m1 + C2 r^2`` when ``|f| <= M``.

    From the two quadratures: the ``v2`` part gives ``M/(root (m1+1))``; the
    ``v1`` part joins ``C1`` when ``m2 + 1 > 0`` and ``C2`` when
    ``m2 + 1 < 0``.  At ``m2 + 1 = 0`` the ``v1`` part grows like
    ``|log r|`` and no finite ``C1`` exists; ``C1 = inf`` is returned.
    """
    if M < 0:
        raise ValueError("M must be non-negative")
    if not eta > 0:
        raise ValueError("eta must be positive")
    m1, m2 = characteristic_exponents(eta)
    root = math.sqrt(4.0 * eta + 1.0)
    C2 = M / (root * (m1 + 1.0))
    C1 = abs(v1_at_0)
    if is_resonant(eta):
        C1 = math.inf if M > 0 else C1
    elif m2 + 1.0 > 0:
        C1 += M / (root * (m2 + 1.0))
    else:
        C2 += M / (root * abs(m2 + 1.0))
    return C1, C2


def _panels(t_grid: np.ndarray, width: float = 0.25) -> np.ndarray:
    base = np.arange(T_CUT, 0.0, width)
    return np.unique(np.concatenate([base, t_grid, [T_CUT, 0.0]]))


def variation_of_parameters(f, eta: float, grid, v1_at_0: float = 0.0,
                            n_gauss: int = 16) -> LinearODESolution:
    """Solve ``-v'' + eta v/r^2 = f`` by the two log-variable quadratures.

    ``f`` is a callable of ``r`` or an array of samples on ``grid`` (then
    interpolated by a cubic spline in ``r``).  ``v2`` integrates from
    ``t = -40`` (the neglected piece is reported in ``tail_bound``); ``v1``
    integrates back from ``t = 0`` starting at ``v1_at_0``.
    """
    if eta < 0:
        raise ValueError("eta must be non-negative")
    r_grid = np.asarray(grid, dtype=float)
    if r_grid.ndim != 1 or r_grid.size == 0:
        raise ValueError("grid must be a non-empty 1-D array")
    if np.any(r_grid <= 0) or np.any(r_grid > 1) or np.any(np.diff(r_grid) <= 0):
        raise ValueError("grid must be increasing inside (0, 1]")
    if callable(f):
        fun = f
    else:
        from scipy.interpolate import CubicSpline
        samples = np.asarray(f, dtype=float)
        if samples.shape != r_grid.shape:
            raise ValueError("sampled f must match the grid")
        if not np.all(np.isfinite(samples)):
            raise ValueError("f samples must be finite")
        fun = CubicSpline(r_grid, samples)
    m1, m2 = characteristic_exponents(eta)
    root = math.sqrt(4.0 * eta + 1.0)
    t_grid = np.log(r_grid)
    if np.any(t_grid < T_CUT):
        raise ValueError("grid reaches below r = e^-40")
    edges = _panels(t_grid)
    xg, wg = np.polynomial.legendre.leggauss(n_gauss)
    a, b = edges[:-1], edges[1:]
    ts = 0.5 * (b - a)[:, None] * (xg[None, :] + 1.0) + a[:, None]
    ws = 0.5 * (b - a)[:, None] * wg[None, :]
    fv = np.asarray(fun(np.exp(ts)), dtype=float)
    if not np.all(np.isfinite(fv)):
        raise ValueError("f is unbounded on the grid")
    M = float(np.max(np.abs(fv)))
    if not callable(f):
        M = max(M, float(np.max(np.abs(f))))
    I2 = np.concatenate([[0.0], np.cumsum(np.sum(ws * np.exp((m1 + 1.0) * ts) * fv, axis=1))])
    # v1 runs from t = 0 backwards; summing that way avoids cancelling e^(-40)-sized terms
    panel1 = np.sum(ws * np.exp((m2 + 1.0) * ts) * fv, axis=1)
    I1 = np.concatenate([np.cumsum(panel1[::-1])[::-1], [0.0]])
    idx = np.searchsorted(edges, t_grid)
    v2 = I2[idx] / root
    v1 = v1_at_0 + I1[idx] / root
    v = v1 * r_grid**m1 + v2 * r_grid**m2
    dv = m1 * v1 * r_grid ** (m1 - 1.0) + m2 * v2 * r_grid ** (m2 - 1.0)
    C1, C2 = bound_constants(M, eta, v1_at_0) if eta > 0 else (math.nan, math.nan)
    tail = M * math.exp((m1 + 1.0) * T_CUT) / (root * (m1 + 1.0))
    return LinearODESolution(eta=eta, m1=m1, m2=m2, grid=r_grid, v_values=v, dv_values=dv,
                             C1=C1, C2=C2, M=M, v1_at_0=v1_at_0, tail_bound=tail)


def _eigen_shot(N: int, mu: float, rtol: float, r0: float = 1e-6):
    """phi(1) and the number of sign changes of phi on (0, 1)."""
    c2 = -mu / (2.0 * N)
    c4 = mu * mu / (8.0 * N * (N + 2))
    u0 = 1.0 + c2 * r0**2 + c4 * r0**4
    up0 = 2.0 * c2 * r0 + 4.0 * c4 * r0**3
    ts, ys, Fs, _, _ = _dop853.integrate_kernel(1, float(N - 1), float(mu), 0.0, r0, u0, up0,
                                                1.0, rtol, 1e-300, 0.0, 0.0, False, 10**6)
    rq = _dop853.sample_grid(ts, 1.0, 8, 1e-3)
    yq = _dop853.dense_eval(ts, ys, Fs, rq) if Fs.shape[0] else ys
    return float(ys[-1, 0]), count_sign_changes(yq[:-1, 0])


def radial_dirichlet_eigenvalues(N: int, count: int, rtol: float = 1e-13) -> list[float]:
    """First ``count`` radial Dirichlet eigenvalues of the unit ball in R^N.

    The k-th eigenfunction has k-1 interior zeros; the zero count brackets
    each eigenvalue and ``brentq`` resolves ``phi(1) = 0``.
    """
    if int(N) != N or N < 3:
        raise ValueError("N must be an integer >= 3")
    if int(count) != count or count < 1:
        raise ValueError("count must be a positive integer")
    out = []
    lo = 0.0
    for k in range(1, count + 1):
        step = max(1.0, 0.25 * (math.pi * k) ** 2)
        a, b = lo, lo + step
        while _zeros_upto_one(N, b, rtol) < k:
            a, b = b, b + step
        # shrink until exactly one eigenvalue sits in (a, b]
        while _zeros_upto_one(N, b, rtol) > k:
            mid = 0.5 * (a + b)
            if _zeros_upto_one(N, mid, rtol) < k:
                a = mid
            else:
                b = mid
        mu = brentq(lambda m: _eigen_shot(N, m, rtol)[0], a, b, xtol=1e-13, maxiter=200)
        out.append(float(mu))
        lo = mu * (1.0 + 1e-9)
    return out


def _zeros_upto_one(N, mu, rtol):
    phi1, n = _eigen_shot(N, mu, rtol)
    # a crossing exactly at r = 1 counts once phi(1) has changed sign
    return n + (1 if phi1 * (-1) ** n < 0 else 0)


def energy_level_bound(lambda_k1: float, p0: float, T1: float) -> float:
    """T1 * lambda_k1^(p0 / (2 (p0 - 2))); ``inf`` in the p0 -> 2 limit."""
    if not p0 > 2:
        raise ValueError("p0 must exceed 2")
    if not T1 > 0:
        raise ValueError("T1 must be positive")
    if not lambda_k1 > 0:
        raise ValueError("lambda_k1 must be positive")
    expo = p0 / (2.0 * (p0 - 2.0))
    try:
        return float(T1 * lambda_k1**expo)
    except OverflowError:
        return math.inf
