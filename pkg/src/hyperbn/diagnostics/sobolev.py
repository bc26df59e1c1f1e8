"""Shifted Sobolev quotient in the Euclidean gauge and a radial minimizer.

    Q(v) = ( int |grad v|^2 - lt int W^2 v^2 ) / ( int |v|^p W^q )^(2/p)

over the unit ball, ``W = 2/(1-s^2)``.  The minimizer works with
continuous piecewise-linear ``v`` on a graded grid in ``s`` vanishing at
``s = 1``, so the quotient of the discrete function is exact up to
Gauss quadrature and the discrete minimum bounds the true infimum from
above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import minimize

from ..geometry import Params, make_params
from ..radial_ode import RadialProfile
from .energy import euclidean_terms
from .quadrature import sphere_area


def sobolev_quotient(profile: RadialProfile, params: Params, p: float | None = None) -> float:
    """Quotient of a sampled ``v`` profile; ``p`` defaults to ``params.p``."""
    if p is not None and p != params.p:
        params = make_params(params.N, params.lam, p)
    if params.lam > (params.N - 1) ** 2 / 4:
        raise ValueError("shifted quotient needs lambda <= (N-1)^2/4")
    t = euclidean_terms(profile, params)
    den = t["lpw"]
    if not den > 1e-300:
        raise ValueError("denominator underflow")
    return (t["grad"] - params.lambda_tilde * t["l2w"]) / den ** (2.0 / params.p)


@dataclass(frozen=True)
class FamilyControls:
    """Settings for :func:`minimize_quotient`.

    The grid is ``s_i = (i/n)^grading``; starts are Talenti-type bubbles
    ``(e^2 + s^2)^(-(N-2)/2) - (e^2 + 1)^(-(N-2)/2)`` with ``e`` drawn
    log-uniformly from ``eps_range`` and a smooth random perturbation.
    """

    n_nodes: int = 400
    grading: float = 3.0
    n_starts: int = 6
    eps_range: tuple[float, float] = (1e-3, 0.3)
    perturbation: float = 0.05
    maxiter: int = 3000
    gtol: float = 1e-10
    n_gauss: int = 6
    seed: int = 0

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["eps_range"] = list(self.eps_range)
        return d


@dataclass
class QuotientEstimate:
    estimate: float
    s: np.ndarray
    v: np.ndarray
    start_values: list
    final_values: list
    converged: bool
    message: str
    controls: FamilyControls = field(default_factory=FamilyControls)

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "start_values": self.start_values,
            "final_values": self.final_values,
            "converged": self.converged,
            "message": self.message,
            "controls": self.controls.to_dict(),
        }


class _P1Quotient:
    """Discrete quotient and gradient for nodal values on ``s[:-1]``."""

    def __init__(self, s: np.ndarray, params: Params, n_gauss: int):
        N, p, q = params.N, params.p, params.q
        self.p = p
        self.pref = sphere_area(N) ** (1.0 - 2.0 / p)
        n = s.size - 1
        h = np.diff(s)
        xg, wg = np.polynomial.legendre.leggauss(n_gauss)
        x = 0.5 * (xg[None, :] + 1.0) * h[:, None] + s[:-1, None]
        w = 0.5 * wg[None, :] * h[:, None]
        phi_b = (x - s[:-1, None]) / h[:, None]
        phi_a = 1.0 - phi_b
        xs = x ** (N - 1)
        W = 2.0 / (1.0 - x * x)
        kk = np.sum(w * xs, axis=1) / h**2
        mw = w * W**2 * xs
        m_aa = np.sum(mw * phi_a**2, axis=1)
        m_ab = np.sum(mw * phi_a * phi_b, axis=1)
        m_bb = np.sum(mw * phi_b**2, axis=1)
        lt = params.lambda_tilde
        a_aa = kk - lt * m_aa
        a_ab = -kk - lt * m_ab
        a_bb = kk - lt * m_bb
        diag = np.zeros(n + 1)
        diag[:-1] += a_aa
        diag[1:] += a_bb
        A = sp.diags([a_ab, diag, a_ab], [-1, 0, 1], shape=(n + 1, n + 1), format="csr")
        self.A = A[:n, :n]
        rows = np.arange(n * n_gauss)
        ea = np.repeat(np.arange(n), n_gauss)
        P = sp.csr_matrix((phi_a.ravel(), (rows, ea)), shape=(n * n_gauss, n + 1)) \
            + sp.csr_matrix((phi_b.ravel(), (rows, ea + 1)), shape=(n * n_gauss, n + 1))
        self.P = P[:, :n].tocsr()
        self.c = (w * W**q * xs).ravel()

    def value_grad(self, v: np.ndarray):
        Av = self.A @ v
        num = float(v @ Av)
        y = self.P @ v
        ay = np.abs(y)
        D = float(np.sum(self.c * ay**self.p))
        if not D > 1e-300:
            raise FloatingPointError("denominator underflow")
        dD = self.p * (self.P.T @ (self.c * ay ** (self.p - 2) * y))
        Dp = D ** (2.0 / self.p)
        Q = self.pref * num / Dp
        g = self.pref * (2.0 * Av / Dp - num * (2.0 / self.p) * dD / (Dp * D))
        return Q, g


def talenti_profile(s, N: int, eps: float) -> np.ndarray:
    k = (N - 2) / 2.0
    return (eps**2 + s**2) ** (-k) - (eps**2 + 1.0) ** (-k)


def minimize_quotient(params: Params, p: float | None = None,
                      controls: FamilyControls | None = None) -> QuotientEstimate:
    """Best discrete quotient over several perturbed bubble starts (L-BFGS)."""
    controls = controls or FamilyControls()
    if p is not None and p != params.p:
        params = make_params(params.N, params.lam, p)
    if params.lam > (params.N - 1) ** 2 / 4:
        raise ValueError("shifted quotient needs lambda <= (N-1)^2/4")
    if controls.n_nodes < 4 or controls.n_starts < 1:
        raise ValueError("need at least 4 nodes and one start")
    s = (np.arange(controls.n_nodes + 1) / controls.n_nodes) ** controls.grading
    problem = _P1Quotient(s, params, controls.n_gauss)
    rng = np.random.default_rng(controls.seed)
    lo, hi = np.log(controls.eps_range[0]), np.log(controls.eps_range[1])

    best = None
    starts, finals = [], []
    msg = ""
    converged = False
    for _ in range(controls.n_starts):
        eps = float(np.exp(rng.uniform(lo, hi)))
        # a few low Fourier modes in s keep the perturbation smooth
        modes = rng.normal(size=4)
        wiggle = sum(c * np.cos((j + 0.5) * np.pi * s[:-1]) for j, c in enumerate(modes))
        v0 = talenti_profile(s[:-1], params.N, eps) * (1.0 + controls.perturbation * wiggle)
        v0 /= np.max(np.abs(v0))
        q0, _ = problem.value_grad(v0)
        res = minimize(problem.value_grad, v0, jac=True, method="L-BFGS-B",
                       options={"maxiter": controls.maxiter, "gtol": controls.gtol,
                                "ftol": 1e-15, "maxcor": 20})
        starts.append(float(q0))
        finals.append(float(res.fun))
        if best is None or res.fun < best.fun:
            best = res
            msg = str(res.message)
            converged = bool(res.success)
    v = np.append(best.x, 0.0)
    return QuotientEstimate(estimate=float(best.fun), s=s, v=v, start_values=starts,
                            final_values=finals, converged=converged, message=msg,
                            controls=controls)


def euclidean_sobolev_constant(N: int) -> float:
    """Best constant of |grad u|_2^2 >= S |u|_{2N/(N-2)}^2 on R^N."""
    log_sn = math.log(2.0) + 0.5 * (N + 1) * math.log(math.pi) - math.lgamma(0.5 * (N + 1))
    return N * (N - 2) / 4.0 * math.exp(2.0 / N * log_sn)
