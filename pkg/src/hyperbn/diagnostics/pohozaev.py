"""Local and global Pohozaev balances for radial ``v``.

Testing the conformally changed equation

    -Lap v - lt W^2 v = W^q |v|^(p-2) v,    W = 2/(1-s^2),  lt = lam - N(N-2)/4

against ``s v_s`` and against ``v`` on the ball of radius ``R`` and
subtracting gives

    lt I[W^2 v^2] + lt I[s^2 W^3 v^2] + (N/p - (N-2)/2) I[W^q |v|^p]
        + (q/p) I[s^2 W^(q+1) |v|^p]
    = omega R^(N-1) [ R v_s^2/2 + lt R W^2 v^2/2 + R W^q |v|^p/p + (N-2)/2 v v_s ]

with ``I[f] = omega int_0^R f s^(N-1) ds``.  The residual is left minus right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..geometry import Params, euclidean_radius
from ..radial_ode import EUCLIDEAN, RadialProfile
from .quadrature import cumulative_radial_integral, radial_integral, sphere_area

TERM_NAMES = ("weight2", "weight3", "power", "power_weighted")
BOUNDARY_NAMES = ("radial_gradient", "potential", "power", "cross")


@dataclass
class PohozaevReport:
    radii_R: list
    requested_R: list
    interior_terms: list
    boundary_terms: list
    residual: list
    normalizer: list
    relative_residual: list
    flagged: bool
    threshold: float
    global_form: dict | None = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "radii_R": self.radii_R,
            "requested_R": self.requested_R,
            "interior_terms": self.interior_terms,
            "boundary_terms": self.boundary_terms,
            "residual": self.residual,
            "normalizer": self.normalizer,
            "relative_residual": self.relative_residual,
            "flagged": self.flagged,
            "threshold": self.threshold,
            "global_form": self.global_form,
            "notes": self.notes,
        }


def _integrands(profile: RadialProfile, params: Params):
    N, p, q, lt = params.N, params.p, params.q, params.lambda_tilde
    r, v = profile.radii, profile.values
    s = np.tanh(0.5 * r)
    W = 1.0 + np.cosh(r)
    # integrands against dr (ds = dr/W)
    sp = s ** (N - 1)
    a2 = np.abs(v) ** p
    terms = {
        "weight2": lt * W * v**2 * sp,
        "weight3": lt * s**2 * W**2 * v**2 * sp,
        "power": (N / p - (N - 2) / 2.0) * W ** (q - 1) * a2 * sp,
        "power_weighted": (q / p) * s**2 * W**q * a2 * sp,
    }
    return terms


def pohozaev_check(profile: RadialProfile, params: Params, radii_R=(0.3, 0.6, 0.9),
                   threshold: float = 1e-6) -> PohozaevReport:
    """Evaluate the local balance on the sample closest to each requested
    Euclidean radius.  ``threshold`` only sets the ``flagged`` bit."""
    if profile.gauge != EUCLIDEAN:
        raise ValueError("pohozaev_check needs a euclidean-v profile")
    N, p, q, lt = params.N, params.p, params.q, params.lambda_tilde
    r = profile.radii
    s_all = euclidean_radius(r)
    om = sphere_area(N)
    cum = {k: om * cumulative_radial_integral(r, f, N - 1)
           for k, f in _integrands(profile, params).items()}

    used, inter, bound, res, norm, rel = [], [], [], [], [], []
    for R in radii_R:
        if not s_all[0] < R <= s_all[-1]:
            raise ValueError(f"R={R} lies outside the profile support")
        i = int(np.argmin(np.abs(s_all - R)))
        Rs = float(s_all[i])
        W = 1.0 + math.cosh(r[i])
        v = float(profile.values[i])
        vs = float(profile.derivs[i]) * W
        it = {k: float(cum[k][i]) for k in TERM_NAMES}
        area = om * Rs ** (N - 1)
        bt = {
            "radial_gradient": area * 0.5 * Rs * vs**2,
            "potential": area * 0.5 * lt * Rs * W**2 * v**2,
            "power": area * Rs * W**q * abs(v) ** p / p,
            "cross": area * 0.5 * (N - 2) * v * vs,
        }
        rsd = sum(it.values()) - sum(bt.values())
        nm = max([abs(x) for x in it.values()] + [abs(x) for x in bt.values()])
        used.append(Rs)
        inter.append(it)
        bound.append(bt)
        res.append(rsd)
        norm.append(nm)
        rel.append(rsd / nm if nm > 0 else 0.0)

    report = PohozaevReport(
        radii_R=used, requested_R=[float(x) for x in radii_R], interior_terms=inter,
        boundary_terms=bound, residual=res, normalizer=norm, relative_residual=rel,
        flagged=bool(any(abs(x) > threshold for x in rel)), threshold=threshold)
    if lt <= 0:
        report.global_form = global_pohozaev(profile, params)
    else:
        report.notes.append("global form skipped: boundary flux need not vanish for lambda_tilde > 0")
    return report


def global_pohozaev(profile: RadialProfile, params: Params) -> dict:
    """Whole-ball balance, meaningful for ``lambda_tilde <= 0``.

    At the critical exponent this reduces to
    ``4 lt omega int (1+s^2)/(1-s^2)^3 v^2 s^(N-1) ds``, which must vanish.
    """
    if params.lambda_tilde > 0:
        raise ValueError("global identity is only asserted for lambda_tilde <= 0")
    if profile.gauge != EUCLIDEAN:
        raise ValueError("global_pohozaev needs a euclidean-v profile")
    N = params.N
    om = sphere_area(N)
    terms = {k: om * radial_integral(profile.radii, f, N - 1, tail=profile.decaying)
             for k, f in _integrands(profile, params).items()}
    total = sum(terms.values())
    scale = max(abs(x) for x in terms.values())
    return {"terms": terms, "total": total,
            "relative": total / scale if scale > 0 else 0.0}
