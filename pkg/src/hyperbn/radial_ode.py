"""Radial reduction in geodesic polar coordinates and single shots.

A radial function on hyperbolic space solves

    u'' + (N-1) coth(r) u' + lam u + |u|^(p-2) u = 0,   u(0) = a, u'(0) = 0.

Far out the coefficients freeze and the linearization has the two decay
rates ``c_slow < c_fast`` (roots of c^2 - (N-1)c + lam = 0).  Finite-energy
solutions follow the fast one; a generic shot picks up the slow one.  A shot
is classified by which of the two eventually wins.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _dop853
from .geometry import Params, euclidean_radius

__all__ = [
    "RadialProfile",
    "Controls",
    "ShotClass",
    "ShotResult",
    "radial_rhs",
    "origin_series",
    "default_r0",
    "integrate",
    "hamiltonian",
    "count_sign_changes",
    "ode_residual",
    "RTOL_FACTOR",
]

# the integrator runs this much tighter than the requested accuracy
RTOL_FACTOR = 0.1

HYPERBOLIC = "hyperbolic-u"
EUCLIDEAN = "euclidean-v"


@dataclass(frozen=True)
class RadialProfile:
    """Samples of a radial function against the geodesic radius.

    ``derivs`` is always the derivative with respect to ``r``, whichever
    gauge the values are in.
    """

    radii: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    gauge: str
    params: Params
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        u = np.asarray(self.values, dtype=float)
        d = np.asarray(self.derivs, dtype=float)
        if not (r.shape == u.shape == d.shape) or r.ndim != 1:
            raise ValueError("radii, values and derivs must be 1-D arrays of equal length")
        if r.size > 1 and np.any(np.diff(r) <= 0):
            raise ValueError("radii must be strictly increasing")
        if self.gauge not in (HYPERBOLIC, EUCLIDEAN):
            raise ValueError(f"unknown gauge {self.gauge!r}")
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "values", u)
        object.__setattr__(self, "derivs", d)

    def __len__(self) -> int:
        return self.radii.size

    @property
    def s(self) -> np.ndarray:
        return euclidean_radius(self.radii)

    @property
    def decaying(self) -> bool:
        """True when the profile ends on a clean fast-rate tail."""
        return bool(self.meta.get("decay_tail", False))

    def truncated(self, r_stop: float) -> "RadialProfile":
        keep = self.radii <= r_stop
        return replace(self, radii=self.radii[keep], values=self.values[keep],
                       derivs=self.derivs[keep])


@dataclass(frozen=True)
class Controls:
    """Integration and classification settings.

    ``u_max`` bounds ``|u| e^(c_fast r) / |a|``: the amplitude measured
    against the finite-energy tail.  ``eps_decay`` is relative to
    ``max |u|``.  The decay test also requires the log-slope ``u'/u`` to sit
    within ``cone_fraction * (c_fast - c_slow)`` of ``-c_fast`` over a
    stretch of length ``window``.  ``r0=None`` picks a start radius from the
    local length scale of the nonlinearity, capped at 1e-4.
    """

    r_max: float = 60.0
    tol: float = 1e-10
    u_max: float = 1e6
    eps_decay: float = 1e-8
    r0: float | None = None
    dr_out: float = 0.01
    n_sub: int = 8
    cone_fraction: float = 1e-2
    window: float = 2.0
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not self.r_max > 1:
            raise ValueError("r_max must exceed 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not self.u_max > 1:
            raise ValueError("u_max must exceed 1")
        if not 0 < self.eps_decay < 1:
            raise ValueError("eps_decay must lie in (0, 1)")
        if self.r0 is not None and not 0 < self.r0 <= 0.1:
            raise ValueError("r0 must lie in (0, 0.1]")
        if not self.window > 0 or not self.cone_fraction > 0 or not self.dr_out > 0:
            raise ValueError("window, cone_fraction and dr_out must be positive")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


class ShotClass(str, enum.Enum):
    DECAY = "Decay"
    BLOWUP_POSITIVE = "BlowupPositive"
    BLOWUP_NEGATIVE = "BlowupNegative"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class ShotResult:
    """Outcome of one shot.

    ``nodes`` counts sign changes of the stored profile.  ``total_nodes``
    counts them on the whole trajectory and adds one if the slow mode is
    about to cross zero; it is what brackets are keyed on.  ``tail_sign``
    is the sign of the slow-mode component.
    """

    amplitude: float
    cls: ShotClass
    nodes: int
    total_nodes: int
    tail_sign: int
    r_end: float
    terminal_state: tuple[float, float]
    profile: RadialProfile
    clean_length: float
    flags: dict = field(default_factory=dict)

    def key(self) -> int:
        return self.total_nodes


def radial_rhs(r: float, state, params: Params):
    """(u', u'') for the radial equation at geodesic radius ``r > 0``."""
    if not r > 0:
        raise ValueError("radial_rhs is singular at r <= 0")
    u, up = float(state[0]), float(state[1])
    nl = abs(u) ** (params.p - 2) * u if u != 0 else 0.0
    return up, -(params.N - 1) * up / math.tanh(r) - params.lam * u - nl


def default_r0(a: float, params: Params) -> float:
    scale = abs(params.lam) + abs(a) ** (params.p - 2)
    return min(1e-4, 1e-3 / math.sqrt(scale)) if scale > 0 else 1e-4


def origin_series(a: float, params: Params, r0: float):
    """Regular expansion at the origin, through the r^4 term."""
    if not r0 > 0 or r0 > 0.1:
        raise ValueError("r0 must lie in (0, 0.1]")
    N, lam, p = params.N, params.lam, params.p
    if a == 0:
        return 0.0, 0.0
    g = lam * a + abs(a) ** (p - 2) * a
    dg = lam + (p - 1) * abs(a) ** (p - 2)
    c2 = -g / (2 * N)
    c4 = -c2 * (2 * (N - 1) / 3 + dg) / (4 * (N + 2))
    return a + c2 * r0**2 + c4 * r0**4, 2 * c2 * r0 + 4 * c4 * r0**3


def hamiltonian(values, derivs, params: Params) -> np.ndarray:
    """u'^2/2 + lam u^2/2 + |u|^p/p, non-increasing along solutions."""
    u = np.asarray(values, dtype=float)
    up = np.asarray(derivs, dtype=float)
    return 0.5 * up**2 + 0.5 * params.lam * u**2 + np.abs(u) ** params.p / params.p


def count_sign_changes(values, floor: float = 0.0) -> int:
    """Strict sign changes among samples with ``|value| > floor``."""
    v = np.asarray(values, dtype=float)
    v = v[np.abs(v) > floor]
    if v.size < 2:
        return 0
    sg = np.sign(v)
    return int(np.count_nonzero(sg[1:] != sg[:-1]))


def _clean_runs(r, u, up, c_fast, gap, controls):
    """Maximal runs of samples that sit on the fast tail; [(i0, i1), ...]."""
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = up / u
    umax = np.max(np.abs(u))
    ok = (np.abs(u) > 0) & (np.abs(slope + c_fast) <= controls.cone_fraction * gap) \
        & (np.abs(u) < controls.eps_decay * umax)
    runs = []
    i = 0
    n = ok.size
    while i < n:
        if ok[i]:
            j = i
            while j + 1 < n and ok[j + 1]:
                j += 1
            runs.append((i, j))
            i = j + 1
        else:
            i += 1
    return runs


def integrate(a: float, params: Params, controls: Controls | None = None) -> ShotResult:
    """Shoot from ``u(0) = a`` and classify the trajectory."""
    controls = controls or Controls()
    a = float(a)
    if a == 0 or not math.isfinite(a):
        raise ValueError("amplitude must be finite and non-zero")
    N, lam, p = params.N, params.lam, params.p
    if not lam < (N - 1) ** 2 / 4:
        raise ValueError("tail rates are complex for lambda >= (N-1)^2/4")
    gap = params.spectral_gap
    c_fast = params.fast_rate
    r0 = controls.r0 if controls.r0 is not None else default_r0(a, params)
    u0, up0 = origin_series(a, params, r0)
    log_level = math.log(controls.u_max * abs(a))

    ts, ys, Fs, r_event, status = _dop853.integrate_kernel(
        0, float(N - 1), float(lam), float(p - 2), r0, u0, up0, float(controls.r_max),
        float(controls.tol * RTOL_FACTOR), 1e-300, c_fast, log_level, True, int(controls.max_steps))
    r_stop = ts[-1] if math.isnan(r_event) else r_event
    rq = _dop853.sample_grid(ts, r_stop, controls.n_sub, controls.dr_out)
    if Fs.shape[0] > 0:
        yq = _dop853.dense_eval(ts, ys, Fs, rq)
    else:
        yq = ys[:1].copy()
    r, u, up = rq, yq[:, 0], yq[:, 1]

    flags = {"status": int(status), "r0": r0}
    if status == _dop853.STATUS_STEP_UNDERFLOW:
        flags["step_underflow"] = True
    if status == _dop853.STATUS_MAX_STEPS:
        flags["max_steps"] = True

    H = hamiltonian(u, up, params)
    rise = np.diff(H)
    h_scale = max(abs(H[0]), 1e-300)
    flags["hamiltonian_max_rise"] = float(max(rise.max(initial=0.0), 0.0) / h_scale)
    flags["hamiltonian_monotone"] = bool(flags["hamiltonian_max_rise"] <= 10 * controls.tol)

    if status == _dop853.STATUS_EVENT:
        tail_sign = 1 if u[-1] > 0 else -1
    else:
        w = up[-1] + c_fast * u[-1]
        tail_sign = 1 if w > 0 else (-1 if w < 0 else (1 if u[-1] >= 0 else -1))
    nodes_all = count_sign_changes(u)
    last = u[np.abs(u) > 0]
    last_sign = (1 if last[-1] > 0 else -1) if last.size else tail_sign
    total_nodes = nodes_all + (1 if last_sign != tail_sign else 0)

    best = None
    for i0, i1 in _clean_runs(r, u, up, c_fast, gap, controls):
        length = r[i1] - r[i0]
        if best is None or length > best[2]:
            best = (i0, i1, length)
    clean_length = best[2] if best else 0.0

    meta = {"tol": controls.tol, "rtol": controls.tol * RTOL_FACTOR, "r0": r0, "amplitude": a, "c_fast": c_fast,
            "c_slow": params.slow_rate}
    if best is not None and clean_length >= controls.window:
        cls = ShotClass.DECAY
        i_end = best[1]
        meta.update(decay_tail=True, clean_start=float(r[best[0]]), shot_class=cls.value)
        prof = RadialProfile(r[: i_end + 1], u[: i_end + 1], up[: i_end + 1], HYPERBOLIC,
                             params, meta)
    else:
        if status == _dop853.STATUS_EVENT:
            cls = ShotClass.BLOWUP_POSITIVE if tail_sign > 0 else ShotClass.BLOWUP_NEGATIVE
        else:
            cls = ShotClass.UNDETERMINED
        meta["shot_class"] = cls.value
        prof = RadialProfile(r, u, up, HYPERBOLIC, params, meta)

    return ShotResult(
        amplitude=a,
        cls=cls,
        nodes=count_sign_changes(prof.values),
        total_nodes=total_nodes,
        tail_sign=tail_sign,
        r_end=float(prof.radii[-1]),
        terminal_state=(float(prof.values[-1]), float(prof.derivs[-1])),
        profile=prof,
        clean_length=float(clean_length),
        flags=flags,
    )


def _fd_weights(x0: float, x: np.ndarray) -> np.ndarray:
    """First-derivative weights at ``x0`` on arbitrary nodes (Fornberg)."""
    n = x.size
    c = np.zeros((n, 2))
    c1, c4 = 1.0, x[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, 1)
        c2, c5, c4 = 1.0, c4, x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, 1]


def ode_residual(profile: RadialProfile, params: Params, half_width: int = 3) -> np.ndarray:
    """|d/dr derivs - u''(rhs)| / max|u''| at interior samples.

    The derivative of the stored ``derivs`` uses centred
    ``2*half_width+1``-point stencils on the actual (non-uniform) radii.
    """
    if profile.gauge != HYPERBOLIC:
        raise ValueError("residual is defined for the hyperbolic gauge")
    r, u, up = profile.radii, profile.values, profile.derivs
    w = half_width
    if r.size < 2 * w + 1:
        raise ValueError("profile too short for the stencil")
    rhs = np.array([radial_rhs(a, (b, c), params)[1] for a, b, c in zip(r, u, up)])
    scale = np.max(np.abs(rhs))
    d = np.array([_fd_weights(r[i], r[i - w:i + w + 1]) @ up[i - w:i + w + 1]
                  for i in range(w, r.size - w)])
    return np.abs(d - rhs[w:-w]) / scale if scale > 0 else np.abs(d)
