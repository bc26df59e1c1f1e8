"""Amplitude shooting: grid scans, bisection for k-node solutions, and
scans below the existence threshold."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import (
    decay_exponent,
    energy_G,
    energy_J,
    fit_tail_decay,
    nehari_residual,
    pohozaev_check,
    uniform_bound_ratios,
)
from .geometry import Params, gauge_transform
from .radial_ode import Controls, RadialProfile, ShotClass, ShotResult, count_sign_changes, integrate

__all__ = [
    "SolutionRecord",
    "Bracket",
    "ScanReport",
    "count_nodes",
    "default_grid",
    "bracket_scan",
    "find_knode",
    "solution_record",
    "nonexistence_scan",
    "NODE_FLOOR",
    "MAX_NODES",
]

NODE_FLOOR = 1e-13
MAX_NODES = 4
POHOZAEV_RADII = (0.3, 0.6, 0.9)


def default_grid(lo: float = 1e-3, hi: float = 1e3, n: int = 60) -> np.ndarray:
    return np.logspace(math.log10(lo), math.log10(hi), n)


def count_nodes(profile: RadialProfile) -> int:
    """Sign changes among samples with ``|u| > 1e-13``."""
    if len(profile) == 0 or not np.any(profile.values):
        raise ValueError("profile is identically zero")
    return count_sign_changes(profile.values, NODE_FLOOR)


@dataclass(frozen=True)
class Bracket:
    a_lo: float
    a_hi: float
    k: int
    key_lo: int
    key_hi: int

    def as_tuple(self):
        return (self.a_lo, self.a_hi, self.k)


@dataclass
class SolutionRecord:
    profile: RadialProfile
    amplitude: float
    nodes: int
    energy_J: float
    energy_G: float
    nehari_residual: float
    pohozaev_residuals: list
    fitted_decay: float
    expected_decay: float
    bound_ratio_51: float
    bound_ratio_52: float
    controls: Controls
    clean_length: float
    iterations: int
    bracket_width: float
    flags: dict = field(default_factory=dict)

    def summary(self) -> dict:
        p = self.profile.params
        return {
            "params": p.to_dict(),
            "amplitude": self.amplitude,
            "nodes": self.nodes,
            "energy_J": self.energy_J,
            "energy_G": self.energy_G,
            "nehari_residual": self.nehari_residual,
            "pohozaev_residuals": [list(x) for x in self.pohozaev_residuals],
            "fitted_decay": self.fitted_decay,
            "expected_decay": self.expected_decay,
            "expected_decay_note": "fast root of the frozen linearization, not a proven bound",
            "bound_ratio_51": self.bound_ratio_51,
            "bound_ratio_52": self.bound_ratio_52,
            "r_end": float(self.profile.radii[-1]),
            "clean_length": self.clean_length,
            "iterations": self.iterations,
            "bracket_width": self.bracket_width,
            "controls": self.controls.to_dict(),
            "flags": self.flags,
        }


def _shots(params: Params, grid, controls: Controls) -> list[ShotResult]:
    return [integrate(float(a), params, controls) for a in grid]


def _brackets_from(grid, shots) -> list[Bracket]:
    out = []
    for i in range(len(shots) - 1):
        k0, k1 = shots[i].key(), shots[i + 1].key()
        if k0 != k1:
            out.append(Bracket(float(grid[i]), float(grid[i + 1]), min(k0, k1), k0, k1))
    return out


def bracket_scan(params: Params, a_grid=None, controls: Controls | None = None,
                 return_shots: bool = False):
    """Brackets between neighbouring amplitudes whose node keys differ.

    A bracket with keys ``k`` and ``k+1`` encloses a ``k``-node solution.
    """
    controls = controls or Controls()
    grid = default_grid() if a_grid is None else np.asarray(a_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty amplitude grid")
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("amplitude grid must be positive and increasing")
    shots = _shots(params, grid, controls)
    brackets = _brackets_from(grid, shots)
    return (brackets, shots) if return_shots else brackets


def find_knode(params: Params, k: int, bracket, tol_a: float = 1e-12,
               controls: Controls | None = None, max_iter: int = 200,
               diagnostics: bool = True) -> SolutionRecord:
    """Bisect on amplitude between a shot with key <= k and one with key > k.

    ``bracket`` is ``(a_lo, a_hi)`` (extra entries are ignored); both
    amplitudes must share a sign.  ``tol_a`` is relative.
    """
    controls = controls or Controls()
    if not 0 <= k <= MAX_NODES:
        raise ValueError(f"k must lie in 0..{MAX_NODES}")
    if not tol_a > 0:
        raise ValueError("tol_a must be positive")
    a0, a1 = float(bracket[0]), float(bracket[1])
    if a0 == 0 or a1 == 0 or (a0 > 0) != (a1 > 0):
        raise ValueError("bracket endpoints must be non-zero with one sign")
    s0, s1 = integrate(a0, params, controls), integrate(a1, params, controls)
    if (s0.key() <= k) == (s1.key() <= k):
        raise ValueError(
            f"bracket does not separate node key {k}: keys {s0.key()} and {s1.key()}")
    lo, hi = (s0, s1) if s0.key() <= k else (s1, s0)

    it = 0
    sign = 1.0 if a0 > 0 else -1.0
    while abs(hi.amplitude - lo.amplitude) > tol_a * abs(lo.amplitude):
        if it >= max_iter:
            raise RuntimeError(f"bisection did not reach tol_a after {max_iter} iterations")
        mid = sign * math.sqrt(lo.amplitude * hi.amplitude)
        if mid in (lo.amplitude, hi.amplitude):
            break
        sm = integrate(mid, params, controls)
        if sm.key() <= k:
            lo = sm
        else:
            hi = sm
        it += 1

    cands = [s for s in (lo, hi) if s.cls is ShotClass.DECAY]
    if not cands:
        raise RuntimeError("no decaying shot at the end of bisection; loosen tol_a or raise r_max")
    best = max(cands, key=lambda s: s.clean_length)
    width = abs(hi.amplitude - lo.amplitude) / abs(lo.amplitude)
    rec = solution_record(best, params, controls, diagnostics=diagnostics)
    rec.iterations = it
    rec.bracket_width = width
    if rec.nodes != k:
        raise RuntimeError(f"decaying shot has {rec.nodes} nodes, expected {k}")
    return rec


def solution_record(shot: ShotResult, params: Params, controls: Controls,
                    diagnostics: bool = True) -> SolutionRecord:
    """Attach energies, Pohozaev residuals, tail fit and bound ratios."""
    prof = shot.profile
    nodes = count_nodes(prof)
    _, c_lin = decay_exponent(params.N, params.lam)
    rec = SolutionRecord(
        profile=prof, amplitude=shot.amplitude, nodes=nodes, energy_J=math.nan,
        energy_G=math.nan, nehari_residual=math.nan, pohozaev_residuals=[],
        fitted_decay=math.nan, expected_decay=c_lin, bound_ratio_51=math.nan,
        bound_ratio_52=math.nan, controls=controls, clean_length=shot.clean_length,
        iterations=0, bracket_width=math.nan, flags=dict(shot.flags))
    if not diagnostics:
        return rec
    rec.energy_J = energy_J(prof, params)
    vprof = gauge_transform(prof, "to_euclidean", params)
    rec.energy_G = energy_G(vprof, params)
    rec.nehari_residual = nehari_residual(prof, params)
    rep = pohozaev_check(vprof, params, POHOZAEV_RADII)
    rec.pohozaev_residuals = list(zip(rep.radii_R, rep.relative_residual))
    rec.flags["pohozaev_flagged"] = rep.flagged
    try:
        rec.fitted_decay = fit_tail_decay(prof)
    except ValueError as exc:
        rec.flags["tail_fit_error"] = str(exc)
    rec.bound_ratio_51, rec.bound_ratio_52 = uniform_bound_ratios(prof)
    return rec


@dataclass
class ScanReport:
    params: Params
    amplitudes: list
    classes: list
    nodes: list
    keys: list
    brackets: list
    verdict: str

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "amplitudes": self.amplitudes,
            "classes": self.classes,
            "nodes": self.nodes,
            "keys": self.keys,
            "brackets": [list(b.as_tuple()) for b in self.brackets],
            "n_decay": sum(c == ShotClass.DECAY.value for c in self.classes),
            "verdict": self.verdict,
            "note": "numerical evidence over a finite grid, not a proof",
        }


def _scan_allowed(params: Params) -> bool:
    N, lam = params.N, params.lam
    if lam <= N * (N - 2) / 4:
        return True
    # in three dimensions the critical problem has no positive solution in the window
    return N == 3 and params.is_critical and lam < 1.0


def nonexistence_scan(params: Params, a_grid=None, controls: Controls | None = None) -> ScanReport:
    """Classify every grid shot below the existence threshold.

    Verdict ``consistent-with-nonexistence`` when no shot decays at the
    fast rate and no neighbouring pair changes node key (a key change would
    enclose a decaying solution); ``solution-candidate`` otherwise;
    ``Undetermined`` for an empty grid.
    """
    if not _scan_allowed(params):
        raise ValueError("lambda lies in the existence window; nonexistence scans need "
                         "lambda <= N(N-2)/4 (or N=3 at the critical exponent)")
    controls = controls or Controls()
    grid = default_grid() if a_grid is None else np.asarray(a_grid, dtype=float)
    if grid.size == 0:
        return ScanReport(params, [], [], [], [], [], "Undetermined")
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("amplitude grid must be positive and increasing")
    shots = _shots(params, grid, controls)
    brackets = _brackets_from(grid, shots)
    decays = any(s.cls is ShotClass.DECAY for s in shots)
    verdict = "solution-candidate" if (decays or brackets) else "consistent-with-nonexistence"
    return ScanReport(
        params=params,
        amplitudes=[float(a) for a in grid],
        classes=[s.cls.value for s in shots],
        nodes=[s.nodes for s in shots],
        keys=[s.key() for s in shots],
        brackets=brackets,
        verdict=verdict,
    )
