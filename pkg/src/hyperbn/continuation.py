"""Following k-node solutions along an increasing list of exponents at
fixed (N, lambda), and judging whether the branch settles down."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .geometry import Params, make_params
from .radial_ode import Controls, integrate
from .shooting import MAX_NODES, SolutionRecord, bracket_scan, default_grid, find_knode

__all__ = [
    "BranchRecord",
    "subcritical_sequence",
    "compactness_check",
    "sup_difference",
    "branch_verdict",
    "EXTENDED_GRID",
]

# ground states sit below 1e3, excited states can need far larger amplitudes
EXTENDED_GRID = default_grid(1e-3, 1e12, 150)
CONVERGED_DIFF = 1e-4


@dataclass
class BranchRecord:
    params_base: Params
    k: int
    p_sequence: list
    records: list
    sup_diffs: list
    energies: list
    verdict: str
    failed_p: float | None = None
    notes: list = field(default_factory=list)

    @property
    def amplitudes(self) -> list:
        return [r.amplitude for r in self.records]

    @property
    def ratios_52(self) -> list:
        return [r.bound_ratio_52 for r in self.records]

    def to_dict(self) -> dict:
        return {
            "N": self.params_base.N,
            "lambda": self.params_base.lam,
            "k": self.k,
            "p_sequence": self.p_sequence,
            "amplitudes": self.amplitudes,
            "energies": self.energies,
            "sup_diffs": self.sup_diffs,
            "bound_ratio_52": self.ratios_52,
            "verdict": self.verdict,
            "failed_p": self.failed_p,
            "notes": self.notes,
        }


def sup_difference(rec_a: SolutionRecord, rec_b: SolutionRecord) -> float:
    """max |u_a - u_b| / max(|u_a|_inf, |u_b|_inf) on the common radii."""
    pa, pb = rec_a.profile, rec_b.profile
    lo = max(pa.radii[0], pb.radii[0])
    hi = min(pa.radii[-1], pb.radii[-1])
    r = np.union1d(pa.radii, pb.radii)
    r = r[(r >= lo) & (r <= hi)]
    ua = CubicHermiteSpline(pa.radii, pa.values, pa.derivs)(r)
    ub = CubicHermiteSpline(pb.radii, pb.values, pb.derivs)(r)
    scale = max(np.max(np.abs(pa.values)), np.max(np.abs(pb.values)))
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(ua - ub)) / scale)


def branch_verdict(sup_diffs) -> str:
    """``converging``: the last three differences strictly decrease and the
    final one is below 1e-4.  Fewer than three differences: ``incomplete``."""
    d = list(sup_diffs)
    if len(d) < 3:
        return "incomplete"
    a, b, c = d[-3:]
    return "converging" if (a > b > c and c < CONVERGED_DIFF) else "non-converging"


def _warm_bracket(params, k, a_prev, controls, widen, max_widen):
    lo, hi = 0.8 * a_prev, 1.2 * a_prev
    for _ in range(max_widen + 1):
        klo = integrate(lo, params, controls).key()
        khi = integrate(hi, params, controls).key()
        if klo <= k < khi:
            return lo, hi
        lo /= widen
        hi *= widen
    return None


def _cold_bracket(params, k, grid, controls):
    for b in bracket_scan(params, grid, controls):
        if b.key_lo <= k < b.key_hi:
            return b.a_lo, b.a_hi
    return None


def subcritical_sequence(params: Params, k: int, p_list, controls: Controls | None = None,
                         a_grid=None, tol_a: float = 1e-12, widen: float = 1.5,
                         max_widen: int = 12, diagnostics: bool = True) -> BranchRecord:
    """Solve for the ``k``-node solution at each exponent in ``p_list``.

    The first exponent is bracketed from a scan over ``a_grid`` (default
    1e-3..1e12); later ones start from the previous amplitude +-20% and
    widen by ``widen`` per retry before falling back to a full scan.
    """
    controls = controls or Controls()
    if not params.in_window:
        raise ValueError("lambda must lie in the existence window")
    if not 0 <= k <= MAX_NODES:
        raise ValueError(f"k must lie in 0..{MAX_NODES}")
    ps = [float(p) for p in p_list]
    if not ps:
        raise ValueError("empty exponent list")
    if any(b <= a for a, b in zip(ps, ps[1:])):
        raise ValueError("exponents must be strictly increasing")
    grid = EXTENDED_GRID if a_grid is None else np.asarray(a_grid, dtype=float)

    records: list[SolutionRecord] = []
    done: list[float] = []
    notes = []
    failed = None
    for p in ps:
        par = make_params(params.N, params.lam, p)
        br = None
        if records:
            br = _warm_bracket(par, k, records[-1].amplitude, controls, widen, max_widen)
            if br is None:
                notes.append(f"warm start failed at p={p!r}; rescanned")
        if br is None:
            br = _cold_bracket(par, k, grid, controls)
        if br is None:
            failed = p
            notes.append(f"no bracket for {k} nodes at p={p!r}")
            break
        try:
            rec = find_knode(par, k, br, tol_a=tol_a, controls=controls, diagnostics=diagnostics)
        except (RuntimeError, ValueError) as exc:
            failed = p
            notes.append(f"solve failed at p={p!r}: {exc}")
            break
        records.append(rec)
        done.append(par.p)

    diffs = [sup_difference(a, b) for a, b in zip(records, records[1:])]
    verdict = "incomplete" if failed is not None else branch_verdict(diffs)
    if params.N < 7:
        notes.append("critical-limit statements are made for N >= 7 only")
    return BranchRecord(params_base=params, k=k, p_sequence=done, records=records,
                        sup_diffs=diffs, energies=[r.energy_J for r in records],
                        verdict=verdict, failed_p=failed, notes=notes)


def compactness_check(branch: BranchRecord, growth_limit: float = 10.0) -> dict:
    """Uniformity of the weighted sup bound, Cauchy rate and energy trend.

    ``violation`` is raised when the bound ratio grows by more than
    ``growth_limit`` relative to its first value.
    """
    if branch.verdict == "incomplete" or len(branch.records) < 3:
        raise ValueError("compactness_check needs a complete branch with at least 3 records")
    ratios = np.array(branch.ratios_52, dtype=float)
    med = float(np.median(ratios))
    d = np.array(branch.sup_diffs, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        cauchy = (d[1:] / d[:-1]).tolist() if d.size > 1 else []
    E = np.array(branch.energies, dtype=float)
    e_rel = (np.abs(np.diff(E)) / np.maximum(np.abs(E[1:]), 1e-300)).tolist()
    growth = float(np.max(ratios) / ratios[0]) if ratios[0] > 0 else math.inf
    return {
        "max_ratio_52": float(np.max(ratios)),
        "median_ratio_52": med,
        "within_factor_2_of_median": bool(np.all((ratios <= 2 * med) & (ratios >= med / 2))),
        "ratio_growth": growth,
        "violation": bool(growth > growth_limit),
        "sup_diffs": d.tolist(),
        "cauchy_rates": cauchy,
        "cauchy_decreasing": bool(d.size > 1 and np.all(np.diff(d) < 0)),
        "energy_relative_changes": e_rel,
        "energies": E.tolist(),
        "verdict": branch.verdict,
    }
