import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from hyperbn.diagnostics import (
    FamilyControls,
    annulus_gradient_scaling,
    annulus_integrals,
    decay_exponent,
    energy_G,
    energy_J,
    euclidean_sobolev_constant,
    fit_tail_decay,
    global_pohozaev,
    hyperbolic_terms,
    minimize_quotient,
    nehari_residual,
    pohozaev_check,
    predicted_alpha,
    radial_integral,
    sobolev_quotient,
    sphere_area,
    uniform_bound_ratios,
)
from hyperbn.geometry import gauge_transform, make_params
from hyperbn.radial_ode import Controls, RadialProfile
from hyperbn.shooting import bracket_scan, find_knode


def _u(P, r, u, du, gauge="hyperbolic-u"):
    return RadialProfile(r, u, du, gauge, P)


class TestDecayExponent:
    @pytest.mark.parametrize("N", range(3, 11))
    def test_threshold_gives_half_dimension(self, N):
        c, c_lin = decay_exponent(N, N * (N - 2) / 4)
        assert c == N / 2 and c_lin == N / 2

    def test_examples(self):
        assert decay_exponent(4, 2.0) == (2.0, 2.0)
        assert decay_exponent(3, 0.0) == (2.0, 2.0)
        c, c_lin = decay_exponent(6, 5.0)
        assert c_lin == pytest.approx((5 + math.sqrt(5)) / 2, abs=1e-14) and c == c_lin

    def test_cap(self):
        c, c_lin = decay_exponent(4, -10.0)
        assert c == 3.0 and c_lin > 3.0

    def test_rejects(self):
        with pytest.raises(ValueError):
            decay_exponent(5, 4.0)


class TestTailFit:
    P = make_params(5, 3.9, 3.0)

    @pytest.mark.parametrize("c", [0.5, 1.0, 2.3, 5.0, 10.0])
    def test_exact_exponential(self, c):
        r = np.linspace(0, 10, 1001)
        prof = _u(self.P, r, np.exp(-c * r), -c * np.exp(-c * r))
        assert abs(fit_tail_decay(prof, (2.0, 6.0)) - c) < 1e-10

    def test_default_window_exact(self):
        r = np.linspace(0, 10, 1001)
        prof = _u(self.P, r, 3 * np.exp(-2.5 * r), -7.5 * np.exp(-2.5 * r))
        assert abs(fit_tail_decay(prof) - 2.5) < 1e-10

    def test_weight_power_approaches_two(self):
        r = np.linspace(0, 30, 3001)
        u = (1 + np.cosh(r)) ** -2.0
        prof = _u(self.P, r, u, np.gradient(u, r))
        errs = [abs(fit_tail_decay(prof, (a, a + 4)) - 2) for a in (1.0, 4.0, 10.0, 20.0)]
        assert all(e1 > e2 for e1, e2 in zip(errs, errs[1:]))
        assert errs[-1] < 1e-8

    def test_default_window_after_last_node(self):
        # a tall inner spike must not set the floor for the outer tail
        r = np.linspace(0, 12, 2401)
        u = 1e10 * np.exp(-20 * r) - np.exp(-3 * r)
        prof = _u(self.P, r, u, -2e11 * np.exp(-20 * r) + 3 * np.exp(-3 * r))
        assert abs(fit_tail_decay(prof) - 3) < 1e-8

    def test_node_rejected(self):
        r = np.linspace(0, 10, 1001)
        prof = _u(self.P, r, np.exp(-r) * np.cos(r), np.zeros_like(r))
        with pytest.raises(ValueError):
            fit_tail_decay(prof, (0.5, 3.0))

    def test_window_outside(self):
        r = np.linspace(0, 10, 11)
        prof = _u(self.P, r, np.exp(-r), -np.exp(-r))
        with pytest.raises(ValueError):
            fit_tail_decay(prof, (5.0, 12.0))

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.5, 10.0), st.floats(-3.0, 3.0))
    def test_recovers_any_rate(self, c, shift):
        r = np.linspace(0, 8, 801)
        u = np.exp(shift - c * r)
        assert abs(fit_tail_decay(_u(self.P, r, u, -c * u), (1.0, 3.0)) - c) < 1e-10


class TestBoundRatios:
    def test_zero(self):
        P = make_params(5, 3.9, 3.0)
        r = np.linspace(0, 5, 11)
        assert uniform_bound_ratios(_u(P, r, np.zeros(11), np.zeros(11))) == (0.0, 0.0)

    @pytest.mark.parametrize("N", [3, 5, 7])
    def test_saturating(self, N):
        P = make_params(N, 0.1, 2.5)
        r = np.linspace(0, 40, 4001)
        # (1 - s^2)^((N-1)/2) = cosh(r/2)^-(N-1)
        u = np.cosh(0.5 * r) ** -(N - 1.0)
        r51, r52 = uniform_bound_ratios(_u(P, r, u, np.zeros_like(r)))
        assert abs(r52 - 1) < 1e-12
        assert 0 < r51 <= 1 + 1e-12

    def test_ground_state_stable(self, ground_state, gs_params):
        ref = find_knode(gs_params, 0, (ground_state.amplitude * 0.999, ground_state.amplitude * 1.001),
                         controls=Controls(r_max=120.0))
        r51, r52 = ground_state.bound_ratio_51, ground_state.bound_ratio_52
        assert np.isfinite(r51) and np.isfinite(r52)
        assert abs(ref.bound_ratio_52 - r52) <= 0.05 * r52


class TestQuadrature:
    def test_sphere_area(self):
        assert sphere_area(2) == pytest.approx(2 * math.pi, rel=1e-15)
        assert sphere_area(3) == pytest.approx(4 * math.pi, rel=1e-15)
        assert sphere_area(5) == pytest.approx(8 * math.pi**2 / 3, rel=1e-14)

    def test_integral_with_origin_cap(self):
        r = np.linspace(0.01, 60, 20001)
        assert radial_integral(r, r**2 * np.exp(-r), power=2) == pytest.approx(2.0, rel=1e-9)

    def test_exponential_tail_exact(self):
        r = np.linspace(0.0, 5, 2001)
        assert radial_integral(r, np.exp(-1.5 * r), tail=True) == pytest.approx(1 / 1.5, rel=1e-10)


class TestEnergies:
    def test_zero(self):
        P = make_params(5, 3.9, "critical")
        r = np.linspace(0, 5, 51)
        z = np.zeros(51)
        assert energy_J(_u(P, r, z, z), P) == 0.0
        assert energy_G(_u(P, r, z, z, "euclidean-v"), P) == 0.0
        rep = pohozaev_check(_u(P, r, z, z, "euclidean-v"), P)
        assert all(v == 0 for t in rep.interior_terms for v in t.values())
        assert all(v == 0 for t in rep.boundary_terms for v in t.values())

    def test_terms_against_quad(self):
        # oracle: adaptive quadrature of the analytic integrands
        P = make_params(4, 2.1, 3.0)
        r = np.linspace(1e-4, 25, 20001)
        u = np.cosh(r) ** -3.0
        du = -3 * np.sinh(r) * np.cosh(r) ** -4.0
        t = hyperbolic_terms(_u(P, r, u, du), P)
        om = sphere_area(4)
        f_grad = lambda x: 9 * np.sinh(x) ** 2 * np.cosh(x) ** -8 * np.sinh(x) ** 3
        f_l2 = lambda x: np.cosh(x) ** -6 * np.sinh(x) ** 3
        f_lp = lambda x: np.cosh(x) ** -9 * np.sinh(x) ** 3
        for key, f in (("grad", f_grad), ("l2", f_l2), ("lp", f_lp)):
            exact = om * quad(f, 0, 60, epsabs=0, epsrel=1e-13, limit=200)[0]
            assert t[key] == pytest.approx(exact, rel=1e-8), key

    def test_gauge_invariance(self, ground_state, gs_params):
        rec = ground_state
        assert rec.energy_G == pytest.approx(rec.energy_J, rel=1e-8)
        assert rec.energy_J > 0

    def test_nehari(self, ground_state, gs_params):
        assert abs(nehari_residual(ground_state.profile, gs_params)) < 1e-7

    def test_blowup_rejected(self, gs_params):
        from hyperbn.radial_ode import integrate
        shot = integrate(1.0, gs_params)
        with pytest.raises(ValueError):
            energy_J(shot.profile, gs_params)


class TestPohozaev:
    def test_ground_state(self, ground_state, gs_params):
        v = gauge_transform(ground_state.profile, "to_euclidean", gs_params)
        rep = pohozaev_check(v, gs_params, (0.3, 0.6, 0.9))
        assert not rep.flagged
        assert max(abs(x) for x in rep.relative_residual) <= 1e-6
        assert all(abs(a - b) < 0.01 for a, b in zip(rep.radii_R, rep.requested_R))
        assert rep.global_form is None and rep.notes

    def test_non_solution_flagged(self, gs_params):
        r = np.linspace(1e-4, 12, 4001)
        u = np.cosh(r) ** -2.5
        prof = _u(gs_params, r, u, -2.5 * np.sinh(r) * np.cosh(r) ** -3.5)
        rep = pohozaev_check(gauge_transform(prof, "to_euclidean", gs_params), gs_params)
        assert rep.flagged and max(abs(x) for x in rep.relative_residual) > 1e-3

    def test_exponential_non_solution(self, gs_params):
        r = np.linspace(1e-4, 12, 4001)
        prof = _u(gs_params, r, np.exp(-r), -np.exp(-r), "euclidean-v")
        rep = pohozaev_check(prof, gs_params)
        assert rep.flagged and min(abs(x) for x in rep.relative_residual) > 1e-3

    def test_residual_shrinks_with_tolerance(self, gs_params, ground_state):
        a = ground_state.amplitude
        res = []
        for tol in (1e-8, 1e-10, 1e-12):
            rec = find_knode(gs_params, 0, (a * 0.999, a * 1.001), controls=Controls(tol=tol))
            res.append(max(abs(x) for _, x in rec.pohozaev_residuals))
        assert res[2] < res[0]

    def test_outside_support(self, ground_state, gs_params):
        v = gauge_transform(ground_state.profile, "to_euclidean", gs_params)
        with pytest.raises(ValueError):
            pohozaev_check(v, gs_params, (0.0,))

    def test_global_below_threshold(self):
        P = make_params(5, 3.0, 3.0)
        br = [b for b in bracket_scan(P) if b.key_lo == 0][0]
        rec = find_knode(P, 0, br.as_tuple())
        v = gauge_transform(rec.profile, "to_euclidean", P)
        g = global_pohozaev(v, P)
        # the weighted terms decay like e^(-r) here, so the tail piece dominates the error
        assert abs(g["relative"]) < 1e-4
        assert pohozaev_check(v, P).global_form is not None
        with pytest.raises(ValueError):
            global_pohozaev(v, make_params(5, 3.9, 3.0))


def _euclid_profile(P, s_max_gap, vs):
    """v profile in r with prescribed d v/d s; values integrated by quad-free cumsum."""
    r = np.linspace(1e-3, 2 * math.atanh(1 - s_max_gap), 60001)
    s = np.tanh(0.5 * r)
    dvs = vs(s)
    dvr = dvs / (1 + np.cosh(r))
    v = np.concatenate([[0.0], np.cumsum(0.5 * (dvr[1:] + dvr[:-1]) * np.diff(r))])
    return RadialProfile(r, v, dvr, "euclidean-v", P)


class TestAnnulus:
    P = make_params(5, 3.0, 3.0)
    EPS = [1e-3, 5e-4, 2e-4, 1e-4]

    def test_linear_vanishing_gradient(self):
        prof = _euclid_profile(self.P, 5e-5, lambda s: 1 - s)
        assert abs(annulus_gradient_scaling(prof, self.EPS) - 3) <= 0.03

    def test_constant_gradient(self):
        prof = _euclid_profile(self.P, 5e-5, lambda s: np.ones_like(s))
        assert abs(annulus_gradient_scaling(prof, self.EPS) - 1) <= 0.01

    def test_closed_form_integral(self):
        # oracle: omega * int (1-s)^2 s^4 ds over the annulus
        prof = _euclid_profile(self.P, 5e-5, lambda s: 1 - s)
        got = annulus_integrals(prof, [1e-2, 1e-3])
        for e, g in zip([1e-2, 1e-3], got):
            exact = sphere_area(5) * quad(lambda s: (1 - s) ** 2 * s**4, 1 - 2 * e, 1 - e,
                                          epsrel=1e-13)[0]
            assert g == pytest.approx(exact, rel=1e-6)

    def test_past_support(self):
        prof = _euclid_profile(self.P, 1e-2, lambda s: 1 - s)
        with pytest.raises(ValueError):
            annulus_integrals(prof, [1e-3])

    @pytest.mark.parametrize("N,lam,p", [(5, 3.0, 3.0), (6, 5.0, 2.5), (4, 1.5, 3.0)])
    def test_below_threshold_solutions(self, N, lam, p):
        P = make_params(N, lam, p)
        br = [b for b in bracket_scan(P) if b.key_lo == 0][0]
        rec = find_knode(P, 0, br.as_tuple())
        v = gauge_transform(rec.profile, "to_euclidean", P)
        alpha = annulus_gradient_scaling(v, [1e-3, 3e-4, 1e-4])
        assert alpha > 1
        assert alpha == pytest.approx(predicted_alpha(N, lam), rel=0.01)


class TestSobolev:
    def test_homogeneity(self, ground_state, gs_params):
        v = gauge_transform(ground_state.profile, "to_euclidean", gs_params)
        q0 = sobolev_quotient(v, gs_params)
        for t in (0.5, 2.0, 10.0):
            vt = RadialProfile(v.radii, t * v.values, t * v.derivs, v.gauge, gs_params, v.meta)
            assert sobolev_quotient(vt, gs_params) == pytest.approx(q0, rel=1e-10)

    def test_euclidean_constant(self):
        # oracle: Rayleigh quotient of the bubble (1 + x^2)^(-1/2) on R^3
        num = 4 * math.pi * quad(lambda x: x**2 * x**2 * (1 + x * x) ** -3, 0, np.inf)[0]
        den = (4 * math.pi * quad(lambda x: x**2 * (1 + x * x) ** -3, 0, np.inf)[0]) ** (1 / 3)
        assert euclidean_sobolev_constant(3) == pytest.approx(num / den, rel=1e-10)

    @pytest.mark.slow
    def test_three_dimensional_minimum(self):
        S = euclidean_sobolev_constant(3)
        est = minimize_quotient(make_params(3, 1.0, 6.0), controls=FamilyControls(n_starts=3))
        assert S <= est.estimate <= 1.05 * S
