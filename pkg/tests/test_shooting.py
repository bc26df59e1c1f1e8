import math

import numpy as np
import pytest

from hyperbn.geometry import make_params
from hyperbn.radial_ode import Controls, RadialProfile, ShotClass
from hyperbn.shooting import (
    bracket_scan,
    count_nodes,
    default_grid,
    find_knode,
    nonexistence_scan,
)


def _prof(r, u):
    return RadialProfile(r, u, np.gradient(u, r), "hyperbolic-u", make_params(3, 0.0, 3.0))


class TestCountNodes:
    def test_positive(self):
        r = np.linspace(0, 5, 100)
        assert count_nodes(_prof(r, np.exp(-r))) == 0

    def test_sine(self):
        r = np.arange(0.0, 2.5 * np.pi, 0.01)
        assert count_nodes(_prof(r, np.sin(r))) == 2

    def test_tiny_tail_ignored(self):
        r = np.linspace(0, 5, 6)
        u = np.array([1.0, 0.5, 1e-14, -1e-14, 1e-15, 1e-16])
        assert count_nodes(_prof(r, u)) == 0

    def test_zero_rejected(self):
        r = np.linspace(0, 1, 5)
        with pytest.raises(ValueError):
            count_nodes(_prof(r, np.zeros(5)))


class TestBracketScan:
    P = make_params(5, 3.9, "critical")

    def test_single_point(self):
        assert bracket_scan(self.P, [1.0]) == []

    def test_bad_grid(self):
        with pytest.raises(ValueError):
            bracket_scan(self.P, [2.0, 1.0])
        with pytest.raises(ValueError):
            bracket_scan(self.P, [])

    def test_ground_state_bracket(self):
        brackets, shots = bracket_scan(self.P, return_shots=True)
        assert len(shots) == 60
        zero = [b for b in brackets if b.key_lo == 0]
        assert len(zero) == 1
        assert zero[0].a_lo < 89.2087 < zero[0].a_hi


class TestFindKnode:
    def test_invalid_bracket(self):
        P = make_params(5, 3.9, "critical")
        with pytest.raises(ValueError):
            find_knode(P, 0, (1e-3, 2e-3))
        with pytest.raises(ValueError):
            find_knode(P, 0, (-1.0, 100.0))
        with pytest.raises(ValueError):
            find_knode(P, 7, (1.0, 100.0))

    def test_subcritical_ground_state(self):
        P = make_params(5, 3.9, 10 / 3)
        br = [b for b in bracket_scan(P) if b.key_lo == 0][0]
        rec = find_knode(P, 0, br.as_tuple())
        assert rec.nodes == 0 and np.all(rec.profile.values > 0)
        c_lin = (4 + math.sqrt(0.4)) / 2
        assert abs(rec.fitted_decay - c_lin) <= 0.02 * c_lin
        # oracle: tail log-slope of a tighter reference run
        ref = find_knode(P, 0, br.as_tuple(), controls=Controls(tol=1e-12))
        assert abs(rec.fitted_decay - ref.fitted_decay) <= 0.02 * ref.fitted_decay
        assert abs(rec.amplitude - ref.amplitude) <= 1e-6 * ref.amplitude

    def test_critical_ground_state(self, ground_state):
        rec = ground_state
        assert rec.nodes == 0 and rec.profile.decaying
        assert rec.amplitude == pytest.approx(89.20875, rel=1e-6)
        assert abs(rec.nehari_residual) < 1e-7
        assert all(res <= 1e-6 for _, res in rec.pohozaev_residuals)
        assert rec.energy_J == pytest.approx(rec.energy_G, rel=1e-7)
        assert rec.bracket_width <= 1e-12

    def test_one_node_subcritical(self):
        P = make_params(7, 8.9, 12 / 5)
        br = [b for b in bracket_scan(P, default_grid(1e-3, 1e6, 100)) if b.key_lo == 1][0]
        rec = find_knode(P, 1, br.as_tuple())
        assert rec.nodes == 1 and rec.energy_J > 0
        # oracle: rerun at ten times the resolution
        fine = find_knode(P, 1, br.as_tuple(), controls=Controls(tol=1e-11, dr_out=1e-3))
        assert fine.nodes == 1
        assert rec.energy_J == pytest.approx(fine.energy_J, rel=1e-6)

    def test_negative_mirror(self, ground_state, gs_params):
        a = ground_state.amplitude
        rec = find_knode(gs_params, 0, (-a * 0.99, -a * 1.01))
        assert rec.amplitude == pytest.approx(-a, rel=1e-11)
        assert rec.energy_J == pytest.approx(ground_state.energy_J, rel=1e-12)


class TestNonexistence:
    def test_threshold(self):
        rep = nonexistence_scan(make_params(4, 2.0, "critical"))
        assert rep.verdict == "consistent-with-nonexistence"
        assert ShotClass.DECAY.value not in rep.classes
        assert len(rep.amplitudes) == 60

    def test_empty(self):
        rep = nonexistence_scan(make_params(4, 2.0, "critical"), [])
        assert rep.verdict == "Undetermined" and rep.amplitudes == []

    def test_window_rejected(self):
        with pytest.raises(ValueError):
            nonexistence_scan(make_params(5, 3.9, "critical"))

    def test_serializable(self):
        import json
        d = nonexistence_scan(make_params(4, 1.0, "critical"), default_grid(n=5)).to_dict()
        assert json.loads(json.dumps(d))["n_decay"] == 0
