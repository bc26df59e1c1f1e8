"""
Linear model problem, ball eigenvalues, Sobolev quotient
========================================================
"""

import math

import numpy as np

from hyperbn.diagnostics import FamilyControls, euclidean_sobolev_constant, minimize_quotient
from hyperbn.geometry import make_params
from hyperbn.linear_ode import (
    characteristic_exponents,
    energy_level_bound,
    radial_dirichlet_eigenvalues,
    variation_of_parameters,
)

# -v'' + eta v / r^2 = f with f = 1 and eta = 2 has the log term in closed form
r = np.linspace(0.01, 1, 6)
sol = variation_of_parameters(lambda x: np.ones_like(x), 2.0, r)
print(characteristic_exponents(2.0), sol.C1, sol.C2)
print(np.c_[r, sol.v_values, -(r**2) * np.log(r) / 3 + r**2 / 9])

# non-resonant case: the bound is finite
sol = variation_of_parameters(np.cos, 6.0, np.geomspace(1e-4, 1, 50))
print("bound holds:", bool(np.all(np.abs(sol.v_values) <= sol.bound())), sol.C1, sol.C2)

print("\nN=3:", radial_dirichlet_eigenvalues(3, 3), [(k * math.pi) ** 2 for k in (1, 2, 3)])
mu = radial_dirichlet_eigenvalues(5, 2)
print("N=5:", mu, " level bound (p0=3, T1=1):", energy_level_bound(mu[1], 3.0, 1.0))

est = minimize_quotient(make_params(3, 1.0, 6.0), controls=FamilyControls(n_starts=3))
print(f"\nquotient minimum {est.estimate:.5f}, Euclidean constant {euclidean_sobolev_constant(3):.5f}")
print("per start:", np.round(est.final_values, 5))
