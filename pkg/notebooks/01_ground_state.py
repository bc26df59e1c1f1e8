"""
Positive solution in five dimensions
====================================

Shoot from the origin, bracket the amplitude where the tail switches from
the slow to the fast decay rate, then check the solution against its
integral identities.
"""

import numpy as np

from hyperbn.geometry import gauge_transform, make_params
from hyperbn.shooting import bracket_scan, find_knode

P = make_params(5, 3.9, "critical")
print(P.to_dict())

# every grid shot either blows up along the slow mode or crosses zero first
brackets, shots = bracket_scan(P, return_shots=True)
for s in shots[::6]:
    print(f"a={s.amplitude:10.4g}  {s.cls.value:15s} key={s.key()}")

b = [b for b in brackets if b.key_lo == 0][0]
rec = find_knode(P, 0, b.as_tuple())
print(f"\namplitude      {rec.amplitude:.10f}")
print(f"energy J, G    {rec.energy_J:.8f}  {rec.energy_G:.8f}")
print(f"nehari         {rec.nehari_residual:.2e}")
print(f"tail rate      {rec.fitted_decay:.7f}  (linear {rec.expected_decay:.7f})")
for R, res in rec.pohozaev_residuals:
    print(f"pohozaev R={R:.3f}  {res:.2e}")

try:
    import matplotlib.pyplot as plt
except ImportError:
    raise SystemExit(0)

v = gauge_transform(rec.profile, "to_euclidean", P)
fig, ax = plt.subplots(1, 2, figsize=(9, 3.5))
ax[0].plot(rec.profile.radii, rec.profile.values)
ax[0].set_xlabel("geodesic radius r")
ax[0].set_ylabel("u")
ax[1].semilogy(rec.profile.radii, np.abs(rec.profile.values), label="|u|")
ax[1].semilogy(rec.profile.radii, rec.amplitude * np.exp(-rec.expected_decay * rec.profile.radii), "--",
               label="fast rate")
ax[1].legend()
fig.tight_layout()
fig.savefig("ground_state.png", dpi=120)
