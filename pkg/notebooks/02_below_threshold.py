"""
Scanning below the threshold
============================

For lambda <= N(N-2)/4 no shot should settle on the fast tail.  The scan
is evidence over a grid, nothing more.
"""

from hyperbn.geometry import make_params
from hyperbn.shooting import nonexistence_scan

for N, lam in [(4, 2.0), (5, 3.0), (6, 5.5), (3, 0.9)]:
    rep = nonexistence_scan(make_params(N, lam, "critical"))
    classes = sorted(set(rep.classes))
    print(f"N={N} lambda={lam}: {rep.verdict:30s} classes={classes} keys={sorted(set(rep.keys))}")

# subcritical exponents do have positive solutions there, and the annulus
# gradient of the conformal profile vanishes faster than eps
from hyperbn.diagnostics import annulus_gradient_scaling, predicted_alpha
from hyperbn.geometry import gauge_transform
from hyperbn.shooting import bracket_scan, find_knode

P = make_params(5, 3.0, 3.0)
b = [b for b in bracket_scan(P) if b.key_lo == 0][0]
rec = find_knode(P, 0, b.as_tuple())
v = gauge_transform(rec.profile, "to_euclidean", P)
alpha = annulus_gradient_scaling(v, [1e-3, 3e-4, 1e-4])
print(f"\np=3: amplitude {rec.amplitude:.6f}, alpha {alpha:.4f} (tail predicts {predicted_alpha(5, 3.0):.4f})")
