"""
Following solutions in the exponent
===================================

At N=7, lambda=8.9 the positive solution converges as p -> 2* but only
once the exponent is very close: the relative change is about ten times
the distance to 2*.  The one-node branch does not settle; its amplitude
grows like 1/(2* - p) and its energy approaches the positive energy plus
that of one Euclidean bubble.
"""

import numpy as np

from hyperbn.continuation import compactness_check, subcritical_sequence
from hyperbn.diagnostics import euclidean_sobolev_constant
from hyperbn.geometry import make_params

P = make_params(7, 8.9, "critical")
pc = P.p_crit

slow = subcritical_sequence(P, 0, [pc - 1.0 / n for n in range(2, 11)])
print("k=0, p = 2* - 1/n:", slow.verdict, np.round(slow.sup_diffs, 4))

fast = subcritical_sequence(P, 0, [pc - 10.0**-j for j in range(1, 9)] + [pc])
print("k=0, p = 2* - 10^-j:", fast.verdict)
for p, a, e, d in zip(fast.p_sequence, fast.amplitudes, fast.energies, [np.nan] + fast.sup_diffs):
    print(f"  p={p:.10f}  a={a:12.6f}  J={e:12.6f}  diff={d:.2e}")
print(compactness_check(fast)["cauchy_rates"])

one = subcritical_sequence(P, 1, [2.4, 2.6, 2.7, 2.79, pc - 1e-4, pc - 1e-6, pc - 1e-8])
bubble = euclidean_sobolev_constant(7) ** 3.5 / 7
print("\nk=1:", one.verdict)
for p, a, e in zip(one.p_sequence, one.amplitudes, one.energies):
    print(f"  2*-p={pc - p:.1e}  a={a:.4e}  a*(2*-p)={a * (pc - p):.4e}  J={e:.4f}")
print(f"positive energy + bubble = {fast.energies[-1] + bubble:.4f}")
