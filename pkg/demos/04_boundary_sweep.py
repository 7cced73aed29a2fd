"""Moving the signal across the selection boundary.

Every active component is the extremal profile at radius c r*, where r*
solves a(r*) = sqrt(2)(1 + sqrt(1 - beta)) sqrt(log C(d, k)).  Below c=1 the
selector misses components, above it recovery becomes exact.  Multipliers
that push c r* past the ellipsoid are reported as skipped rows.
"""

from anovasel import harness
from anovasel.harness import ExperimentSpec

base = ExperimentSpec(d=10, k=1, sigma=1.0, pattern="random", beta=0.5, signal="extremal",
                      cycles=20, seed=2024)
rep = harness.boundary_sweep(base, [0.3, 0.6, 0.8, 1.0, 1.2, 1.5, 2.0, 500.0])
print(harness.boundary_csv(rep))
