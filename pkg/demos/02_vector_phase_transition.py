"""The sharp boundary in the simplest (vector) version of the problem.

Each of d coordinates carries mu or 0 plus standard noise; floor(d^(1-beta))
are active.  Thresholding at sqrt((2 + kappa) log d) recovers the pattern
exactly once mu exceeds sqrt(2) (1 + sqrt(1 - beta)) sqrt(log d).
"""

from anovasel.harness import phase_sweep_vector

rep = phase_sweep_vector(d=500, k=1, beta=0.5, multipliers=[0.3, 0.5, 0.7, 0.9, 1.0, 1.2, 1.5, 2.0],
                         replicates=50, seed=1)
print(f"boundary mu = {rep.metadata['boundary_mu']:.3f}")
for row in rep.rows:
    bar = "#" * int(round(2 * row["risk"]))
    print(f"c={row['multiplier']:4.1f}  mu={row['mu']:6.3f}  risk={row['risk']:6.2f}  {bar}")
