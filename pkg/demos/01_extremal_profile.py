"""How the extremal profile behaves as the removed ball shrinks.

For one-dimensional components (k=1, sigma=1) we solve the lattice problem
exactly, compare a(r) with its closed-form asymptotics, and watch the support
grow like r^(-1/sigma).
"""

from anovasel import EllipsoidSpec, a_asymptotic_fixed_k, solve_extremal_exact, support_radius

spec = EllipsoidSpec(k=1, sigma=1.0)
eps = 1e-2
print(f"admissible radii: 0 < r < {spec.r_max:.4f}\n")
print(f"{'r':>8} {'a exact':>12} {'a asympt':>12} {'ratio':>8} {'support':>8} {'radius':>8}")
for r in (0.1, 0.05, 0.02, 0.01, 0.005):
    sol = solve_extremal_exact(r, spec, eps)
    a_as = a_asymptotic_fixed_k(r, spec, eps)
    print(f"{r:8.3f} {sol.a_value:12.2f} {a_as:12.2f} {sol.a_value / a_as:8.4f} "
          f"{len(sol.support):8d} {support_radius(r, spec):8.2f}")

# the lattice solution is a truncated paraboloid in c_l
sol = solve_extremal_exact(0.02, spec, eps)
print(f"\nr=0.02: a0^2={sol.a0_sq:.3e}, cutoff T={sol.T:.2f}")
for l, t2 in zip(sol.support[:, 0], sol.theta_sq):
    if l > 0:
        print(f"  l={l:3d}  theta^2={t2:.3e}")
