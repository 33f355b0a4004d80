"""Trimming one small problem by hand.

A scalar decision z, two half-plane constraints whose right-hand sides
move with the parameter x. Solving at two nearby parameters shows which
constraint matters where, and the removal radius says how far each
answer can be reused. The final section shows why intersecting safe sets
from different parameters is NOT safe.
"""

import numpy as np

from qptrim import example_two_halfplanes, qp_solve, solve_sample, trim_single

p = example_two_halfplanes()
print(f"problem: n_z={p.n_z}, n_x={p.n_x}, n_c={p.n_c}")
print("rows:  G z <= S x + w with")
print("  G =", p.G.ravel(), " S =", p.S.ravel(), " w =", p.w)

# the minimizer tracks x piecewise linearly, slope 0 or +-1, so kappa = 1
kappa = 1.0

for x_hat in (-1.0, -3.0):
    s = solve_sample(p, [x_hat])
    out = trim_single(p, kappa, s, [-2.0])
    print(f"\nsolved at x={x_hat}: z*={s.z_star[0]:+.3f}, active={set(s.active)}")
    print(f"  safe rows for x=-2 from this sample: kept={sorted(out.kept)}"
          f" removed={sorted(out.removed)}")
    sol = qp_solve(p, [-2.0], idx=out.kept)
    print(f"  solving x=-2 with only those rows: z={sol.z_star[0]:+.6f}")

full = qp_solve(p, [-2.0])
print(f"\nreference solution at x=-2: z={full.z_star[0]:+.6f}")

# each sample certifies a DIFFERENT single row; their intersection is empty
s1 = solve_sample(p, [-1.0])
s2 = solve_sample(p, [-3.0])
k1 = trim_single(p, kappa, s1, [-2.0]).kept
k2 = trim_single(p, kappa, s2, [-2.0]).kept
naive = k1.intersection(k2)
print(f"\nnaive intersection of the two kept sets: {sorted(naive)}")
unconstrained = qp_solve(p, [-2.0], idx=naive)
print(f"solving x=-2 with no rows at all: z={unconstrained.z_star[0]:+.6f}"
      "  <- wrong answer")
print("the sequential fold in trim_multi re-checks each removal against the")
print("running subset instead, which is why it never does this.")
