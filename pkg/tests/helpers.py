"""Shared generators for randomized tests.

Instances are built around a known strictly feasible point so feasibility is
guaranteed by construction rather than by rejection.
"""

import numpy as np

from qptrim.mpqp import MpQp
from qptrim.qpsolver import qp_solve


def random_spd(rng, n, floor=0.3):
    m = rng.normal(size=(n, n))
    return m.T @ m + (floor + rng.random()) * np.eye(n)


def random_mpqp(rng, n_z, n_x, n_c, slack_lo=0.1, slack_hi=2.0):
    """Random valid instance plus a strictly feasible parameter."""
    H = random_spd(rng, n_z)
    F = rng.normal(size=(n_x, n_z))
    G = rng.normal(size=(n_c, n_z))
    # keep rows well away from zero
    norms = np.linalg.norm(G, axis=1)
    G[norms < 0.3] += np.sign(G[norms < 0.3, :1] + 0.5) * 0.5
    S = rng.normal(size=(n_c, n_x)) * 0.5
    z0 = rng.normal(size=n_z)
    x0 = rng.normal(size=n_x)
    w = G @ z0 - S @ x0 + rng.uniform(slack_lo, slack_hi, size=n_c)
    return MpQp(H, F, G, S, w), x0


def random_feasible_x(p, rng, x_center, spread=0.5, attempts=50):
    """A parameter near x_center where the full problem stays feasible."""
    for _ in range(attempts):
        x = x_center + spread * rng.normal(size=p.n_x)
        if qp_solve(p, x).is_optimal:
            return x
    return np.asarray(x_center, dtype=float)


def random_bounded_lifted_mpqp(rng, n_x, n_z, n_c, w_lo=0.3, w_hi=1.2, min_gz=0.3):
    """Instance whose lifted constraint polyhedron {[x, z]: -S x + G z <= w}
    is bounded with the origin in its interior.

    Row normals are drawn on the unit sphere with the z-block kept away from
    zero (so G has no zero rows); boundedness is certified by the caller via
    bounding-box LPs and resampling.
    """
    n_v = n_x + n_z
    rows = np.zeros((n_c, n_v))
    for i in range(n_c):
        while True:
            u = rng.normal(size=n_v)
            u /= np.linalg.norm(u)
            if np.linalg.norm(u[n_x:]) >= min_gz:
                rows[i] = u
                break
    w = rng.uniform(w_lo, w_hi, size=n_c)
    S = -rows[:, :n_x]
    G = rows[:, n_x:]
    H = random_spd(rng, n_z)
    F = rng.normal(size=(n_x, n_z)) * 0.5
    return MpQp(H, F, G, S, w)
