"""Primal active-set solver for strictly convex QPs over constraint subsets.

Solves  min_z 0.5 z' H z + x' F z  s.t.  G_I z <= S_I x + w_I  for an index
subset I. Starts from the unconstrained minimizer when feasible, otherwise
from a phase-1 LP point. Working-set KKT systems fall back to least squares
when the active gradients are linearly dependent, so degenerate optima are
still solved (with minimum-norm multipliers) rather than rejected.
"""

from dataclasses import dataclass

import numpy as np

from .mpqp import IndexSet, MpQp, SolvedSample
from .simplex import OPTIMAL as LP_OPTIMAL
from .simplex import lp_solve
from .tolerances import DEFAULT, Tolerances

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"


@dataclass
class QpSolution:
    z_star: np.ndarray | None
    lam: np.ndarray | None       # multipliers aligned with the solved index set
    active: IndexSet | None      # slack-test active set, 1-based global indices
    status: str
    iterations: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL


def _eqp(p: MpQp, g, rows_w, b_w):
    """Equality-constrained minimizer over working set rows_w.

    Returns (z, lam). Uses the H-Schur complement; singular working-set Gram
    matrices (dependent gradients) drop to least squares.
    """
    if len(rows_w) == 0:
        return -p.h_solve(g), np.zeros(0)
    A = p.G[rows_w]
    Y = p.h_solve(A.T)          # H^-1 A'
    M = A @ Y
    rhs = -(b_w + A @ p.h_solve(g))
    try:
        lam = np.linalg.solve(M, rhs)
        if not np.all(np.isfinite(lam)):
            raise np.linalg.LinAlgError
        # reject wildly inaccurate solves from near-singular M
        if np.abs(M @ lam - rhs).max() > 1e-8 * (1.0 + np.abs(rhs).max()):
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        lam = np.linalg.lstsq(M, rhs, rcond=None)[0]
    z = -p.h_solve(g + A.T @ lam)
    return z, lam


def _phase1_point(p: MpQp, rows, b, feas_slack):
    """Feasible z for G_rows z <= b, or None when none exists."""
    nz = p.n_z
    m = len(rows)
    # min sum(s) s.t. G z - s <= b, s >= 0
    C = np.hstack([p.G[rows], -np.eye(m)])
    cost = np.concatenate([np.zeros(nz), np.ones(m)])
    bounds = [(None, None)] * nz + [(0.0, None)] * m
    res = lp_solve(cost, C, b, bounds)
    if res.status != LP_OPTIMAL:
        return None
    z = res.x[:nz]
    if (p.G[rows] @ z - b).max(initial=0.0) > feas_slack:
        return None
    return z


def qp_solve(
    p: MpQp,
    x,
    idx: IndexSet | None = None,
    warm=None,
    tol: Tolerances = DEFAULT,
    max_iter: int | None = None,
) -> QpSolution:
    """Solve the trimmed QP at parameter x over constraint subset idx.

    warm is an optional (z_guess, active_guess) pair; the active guess seeds
    the working set when its equality solution is feasible, which typically
    finishes in one or two iterations near a previous solution.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if idx is None:
        idx = IndexSet.full(p.n_c)
    rows = idx.zero_based()
    g = p.F.T @ x
    b = p.rhs(x)[rows]
    b_scale = 1.0 + (np.abs(b).max() if b.size else 0.0)
    feas_slack = tol.feas * b_scale
    if max_iter is None:
        max_iter = 50 * (p.n_z + len(rows)) + 100

    def active_in_idx(z_final):
        slack = b - p.G[rows] @ z_final if len(rows) else np.zeros(0)
        near = np.abs(slack) <= tol.act * (1.0 + np.abs(p.w[rows]))
        return IndexSet(np.asarray(rows)[near] + 1)

    iterations = 1
    z = -p.h_solve(g)
    work: list = []
    if len(rows) == 0 or (p.G[rows] @ z - b).max(initial=-np.inf) <= feas_slack:
        lam = np.zeros(len(rows))
        return QpSolution(z, lam, active_in_idx(z), OPTIMAL, iterations)

    started = False
    if warm is not None:
        z_guess, active_guess = warm
        if active_guess is not None and len(active_guess):
            cand = [r for r in active_guess.zero_based() if r in set(rows)]
            if cand:
                iterations += 1
                pos = {r: k for k, r in enumerate(rows)}
                zw, _ = _eqp(p, g, np.array(cand), b[[pos[r] for r in cand]])
                if (p.G[rows] @ zw - b).max(initial=0.0) <= feas_slack:
                    z, work, started = zw, list(cand), True
        if not started and z_guess is not None:
            zg = np.asarray(z_guess, dtype=float)
            if (p.G[rows] @ zg - b).max(initial=0.0) <= feas_slack:
                z, work, started = zg, [], True
    if not started:
        z0 = _phase1_point(p, rows, b, feas_slack)
        if z0 is None:
            return QpSolution(None, None, None, INFEASIBLE, iterations)
        z, work = z0, []

    pos = {r: k for k, r in enumerate(rows)}
    kkt_slack = tol.kkt * b_scale
    step_tol = 1e-11

    for _ in range(max_iter):
        iterations += 1
        w_arr = np.asarray(sorted(work), dtype=int)
        z_eq, lam_w = _eqp(p, g, w_arr, b[[pos[r] for r in w_arr]])
        direction = z_eq - z
        if np.abs(direction).max(initial=0.0) <= step_tol * (1.0 + np.abs(z).max(initial=0.0)):
            if lam_w.size == 0 or lam_w.min() >= -kkt_slack:
                lam = np.zeros(len(rows))
                for r, lv in zip(w_arr, lam_w):
                    lam[pos[r]] = max(lv, 0.0)
                return QpSolution(z_eq, lam, active_in_idx(z_eq), OPTIMAL, iterations)
            drop = w_arr[int(np.argmin(lam_w))]
            work.remove(drop)
            continue
        # step toward z_eq, blocked by the first inactive constraint hit
        free = np.array([r for r in rows if r not in work], dtype=int)
        alpha, blocker = 1.0, None
        if free.size:
            a = p.G[free] @ direction
            s = b[[pos[r] for r in free]] - p.G[free] @ z
            hit = a > 1e-12
            if hit.any():
                ratios = np.maximum(s[hit], 0.0) / a[hit]
                k = int(np.argmin(ratios))
                if ratios[k] < alpha:
                    alpha = float(ratios[k])
                    blocker = int(free[hit][k])
        z = z + alpha * direction
        if blocker is not None:
            work.append(blocker)
    raise ArithmeticError("active-set iteration limit exceeded")


def solve_sample(p: MpQp, x, tol: Tolerances = DEFAULT) -> SolvedSample:
    """Solve the full problem at x and package it as a reusable sample."""
    sol = qp_solve(p, x, tol=tol)
    if not sol.is_optimal:
        raise ValueError(f"problem is infeasible at x={np.asarray(x)}")
    return SolvedSample(x, sol.z_star, sol.active)
