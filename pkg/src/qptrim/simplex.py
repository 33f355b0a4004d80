"""Dense LP solver: bounded-variable primal simplex, two phases.

Solves   min cost @ x   s.t.  C @ x <= d,  lo <= x <= hi.

Statuses are values, never exceptions: infeasible and unbounded instances are
normal outcomes. Pricing is Dantzig's rule; after 5*(n+m) iterations without
objective progress it switches to Bland's rule, which guarantees termination.
Deterministic by construction (no randomness, fixed tie-breaking).
"""

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_PIVOT_TOL = 1e-9
_RATIO_TOL = 1e-9


@dataclass
class LpResult:
    status: str
    x: np.ndarray | None = None
    objective: float | None = None
    iterations: int = 0


def _expand_bounds(bounds, n):
    lo = np.full(n, -np.inf)
    hi = np.full(n, np.inf)
    if bounds is None:
        return lo, hi
    if (
        isinstance(bounds, tuple)
        and len(bounds) == 2
        and not isinstance(bounds[0], (tuple, list, np.ndarray))
    ):
        bounds = [bounds] * n
    if len(bounds) != n:
        raise ValueError(f"got {len(bounds)} bound pairs for {n} variables")
    for j, (a, b) in enumerate(bounds):
        lo[j] = -np.inf if a is None else float(a)
        hi[j] = np.inf if b is None else float(b)
        if lo[j] > hi[j]:
            raise ValueError(f"empty bound interval for variable {j}: ({a}, {b})")
    return lo, hi


class _Tableau:
    """Bounded simplex state: full tableau plus explicit variable values.

    All internal variables live in [0, upper] (upper may be inf). The tableau
    rows are kept equal to B^-1 @ A by pivoting; current values are tracked
    directly, which sidesteps the usual rhs bookkeeping for nonbasic-at-upper
    variables.
    """

    def __init__(self, A, upper):
        self.m, self.n = A.shape
        self.T = A.astype(float).copy()
        self.upper = upper.astype(float).copy()
        self.val = np.zeros(self.n)
        self.at_upper = np.zeros(self.n, dtype=bool)
        self.basis = np.zeros(self.m, dtype=int)
        self.in_basis = np.zeros(self.n, dtype=bool)
        self.iterations = 0

    def set_basic(self, row, var, value):
        self.basis[row] = var
        self.in_basis[var] = True
        self.val[var] = value

    def objective(self, cost):
        return float(cost @ self.val)

    def run(self, cost, max_iter, bland_after):
        """Optimize; returns True if optimal, False if unbounded."""
        stall = 0
        best = self.objective(cost)
        ctol = _PIVOT_TOL * (1.0 + np.abs(cost).max(initial=0.0))
        for _ in range(max_iter):
            cb = cost[self.basis]
            r = cost - cb @ self.T
            bland = stall > bland_after
            enter = self._pick_entering(r, ctol, bland)
            if enter is None:
                return True
            self.iterations += 1
            sign = -1.0 if self.at_upper[enter] else 1.0
            col = self.T[:, enter]
            step, leave_row, to_upper = self._ratio_test(sign, col, enter, bland)
            if step is None:
                return False  # unbounded ray
            self._apply_step(enter, sign, col, step, leave_row, to_upper)
            obj = self.objective(cost)
            if obj < best - 1e-12 * (1.0 + abs(best)):
                best = obj
                stall = 0
            else:
                stall += 1
        raise ArithmeticError("simplex iteration limit exceeded")

    def _pick_entering(self, r, ctol, bland):
        # improving: at lower bound with r < 0, or at upper bound with r > 0
        movable = ~self.in_basis & (self.upper > 0)
        eligible = np.flatnonzero(
            (movable & ~self.at_upper & (r < -ctol))
            | (movable & self.at_upper & (r > ctol))
        )
        if eligible.size == 0:
            return None
        if bland:
            return int(eligible[0])
        return int(eligible[np.argmax(np.abs(r[eligible]))])

    def _ratio_test(self, sign, col, enter, bland):
        d = sign * col  # basic values move by -d * step
        bvals = self.val[self.basis]
        bupper = self.upper[self.basis]
        t = np.full(self.m, np.inf)
        to_upper = np.zeros(self.m, dtype=bool)
        dn = d > _RATIO_TOL
        if dn.any():
            t[dn] = np.maximum(bvals[dn] / d[dn], 0.0)
        up = (d < -_RATIO_TOL) & np.isfinite(bupper)
        if up.any():
            t[up] = np.maximum((bvals[up] - bupper[up]) / d[up], 0.0)
            to_upper[up] = True
        row_min = float(t.min()) if self.m else np.inf
        own = self.upper[enter]  # step at which the entering var hits its bound
        if not np.isfinite(min(own, row_min)):
            return None, -1, False
        if own <= row_min:
            return own, -1, False  # bound flip, no pivot
        ties = np.flatnonzero(t <= row_min + _RATIO_TOL * (1.0 + row_min))
        if bland:
            row = int(ties[np.argmin(self.basis[ties])])
        else:
            row = int(ties[0])
        return max(float(t[row]), 0.0), row, bool(to_upper[row])

    def _apply_step(self, enter, sign, col, step, leave_row, to_upper):
        if step > 0:
            self.val[self.basis] -= sign * step * col
            self.val[enter] += sign * step
        if leave_row < 0:
            # entering variable just flips to its other bound
            self.at_upper[enter] = ~self.at_upper[enter]
            self.val[enter] = self.upper[enter] if self.at_upper[enter] else 0.0
            return
        leave = self.basis[leave_row]
        self.in_basis[leave] = False
        self.at_upper[leave] = to_upper
        self.val[leave] = self.upper[leave] if to_upper else 0.0
        self.basis[leave_row] = enter
        self.in_basis[enter] = True
        self.pivot(leave_row, enter)

    def pivot(self, row, col):
        self.T[row] /= self.T[row, col]
        other = np.arange(self.m) != row
        self.T[other] -= np.outer(self.T[other, col], self.T[row])


def _solve_box_only(cost, lo, hi, n):
    # no linear constraints: minimize each coordinate independently
    x = np.zeros(n)
    for j in range(n):
        if cost[j] > 0:
            if not np.isfinite(lo[j]):
                return LpResult(UNBOUNDED)
            x[j] = lo[j]
        elif cost[j] < 0:
            if not np.isfinite(hi[j]):
                return LpResult(UNBOUNDED)
            x[j] = hi[j]
        else:
            if np.isfinite(lo[j]):
                x[j] = max(lo[j], min(0.0, hi[j]))
            elif np.isfinite(hi[j]):
                x[j] = min(0.0, hi[j])
    return LpResult(OPTIMAL, x, float(cost @ x))


def lp_solve(cost, C=None, d=None, bounds=None, max_iter=None) -> LpResult:
    """Minimize cost @ x subject to C @ x <= d and optional box bounds.

    bounds may be None (free), one (lo, hi) pair for all variables, or a
    per-variable sequence; None endpoints mean unbounded. Returns an LpResult
    whose status is one of "optimal", "infeasible", "unbounded".
    """
    cost = np.atleast_1d(np.asarray(cost, dtype=float))
    n = cost.shape[0]
    if C is None or np.size(C) == 0:
        C = np.zeros((0, n))
        d = np.zeros(0)
    C = np.atleast_2d(np.asarray(C, dtype=float))
    d = np.atleast_1d(np.asarray(d, dtype=float))
    m = C.shape[0]
    if C.shape[1] != n or d.shape[0] != m:
        raise ValueError(f"shape mismatch: cost {n}, C {C.shape}, d {d.shape}")
    lo, hi = _expand_bounds(bounds, n)
    if m == 0:
        return _solve_box_only(cost, lo, hi, n)

    # Rewrite onto variables y >= 0: shift when lo is finite, mirror when only
    # hi is finite, split free variables into a difference of two columns.
    cols, fcost, base = [], [], np.zeros(n)
    recover = []  # (kind, j) per y-column
    for j in range(n):
        if np.isfinite(lo[j]):
            base[j] = lo[j]
            cols.append(C[:, j])
            fcost.append(cost[j])
            recover.append(("shift", j))
        elif np.isfinite(hi[j]):
            base[j] = hi[j]
            cols.append(-C[:, j])
            fcost.append(-cost[j])
            recover.append(("mirror", j))
        else:
            cols.append(C[:, j])
            fcost.append(cost[j])
            recover.append(("plus", j))
            cols.append(-C[:, j])
            fcost.append(-cost[j])
            recover.append(("minus", j))
    A = np.column_stack(cols) if cols else np.zeros((m, 0))
    fcost = np.asarray(fcost)
    ny = A.shape[1]
    uy = np.full(ny, np.inf)
    for k, (kind, j) in enumerate(recover):
        if kind == "shift" and np.isfinite(hi[j]):
            uy[k] = hi[j] - lo[j]
    b = d - C @ base

    # standard form with slacks; flip negative rows and give them artificials
    A_all = np.hstack([A, np.eye(m)])
    upper = np.concatenate([uy, np.full(m, np.inf)])
    neg = b < 0
    A_all[neg] *= -1.0
    b = np.abs(b)
    art_rows = np.flatnonzero(neg)
    n_art = art_rows.size
    if n_art:
        art_cols = np.zeros((m, n_art))
        art_cols[art_rows, np.arange(n_art)] = 1.0
        A_all = np.hstack([A_all, art_cols])
        upper = np.concatenate([upper, np.full(n_art, np.inf)])
    n_tot = A_all.shape[1]

    tab = _Tableau(A_all, upper)
    for i in range(m):
        if neg[i]:
            tab.set_basic(i, int(ny + m + np.searchsorted(art_rows, i)), b[i])
        else:
            tab.set_basic(i, ny + i, b[i])

    if max_iter is None:
        max_iter = 10000 + 200 * (m + n_tot)
    bland_after = 5 * (m + n_tot)

    if n_art:
        phase1 = np.zeros(n_tot)
        phase1[ny + m:] = 1.0
        tab.run(phase1, max_iter, bland_after)
        feas_tol = 1e-9 * (1.0 + np.abs(d).max(initial=0.0))
        if tab.objective(phase1) > feas_tol:
            return LpResult(INFEASIBLE, iterations=tab.iterations)
        _evict_artificials(tab, ny + m)
        # lock artificials at zero so phase 2 never moves them
        tab.upper[ny + m:] = 0.0

    cost2 = np.zeros(n_tot)
    cost2[:ny] = fcost
    if not tab.run(cost2, max_iter, bland_after):
        return LpResult(UNBOUNDED, iterations=tab.iterations)

    x = base.copy()
    for k, (kind, j) in enumerate(recover):
        if kind == "shift":
            x[j] = lo[j] + tab.val[k]
        elif kind == "mirror":
            x[j] = hi[j] - tab.val[k]
        elif kind == "plus":
            x[j] += tab.val[k]
        else:
            x[j] -= tab.val[k]
    return LpResult(OPTIMAL, x, float(cost @ x), tab.iterations)


def _evict_artificials(tab, first_art):
    """Pivot zero-valued basic artificials onto real columns where possible."""
    for row in range(tab.m):
        var = tab.basis[row]
        if var < first_art:
            continue
        candidates = np.flatnonzero(
            (np.abs(tab.T[row, :first_art]) > 1e-9) & ~tab.in_basis[:first_art]
        )
        if candidates.size == 0:
            continue  # redundant row; artificial stays basic at zero
        enter = int(candidates[0])
        tab.in_basis[var] = False
        tab.at_upper[var] = False
        tab.val[var] = 0.0
        tab.basis[row] = enter
        tab.in_basis[enter] = True
        tab.pivot(row, enter)
