"""Small mixed-integer LP solver: branch and bound over the bounded simplex.

Scope is deliberately narrow (the ball-coverage threshold problems produced
by the lifted-polyhedron module): best-first node selection, most-fractional
branching, no cuts. Single-threaded and fully deterministic.
"""

import itertools
import heapq
import math
from dataclasses import dataclass

import numpy as np

from .simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, _expand_bounds, lp_solve


class MilpTimeout(Exception):
    """Node budget exhausted before the search tree was closed."""


@dataclass
class MilpResult:
    status: str
    x: np.ndarray | None
    objective: float | None
    nodes: int

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL


def milp_solve(
    cost,
    C=None,
    d=None,
    bounds=None,
    integer=(),
    incumbent=None,
    int_tol: float = 1e-6,
    node_limit: int = 1_000_000,
    max_iter=None,
) -> MilpResult:
    """Minimize cost@x subject to C@x <= d and bounds, with x[j] integral
    for every j in `integer`.

    Best-first on the relaxation bound; branches on the most fractional
    integer variable. `incumbent` may seed the upper bound with the
    objective of a feasible integral point known to the caller; if nothing
    better is found, the result carries that objective with x=None. Nodes
    that cannot improve the incumbent by more than 1e-9 are pruned.
    """
    cost = np.atleast_1d(np.asarray(cost, dtype=float))
    n = cost.size
    int_vars = sorted({int(j) for j in integer})
    if int_vars and not (0 <= int_vars[0] and int_vars[-1] < n):
        raise ValueError(f"integer indices out of range for {n} variables")
    lo, hi = _expand_bounds(bounds, n)

    def relax(lo_n, hi_n):
        return lp_solve(cost, C, d, list(zip(lo_n, hi_n)), max_iter=max_iter)

    nodes = 1
    root = relax(lo, hi)
    if root.status == UNBOUNDED:
        return MilpResult(UNBOUNDED, None, None, nodes)
    if root.status != OPTIMAL:
        return MilpResult(INFEASIBLE, None, None, nodes)

    best_val = math.inf if incumbent is None else float(incumbent)
    best_x = None
    tick = itertools.count()
    heap = [(root.objective, next(tick), root.x, lo, hi)]
    while heap:
        bound, _, x, lo_n, hi_n = heapq.heappop(heap)
        if bound >= best_val - 1e-9:
            break
        fractional = [j for j in int_vars if abs(x[j] - round(x[j])) > int_tol]
        if not fractional:
            best_val = bound
            best_x = x.copy()
            best_x[int_vars] = np.round(best_x[int_vars])
            continue
        j = max(fractional, key=lambda k: min(x[k] - math.floor(x[k]),
                                              math.ceil(x[k]) - x[k]))
        split = math.floor(x[j])
        for child_lo, child_hi in ((split + 1.0, hi_n[j]), (lo_n[j], split)):
            if child_lo > child_hi:
                continue
            if nodes >= node_limit:
                raise MilpTimeout(
                    f"node limit {node_limit} reached (best bound {bound:.6g})"
                )
            lo_c, hi_c = lo_n.copy(), hi_n.copy()
            lo_c[j], hi_c[j] = child_lo, child_hi
            nodes += 1
            rel = relax(lo_c, hi_c)
            if rel.status == OPTIMAL and rel.objective < best_val - 1e-9:
                heapq.heappush(heap, (rel.objective, next(tick), rel.x, lo_c, hi_c))

    if best_x is None and incumbent is None:
        return MilpResult(INFEASIBLE, None, None, nodes)
    return MilpResult(OPTIMAL, best_x, best_val, nodes)
