"""Shared numerical tolerances.

Every feasibility / activity / stationarity test in the package scales its
base tolerance by (1 + relevant norm), so the constants here are relative.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Tolerances:
    """Tolerance profile threaded through solvers and classifiers."""

    feas: float = 1e-8   # constraint violation
    act: float = 1e-7    # active-set membership (slack magnitude)
    kkt: float = 1e-7    # stationarity / multiplier sign


DEFAULT = Tolerances()
STRICT = Tolerances(feas=1e-10, act=1e-9, kkt=1e-9)

PROFILES = {"default": DEFAULT, "strict": STRICT}


def rank_tol(a: np.ndarray) -> float:
    """Rank / pivot tolerance for a matrix: 1e-10 * (inf-norm + 1)."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0:
        return 1e-10
    return 1e-10 * (np.linalg.norm(a, np.inf) + 1.0)
