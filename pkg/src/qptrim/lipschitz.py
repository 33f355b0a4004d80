"""Lipschitz bounds for the minimizer map z*(x) of a strictly convex mp-QP.

The closed-form bound holds uniformly over every constraint subset, which is
what makes it usable as a trimming certificate: the same constant covers the
full problem and all trimmed variants. A diagonal row scaling leaves the
minimizer unchanged but can tighten the bound considerably.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import spectral_norm
from .mpqp import IndexSet, MpQp
from .qpsolver import qp_solve
from .tolerances import rank_tol


class DegenerateRow(Exception):
    """A constraint row has (numerically) zero curvature G_j H^-1 G_j'."""


class NoValidTrials(Exception):
    """Empirical estimation found no usable parameter pair."""


@dataclass
class GlcReport:
    """Lipschitz constant with its assembly terms for auditability."""

    kappa: float
    terms: dict
    scaling_used: np.ndarray | None = None

    def to_dict(self) -> dict:
        out = {"kappa": self.kappa, "terms": dict(self.terms)}
        out["scaling_used"] = (
            None if self.scaling_used is None else np.asarray(self.scaling_used).tolist()
        )
        return out


def glc(p: MpQp) -> GlcReport:
    """Closed-form Lipschitz constant valid for every constraint subset."""
    quads = p.g_quads
    min_quad = float(quads.min()) if quads.size else np.inf
    if quads.size and min_quad <= rank_tol(p.G):
        raise DegenerateRow(
            f"row curvature min G_j H^-1 G_j' = {min_quad:.3e} is numerically zero"
        )
    term_u = spectral_norm(p.hi_ft)
    n_hg = spectral_norm(p.hi_gt)
    n_sp = spectral_norm(p.S + p.G @ p.hi_ft)
    kappa = term_u if not quads.size else term_u + n_hg * n_sp / min_quad
    return GlcReport(
        kappa=float(kappa),
        terms={
            "term_unconstrained": float(term_u),
            "denom_min_quad": float(min_quad) if quads.size else None,
            "norm_HinvGt": float(n_hg),
            "norm_S_plus": float(n_sp),
        },
    )


def phi_default(p: MpQp) -> np.ndarray:
    """Equalizing row weights (G_j H^-1 G_j')^(-1/2)."""
    quads = p.g_quads
    if np.any(quads <= rank_tol(p.G)):
        raise DegenerateRow("cannot scale rows with numerically zero curvature")
    return 1.0 / np.sqrt(quads)


def glc_scaled(p: MpQp, phi=None) -> GlcReport:
    """Lipschitz constant after diagonal row scaling (default: equalizing).

    Row scaling does not change the minimizer, so whatever the formula
    certifies for the scaled rows applies to the original problem.

    Caveat: the closed-form bound implicitly assumes the smallest eigenvalue
    of every active-row Gram matrix G_A H^-1 G_A' stays above the smallest
    per-row curvature. Several nearly parallel rows active at once break
    that, and the observed sensitivity can then exceed this constant (the
    release gate probes for it; see verify.lipschitz_soundness). Trimming
    results should be cross-checked end to end when row geometry is
    ill-conditioned, as the bench harness does.
    """
    phi = phi_default(p) if phi is None else np.atleast_1d(np.asarray(phi, dtype=float))
    report = glc(p.scaled(phi))
    report.scaling_used = phi
    return report


def empirical_lipschitz(
    p: MpQp,
    trials: int,
    seed: int,
    box=(-5.0, 5.0),
    subset_prob: float = 0.5,
) -> float:
    """Largest observed ratio ||z*(x1,I) - z*(x2,I)|| / ||x1 - x2||.

    Parameters are drawn uniformly from the given box (a (lo, hi) pair or
    per-dimension pairs); each trial also draws a random constraint subset
    including every index with probability subset_prob. Trials where either
    trimmed problem is infeasible, or the parameters nearly coincide, are
    skipped. Raises NoValidTrials when nothing usable was drawn.
    """
    rng = np.random.default_rng(seed)
    box = np.asarray(box, dtype=float)
    if box.ndim == 1:
        box = np.tile(box, (p.n_x, 1))
    if box.shape != (p.n_x, 2):
        raise ValueError(f"box shape {box.shape} does not match n_x={p.n_x}")
    best = None
    for _ in range(trials):
        x1 = rng.uniform(box[:, 0], box[:, 1])
        x2 = rng.uniform(box[:, 0], box[:, 1])
        gap = np.linalg.norm(x1 - x2)
        if gap < 1e-9:
            continue
        keep = IndexSet(np.flatnonzero(rng.random(p.n_c) < subset_prob) + 1)
        s1 = qp_solve(p, x1, keep)
        s2 = qp_solve(p, x2, keep)
        if not (s1.is_optimal and s2.is_optimal):
            continue
        ratio = np.linalg.norm(s1.z_star - s2.z_star) / gap
        best = ratio if best is None else max(best, ratio)
    if best is None:
        raise NoValidTrials(f"no valid pair in {trials} trials")
    return float(best)
