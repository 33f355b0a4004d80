import itertools

import numpy as np
import pytest

from qptrim.simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, lp_solve


def enumerate_vertices(C, d, tol=1e-9):
    """All vertices of {x: C x <= d} by exhaustive basis enumeration."""
    m, n = C.shape
    verts = []
    for rows in itertools.combinations(range(m), n):
        sub = C[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-10:
            continue
        v = np.linalg.solve(sub, d[list(rows)])
        if np.all(C @ v <= d + tol * (1.0 + np.abs(d).max())):
            verts.append(v)
    return verts


def random_bounded_polytope(rng, n, extra_rows):
    # box rows keep it bounded; extra random cuts through a known interior point
    C = np.vstack([np.eye(n), -np.eye(n), rng.normal(size=(extra_rows, n))])
    x0 = rng.uniform(-0.5, 0.5, size=n)
    d = np.concatenate(
        [
            np.full(2 * n, rng.uniform(1.0, 3.0)),
            C[2 * n:] @ x0 + rng.uniform(0.05, 1.5, size=extra_rows),
        ]
    )
    return C, d


def test_matches_vertex_enumeration_on_random_polytopes():
    rng = np.random.default_rng(42)
    for trial in range(60):
        n = int(rng.integers(2, 4))
        C, d = random_bounded_polytope(rng, n, int(rng.integers(0, 5)))
        cost = rng.normal(size=n)
        res = lp_solve(cost, C, d)
        assert res.status == OPTIMAL, f"trial {trial}"
        verts = enumerate_vertices(C, d)
        assert verts, "bounded nonempty polytope must have vertices"
        best = min(cost @ v for v in verts)
        assert abs(res.objective - best) <= 1e-7 * (1.0 + abs(best))
        viol = (C @ res.x - d).max()
        assert viol <= 1e-8 * (1.0 + np.abs(d).max())


def test_simple_known_solution():
    # min -x-y st x<=1, y<=2, x+y<=2.5, x,y>=0  ->  corner mixes
    C = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    d = np.array([1.0, 2.0, 2.5])
    res = lp_solve([-1.0, -1.0], C, d, bounds=(0.0, None))
    assert res.status == OPTIMAL
    assert np.isclose(res.objective, -2.5)


def test_infeasible_detected():
    C = np.array([[1.0], [-1.0]])
    d = np.array([-1.0, -1.0])  # x <= -1 and x >= 1
    assert lp_solve([1.0], C, d).status == INFEASIBLE


def test_unbounded_detected():
    res = lp_solve([-1.0], np.array([[-1.0]]), np.array([0.0]))  # x >= 0, min -x
    assert res.status == UNBOUNDED


def test_box_only_problems():
    res = lp_solve([2.0, -3.0], bounds=[(0.0, 1.0), (-2.0, 5.0)])
    assert res.status == OPTIMAL
    assert np.allclose(res.x, [0.0, 5.0])
    assert lp_solve([1.0]).status == UNBOUNDED
    assert lp_solve([0.0]).status == OPTIMAL


def test_bounds_respected_and_match_folded_oracle():
    rng = np.random.default_rng(3)
    for _ in range(40):
        n = int(rng.integers(1, 4))
        C, d = random_bounded_polytope(rng, n, int(rng.integers(0, 4)))
        lo = rng.uniform(-1.0, -0.2, size=n)
        hi = rng.uniform(0.2, 1.0, size=n)
        cost = rng.normal(size=n)
        res = lp_solve(cost, C, d, bounds=list(zip(lo, hi)))
        # oracle works on the polytope with the box folded into rows
        Cb = np.vstack([C, np.eye(n), -np.eye(n)])
        db = np.concatenate([d, hi, -lo])
        verts = enumerate_vertices(Cb, db)
        if res.status != OPTIMAL:
            assert res.status == INFEASIBLE
            assert not verts
            continue
        assert np.all(res.x >= lo - 1e-9)
        assert np.all(res.x <= hi + 1e-9)
        best = min(cost @ v for v in verts)
        assert abs(res.objective - best) <= 1e-7 * (1.0 + abs(best))


def test_mixed_free_and_one_sided_bounds():
    # min x1 + x2 with x1 free, x2 <= 3, constraint x1 >= x2 - 1, x1 + x2 >= 0
    C = np.array([[-1.0, 1.0], [-1.0, -1.0]])
    d = np.array([1.0, 0.0])
    res = lp_solve([1.0, 1.0], C, d, bounds=[(None, None), (None, 3.0)])
    assert res.status == OPTIMAL
    assert np.isclose(res.objective, 0.0, atol=1e-9)


def test_degenerate_ties_terminate():
    # many redundant rows through one vertex exercises anti-cycling
    C = np.array(
        [
            [1.0, 0.0],
            [0.0, 1.0],
            [1.0, 1.0],
            [2.0, 2.0],
            [1.0, 2.0],
            [2.0, 1.0],
            [-1.0, 0.0],
            [0.0, -1.0],
        ]
    )
    d = np.array([1.0, 1.0, 2.0, 4.0, 3.0, 3.0, 0.0, 0.0])
    res = lp_solve([-1.0, -1.0], C, d)
    assert res.status == OPTIMAL
    assert np.isclose(res.objective, -2.0, atol=1e-9)


def test_equality_like_thin_feasible_set():
    # x + y <= 1 and x + y >= 1 pins the simplex onto a facet
    C = np.array([[1.0, 1.0], [-1.0, -1.0], [-1.0, 0.0], [0.0, -1.0]])
    d = np.array([1.0, -1.0, 0.0, 0.0])
    res = lp_solve([0.0, -1.0], C, d)
    assert res.status == OPTIMAL
    assert np.isclose(res.objective, -1.0, atol=1e-9)
    assert np.allclose(res.x, [0.0, 1.0], atol=1e-8)


def test_deterministic_repeatability():
    rng = np.random.default_rng(9)
    C, d = random_bounded_polytope(rng, 3, 4)
    cost = rng.normal(size=3)
    r1 = lp_solve(cost, C, d)
    r2 = lp_solve(cost, C, d)
    assert r1.status == r2.status == OPTIMAL
    assert np.array_equal(r1.x, r2.x)
    assert r1.iterations == r2.iterations


def test_shape_validation():
    with pytest.raises(ValueError):
        lp_solve([1.0, 2.0], np.eye(3), np.zeros(3))
    with pytest.raises(ValueError):
        lp_solve([1.0], np.eye(1), np.zeros(2))
    with pytest.raises(ValueError):
        lp_solve([1.0], bounds=[(2.0, 1.0)])
