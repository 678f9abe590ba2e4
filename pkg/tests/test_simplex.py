import dataclasses
from fractions import Fraction

import numpy as np
import pytest

from aerq.simplex import (
    IterationLimitError,
    LpStatus,
    SimplexOptions,
    certify_solution,
    make_lp,
    solve_lp,
)
from helpers import vertex_enumeration


def fixture_lp():
    # min 3 b0 + 4 b1  s.t. b0 >= 1, b0 + b1 >= 3, b0 + 3 b1 >= 2, b free
    return make_lp([3, 4], [[1, 0], [1, 1], [1, 3]], [1, 3, 2], ">=", lower=None)


def test_bounded_one_variable():
    sol = solve_lp(make_lp([1.0], [[1.0], [1.0]], [2.0, 10.0], [">=", "<="]))
    assert sol.status is LpStatus.OPTIMAL
    assert sol.x[0] == pytest.approx(2.0) and sol.objective == pytest.approx(2.0)


def test_bounds_instead_of_rows():
    sol = solve_lp(make_lp([1.0], lower=2.0, upper=10.0))
    assert sol.x[0] == 2.0 and sol.objective == 2.0


def test_fixture_lp_vertex():
    # the three pairwise intersections are (1,2): obj 11, (1,1/3): obj 13/3 infeasible
    # (violates b0+b1>=3), (3.5,-0.5): obj 8.5
    verts = {(1, 2): Fraction(11), (Fraction(7, 2), Fraction(-1, 2)): Fraction(17, 2)}
    sol = solve_lp(fixture_lp())
    assert sol.status is LpStatus.OPTIMAL
    np.testing.assert_allclose(sol.x, [3.5, -0.5], atol=1e-14)
    assert sol.objective == pytest.approx(float(min(verts.values())), abs=1e-14)
    # duals of the binding rows: y2 + y3 = 3, y2 + 3 y3 = 4
    np.testing.assert_allclose(sol.duals, [0.0, 2.5, 0.5], atol=1e-14)


def test_unbounded():
    assert solve_lp(make_lp([1.0], [[1.0]], [0.0], ">=", maximize=True)).status is LpStatus.UNBOUNDED


def test_infeasible():
    sol = solve_lp(make_lp([1.0], [[1.0], [1.0]], [2.0, 1.0], [">=", "<="]))
    assert sol.status is LpStatus.INFEASIBLE


def test_certificate_passes_on_fixture():
    p = fixture_lp()
    cert = certify_solution(p, solve_lp(p))
    assert cert.passed
    assert cert.duality_gap <= 1e-10


def test_certificate_rejects_perturbed_point():
    p = fixture_lp()
    bad = dataclasses.replace(solve_lp(p), x=np.array([3.6, -0.5]))
    cert = certify_solution(p, bad)
    assert cert.primal_infeasibility == 0.0
    assert not cert.passed
    assert cert.duality_gap == pytest.approx(0.3)


def test_certificate_empty_constraints():
    p = make_lp([1.0, 2.0], lower=[0.0, -1.0], upper=[4.0, 4.0])
    sol = solve_lp(p)
    np.testing.assert_array_equal(sol.x, [0.0, -1.0])
    assert certify_solution(p, sol).passed


def test_certificate_rejects_non_optimal_status():
    p = make_lp([1.0], [[1.0]], [0.0], ">=", maximize=True)
    assert not certify_solution(p, solve_lp(p)).passed


def test_beale_cycling_example_terminates():
    # Beale's example cycles under textbook Dantzig pivoting with naive ties.
    c = [-0.75, 20, -0.5, 6]
    a = [[0.25, -8, -1, 9], [0.5, -12, -0.5, 3], [0, 0, 1, 0]]
    p = make_lp(c, a, [0, 0, 1], "<=")
    for bland_after in (0, 10):
        sol = solve_lp(p, SimplexOptions(bland_after=bland_after))
        assert sol.status is LpStatus.OPTIMAL
        assert sol.objective == pytest.approx(-1.25, abs=1e-12)
        assert certify_solution(p, sol).passed


def test_iteration_limit():
    with pytest.raises(IterationLimitError):
        solve_lp(fixture_lp(), SimplexOptions(max_iter=1))


def test_maximize_duals_follow_problem_direction():
    # max x1 + x2 s.t. x1 + 2 x2 <= 4, 3 x1 + x2 <= 6
    p = make_lp([1, 1], [[1, 2], [3, 1]], [4, 6], "<=", maximize=True)
    sol = solve_lp(p)
    np.testing.assert_allclose(sol.x, [1.6, 1.2])
    np.testing.assert_allclose(sol.duals, [0.4, 0.2])
    assert certify_solution(p, sol).passed


def test_deterministic():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(12, 4))
    p = make_lp(rng.normal(size=4), a, a @ rng.uniform(-1, 1, 4) + 0.1, "<=", lower=-5, upper=5)
    s1, s2 = solve_lp(p), solve_lp(p)
    assert s1.x.tobytes() == s2.x.tobytes()
    assert s1.duals.tobytes() == s2.duals.tobytes()
    assert s1.basis == s2.basis and s1.iterations == s2.iterations


def test_make_lp_validation():
    with pytest.raises(ValueError):
        make_lp([1.0], [[1.0]], [1.0], "<")
    with pytest.raises(ValueError):
        make_lp([1.0], lower=2.0, upper=1.0)


def _random_lp(rng):
    nv = int(rng.integers(1, 5))
    m = int(rng.integers(1, 13))
    a = np.round(rng.normal(size=(m, nv)), 3)
    x0 = rng.uniform(-2, 2, nv)
    senses = list(rng.choice(["<=", ">=", "="], size=m, p=[0.45, 0.45, 0.1]))
    n_eq = sum(s == "=" for s in senses)
    if n_eq > nv:
        senses = [s if s != "=" else "<=" for s in senses]
    slack = rng.uniform(0, 1, m)
    b = a @ x0 + np.where(np.array(senses) == "<=", slack, np.where(np.array(senses) == ">=", -slack, 0.0))
    lower = -rng.uniform(2, 5, nv)
    upper = rng.uniform(2, 5, nv)
    c = rng.normal(size=nv)
    return c, a, b, senses, lower, upper, bool(rng.integers(0, 2))


@pytest.mark.parametrize("seed", range(150))
def test_matches_vertex_enumeration(seed):
    rng = np.random.default_rng(seed)
    c, a, b, senses, lower, upper, maximize = _random_lp(rng)
    expected = vertex_enumeration(c, a, b, senses, lower, upper, maximize)
    p = make_lp(c, a, b, senses, lower, upper, maximize)
    sol = solve_lp(p)
    assert sol.status is LpStatus.OPTIMAL
    assert sol.objective == pytest.approx(expected, abs=1e-9)
    cert = certify_solution(p, sol)
    assert cert.passed, cert.violations
    assert cert.duality_gap <= 1e-9 * (1 + abs(sol.objective))


@pytest.mark.parametrize("seed", range(30))
def test_infeasible_agrees_with_enumeration(seed):
    rng = np.random.default_rng(1000 + seed)
    nv = int(rng.integers(1, 4))
    a = rng.normal(size=(4, nv))
    # row pairs a x >= 1 and a x <= -1 cannot both hold
    a = np.vstack([a, a[:1]])
    b = np.concatenate([rng.normal(size=4), [0.0]])
    b[0] = 1.0
    b[4] = -1.0
    senses = [">=", "<=", ">=", "<=", "<="]
    lower, upper = -np.ones(nv) * 3, np.ones(nv) * 3
    assert vertex_enumeration(np.ones(nv), a, b, senses, lower, upper) is None
    assert solve_lp(make_lp(np.ones(nv), a, b, senses, lower, upper)).status is LpStatus.INFEASIBLE
