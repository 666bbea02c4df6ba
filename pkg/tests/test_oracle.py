import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from mmlp.bench import random_feasible
from mmlp.model import DualLP
from mmlp.oracle import (
    MAX_M,
    MAX_N,
    OracleStatus,
    TooLarge,
    _exact_step,
    check_assumption_51,
    fd_directional,
    fd_gradient,
    least_violation,
    solve_by_vertices,
)

SEEDS = st.integers(0, 2**32 - 1)


def test_single_constraint(one_by_one):
    sol = solve_by_vertices(one_by_one)
    assert sol.status is OracleStatus.OPTIMAL
    np.testing.assert_allclose(sol.y_opt, [1.0])
    assert sol.obj == -1.0
    assert sol.active_set == (0,)
    np.testing.assert_allclose(sol.x_opt, [1.0])


def test_conflicting_constraints(infeasible_pair):
    sol = solve_by_vertices(infeasible_pair)
    assert sol.status is OracleStatus.INFEASIBLE
    assert sol.obj == math.inf and sol.y_opt is None


def test_unbounded(unbounded_dual):
    sol = solve_by_vertices(unbounded_dual)
    assert sol.status is OracleStatus.UNBOUNDED
    assert sol.obj == -math.inf


def test_guard():
    p = DualLP(np.ones((1, MAX_N + 1)), [1.0], np.ones(MAX_N + 1))
    with pytest.raises(TooLarge):
        solve_by_vertices(p)
    with pytest.raises(TooLarge):
        least_violation(p)
    p = DualLP(np.eye(MAX_M + 1, MAX_M + 2), np.ones(MAX_M + 1), np.ones(MAX_M + 2))
    with pytest.raises(TooLarge):
        solve_by_vertices(p)


def test_rank_deficient_rejected():
    with pytest.raises(ValueError):
        solve_by_vertices(DualLP([[1.0, 1.0], [1.0, 1.0]], [1.0, 1.0], [1.0, 1.0]))


def _highs(p):
    return linprog(-p.b, A_ub=p.A.T, b_ub=p.c, bounds=[(None, None)] * p.m, method="highs")


@given(SEEDS)
def test_matches_highs_on_feasible_instances(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 5))
    p = random_feasible(rng, m, int(rng.integers(m + 1, 9)))
    sol = solve_by_vertices(p)
    ref = _highs(p)
    assert sol.status is OracleStatus.OPTIMAL and ref.status == 0
    assert sol.obj == pytest.approx(ref.fun, abs=1e-7 * (1 + abs(ref.fun)))
    # optimality certificate: primal-dual feasible pair with equal objectives
    assert np.all(p.A.T @ sol.y_opt <= p.c + 1e-9)
    assert np.all(sol.x_opt >= 0)
    np.testing.assert_allclose(p.A @ sol.x_opt, p.b, atol=1e-8 * (1 + np.abs(p.b).max()))
    assert p.c @ sol.x_opt == pytest.approx(-sol.obj, abs=1e-7 * (1 + abs(sol.obj)))
    slack = p.c - p.A.T @ sol.y_opt
    assert sol.active_set == tuple(np.flatnonzero(np.abs(slack) <= 1e-9))


@given(SEEDS)
def test_status_agrees_with_certificates(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 4))
    n = int(rng.integers(m + 1, 7))
    p = DualLP(rng.normal(size=(m, n)), rng.normal(size=m), rng.normal(size=n))
    if np.linalg.matrix_rank(p.A) < m:
        return
    sol = solve_by_vertices(p)
    dual_feasible = linprog(np.zeros(m), A_ub=p.A.T, b_ub=p.c, bounds=[(None, None)] * m,
                            method="highs").status == 0
    primal_feasible = linprog(np.zeros(n), A_eq=p.A, b_eq=p.b, method="highs").status == 0
    if sol.status is OracleStatus.OPTIMAL:
        assert dual_feasible and primal_feasible
    elif sol.status is OracleStatus.UNBOUNDED:
        assert dual_feasible and not primal_feasible
    else:
        assert not dual_feasible


# -- least violation ---------------------------------------------------------


def test_least_violation_examples(infeasible_pair, one_by_one):
    y, v = least_violation(infeasible_pair)
    assert y[0] == pytest.approx(0.0, abs=1e-12)
    assert v == pytest.approx(math.sqrt(2.0), rel=1e-12)
    assert least_violation(one_by_one)[1] == 0.0


@given(SEEDS)
def test_least_violation_is_stationary(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 4))
    n = int(rng.integers(m + 1, 8))
    p = DualLP(rng.normal(size=(m, n)), rng.normal(size=m), rng.normal(size=n))
    y, v = least_violation(p)
    viol = np.maximum(p.A.T @ y - p.c, 0.0)
    assert np.linalg.norm(p.A @ viol) <= 1e-10
    assert v == pytest.approx(np.linalg.norm(viol))
    # shifting c by A'y for any y keeps the optimum value
    shift = rng.normal(size=m)
    q = DualLP(p.A, p.b, p.c + p.A.T @ shift)
    assert least_violation(q)[1] == pytest.approx(v, abs=1e-8)


@given(SEEDS)
def test_least_violation_zero_on_feasible(seed):
    rng = np.random.default_rng(seed)
    p = random_feasible(rng, int(rng.integers(1, 4)), 8)
    assert least_violation(p)[1] <= 1e-10


@pytest.mark.parametrize(
    "a, d, t",
    [
        ([1.0], [-1.0], 1.0),
        ([1.0, 1.0], [-1.0, 1.0], 0.0),
        ([2.0, -1.0], [-1.0, 1.0], 1.5),
        ([-1.0], [-1.0], 0.0),
        ([3.0, 1.0], [-1.0, -2.0], 3.0),
    ],
)
def test_exact_line_search(a, d, t):
    a, d = np.array(a), np.array(d)
    got = _exact_step(a, d)
    assert got == pytest.approx(t)
    grid = np.linspace(0, 5, 2001)
    vals = [0.5 * np.sum(np.maximum(a + s * d, 0) ** 2) for s in grid]
    assert 0.5 * np.sum(np.maximum(a + got * d, 0) ** 2) <= min(vals) + 1e-12


# -- nondegeneracy check -----------------------------------------------------


def test_assumption_holds_on_single_constraint(one_by_one):
    sol = solve_by_vertices(one_by_one)
    assert check_assumption_51(one_by_one, sol, [1.0])


def test_assumption_fails_with_duplicate_tight_constraints():
    p = DualLP([[1.0, 1.0]], [1.0], [1.0, 1.0])
    sol = solve_by_vertices(p)
    assert len(sol.active_set) == 2
    assert not check_assumption_51(p, sol, sol.x_opt)


def test_assumption_fails_without_strict_complementarity():
    # y1 <= 1, y2 <= 1, y1 + y2 <= 2: three constraints tight at (1, 1)
    p = DualLP([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]], [1.0, 0.0], [1.0, 1.0, 2.0])
    sol = solve_by_vertices(p)
    assert not check_assumption_51(p, sol, sol.x_opt)
    # single tight constraint whose multiplier vanishes
    p = DualLP([[1.0, -1.0]], [0.0], [1.0, 1.0])
    sol = solve_by_vertices(p)
    assert not check_assumption_51(p, sol, np.zeros(2))


def test_assumption_rejects_non_optimal(infeasible_pair):
    assert not check_assumption_51(infeasible_pair, solve_by_vertices(infeasible_pair), [0, 0])


# -- finite differences ------------------------------------------------------


def test_fd_gradient_of_quadratic():
    Q = np.array([[2.0, 0.5], [0.5, 1.0]])
    v = np.array([0.3, -1.2])
    np.testing.assert_allclose(fd_gradient(lambda u: 0.5 * u @ Q @ u, v), Q @ v, rtol=1e-9)
    np.testing.assert_allclose(fd_directional(lambda u: Q @ u, v, [1.0, 0.0]), Q[:, 0],
                               rtol=1e-9)
