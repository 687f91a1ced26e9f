import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from taskmech.econ_model import TypeGrid, make_grid
from taskmech.mechanism import RewardSchedule, _beta_by_quadrature, build_schedule, expected_profit
from taskmech.verifier import (UtilityMatrix, check_envelope, check_ic, check_ir, envelope_integral,
                               truthful_utility, utility_matrix, verify)


def adversarial(models, grid):
    alpha = 2.0 - 0.5 * (grid.nodes - grid.nodes[0])
    return RewardSchedule(grid, alpha, _beta_by_quadrature(alpha, grid, models.satisfaction, models.p))


def test_solved_instance_is_ic(solved, models):
    ic = check_ic(utility_matrix(solved[0], models))
    assert ic.max_deviation_steps <= 1


def test_beta_bump_detected(models, grid):
    sched = build_schedule(0.5 * (grid.nodes - 4.0), grid, models)
    beta = sched.beta.copy()
    beta[100] += 0.5
    ic = check_ic(utility_matrix(RewardSchedule(grid, sched.alpha, beta), models))
    assert ic.max_deviation_steps > 1
    assert ic.max_gain > 0.1


def test_single_node_matrix():
    m = UtilityMatrix(TypeGrid(np.array([5.0])), np.array([[3.0]]))
    assert check_ic(m).max_deviation_steps == 0


def test_ir_shifts(solved, models):
    sched = solved[0]
    base = check_ir(utility_matrix(sched, models))
    assert base.min_diag >= -1e-6 and base.binding_residual <= 1e-3
    down = check_ir(utility_matrix(sched.shifted(-1.0), models))
    assert down.min_diag == pytest.approx(-1.0, abs=1e-6)
    up = check_ir(utility_matrix(sched.shifted(1.0), models))
    assert up.min_diag >= 0 and up.binding_residual == pytest.approx(1.0, abs=1e-6)


def test_envelope_at_lowest_type(solved, models):
    sched = solved[0]
    assert envelope_integral(sched, models)[0] == 0.0
    assert abs(truthful_utility(sched, models)[0]) <= 1e-12


def test_envelope_exact_with_schedule_quadrature(solved, models):
    # refine=1 reuses the quadrature that built beta
    assert check_envelope(solved[0], models, refine=1) < 1e-12


def test_envelope_second_order(models, dist):
    res = []
    for n in (51, 101, 201):
        grid = make_grid(dist, n)
        res.append(check_envelope(build_schedule(0.5 * (grid.nodes - 4.0) ** 2, grid, models), models))
    assert res[2] <= 1e-3
    assert np.log2(res[0] / res[1]) > 1.8 and np.log2(res[1] / res[2]) > 1.8


def test_diagonal_nondecreasing(solved, models):
    assert np.all(np.diff(truthful_utility(solved[0], models)) >= -1e-12)


def test_verify_solved(solved, models, dist):
    report = verify(solved[0], models, dist)
    assert report.passed, report.failures
    assert report.alpha_below_cost and report.alpha_monotone


def test_verify_adversarial(models, grid, dist):
    report = verify(adversarial(models, grid), models, dist)
    assert not report.passed
    assert "alpha_monotone" in report.failures
    assert report.ic_max_deviation_steps > 10


def test_verify_one_decreasing_cell(solved, models, dist):
    sched = solved[0]
    alpha = sched.alpha.copy()
    alpha[150] -= 0.05
    report = verify(RewardSchedule(sched.grid, alpha, sched.beta), models, dist)
    assert not report.alpha_monotone and not report.passed


def test_verify_alpha_at_cost(grid, models, dist):
    report = verify(RewardSchedule(grid, np.full(len(grid), 10.0), np.zeros(len(grid))), models, dist)
    assert report.failures == ("alpha_below_cost",)


def test_search_schedule_dominates(search, solved, models, dist):
    assert verify(search.schedule, models, dist).passed
    assert search.profit >= expected_profit(solved[0], models, dist).direct - 1e-12


def test_constant_schedule_rows_flat(models, grid):
    sched = build_schedule(np.full(len(grid), 1.7), grid, models)
    u = utility_matrix(sched, models).values
    np.testing.assert_allclose(u, u[:, :1] * np.ones_like(u), atol=1e-12, rtol=0)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(0.0, 2.0), min_size=4, max_size=4), st.floats(0.0, 3.0))
def test_increasing_alpha_is_ic(slopes, alpha0):
    # piecewise linear, strictly increasing alpha on a 41-point grid
    from taskmech.econ_model import MarketParams, Models, RevenueModel, SatisfactionModel, make_uniform
    models = Models(SatisfactionModel(0.5, 3.0), RevenueModel(0.5), MarketParams(10.0))
    grid = make_grid(make_uniform(4, 6), 41)
    u = np.repeat(np.asarray(slopes) + 0.05, 10)
    alpha = alpha0 + np.concatenate(([0.0], np.cumsum(u * grid.spacing)))
    ic = check_ic(utility_matrix(build_schedule(alpha, grid, models), models))
    assert ic.max_deviation_steps <= 1
