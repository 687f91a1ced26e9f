import numpy as np
import pytest
from scipy.optimize import brentq

from taskmech.agent import agent_utility, best_participation, brute_force_best_response, participation_slope
from taskmech.econ_model import SatisfactionModel, make_grid, make_uniform
from taskmech.errors import EmptyGrid, NegativeParticipation, UnboundedResponse
from taskmech.mechanism import RewardSchedule, build_schedule

PI = SatisfactionModel(0.5, 3.0)


def test_agent_utility_examples():
    assert agent_utility(PI, 10, 4, 4, 4, 0) == pytest.approx(24.0)
    assert agent_utility(PI, 10, 4, 4, 4, -24) == pytest.approx(0.0)
    assert agent_utility(PI, 10, 5.3, 0.0, 7.0, 1.0) == 1.0


def test_agent_utility_negative_x():
    with pytest.raises(NegativeParticipation):
        agent_utility(PI, 10, 4, -1.0, 0, 0)


@pytest.mark.parametrize("z2,theta,alpha,expected", [(3.0, 5.0, 4.0, 6.25), (1.0, 4.0, 8.0, 4.0)])
def test_best_participation_matches_root_find(z2, theta, alpha, expected):
    pi = SatisfactionModel(0.5, z2)
    chi = best_participation(pi, 10.0, theta, alpha)
    root = brentq(lambda x: theta * pi.d1(x) - 10.0 + alpha, 1e-8, 1e4, xtol=1e-14)
    assert chi == pytest.approx(expected)
    assert chi == pytest.approx(root, rel=1e-10)


def test_best_participation_unbounded():
    with pytest.raises(UnboundedResponse):
        best_participation(PI, 10.0, 5.0, 10.0)


def test_participation_slope_positive():
    theta = np.linspace(4, 6, 9)
    chi = best_participation(PI, 10.0, theta, 3.0)
    h = 1e-6
    fd = (best_participation(PI, 10.0, theta, 3.0 + h) - best_participation(PI, 10.0, theta, 3.0 - h)) / (2 * h)
    np.testing.assert_allclose(participation_slope(PI, theta, chi), fd, rtol=1e-6)
    assert np.all(fd > 0)


def test_brute_force_truthful_at_solution(solved, models):
    schedule, _ = solved
    d = brute_force_best_response(models.satisfaction, models.p, 5.0, schedule)
    assert min(abs(t - 5.0) for t in d.theta_hat_ties) <= schedule.grid.spacing + 1e-12
    chi = best_participation(models.satisfaction, models.p, 5.0, schedule.alpha_at(d.theta_hat_star))
    assert abs(d.x_star - chi) <= 2 * chi / 10000


def test_brute_force_constant_schedule_flat():
    grid = make_grid(make_uniform(4, 6), 21)
    sched = RewardSchedule(grid, np.full(21, 2.0), np.full(21, 1.5))
    d = brute_force_best_response(PI, 10.0, 4.7, sched)
    assert len(d.theta_hat_ties) == 21
    assert d.theta_hat_star == 4.0


def test_brute_force_coarse_vs_fine_schedule(models, dist):
    # a coarse and a fine schedule built from the same monotone alpha
    for n in (51, 201):
        grid = make_grid(dist, n)
        sched = build_schedule(0.4 * (grid.nodes - 4.0), grid, models)
        d = brute_force_best_response(models.satisfaction, models.p, 5.0, sched, n_x=20001)
        x_grid_step = 2 * np.max(best_participation(models.satisfaction, models.p, 5.0, sched.alpha)) / 20000
        chi = best_participation(models.satisfaction, models.p, 5.0, sched.alpha_at(d.theta_hat_star))
        assert abs(d.x_star - chi) <= x_grid_step
        assert abs(d.theta_hat_star - 5.0) <= grid.spacing + 1e-12


def test_brute_force_empty_grids():
    grid = make_grid(make_uniform(4, 6), 5)
    sched = RewardSchedule(grid, np.zeros(5), np.zeros(5))
    with pytest.raises(EmptyGrid):
        brute_force_best_response(PI, 10.0, 5.0, sched, x_grid=np.array([]))
