import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gwbary import DiscreteMeasure, GWParams, build_cost_matrix, solve_submarginal_transport
from gwbary.oracle import GridSpec, oracle_ec
from gwbary.transport import solve_balanced_transport, submarginal_dense_lp

from conftest import EUCLID, random_measure


def _solve(mu1, mu2, a=1.0, b=1.0, p=2):
    cost = build_cost_matrix(mu1, mu2, EUCLID, GWParams(a, b, p))
    return solve_submarginal_transport(mu1, mu2, cost, a)


def test_example_pair(example_pair):
    plan, lp = _solve(*example_pair)
    assert lp.objective == 2.0
    assert plan.entries.tolist() == [[1.0]]


def test_identity_moves_everything():
    mu = DiscreteMeasure([[0.0], [1.0], [4.0]], [0.5, 1.0, 2.0])
    plan, lp = _solve(mu, mu)
    assert lp.objective == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(plan.entries, np.diag(mu.masses))


def test_far_deltas_remove_everything():
    plan, lp = _solve(DiscreteMeasure([[0.0]], [1]), DiscreteMeasure([[3.0]], [1]))
    assert lp.objective == 2.0 and plan.entries.tolist() == [[0.0]]


def test_zero_mass_sides():
    mu = DiscreteMeasure([[0.0], [1.0]], [1.0, 2.0])
    empty = DiscreteMeasure.empty(1)
    for a in (0.5, 2.0):
        plan, lp = _solve(mu, empty, a=a)
        assert lp.objective == pytest.approx(a * 3.0)
        assert plan.entries.shape == (2, 0)
        plan, lp = _solve(empty, empty, a=a)
        assert lp.objective == 0.0


def test_lp_diagnostics():
    rng = np.random.default_rng(0)
    for _ in range(30):
        mu1, mu2 = random_measure(rng), random_measure(rng)
        plan, lp = _solve(mu1, mu2)
        assert lp.primal_residual <= 1e-9
        assert lp.slackness_residual <= 1e-7
        assert lp.duality_gap <= 1e-7 * (1 + abs(lp.objective))
        assert plan.is_submarginal(mu1.masses, mu2.masses)


def test_matches_dense_simplex():
    rng = np.random.default_rng(1)
    for _ in range(40):
        mu1, mu2 = random_measure(rng), random_measure(rng)
        a = float(rng.choice([0.5, 1.0, 2.0]))
        cost = build_cost_matrix(mu1, mu2, EUCLID, GWParams(a, 1.0, 2))
        _, lp = solve_submarginal_transport(mu1, mu2, cost, a)
        _, dense = submarginal_dense_lp(mu1, mu2, cost, a)
        assert lp.objective == pytest.approx(dense.objective, abs=1e-9)


def test_matches_oracle_up_to_six_points():
    rng = np.random.default_rng(2)
    grid = GridSpec(step=0.25, max_support=6)
    for _ in range(40):
        mu1 = random_measure(rng, max_points=6, grid=0.25, mass_high=1.0)
        mu2 = random_measure(rng, max_points=6, grid=0.25, mass_high=1.0)
        cost = build_cost_matrix(mu1, mu2, EUCLID, GWParams(1.0, 1.0, 2))
        _, lp = solve_submarginal_transport(mu1, mu2, cost, 1.0)
        bound = 2 * 1.0 * grid.step * (mu1.size + mu2.size)
        assert abs(lp.objective - oracle_ec(mu1, mu2, cost, 1.0, grid)) <= bound


def test_balanced_transport_rejects_unequal_mass():
    with pytest.raises(ValueError):
        solve_balanced_transport(np.zeros((1, 1)), [1.0], [2.0])


def test_shape_mismatch():
    mu = DiscreteMeasure([[0.0]], [1.0])
    with pytest.raises(ValueError):
        solve_submarginal_transport(mu, mu, np.zeros((2, 1)), 1.0)


@given(st.integers(0, 10_000))
def test_monotone_in_a(seed):
    rng = np.random.default_rng(seed)
    mu1, mu2 = random_measure(rng, max_points=4), random_measure(rng, max_points=4)
    values = [_solve(mu1, mu2, a=a)[1].objective for a in (0.1, 0.5, 1.0, 2.0, 5.0)]
    assert all(x <= y + 1e-12 for x, y in zip(values, values[1:]))


@given(st.integers(0, 10_000))
def test_zero_cost_pair_bound(seed):
    rng = np.random.default_rng(seed)
    mu1, mu2 = random_measure(rng, max_points=4), random_measure(rng, max_points=4)
    # share one point so that one cost entry vanishes
    pts2 = mu2.points.copy()
    pts2[0] = mu1.points[0]
    mu2 = DiscreteMeasure(pts2, mu2.masses)
    a = 1.0
    _, lp = _solve(mu1, mu2, a=a)
    matched = min(mu1.masses[0], mu2.masses[0])
    assert lp.objective <= a * (mu1.total_mass + mu2.total_mass) - 2 * a * matched + 1e-12
