import numpy as np
import pytest

from gwbary import (BarycenterProblem, DiscreteMeasure, GridSpec, GWParams, build_cost_matrix,
                    oracle_barycenter, oracle_ec, solve_barycenter, solve_submarginal_transport)
from gwbary.oracle import OracleSizeError

from conftest import EUCLID, random_measure


def _brute_ec(m1, m2, c, a, step):
    """Enumerate every grid plan entry by entry (only for 2x2 and smaller)."""
    import itertools
    u1, u2 = np.rint(np.asarray(m1) / step).astype(int), np.rint(np.asarray(m2) / step).astype(int)
    n1, n2 = len(u1), len(u2)
    best = np.inf
    ranges = [range(min(u1[i], u2[j]) + 1) for i in range(n1) for j in range(n2)]
    for t in itertools.product(*ranges):
        g = np.array(t, dtype=float).reshape(n1, n2) * step
        if np.any(g.sum(1) > np.asarray(m1) + 1e-12) or np.any(g.sum(0) > np.asarray(m2) + 1e-12):
            continue
        val = a * (sum(m1) - g.sum()) + a * (sum(m2) - g.sum()) + (c * g).sum()
        best = min(best, val)
    return best


def test_example_value(example_pair):
    mu1, mu2 = example_pair
    assert oracle_ec(mu1, mu2, [[0.0]], 1.0) == 2.0


def test_identical_deltas():
    mu = DiscreteMeasure([[0.0]], [1.0])
    assert oracle_ec(mu, mu, [[0.0]], 1.0) == 0.0


def test_far_deltas():
    mu1, mu2 = DiscreteMeasure([[0.0]], [1.0]), DiscreteMeasure([[3.0]], [1.0])
    assert oracle_ec(mu1, mu2, [[9.0]], 1.0) == 2.0


@pytest.mark.parametrize("seed", range(4))
def test_dp_matches_entrywise_enumeration(seed):
    rng = np.random.default_rng(seed)
    for _ in range(10):
        m1 = rng.integers(0, 5, 2) / 4
        m2 = rng.integers(0, 5, 2) / 4
        c = rng.uniform(0, 3, (2, 2))
        mu1 = DiscreteMeasure(np.zeros((2, 1)) + [[0.0], [1.0]], m1)
        mu2 = DiscreteMeasure(np.zeros((2, 1)) + [[0.0], [1.0]], m2)
        ref = _brute_ec(m1, m2, c, 1.0, 0.25)
        for coarsen in (True, False):
            got = oracle_ec(mu1, mu2, c, 1.0, GridSpec(step=0.25, coarsen=coarsen))
            assert got == pytest.approx(ref, abs=1e-12)


def test_coarsening_is_exact():
    rng = np.random.default_rng(4)
    for _ in range(20):
        mu1 = random_measure(rng, max_points=2, grid=0.5, mass_high=1.0, dim=1)
        mu2 = random_measure(rng, max_points=2, grid=0.5, mass_high=1.0, dim=1)
        c = build_cost_matrix(mu1, mu2, EUCLID, GWParams()).values
        fine = oracle_ec(mu1, mu2, c, 1.0, GridSpec(step=1 / 16, coarsen=False))
        coarse = oracle_ec(mu1, mu2, c, 1.0, GridSpec(step=1 / 16, coarsen=True))
        assert fine == pytest.approx(coarse, abs=1e-12)


def test_matches_lp_within_bound():
    rng = np.random.default_rng(5)
    for _ in range(50):
        mu1 = random_measure(rng, max_points=3, grid=0.25)
        mu2 = random_measure(rng, max_points=3, grid=0.25)
        a = float(rng.choice([0.5, 1.0, 2.0]))
        c = build_cost_matrix(mu1, mu2, EUCLID, GWParams(a, 1.0, 2))
        _, lp = solve_submarginal_transport(mu1, mu2, c, a)
        bound = 2 * a * (1 / 64) * (mu1.size + mu2.size)
        assert abs(oracle_ec(mu1, mu2, c, a) - lp.objective) <= bound


def test_step_halving_monotone():
    rng = np.random.default_rng(6)
    for _ in range(10):
        mu1 = random_measure(rng, max_points=2, grid=0.25, dim=1)
        mu2 = random_measure(rng, max_points=2, grid=0.25, dim=1)
        c = build_cost_matrix(mu1, mu2, EUCLID, GWParams()).values
        v64 = oracle_ec(mu1, mu2, c, 1.0, GridSpec(1 / 64))
        v128 = oracle_ec(mu1, mu2, c, 1.0, GridSpec(1 / 128))
        assert v128 <= v64 + 1e-12


def test_size_limits(example_pair):
    mu = DiscreteMeasure(np.arange(4.0).reshape(4, 1), np.ones(4))
    with pytest.raises(OracleSizeError):
        oracle_ec(mu, mu, np.zeros((4, 4)), 1.0)
    mu1, mu2 = example_pair
    with pytest.raises(OracleSizeError):
        oracle_ec(mu1, mu2, [[0.0]], 1.0, GridSpec(step=1e-4, coarsen=False, max_states=1000))


def test_off_grid_masses_warn():
    mu1 = DiscreteMeasure([[0.0]], [0.3])
    mu2 = DiscreteMeasure([[0.0]], [0.5])
    with pytest.warns(RuntimeWarning):
        val = oracle_ec(mu1, mu2, [[0.0]], 1.0, GridSpec(step=0.25))
    assert val == pytest.approx(0.25)  # 0.3 snaps to 0.25


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec(step=0.0)


def test_barycenter_example(example_pair):
    prob = BarycenterProblem(example_pair, [0.5, 0.5])
    value, best = oracle_barycenter(prob)
    assert value == pytest.approx(1.0, abs=1e-12)
    expected = np.arange(64, 193) / 64
    assert np.allclose(best[:, 0], expected)


def test_barycenter_identical_inputs():
    mu = DiscreteMeasure([[0.0]], [1.25])
    prob = BarycenterProblem((mu, mu), [0.5, 0.5])
    value, best = oracle_barycenter(prob)
    assert value == 0.0 and best.tolist() == [[1.25]]


def test_barycenter_far_deltas():
    mu1, mu2 = DiscreteMeasure([[0.0]], [1.0]), DiscreteMeasure([[3.0]], [1.0])
    prob = BarycenterProblem((mu1, mu2), [0.5, 0.5], GWParams(100.0, 1.0, 2))
    value, best = oracle_barycenter(prob, GridSpec(step=1 / 16))
    assert value == pytest.approx(4.5)
    assert np.allclose(best.sum(axis=1), 1.0)


def test_barycenter_matches_lp():
    rng = np.random.default_rng(7)
    for _ in range(15):
        k = int(rng.integers(2, 4))
        inputs = tuple(DiscreteMeasure(rng.choice([0.0, 1.0, 2.0], (n, 1), replace=False),
                                       rng.integers(1, 9, n) / 4)
                       for n in rng.integers(1, 3, k))
        w = np.full(k, 1.0 / k)
        w[-1] = 1.0 - w[:-1].sum()
        a = float(rng.choice([0.5, 1.0, 2.0]))
        prob = BarycenterProblem(inputs, w, GWParams(a, 1.0, 2), support=[[0.0], [1.0]])
        sol = solve_barycenter(prob)
        value, _ = oracle_barycenter(prob, GridSpec(step=1 / 16))
        cmax = max(c.max() for c in prob.input_costs)
        assert abs(value - sol.primal_value) <= (2 * a * k + cmax) / 16
        assert value >= sol.primal_value - 1e-9


def test_barycenter_size_limits(example_pair):
    prob = BarycenterProblem(example_pair, [0.5, 0.5], support=[[0.0], [1.0], [2.0], [3.0]])
    with pytest.raises(OracleSizeError):
        oracle_barycenter(prob)
