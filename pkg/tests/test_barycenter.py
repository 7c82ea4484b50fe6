import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gwbary import (BarycenterProblem, DiscreteMeasure, GroundMetric, GWParams, InfeasibleDual,
                    ValidationError, consistency_harness, dual_objective, extract_bary_duals,
                    gw_distance, lipschitz_check, mass_range_at_optimum, s_bar, s_transform,
                    solve_barycenter, tighten_dual)
from gwbary.barycenter import barycenter_objective, random_feasible_duals

from conftest import EUCLID


def random_problem(rng, k=None, max_points=4, grid=None, a=None, b=None):
    k = int(k or rng.choice([2, 3]))
    inputs = []
    for _ in range(k):
        n = int(rng.integers(1, max_points + 1))
        pts = rng.integers(0, 4, (n, 2)).astype(float)
        masses = rng.uniform(0.1, 2.0, n) if grid is None else rng.integers(1, 9, n) * grid
        inputs.append(DiscreteMeasure(pts, masses))
    from gwbary import normalize_measure
    inputs = [normalize_measure(m) for m in inputs]
    w = rng.dirichlet(np.ones(k))
    w[-1] = 1.0 - w[:-1].sum()
    params = GWParams(float(a or rng.choice([0.5, 1.0, 2.0])), float(b or rng.choice([0.5, 1.0])), 2)
    return BarycenterProblem(tuple(inputs), w, params, EUCLID)


@pytest.fixture
def example_problem(example_pair):
    return BarycenterProblem(example_pair, [0.5, 0.5])


def test_example(example_problem):
    sol = solve_barycenter(example_problem)
    assert sol.primal_value == pytest.approx(1.0, abs=1e-9)
    assert sol.dual_value == pytest.approx(1.0, abs=1e-9)
    assert 1.0 - 1e-9 <= sol.bary.total_mass <= 3.0 + 1e-9
    lo, hi = mass_range_at_optimum(example_problem, sol)
    assert lo == pytest.approx(1.0, abs=1e-7) and hi == pytest.approx(3.0, abs=1e-7)


def test_identical_inputs():
    mu = DiscreteMeasure([[0.0, 0.0], [1.0, 1.0]], [1.0, 0.5])
    prob = BarycenterProblem((mu, mu, mu), [0.2, 0.3, 0.5])
    sol = solve_barycenter(prob)
    assert sol.primal_value == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(sol.bary.masses, mu.masses)
    # the zero potentials certify the value, as do the extracted ones
    assert dual_objective(np.zeros((3, 2)), prob) == 0.0
    assert sol.dual_value == pytest.approx(0.0, abs=1e-12)
    lo, hi = mass_range_at_optimum(prob, sol)
    assert lo == pytest.approx(1.5, abs=1e-7) and hi == pytest.approx(1.5, abs=1e-7)


def test_far_apart_deltas_with_large_a():
    mu1 = DiscreteMeasure([[0.0]], [1.0])
    mu2 = DiscreteMeasure([[3.0]], [1.0])
    prob = BarycenterProblem((mu1, mu2), [0.5, 0.5], GWParams(100.0, 1.0, 2))
    sol = solve_barycenter(prob)
    # unit mass at either endpoint: half of 9
    assert sol.primal_value == pytest.approx(4.5, abs=1e-9)
    assert sol.bary.total_mass == pytest.approx(1.0)


def test_removal_beats_transport():
    ms = [DiscreteMeasure([[x]], [m]) for x, m in ((0.0, 1.0), (5.0, 2.0), (10.0, 0.5))]
    prob = BarycenterProblem(tuple(ms), [0.3, 0.4, 0.3], GWParams(0.5, 1.0, 2))
    sol = solve_barycenter(prob)
    assert sol.primal_value == pytest.approx(0.5 * (0.3 * 1.0 + 0.4 * 2.0 + 0.3 * 0.5))
    lo, hi = mass_range_at_optimum(prob, sol)
    assert lo == pytest.approx(0.0, abs=1e-7) and hi == pytest.approx(0.0, abs=1e-7)


@pytest.mark.parametrize("kw,field", [
    (dict(weights=[1.0]), "inputs"),
    (dict(weights=[0.5, 0.6]), "weights"),
    (dict(weights=[1.5, -0.5]), "weights"),
    (dict(weights=[0.5, 0.5], params=GWParams(1, 1, 1)), "p"),
])
def test_problem_validation(example_pair, kw, field):
    inputs = example_pair[:1] if kw["weights"] == [1.0] else example_pair
    with pytest.raises(ValidationError) as exc:
        BarycenterProblem(inputs, **kw)
    assert exc.value.field == field


def test_custom_support(example_pair):
    prob = BarycenterProblem(example_pair, [0.5, 0.5], support=[[0.0], [1.0]])
    sol = solve_barycenter(prob)
    assert sol.primal_value == pytest.approx(1.0)
    assert sol.bary.masses[1] == pytest.approx(0.0)


def test_explicit_metric_barycenter():
    metric = GroundMetric.explicit([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    mu1 = DiscreteMeasure([[0.0]], [1.0])
    mu2 = DiscreteMeasure([[2.0]], [1.0])
    prob = BarycenterProblem((mu1, mu2), [0.5, 0.5], GWParams(10.0, 1.0, 2), metric,
                             support=[[0.0], [1.0], [2.0]])
    sol = solve_barycenter(prob)
    assert sol.primal_value == pytest.approx(1.0)  # unit mass at the middle node
    assert sol.bary.masses[1] == pytest.approx(1.0)


def test_s_transform_examples():
    K = np.array([[0.0], [3.0]])
    params = GWParams(1.0, 1.0, 2)
    assert s_transform(np.zeros(2), 0.5, params, EUCLID, K).tolist() == [0.0, 0.0]
    lam = 0.5
    assert np.allclose(s_transform(np.full(2, lam), lam, params, EUCLID, K), -lam)
    assert np.allclose(s_bar(np.full(2, lam), lam, params, EUCLID, K), -lam)
    one = np.array([[2.0]])
    for t in (-3.0, 0.2, 4.0):
        assert s_transform([t], lam, params, EUCLID, one).tolist() == [-t]
        assert s_bar([t], lam, params, EUCLID, one).tolist() == [min(-t, lam)]


def test_dual_objective_examples(example_problem):
    assert dual_objective(np.zeros((2, 1)), example_problem) == 0.0
    for t in np.linspace(-0.5, 0.5, 11):
        val = dual_objective(np.array([[t], [-t]]), example_problem)
        assert val == pytest.approx(2 * t, abs=1e-15)


def test_dual_objective_infeasible(example_problem):
    with pytest.raises(InfeasibleDual):
        dual_objective(np.array([[0.1], [0.0]]), example_problem)
    with pytest.raises(InfeasibleDual):
        dual_objective(np.array([[0.7], [-0.7]]), example_problem)
    with pytest.raises(InfeasibleDual):
        dual_objective(np.zeros((3, 1)), example_problem)


def test_tighten_examples(example_problem):
    fs = np.zeros((2, 1))
    out = tighten_dual(fs, example_problem)
    assert dual_objective(out, example_problem) >= 0.0
    again = tighten_dual(out, example_problem)
    assert np.allclose(again, out, atol=1e-12)


def test_extract_duals_from_lp(example_problem):
    sol = solve_barycenter(example_problem)
    fs = extract_bary_duals(sol.lp, example_problem)
    assert dual_objective(fs, example_problem) == pytest.approx(1.0, abs=1e-9)
    assert np.abs(fs.sum(axis=0)).max() <= 1e-9
    assert np.all(fs <= example_problem.weights[:, None] * example_problem.params.a + 1e-9)


def test_lipschitz_examples():
    mu = DiscreteMeasure([[0.0], [2.0]], [1.0, 1.0])
    prob = BarycenterProblem((mu, mu), [0.5, 0.5])
    rep = lipschitz_check(np.zeros(2), 0.5, prob)
    assert rep.passed and rep.constant == pytest.approx(2.0)
    rep = lipschitz_check(np.array([0.5, -0.5]), 0.5, prob)
    assert rep.passed
    with pytest.raises(InfeasibleDual):
        lipschitz_check(np.array([1.0, 0.0]), 0.5, prob)


def test_consistency_noise_free(example_problem):
    rep = consistency_harness(example_problem, 0.0, 5, seed=3)
    assert np.all(rep.values == rep.base_value)
    assert rep.final_residual == 0.0


def test_consistency_is_deterministic(example_problem):
    r1 = consistency_harness(example_problem, 0.5, 6, seed=11)
    r2 = consistency_harness(example_problem, 0.5, 6, seed=11)
    assert np.array_equal(r1.values, r2.values)


def test_consistency_lipschitz_bound():
    rng = np.random.default_rng(8)
    for _ in range(5):
        prob = random_problem(rng, max_points=3)
        rep = consistency_harness(prob, 0.2, 12, seed=int(rng.integers(1000)))
        assert rep.within_bounds
        assert np.all(rep.excess >= -1e-9)


@given(st.integers(0, 100_000))
def test_value_bounds(seed):
    rng = np.random.default_rng(seed)
    prob = random_problem(rng)
    sol = solve_barycenter(prob)
    a = prob.params.a
    total = sum(lam * mu.total_mass for lam, mu in zip(prob.weights, prob.inputs))
    assert sol.primal_value <= a * total + 1e-9
    for mu in prob.inputs:
        assert sol.primal_value <= barycenter_objective(mu, prob) + 1e-9
    # the reported barycenter attains the value
    assert barycenter_objective(sol.bary, prob) == pytest.approx(sol.primal_value, abs=1e-9)
    lo, hi = mass_range_at_optimum(prob, sol)
    assert lo - 1e-7 <= sol.bary.total_mass <= hi + 1e-7
    # plans are sub-marginal and consistent with the barycenter
    for plan, mu in zip(sol.plans, prob.inputs):
        assert plan.is_submarginal(sol.bary.masses, mu.masses)


@given(st.integers(0, 100_000))
def test_strong_and_weak_duality(seed):
    rng = np.random.default_rng(seed)
    prob = random_problem(rng)
    sol = solve_barycenter(prob)
    assert 0 <= sol.gap + 1e-12 and sol.gap <= 1e-6 * (1 + sol.primal_value)
    fs = random_feasible_duals(prob, rng, 200)
    assert np.all(dual_objective(fs, prob) <= sol.primal_value + 1e-9)
    # near-optimal draws: shrink the certificate towards zero and perturb
    near = sol.dual_fs[None] * rng.uniform(0.9, 1.0, (200, 1, 1))
    near -= prob.weights[None, :, None] * rng.uniform(0, 1e-3, (200, 1, prob.n_support))
    near[:, -1] = -near[:, :-1].sum(axis=1)
    near = np.minimum(near, (prob.weights * prob.params.a)[None, :, None])
    near[:, 0] = -near[:, 1:].sum(axis=1)
    ok = np.all(near <= (prob.weights * prob.params.a)[None, :, None] + 1e-9, axis=(1, 2))
    if ok.any():
        assert np.all(dual_objective(near[ok], prob) <= sol.primal_value + 1e-9)


@given(st.integers(0, 100_000))
def test_tighten_monotone_and_feasible(seed):
    rng = np.random.default_rng(seed)
    prob = random_problem(rng)
    fs = random_feasible_duals(prob, rng, 50)
    out = tighten_dual(fs, prob)
    assert np.all(dual_objective(out, prob) >= dual_objective(fs, prob) - 1e-12)
    assert np.all(out <= (prob.weights * prob.params.a)[None, :, None] + 1e-9)


@given(st.integers(0, 100_000))
def test_per_term_duality(seed):
    """Each term's dual value never exceeds lambda_i times the squared distance."""
    rng = np.random.default_rng(seed)
    prob = random_problem(rng)
    sol = solve_barycenter(prob)
    from gwbary.barycenter import _s_apply
    for i, mu in enumerate(prob.inputs):
        lam = prob.weights[i]
        f = sol.dual_fs[i]
        term = np.minimum(_s_apply(prob.input_costs[i].T, f, lam), lam * prob.params.a) @ mu.masses
        # (f, Sbar f) / lambda_i is a feasible potential pair for the distance LP dual
        ec = gw_distance(sol.bary, mu, EUCLID, prob.params).ec_value
        assert term + (f @ sol.bary.masses) <= lam * ec + 1e-9
