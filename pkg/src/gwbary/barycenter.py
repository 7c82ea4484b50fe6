"""Generalized Wasserstein barycenters on a fixed finite support.

The primal problem minimizes ``sum_i lambda_i W^{a,b}_2(mu, mu_i)^2`` over
measures ``mu`` carried by a finite set ``K``. It is solved as one joint LP
in the barycenter masses and the ``k`` sub-marginal plans. The dual problem
maximizes ``sum_i <Sbar_{lambda_i} f_i, mu_i>`` over potentials ``f_i`` on
``K`` with ``f_i <= lambda_i a`` and ``sum_i f_i = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .distance import gw_distance
from .measure import (DiscreteMeasure, GroundMetric, GWParams, ValidationError,
                      normalize_measure)
from .simplex import LpSolution, solve_dense_lp
from .transport import TransportPlan

SUM_TOL = 1e-9
CERT_TOL = 1e-6


class CertificateError(RuntimeError):
    """A duality certificate fell outside its tolerance band (a solver bug)."""


class InfeasibleDual(ValueError):
    """Dual potentials violate ``sum f_i = 0`` or ``f_i <= lambda_i a``."""


@dataclass(frozen=True)
class BarycenterProblem:
    inputs: tuple
    weights: np.ndarray
    params: GWParams = GWParams(1.0, 1.0, 2.0)
    metric: GroundMetric = GroundMetric()
    support: np.ndarray | None = None

    def __post_init__(self):
        inputs = tuple(self.inputs)
        if len(inputs) < 2:
            raise ValidationError("a barycenter needs at least 2 input measures", "inputs")
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if len(weights) != len(inputs):
            raise ValidationError(
                f"got {len(weights)} weights for {len(inputs)} measures", "weights")
        if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
            raise ValidationError("weights must be positive", "weights")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValidationError(f"weights sum to {weights.sum()!r}, not 1", "weights")
        if self.params.p != 2:
            raise ValidationError("barycenters are defined for p = 2", "p")
        dims = {mu.dim for mu in inputs if mu.size}
        if len(dims) > 1:
            raise ValidationError(f"input measures mix dimensions {sorted(dims)}", "points")
        if self.support is None:
            dim = dims.pop() if dims else 1
            pts = np.vstack([mu.points.reshape(-1, dim) for mu in inputs])
            union = normalize_measure(DiscreteMeasure(pts, np.ones(len(pts))))
            support = union.points
        else:
            support = np.asarray(self.support, dtype=float)
            if support.ndim == 1:
                support = support.reshape(-1, 1)
        if len(support) == 0:
            raise ValidationError("barycenter support must be nonempty", "support")
        support = support.copy()
        support.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "support", support)

    @property
    def k(self):
        return len(self.inputs)

    @property
    def n_support(self):
        return len(self.support)

    def _sq_cost(self, x, y):
        b = self.params.b
        return (b * b) * self.metric.pairwise(x, y, squared=True)

    @cached_property
    def support_cost(self):
        """``b^2 d^2`` on ``K x K``."""
        return self._sq_cost(self.support, self.support)

    @cached_property
    def input_costs(self):
        """``b^2 d^2`` between ``K`` (rows) and each input support (columns)."""
        return tuple(self._sq_cost(self.support, mu.points) for mu in self.inputs)

    @cached_property
    def diameter(self):
        return float(np.sqrt(self.metric.pairwise(self.support, self.support,
                                                  squared=True).max()))


@dataclass(frozen=True)
class BarycenterSolution:
    bary: DiscreteMeasure
    plans: tuple
    primal_value: float
    dual_fs: np.ndarray
    dual_value: float
    gap: float
    lp: LpSolution = field(repr=False, compare=False)


# -- S transforms -----------------------------------------------------------

def _s_apply(cost, f, lam):
    """``min_y (lam * cost[x, y] - f[..., y])`` for every row ``x`` of ``cost``."""
    f = np.asarray(f, dtype=float)
    return (lam * cost - f[..., None, :]).min(axis=-1)


def s_transform(f, lam, params, metric, support):
    """``S_lam f(x) = min_{y in K} (lam b^2 d(x, y)^2 - f(y))`` for ``x`` in ``K``."""
    K = np.asarray(support, dtype=float).reshape(len(support), -1)
    cost = (params.b ** 2) * metric.pairwise(K, K, squared=True)
    return _s_apply(cost, f, lam)


def s_bar(f, lam, params, metric, support):
    """``min(S_lam f, lam a)``."""
    return np.minimum(s_transform(f, lam, params, metric, support), lam * params.a)


def check_dual_feasible(fs, prob, tol=SUM_TOL):
    fs = np.asarray(fs, dtype=float)
    if fs.shape[-2:] != (prob.k, prob.n_support):
        raise InfeasibleDual(f"expected potentials of shape {(prob.k, prob.n_support)}")
    resid = np.abs(fs.sum(axis=-2)).max()
    if resid > tol:
        raise InfeasibleDual(f"sum of potentials is {resid:.3g} away from 0")
    excess = (fs - (prob.weights * prob.params.a)[:, None]).max()
    if excess > tol:
        raise InfeasibleDual(f"a potential exceeds lambda_i a by {excess:.3g}")


def _dual_terms(fs, prob):
    a = prob.params.a
    total = 0.0
    for i, mu in enumerate(prob.inputs):
        lam = prob.weights[i]
        sf = np.minimum(_s_apply(prob.input_costs[i].T, fs[..., i, :], lam), lam * a)
        total = total + sf @ mu.masses
    return total


def dual_objective(fs, prob):
    """``sum_i sum_{x in supp mu_i} Sbar_{lambda_i} f_i(x) mu_i(x)``.

    ``fs`` has shape ``(k, |K|)``, or ``(draws, k, |K|)`` for a batch, in which
    case an array of values is returned.
    """
    fs = np.asarray(fs, dtype=float)
    check_dual_feasible(fs, prob)
    val = _dual_terms(fs, prob)
    return float(val) if fs.ndim == 2 else np.asarray(val)


def tighten_dual(fs, prob):
    """Replace ``f_i`` by ``S(S f_i)`` for ``i < k`` and rebalance ``f_k``.

    The output stays feasible and its dual value does not decrease.
    """
    fs = np.array(fs, dtype=float)
    out = np.empty_like(fs)
    C = prob.support_cost
    for i in range(prob.k - 1):
        lam = prob.weights[i]
        out[..., i, :] = _s_apply(C, _s_apply(C, fs[..., i, :], lam), lam)
    out[..., -1, :] = -out[..., :-1, :].sum(axis=-2)
    return out


def random_feasible_duals(prob, rng, size):
    """``size`` random dual-feasible potential tuples, shape ``(size, k, |K|)``.

    Each ``f_i`` starts uniform on ``[-lambda_i (a + b^2 D^2), lambda_i a]``;
    a positive sum is removed proportionally to ``lambda_i`` and a negative one
    is spread over the headroom ``lambda_i a - f_i``.
    """
    lam = prob.weights[:, None]
    a = prob.params.a
    top = lam * a
    low = -lam * (a + prob.params.b ** 2 * prob.diameter ** 2)
    g = low + rng.random((size, prob.k, prob.n_support)) * (top - low)
    r = g.sum(axis=1, keepdims=True)
    head = top - g
    down = g - lam * r
    up = g - r * head / head.sum(axis=1, keepdims=True)
    fs = np.where(r > 0, down, up)
    fs[:, -1, :] = -fs[:, :-1, :].sum(axis=1)
    return np.minimum(fs, top)


# -- primal LP --------------------------------------------------------------

def _layout(prob):
    nK = prob.n_support
    sizes = [nK * mu.size for mu in prob.inputs]
    offsets = nK + np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(int)
    return nK, sizes, offsets


def _barycenter_lp(prob):
    """``(c, A, rhs, constant)`` with all rows of the form ``A x <= rhs``."""
    a = prob.params.a
    nK, sizes, offsets = _layout(prob)
    nvar = nK + sum(sizes)
    c = np.zeros(nvar)
    c[:nK] = a * prob.weights.sum()
    rows, rhs = [], []
    for i, mu in enumerate(prob.inputs):
        lam, n_i, off = prob.weights[i], mu.size, offsets[i]
        c[off:off + nK * n_i] = (lam * (prob.input_costs[i] - 2 * a)).reshape(-1)
        block = np.zeros((nK, nvar))
        block[:, :nK] = -np.eye(nK)
        block[:, off:off + nK * n_i] = np.kron(np.eye(nK), np.ones((1, n_i)))
        rows.append(block)
        rhs.append(np.zeros(nK))
        block = np.zeros((n_i, nvar))
        block[:, off:off + nK * n_i] = np.kron(np.ones((1, nK)), np.eye(n_i))
        rows.append(block)
        rhs.append(mu.masses)
    const = a * float(sum(lam * mu.total_mass for lam, mu in zip(prob.weights, prob.inputs)))
    return c, np.vstack(rows), np.concatenate(rhs), const


def extract_bary_duals(lp, prob, max_rounds=10):
    """Dual certificate ``(f_1, ..., f_k)`` from the joint LP prices.

    With ``u_i(x) >= 0`` the price of ``rowsum(gamma_i)(x) <= mu(x)``, the
    candidates ``f_i = lambda_i a - u_i`` satisfy ``sum_i f_i >= 0``; the
    excess is removed in proportion to ``lambda_i`` and the result tightened.
    """
    if not lp.optimal:
        raise CertificateError(f"LP status {lp.status}")
    nK = prob.n_support
    lam = prob.weights[:, None]
    a = prob.params.a
    u = np.empty((prob.k, nK))
    pos = 0
    for i, mu in enumerate(prob.inputs):
        u[i] = -lp.duals[pos:pos + nK]
        pos += nK + mu.size
    fs = lam * a - u
    fs = fs - lam * fs.sum(axis=0)
    fs = np.minimum(fs, lam * a)
    fs[-1] = -fs[:-1].sum(axis=0)
    primal = lp.objective
    best = None
    for _ in range(max_rounds):
        fs = tighten_dual(fs, prob)
        value = dual_objective(fs, prob)
        if best is None or value > best[1]:
            best = (fs, value)
        if 0 <= primal - value <= CERT_TOL * (1 + abs(primal)) or abs(primal - value) <= 1e-12:
            return fs
    raise CertificateError(
        f"barycenter duality gap {primal - best[1]:.3g} exceeds the tolerance band")


def solve_barycenter(prob):
    """Solve the fixed-support barycenter problem and certify it by duality."""
    c, A, rhs, const = _barycenter_lp(prob)
    lp = solve_dense_lp(c, A, "<=", rhs)
    if lp.status == "unbounded":
        raise RuntimeError("barycenter LP reported unbounded, which is impossible for a > 0")
    if not lp.optimal:
        raise RuntimeError(f"barycenter LP status {lp.status}")
    lp.objective += const
    lp.dual_objective += const
    nK, sizes, offsets = _layout(prob)
    x = lp.primal
    masses = x[:nK]
    plans = tuple(TransportPlan(x[off:off + size].reshape(nK, mu.size))
                  for off, size, mu in zip(offsets, sizes, prob.inputs))
    fs = extract_bary_duals(lp, prob)
    dual_value = dual_objective(fs, prob)
    return BarycenterSolution(
        bary=DiscreteMeasure(prob.support, masses),
        plans=plans,
        primal_value=float(lp.objective),
        dual_fs=fs,
        dual_value=dual_value,
        gap=float(lp.objective - dual_value),
        lp=lp,
    )


def mass_range_at_optimum(prob, sol, slack=1e-9):
    """Smallest and largest barycenter mass among (slack-)optimal solutions."""
    c, A, rhs, const = _barycenter_lp(prob)
    nK = prob.n_support
    A = np.vstack([A, c])
    rhs = np.append(rhs, sol.primal_value - const + slack)
    total = np.zeros(len(c))
    total[:nK] = 1.0
    lo = solve_dense_lp(total, A, "<=", rhs)
    hi = solve_dense_lp(-total, A, "<=", rhs)
    if not (lo.optimal and hi.optimal):
        raise RuntimeError("mass range LPs failed")
    return float(lo.objective), float(-hi.objective)


def barycenter_objective(mu, prob):
    """``sum_i lambda_i W^{a,b}_2(mu, mu_i)^2`` for any measure ``mu``."""
    return float(sum(lam * gw_distance(mu, nu, prob.metric, prob.params).ec_value
                     for lam, nu in zip(prob.weights, prob.inputs)))


# -- diagnostics ------------------------------------------------------------

@dataclass(frozen=True)
class LipschitzReport:
    constant: float
    """``2 lambda b^2 D``."""
    excess_s: float
    excess_ss: float
    """Largest ``|g(x) - g(x')| - L d(x, x')`` for ``g = S f`` and ``g = S S f``."""

    tol = 1e-9

    @property
    def passed(self):
        return self.excess_s <= self.tol and self.excess_ss <= self.tol


def lipschitz_check(f, lam, prob):
    """Check the ``2 lambda b^2 D`` Lipschitz bound for ``S f`` and ``S S f`` on ``K``."""
    f = np.asarray(f, dtype=float)
    if np.any(f > lam * prob.params.a + SUM_TOL):
        raise InfeasibleDual("f must satisfy f <= lambda a")
    C = prob.support_cost
    d = prob.metric.pairwise(prob.support, prob.support)
    L = 2 * lam * prob.params.b ** 2 * prob.diameter
    g = _s_apply(C, f, lam)
    h = _s_apply(C, g, lam)

    def excess(v):
        return float((np.abs(v[:, None] - v[None, :]) - L * d).max())

    return LipschitzReport(L, excess(g), excess(h))


@dataclass(frozen=True)
class ConsistencyReport:
    base_value: float
    values: np.ndarray
    residuals: np.ndarray
    """``|value_n - base_value|``."""
    excess: np.ndarray
    """Optimality gap of the n-th barycenter in the unperturbed problem."""
    bary_distances: np.ndarray
    """``W^{a,b}_2`` between the n-th barycenter and the unperturbed one."""
    bounds: np.ndarray
    """``a * (noise / n) * sum_i lambda_i |mu_i|``, a bound on the residuals."""

    @property
    def final_residual(self):
        return float(self.residuals[-1]) if len(self.residuals) else 0.0

    @property
    def within_bounds(self):
        return bool(np.all(self.residuals <= self.bounds + 1e-9))


def perturb_masses(mu, scale, rng):
    factors = rng.uniform(1.0 - scale, 1.0 + scale, size=mu.size)
    return DiscreteMeasure(mu.points, mu.masses * np.maximum(factors, 0.0))


def consistency_harness(prob, noise, trials, seed=0):
    """Solve the barycenter problem for inputs with shrinking mass noise.

    Trial ``n`` multiplies every input mass by an independent factor drawn
    uniformly from ``[1 - noise/n, 1 + noise/n]``; supports stay fixed.
    """
    if noise < 0:
        raise ValidationError("noise must be >= 0", "noise")
    rng = np.random.default_rng(seed)
    base = solve_barycenter(prob)
    total = float(sum(lam * mu.total_mass for lam, mu in zip(prob.weights, prob.inputs)))
    values, excess, dists, bounds = [], [], [], []
    for n in range(1, trials + 1):
        scale = noise / n
        inputs = tuple(perturb_masses(mu, scale, rng) for mu in prob.inputs)
        pert = BarycenterProblem(inputs, prob.weights, prob.params, prob.metric, prob.support)
        sol = solve_barycenter(pert)
        values.append(sol.primal_value)
        excess.append(barycenter_objective(sol.bary, prob) - base.primal_value)
        dists.append(gw_distance(sol.bary, base.bary, prob.metric, prob.params).distance)
        bounds.append(prob.params.a * scale * total)
    values = np.array(values)
    return ConsistencyReport(
        base_value=base.primal_value,
        values=values,
        residuals=np.abs(values - base.primal_value),
        excess=np.array(excess),
        bary_distances=np.array(dists),
        bounds=np.array(bounds),
    )
