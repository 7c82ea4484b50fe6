"""Sub-marginal transport via the dummy-node reduction."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .measure import ValidationError, as_cost_array
from .simplex import FEAS_TOL, LpSolution, solve_dense_lp


@dataclass(frozen=True)
class TransportPlan:
    """Nonnegative plan ``entries[i, j]`` between two supports."""

    entries: np.ndarray

    def __post_init__(self):
        ent = np.array(self.entries, dtype=float)
        ent.setflags(write=False)
        object.__setattr__(self, "entries", ent)

    @property
    def row_marginal(self):
        return self.entries.sum(axis=1)

    @property
    def col_marginal(self):
        return self.entries.sum(axis=0)

    @property
    def mass(self):
        return float(self.entries.sum())

    def is_submarginal(self, m1, m2, tol=FEAS_TOL):
        return bool(np.all(self.entries >= 0)
                    and np.all(self.row_marginal <= np.asarray(m1) + tol)
                    and np.all(self.col_marginal <= np.asarray(m2) + tol))


def _lp_from_transport(cost, supply, demand, flow, u, v, it, status):
    if status != kernels.OPTIMAL:
        raise RuntimeError(f"transportation simplex stopped after {it} iterations")
    objective = float((cost * flow).sum())
    dual_objective = float(u @ supply + v @ demand)
    reduced = cost - u[:, None] - v[None, :]
    viol = max(np.abs(flow.sum(axis=1) - supply).max(initial=0.0),
               np.abs(flow.sum(axis=0) - demand).max(initial=0.0),
               (-flow).max(initial=0.0))
    return LpSolution(
        objective=objective,
        primal=flow.reshape(-1),
        duals=np.concatenate([u, v]),
        status="optimal",
        iterations=int(it),
        reduced_costs=reduced.reshape(-1),
        dual_objective=dual_objective,
        primal_residual=float(viol),
        slackness_residual=float(np.abs(reduced * flow).max(initial=0.0)),
    )


def solve_balanced_transport(cost, supply, demand):
    """Classical transport between equal-mass marginals. Returns ``(plan, lp)``."""
    c = as_cost_array(cost)
    supply = np.asarray(supply, dtype=float)
    demand = np.asarray(demand, dtype=float)
    if c.shape != (len(supply), len(demand)):
        raise ValidationError(f"cost shape {c.shape} does not match marginals", "cost")
    if not np.isclose(supply.sum(), demand.sum(), rtol=1e-12, atol=1e-12):
        raise ValidationError("balanced transport needs equal total masses", "masses")
    if c.size == 0:
        return TransportPlan(np.zeros(c.shape)), LpSolution(
            0.0, np.zeros(0), np.zeros(c.shape[0] + c.shape[1]), "optimal", 0,
            dual_objective=0.0, primal_residual=0.0, slackness_residual=0.0)
    res = kernels.transport_simplex(c, supply, demand)
    lp = _lp_from_transport(c, supply, demand, *res)
    return TransportPlan(res[0]), lp


def extended_problem(m1, m2, cost, a):
    """Dummy-node balanced problem ``(cost, supply, demand)``.

    A dummy source with supply ``|mu2|`` and a dummy sink with demand ``|mu1|``
    are appended; moving mass to or from a dummy costs ``a`` per unit and the
    dummy-to-dummy arc is free.
    """
    n1, n2 = len(m1), len(m2)
    ext = np.zeros((n1 + 1, n2 + 1))
    ext[:n1, :n2] = cost
    ext[:n1, n2] = a
    ext[n1, :n2] = a
    total1, total2 = float(m1.sum()), float(m2.sum())
    supply = np.append(m1, total2)
    demand = np.append(m2, total1)
    # absorb summation-order rounding so both sides balance exactly
    demand[-1] += supply.sum() - demand.sum()
    return ext, supply, demand


def solve_submarginal_transport(mu1, mu2, cost, a):
    """Minimize ``a(|mu1|-|g|) + a(|mu2|-|g|) + <c, g>`` over sub-marginal plans.

    Returns ``(plan, lp)``. ``lp`` describes the extended balanced problem:
    its primal is the flattened ``(n1+1, n2+1)`` flow and its duals are the
    row then column potentials, shifted so the dummy source has price 0.
    ``lp.objective`` equals the optimal value.
    """
    m1 = np.asarray(mu1.masses, dtype=float)
    m2 = np.asarray(mu2.masses, dtype=float)
    c = as_cost_array(cost)
    if c.shape != (len(m1), len(m2)):
        raise ValidationError(
            f"cost shape {c.shape} does not match supports ({len(m1)}, {len(m2)})", "cost")
    if not a > 0:
        raise ValidationError("a must be > 0", "a")
    ext, supply, demand = extended_problem(m1, m2, c, a)
    flow, u, v, it, status = kernels.transport_simplex(ext, supply, demand)
    shift = u[-1]
    u = u - shift
    v = v + shift
    lp = _lp_from_transport(ext, supply, demand, flow, u, v, it, status)
    return TransportPlan(flow[:-1, :-1]), lp


def submarginal_dense_lp(mu1, mu2, cost, a):
    """The same sub-marginal problem stated directly for ``solve_dense_lp``."""
    m1 = np.asarray(mu1.masses, dtype=float)
    m2 = np.asarray(mu2.masses, dtype=float)
    c = as_cost_array(cost)
    n1, n2 = c.shape
    rows = np.kron(np.eye(n1), np.ones((1, n2)))
    cols = np.kron(np.ones((1, n1)), np.eye(n2))
    A = np.vstack([rows, cols])
    lp = solve_dense_lp((c - 2 * a).reshape(-1), A, "<=", np.concatenate([m1, m2]))
    lp.objective += a * (m1.sum() + m2.sum())
    lp.dual_objective += a * (m1.sum() + m2.sum())
    return TransportPlan(lp.primal.reshape(n1, n2)), lp
