"""Kantorovich duality for the generalized Wasserstein distance.

Dual pairs ``(phi1, phi2)`` satisfy ``phi1(x) + phi2(y) <= c(x, y)`` and
``phi1, phi2 >= -a``; their value is ``sum_i sum_x I(phi_i(x)) mu_i(x)``
where ``I`` truncates at ``a`` and sends anything below ``-a`` to minus
infinity.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measure import as_cost_array
from .simplex import FEAS_TOL, GAP_TOL


class _NegInfinity:
    """Minus infinity as a value of ``I``; never enters float arithmetic."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NEG_INFINITY"

    def __float__(self):
        return float("-inf")

    def __lt__(self, other):
        return other is not self

    def __le__(self, other):
        return True

    def __gt__(self, other):
        return False

    def __ge__(self, other):
        return other is self


NEG_INFINITY = _NegInfinity()


def truncate_I(phi, a):
    """``inf_{s >= 0} (s phi + a |1 - s|)``: ``a`` above ``a``, ``phi`` on ``[-a, a]``."""
    if phi > a:
        return a
    if phi >= -a:
        return phi
    return NEG_INFINITY


def truncated_objective(phi, masses, a):
    """``sum_x I(phi(x)) mu(x)``; ``NEG_INFINITY`` if a charged point falls below ``-a``."""
    phi = np.asarray(phi, dtype=float)
    masses = np.asarray(masses, dtype=float)
    charged = masses > 0
    if np.any(phi[charged] < -a):
        return NEG_INFINITY
    return float(np.minimum(phi[charged], a) @ masses[charged])


def _add(x, y):
    if x is NEG_INFINITY or y is NEG_INFINITY:
        return NEG_INFINITY
    return x + y


@dataclass(frozen=True)
class DualPotentials:
    """Potential pair on the two supports; ``objective`` is NaN when the masses were not given."""

    phi1: np.ndarray
    phi2: np.ndarray
    objective: float | _NegInfinity

    def max_violation(self, cost):
        """Largest ``phi1(i) + phi2(j) - c(i, j)``."""
        c = as_cost_array(cost)
        if c.size == 0:
            return 0.0
        return float((self.phi1[:, None] + self.phi2[None, :] - c).max())

    def is_feasible(self, cost, a, tol=FEAS_TOL):
        lower = min(self.phi1.min(initial=np.inf), self.phi2.min(initial=np.inf))
        return self.max_violation(cost) <= tol and lower >= -a - tol


def potentials(phi1, phi2, mu1, mu2, a):
    """Bundle a potential pair with its truncated dual value."""
    phi1 = np.asarray(phi1, dtype=float)
    phi2 = np.asarray(phi2, dtype=float)
    obj = _add(truncated_objective(phi1, mu1.masses, a),
               truncated_objective(phi2, mu2.masses, a))
    return DualPotentials(phi1, phi2, obj)


def c_transform(phi, cost):
    """``phi^c(i) = min_j (c(i, j) - phi(j))``; ``+inf`` over an empty support."""
    c = as_cost_array(cost)
    if c.shape[1] == 0:
        return np.full(c.shape[0], np.inf)
    return (c - np.asarray(phi)[None, :]).min(axis=1)


def extract_potentials(lp, cost, a, mu1=None, mu2=None):
    """Raw potentials read from the prices of the dummy-node transport LP.

    With the dummy-source price fixed at 0, ``phi1 = u + v_dummy`` and
    ``phi2 = v``. The pair satisfies ``phi1 + phi2 <= c`` and ``phi <= a``
    but may dip below ``-a``; see ``refine_potentials``.
    """
    if lp.duals is None or not lp.optimal:
        raise ValueError("LP solution carries no dual prices")
    c = as_cost_array(cost)
    n1, n2 = c.shape
    if len(lp.duals) != n1 + n2 + 2:
        raise ValueError("dual vector does not match the extended transport problem")
    u = lp.duals[: n1 + 1]
    v = lp.duals[n1 + 1:]
    shift = u[n1]
    phi1 = u[:n1] - shift + (v[n2] + shift)
    phi2 = v[:n2] + shift
    if mu1 is None or mu2 is None:
        return DualPotentials(phi1, phi2, float("nan"))
    return potentials(phi1, phi2, mu1, mu2, a)


def refine_potentials(raw, cost, a, mu1=None, mu2=None):
    """Two capped c-transform sweeps.

    ``phi1 <- min(phi2^c, a)`` then ``phi2 <- min(phi1^c, a)``. Both outputs are
    at least ``-a`` whenever ``phi2 <= a``, and feasibility is exact.
    """
    if not np.all(np.isfinite(raw.phi2)):
        raise ValueError("phi2 must be finite")
    c = as_cost_array(cost)
    phi1 = np.minimum(c_transform(raw.phi2, c), a)
    phi2 = np.minimum(c_transform(phi1, c.T), a)
    if mu1 is None or mu2 is None:
        return DualPotentials(phi1, phi2, float("nan"))
    return potentials(phi1, phi2, mu1, mu2, a)


@dataclass(frozen=True)
class GapReport:
    primal: float
    dual: float | _NegInfinity
    gap: float
    passed: bool
    weak_duality: bool

    def as_dict(self):
        dual = float(self.dual)
        return {"primal": self.primal, "dual": dual, "gap": self.gap, "pass": self.passed}


#: Floating-point floor below which a negative gap still counts as zero.
WEAK_DUALITY_TOL = 1e-9


def certify_gap(primal, pot, mu1, mu2, a=None):
    """Compare the primal value with the dual value of a feasible pair.

    Passes iff ``-WEAK_DUALITY_TOL <= gap <= 1e-7 (1 + primal)``.
    """
    ec = primal.ec_value
    if a is not None:
        pot = potentials(pot.phi1, pot.phi2, mu1, mu2, a)
    if pot.objective is NEG_INFINITY:
        return GapReport(ec, NEG_INFINITY, float("inf"), False, True)
    gap = ec - pot.objective
    weak = gap >= -WEAK_DUALITY_TOL
    ok = weak and gap <= GAP_TOL * (1.0 + ec)
    return GapReport(ec, pot.objective, gap, bool(ok), bool(weak))


def dual_certificate(result, mu1, mu2, a):
    """Refined potentials for a solved distance and the resulting gap report."""
    raw = extract_potentials(result.lp, result.cost, a, mu1, mu2)
    pot = refine_potentials(raw, result.cost, a, mu1, mu2)
    return pot, certify_gap(result, pot, mu1, mu2)


def random_feasible_potentials(cost, a, rng, size=None, tight=False):
    """Random members of the dual feasible set.

    ``phi2`` is uniform on ``[-a, a]`` and ``phi1`` uniform between ``-a`` and
    ``min(phi2^c, a)``, or equal to that upper limit when ``tight``. With
    ``size`` the draws are stacked along a first axis.
    """
    c = as_cost_array(cost)
    n1, n2 = c.shape
    shape = () if size is None else (size,)
    phi2 = rng.uniform(-a, a, size=shape + (n2,))
    if n2:
        top = np.minimum((c[None] - phi2.reshape(-1, 1, n2)).min(axis=2), a)
    else:
        top = np.full((int(np.prod(shape)), n1), a)
    top = top.reshape(shape + (n1,))
    if tight:
        return top, phi2
    phi1 = -a + rng.random(shape + (n1,)) * (top + a)
    return phi1, phi2
