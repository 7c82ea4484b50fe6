"""Dense two-phase revised simplex with Bland's anti-cycling rule."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FEAS_TOL = 1e-9
GAP_TOL = 1e-7

_SENSES = {"<=": -1, "L": -1, "<": -1, ">=": 1, "G": 1, ">": 1, "=": 0, "==": 0, "E": 0}


@dataclass
class LpSolution:
    """Result of a linear program ``min c @ x``.

    ``duals[k]`` is the price of constraint ``k``: the derivative of the optimal
    value with respect to its right-hand side, so ``>=`` rows have nonnegative
    and ``<=`` rows nonpositive prices.
    """

    objective: float
    primal: np.ndarray
    duals: np.ndarray
    status: str
    iterations: int
    reduced_costs: np.ndarray | None = field(default=None, repr=False)
    basis: np.ndarray | None = field(default=None, repr=False)
    dual_objective: float = float("nan")
    primal_residual: float = float("nan")
    slackness_residual: float = float("nan")

    @property
    def optimal(self):
        return self.status == "optimal"

    @property
    def duality_gap(self):
        return abs(self.objective - self.dual_objective)


def _parse_senses(senses, m):
    if senses is None:
        return np.full(m, -1)
    if isinstance(senses, str):
        senses = [senses] * m
    try:
        out = np.array([_SENSES[s] for s in senses])
    except KeyError as exc:
        raise ValueError(f"unknown constraint sense {exc.args[0]!r}") from None
    if len(out) != m:
        raise ValueError("one sense per constraint row is required")
    return out


class _Revised:
    """Explicit-inverse revised simplex over ``A x = b, x >= 0``."""

    refactor_every = 64

    def __init__(self, A, b, basis):
        self.A = A
        self.b = b
        self.basis = np.array(basis)
        self.iterations = 0
        self._refactor()

    def _refactor(self):
        self.Binv = np.linalg.inv(self.A[:, self.basis])
        self._since = 0

    def values(self):
        return self.Binv @ self.b

    def prices(self, cost):
        return cost[self.basis] @ self.Binv

    def pivot(self, row, col, w):
        pivot_row = self.Binv[row] / w[row]
        self.Binv -= np.outer(w, pivot_row)
        self.Binv[row] = pivot_row
        self.basis[row] = col
        self._since += 1
        if self._since >= self.refactor_every:
            self._refactor()

    def run(self, cost, allowed, max_iter):
        """Minimize ``cost @ x``. Returns ``"optimal"`` or ``"unbounded"``."""
        scale = 1.0 + np.abs(cost).max()
        opt_tol = 1e-10 * scale
        while True:
            if self.iterations >= max_iter:
                raise RuntimeError(f"simplex did not converge in {max_iter} iterations")
            y = self.prices(cost)
            d = cost - y @ self.A
            nonbasic = allowed.copy()
            nonbasic[self.basis] = False
            cand = np.nonzero(nonbasic & (d < -opt_tol))[0]
            if len(cand) == 0:
                return "optimal"
            col = cand[0]  # Bland: lowest index
            w = self.Binv @ self.A[:, col]
            w[np.abs(w) < 1e-13] = 0.0
            rows = np.nonzero(w > 1e-11)[0]
            if len(rows) == 0:
                return "unbounded"
            x = np.maximum(self.values(), 0.0)
            ratios = x[rows] / w[rows]
            theta = ratios.min()
            ties = rows[ratios <= theta + 1e-12 * (1.0 + theta)]
            row = ties[np.argmin(self.basis[ties])]  # Bland: lowest basic index leaves
            self.pivot(row, col, w)
            self.iterations += 1


def solve_dense_lp(c, A=None, senses=None, rhs=None, lb=None, max_iter=None):
    """Solve ``min c @ x`` s.t. ``A[k] @ x (senses[k]) rhs[k]`` and ``x >= lb``.

    Parameters
    ----------
    c : array-like, shape (n,)
        Objective coefficients.
    A : array-like or sparse matrix, shape (m, n), optional
        Constraint matrix. Anything with a ``toarray`` method is densified.
    senses : sequence of {"<=", ">=", "="} or a single string, optional
        Sense of every row; defaults to ``"<="``.
    rhs : array-like, shape (m,)
        Right-hand sides.
    lb : array-like, shape (n,), optional
        Finite lower bounds, default 0.

    Returns
    -------
    LpSolution
        Status is ``"optimal"``, ``"infeasible"`` or ``"unbounded"``. Dual
        prices and residual diagnostics are filled for optimal solves.
    """
    c = np.asarray(c, dtype=float).reshape(-1)
    n = len(c)
    if A is None:
        A = np.zeros((0, n))
    elif hasattr(A, "toarray"):
        A = A.toarray()
    A = np.asarray(A, dtype=float).reshape(-1, n)
    m = A.shape[0]
    rhs = np.zeros(m) if rhs is None else np.asarray(rhs, dtype=float).reshape(-1)
    lb = np.zeros(n) if lb is None else np.asarray(lb, dtype=float).reshape(-1)
    if len(rhs) != m or len(lb) != n:
        raise ValueError("rhs/lb length mismatch")
    if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A))
            and np.all(np.isfinite(rhs)) and np.all(np.isfinite(lb))):
        raise ValueError("LP coefficients must be finite")
    sense = _parse_senses(senses, m)

    b = rhs - A @ lb
    ineq = np.nonzero(sense != 0)[0]
    slack = np.zeros((m, len(ineq)))
    slack[ineq, np.arange(len(ineq))] = -sense[ineq]
    flip = np.where(b < 0, -1.0, 1.0)
    std = np.hstack([A, slack]) * flip[:, None]
    b = b * flip

    # a slack with +1 in its (possibly flipped) row is a ready-made basic column
    basis = np.full(m, -1)
    for k, row in enumerate(ineq):
        if std[row, n + k] > 0:
            basis[row] = n + k
    need = np.nonzero(basis < 0)[0]
    n_core = n + len(ineq)
    art = np.zeros((m, len(need)))
    art[need, np.arange(len(need))] = 1.0
    basis[need] = n_core + np.arange(len(need))
    full = np.hstack([std, art])
    n_full = full.shape[1]
    if max_iter is None:
        max_iter = 50 * (m + n_full) + 1000

    solver = _Revised(full, b, basis)
    is_art = np.zeros(n_full, dtype=bool)
    is_art[n_core:] = True

    if len(need):
        phase1 = is_art.astype(float)
        solver.run(phase1, np.ones(n_full, dtype=bool), max_iter)
        infeas = float(phase1[solver.basis] @ solver.values())
        if infeas > FEAS_TOL * (1.0 + np.abs(b).max()):
            return LpSolution(np.nan, np.full(n, np.nan), np.full(m, np.nan),
                              "infeasible", solver.iterations)
        for row in range(m):
            if not is_art[solver.basis[row]]:
                continue
            tableau_row = solver.Binv[row] @ full
            nonbasic = ~is_art
            nonbasic[solver.basis] = False
            cols = np.nonzero(nonbasic & (np.abs(tableau_row) > 1e-9))[0]
            if len(cols):
                w = solver.Binv @ full[:, cols[0]]
                solver.pivot(row, cols[0], w)
        # artificials left in the basis sit on redundant rows and stay at zero

    cost = np.concatenate([c, np.zeros(n_full - n)])
    status = solver.run(cost, ~is_art, max_iter)
    if status == "unbounded":
        return LpSolution(-np.inf, np.full(n, np.nan), np.full(m, np.nan),
                          "unbounded", solver.iterations)

    xs = np.zeros(n_full)
    xs[solver.basis] = solver.values()
    x = np.maximum(xs[:n], 0.0) + lb
    y = solver.prices(cost) * flip
    reduced = c - A.T @ y
    objective = float(c @ x)
    dual_objective = float(y @ rhs + reduced @ lb)

    act = A @ x
    viol = np.where(sense < 0, act - rhs, np.where(sense > 0, rhs - act, np.abs(act - rhs)))
    primal_res = float(max(viol.max(initial=0.0), (lb - x).max(initial=0.0)))
    slack_res = float(max(np.abs(y * (act - rhs)).max(initial=0.0),
                          np.abs(reduced * (x - lb)).max(initial=0.0)))
    return LpSolution(objective, x, y, "optimal", solver.iterations, reduced,
                      solver.basis.copy(), dual_objective, primal_res, slack_res)
