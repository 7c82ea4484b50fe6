"""Brute-force references for tiny instances.

Everything here enumerates plans whose entries are integer multiples of a mass
unit and evaluates the removal-plus-transport objective directly. No code is
shared with the LP solvers.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .measure import ValidationError


class OracleSizeError(ValueError):
    """The instance is too large for exhaustive enumeration."""


@dataclass(frozen=True)
class GridSpec:
    """Mass grid for the oracle.

    Parameters
    ----------
    step : float
        Grid resolution; every plan entry is a multiple of it.
    max_support : int
        Largest support size (per measure, and for the barycenter support).
    coarsen : bool
        For ``oracle_ec`` only: enumerate on multiples of ``g * step`` where
        ``g`` is the gcd of all masses in grid units. Transport polytopes with
        supplies on that coarser lattice have all their vertices on it, so the
        minimum is unchanged while the state space shrinks by ``g^(n2+1)``.
    max_states : int
        Refuse enumerations with more dynamic-programming states than this.
    """

    step: float = 1.0 / 64
    max_support: int = 3
    coarsen: bool = True
    max_states: int = 50_000_000

    def __post_init__(self):
        if not (self.step > 0 and math.isfinite(self.step)):
            raise ValidationError("grid step must be positive", "grid_step")
        if self.max_support < 1:
            raise ValidationError("max_support must be >= 1", "max_support")


def to_grid_units(masses, step, name="masses"):
    """Masses as integer multiples of ``step``; off-grid values are snapped with a warning."""
    masses = np.asarray(masses, dtype=float)
    units = masses / step
    snapped = np.rint(units)
    off = np.abs(masses - snapped * step) > 1e-12 * (1.0 + np.abs(masses))
    if np.any(off):
        warnings.warn(f"{name} are not multiples of {step!r}; snapping to the grid",
                      RuntimeWarning, stacklevel=3)
    return snapped.astype(np.int64)


def _check_states(col_caps, row_caps, grid):
    n = int(np.prod(np.asarray(col_caps, dtype=float) + 1)) * (int(max(row_caps, default=0)) + 1)
    if n > grid.max_states:
        raise OracleSizeError(f"enumeration needs {n} states, limit is {grid.max_states}")


def oracle_ec(mu1, mu2, cost, a, grid=GridSpec()):
    """Minimum of ``a(|mu1|-|g|) + a(|mu2|-|g|) + <c, g>`` over grid plans ``g``.

    Exhaustive over all sub-marginal plans with entries on the grid, done as
    a dynamic program over column usage so identical partial sums are only
    visited once.
    """
    c = np.asarray(getattr(cost, "values", cost), dtype=float)
    n1, n2 = len(mu1.masses), len(mu2.masses)
    if c.shape != (n1, n2):
        raise ValidationError(f"cost shape {c.shape} does not match supports", "cost")
    if max(n1, n2) > grid.max_support:
        raise OracleSizeError(f"supports {n1}x{n2} exceed the oracle limit {grid.max_support}")
    u1 = to_grid_units(mu1.masses, grid.step, "mu1 masses")
    u2 = to_grid_units(mu2.masses, grid.step, "mu2 masses")
    unit = grid.step
    if grid.coarsen:
        g = math.gcd(*(int(x) for x in np.concatenate([u1, u2])))
        if g > 1:
            u1, u2, unit = u1 // g, u2 // g, unit * g
    total = a * unit * float(u1.sum() + u2.sum())
    if n1 == 0 or n2 == 0:
        return total
    _check_states(u2, u1, grid)
    best = kernels.lattice_min_cost(c - 2.0 * a, u1, u2).min()
    return total + unit * float(best)


def oracle_barycenter(prob, grid=GridSpec(), tie_tol=1e-9):
    """Grid search over barycenter masses on ``K``.

    Returns ``(value, best_masses)`` where ``best_masses`` has one row per
    grid point of ``K``-masses whose objective is within ``tie_tol`` of the
    minimum. Masses per point of ``K`` range over ``[0, max_i |mu_i|]``,
    which contains every optimum because unmatched barycenter mass only
    adds cost.
    """
    nK, k = prob.n_support, prob.k
    if nK > min(grid.max_support, 3) or k > 3:
        raise OracleSizeError(f"|K| = {nK}, k = {k} exceed the oracle limits")
    if any(mu.size > grid.max_support for mu in prob.inputs):
        raise OracleSizeError("an input support exceeds the oracle limit")
    a, b = prob.params.a, prob.params.b
    step = grid.step
    units = [to_grid_units(mu.masses, step, f"masses of input {i}")
             for i, mu in enumerate(prob.inputs)]
    cap = int(max(u.sum() for u in units))
    shape = (cap + 1,) * nK
    q_mass = step * np.indices(shape).sum(axis=0).astype(float)

    J = np.zeros(shape)
    for i, mu in enumerate(prob.inputs):
        lam = prob.weights[i]
        d2 = np.array([[np.sum((np.asarray(x) - np.asarray(y)) ** 2)
                        for x in prob.support] for y in mu.points]) \
            if prob.metric.kind == "euclidean" else \
            prob.metric.pairwise(mu.points, prob.support, squared=True)
        w = b * b * d2 - 2.0 * a  # rows: input points, columns: K
        _check_states([cap] * nK, units[i], grid)
        V = kernels.lattice_min_cost(w, units[i], np.full(nK, cap)).reshape(shape)
        for ax in range(nK):
            V = np.minimum.accumulate(V, axis=ax)
        J += lam * (a * (q_mass + step * units[i].sum()) + step * V)
    value = float(J.min())
    best = np.argwhere(J <= value + tie_tol) * step
    return value, best
