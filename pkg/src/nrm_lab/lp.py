"""Bounded-variable linear programs: maximize r'x s.t. Ax <= beta, 0 <= x <= u.

Every benchmark and every re-solve in this package has this shape. The
solver is a dense primal simplex with explicit upper bounds (Dantzig pricing,
switching to Bland's rule after repeated degenerate pivots; lowest index wins
ties), run by the kernel backend selected in :mod:`nrm_lab._backend`.
"""
from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .errors import DimensionMismatch, NumericalFailure, ParameterOutOfRange, TooLarge
from .model import Instance, capacity_rate

PIVOT_TOL = 1e-9
CLASSIFY_TOL = 1e-7


class SolveStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"  # unreachable: x = 0 is always feasible
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass(frozen=True, eq=False)
class LpProblem:
    objective: np.ndarray
    constraints: np.ndarray
    rhs: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        r = np.array(self.objective, dtype=float)
        A = np.atleast_2d(np.array(self.constraints, dtype=float))
        beta = np.atleast_1d(np.array(self.rhs, dtype=float))
        u = np.atleast_1d(np.array(self.upper, dtype=float))
        if r.ndim != 1 or A.shape != (beta.size, r.size) or u.shape != r.shape:
            raise DimensionMismatch(
                f"inconsistent LP: r{r.shape}, A{A.shape}, beta{beta.shape}, u{u.shape}")
        if np.any(beta < 0) or np.any(u < 0):
            raise ParameterOutOfRange("rhs and upper bounds must be nonnegative")
        if np.any(A < 0):
            raise ParameterOutOfRange("constraint matrix must be nonnegative")
        for name, arr in (("objective", r), ("constraints", A), ("rhs", beta), ("upper", u)):
            if not np.all(np.isfinite(arr)):
                raise ParameterOutOfRange(f"{name} must be finite")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.objective.size

    @property
    def m(self) -> int:
        return self.rhs.size

    def to_json(self) -> str:
        return json.dumps({
            "objective": self.objective.tolist(),
            "constraints": self.constraints.tolist(),
            "rhs": self.rhs.tolist(),
            "upper": self.upper.tolist(),
        })


@dataclass(frozen=True, eq=False)
class LpSolution:
    x_star: np.ndarray
    objective_value: float
    binding_rows: frozenset
    at_bound: tuple
    status: SolveStatus = SolveStatus.OPTIMAL
    iterations: int = 0
    slack: np.ndarray = field(default=None, repr=False)

    def to_json(self) -> str:
        return json.dumps({
            "x_star": self.x_star.tolist(),
            "objective_value": self.objective_value,
            "binding_rows": sorted(self.binding_rows),
            "at_bound": list(self.at_bound),
            "status": self.status.value,
            "iterations": self.iterations,
        })


def _classify(p: LpProblem, x: np.ndarray, tol: float):
    slack = p.rhs - p.constraints @ x
    binding = frozenset(int(i) for i in np.flatnonzero(np.abs(slack) <= tol))
    tags = []
    for xj, uj in zip(x, p.upper):
        if xj <= tol:
            tags.append("lower")
        elif xj >= uj - tol:
            tags.append("upper")
        else:
            tags.append("interior")
    return slack, binding, tuple(tags)


def solve_bounded_lp(p: LpProblem, tol: float = CLASSIFY_TOL, pivot_tol: float = PIVOT_TOL,
                     backend=None) -> LpSolution:
    """Optimal vertex of ``p``.

    ``tol`` classifies binding rows and bound-touching variables;
    ``pivot_tol`` is the simplex's own zero tolerance. The result is a
    deterministic function of the inputs. Raises :class:`NumericalFailure` if
    the iteration guard trips.
    """
    k = kernels if backend is None else backend
    x, status, iters = k.solve_lp(p.objective, p.constraints, p.rhs, p.upper, pivot_tol)
    if status != 0:
        reason = "iteration limit exceeded" if status == 1 else "unbounded ray detected"
        raise NumericalFailure(f"simplex failed: {reason}; problem={p.to_json()}", iters)
    x = np.asarray(x, dtype=float)
    x.setflags(write=False)
    slack, binding, tags = _classify(p, x, tol)
    value = float(p.objective @ x)
    return LpSolution(x, value, binding, tags, SolveStatus.OPTIMAL, iters, slack)


def dlp_problem(inst: Instance) -> LpProblem:
    return LpProblem(inst.revenues, inst.bom, capacity_rate(inst), inst.rates)


def solve_dlp(inst: Instance, tol: float = CLASSIFY_TOL) -> LpSolution:
    """Solve the per-unit-time deterministic LP (rhs ``C/T``, bounds ``lambda``).

    The returned ``objective_value`` is per unit time; use :func:`dlp_value`
    for the horizon total ``T * r'x*``.
    """
    return solve_bounded_lp(dlp_problem(inst), tol)


def dlp_value(inst: Instance, sol: LpSolution | None = None) -> float:
    if sol is None:
        sol = solve_dlp(inst)
    return inst.horizon * sol.objective_value


def enumerate_vertices_oracle(p: LpProblem, tol: float = 1e-9):
    """Best basic feasible point by brute force.

    Tries every choice of ``n`` active constraints among the ``m`` rows and
    the ``2n`` bounds, solves the square system, keeps feasible points and
    returns ``(x, value)`` of the best. Limited to ``n <= 6, m <= 4``.
    """
    n, m = p.n, p.m
    if n > 6 or m > 4:
        raise TooLarge(f"vertex enumeration limited to n<=6, m<=4 (got n={n}, m={m})")
    eye = np.eye(n)
    # rows of G x = h for each candidate active constraint
    G = np.vstack([p.constraints, eye, eye])
    h = np.concatenate([p.rhs, np.zeros(n), p.upper])
    scale = 1.0 + np.abs(h).max()
    best_x, best_val = np.zeros(n), 0.0
    for active in itertools.combinations(range(m + 2 * n), n):
        M = G[list(active)]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        x = np.linalg.solve(M, h[list(active)])
        if np.any(x < -tol * scale) or np.any(x > p.upper + tol * scale):
            continue
        if np.any(p.constraints @ x > p.rhs + tol * scale):
            continue
        val = float(p.objective @ x)
        if val > best_val + 1e-12:
            best_x, best_val = x, val
    return best_x, best_val
