"""Upper bounds and exact benchmarks: hindsight optimum, DLP, single-class optimum."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np
from scipy import stats

from .arrivals import ArrivalPath, sample_path
from .errors import ParameterOutOfRange
from .lp import LpProblem, solve_bounded_lp
from .model import Instance

Z95 = 1.959963984540054
TAIL_CUTOFF = 1e-12


class Hindsight(NamedTuple):
    value: float
    z: np.ndarray


def hindsight_optimum(inst: Instance, path: ArrivalPath) -> Hindsight:
    """Offline LP optimum given the realized arrival counts of ``path``.

    The allocation ``z`` is continuous, exactly as in the LP relaxation.
    """
    counts = path.counts.astype(float)
    if counts.size != inst.n_classes:
        raise ValueError(f"path has {counts.size} classes, instance has {inst.n_classes}")
    sol = solve_bounded_lp(LpProblem(inst.revenues, inst.bom, inst.capacity, counts))
    return Hindsight(sol.objective_value, sol.x_star)


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    n: int

    @property
    def ci95(self) -> tuple:
        return (self.mean - Z95 * self.stderr, self.mean + Z95 * self.stderr)


def mean_and_se(values) -> Estimate:
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        raise ParameterOutOfRange("need at least two samples for a standard error")
    return Estimate(float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size)), int(v.size))


def estimate_v_ho(inst: Instance, seeds: Iterable[int]) -> Estimate:
    """Monte Carlo estimate of the expected hindsight optimum with a normal 95% CI."""
    values = [hindsight_optimum(inst, sample_path(inst, s)).value for s in seeds]
    return mean_and_se(values)


def single_class_exact_optimum(lam: float, r: float, C: float, T: float) -> float:
    """``r * E[min(N, C)]`` with ``N ~ Poisson(lam * T)``.

    This is the optimal expected revenue of a single class on a single
    resource with unit consumption (admit everyone while capacity lasts).
    The pmf sum is truncated where the Poisson upper tail drops below 1e-12.
    """
    if not (lam > 0 and r > 0 and C >= 0 and T >= 0) or math.isnan(C):
        raise ParameterOutOfRange(f"need lam>0, r>0, C>=0, T>=0; got lam={lam}, r={r}, C={C}, T={T}")
    mu = lam * T
    if mu == 0 or C == 0:
        return 0.0
    kmax = int(stats.poisson.isf(TAIL_CUTOFF, mu)) + 1
    top = kmax if math.isinf(C) else min(math.floor(C), kmax)
    k = np.arange(top + 1)
    pmf = stats.poisson.pmf(k, mu)
    expected = math.fsum(k * pmf)
    if not math.isinf(C) and top == math.floor(C):
        expected += C * float(stats.poisson.sf(top, mu))
    return r * expected
