"""Paired Monte Carlo regret experiments.

For every sweep value the harness builds an instance, draws ``num_paths``
arrival paths, runs every policy and the hindsight LP on each path, and
aggregates per-path regrets ``V_HO - V_policy``. Path ``i`` of sweep value
``s`` uses ``derive_seed(base_seed, s, i)``; the policies draw their coin
flips from streams keyed by ``policy_id``, so all of them face the same
arrivals. Work is split into fixed-size chunks of paths and the results are
written back by index, so the table does not depend on the worker count.
"""
from __future__ import annotations

import io
import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .arrivals import derive_seed, sample_path
from .errors import ExperimentError, NonpositiveRegret, NrmError, SpecError
from .lp import dlp_value
from .model import Instance, validate_instance
from .oracle import Estimate, hindsight_optimum, mean_and_se
from .policies import PolicyKind, PolicySpec, run_policy

AXES = ("horizon", "capacity_rate")
CHUNK = 25
CSV_HEADER = "sweep,policy,mean_regret,stderr,n_paths,v_dlp,v_ho_hat"


@dataclass(frozen=True, eq=False)
class ExperimentSpec:
    """A sweep over horizons or capacity rates.

    On the ``horizon`` axis the template's capacity per unit time ``C/T`` is
    kept fixed. On the ``capacity_rate`` axis each value ``b`` sets every
    resource's capacity to ``b * T`` at the template horizon.
    """

    template: Instance
    axis: str
    values: tuple
    policies: tuple
    num_paths: int = 1000
    base_seed: int = 0
    name: str = ""

    def __post_init__(self):
        if self.axis not in AXES:
            raise SpecError(f"sweep axis must be one of {AXES}, got {self.axis!r}")
        values = tuple(float(v) for v in self.values)
        if not values or any(not (v > 0 and math.isfinite(v)) for v in values):
            raise SpecError("sweep values must be a nonempty list of positive numbers")
        policies = tuple(p if isinstance(p, PolicySpec) else PolicySpec(PolicyKind.parse(p)) for p in self.policies)
        if not policies:
            raise SpecError("policy set must be nonempty")
        if len({p.kind for p in policies}) != len(policies):
            raise SpecError("each policy kind may appear only once")
        if int(self.num_paths) < 2:
            raise SpecError("num_paths must be >= 2")
        if not 0 <= int(self.base_seed) < 2**64:
            raise SpecError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "policies", policies)
        object.__setattr__(self, "num_paths", int(self.num_paths))
        object.__setattr__(self, "base_seed", int(self.base_seed))

    def instance_at(self, index: int) -> Instance:
        v = self.values[index]
        if self.axis == "horizon":
            return self.template.with_horizon(v)
        return self.template.with_capacity_rate(v)

    def path_seed(self, sweep_index: int, path_index: int) -> int:
        return derive_seed(self.base_seed, sweep_index, path_index)

    def with_overrides(self, **kw) -> "ExperimentSpec":
        fields = dict(template=self.template, axis=self.axis, values=self.values, policies=self.policies,
                      num_paths=self.num_paths, base_seed=self.base_seed, name=self.name)
        fields.update(kw)
        return ExperimentSpec(**fields)

    @classmethod
    def from_dict(cls, raw: dict, name: str = "") -> "ExperimentSpec":
        if not isinstance(raw, dict):
            raise SpecError("experiment spec must be a JSON object")
        for key in ("instance", "sweep", "policies", "paths", "seed"):
            if key not in raw:
                raise SpecError(f"{key}: missing required key")
        sweep = raw["sweep"]
        if not isinstance(sweep, dict) or "axis" not in sweep or "values" not in sweep:
            raise SpecError('sweep: expected {"axis": ..., "values": [...]}')
        policies = []
        for p in raw["policies"]:
            if isinstance(p, dict):
                policies.append(PolicySpec(PolicyKind.parse(p.get("kind")), p.get("policy_id")))
            else:
                policies.append(PolicySpec(PolicyKind.parse(p)))
        try:
            values = [float(v) for v in sweep["values"]]
        except (TypeError, ValueError) as exc:
            raise SpecError(f"sweep.values: {exc}") from exc
        return cls(validate_instance(raw["instance"]), sweep["axis"], tuple(values), tuple(policies),
                   raw["paths"], raw["seed"], raw.get("name", name))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "instance": self.template.to_dict(),
            "sweep": {"axis": self.axis, "values": list(self.values)},
            "policies": [{"kind": p.name, "policy_id": p.policy_id} for p in self.policies],
            "paths": self.num_paths,
            "seed": self.base_seed,
        }


def load_spec(path) -> ExperimentSpec:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON: {exc}") from exc
    return ExperimentSpec.from_dict(raw, name=path.stem)


class RegretRow(NamedTuple):
    sweep: float
    policy: str
    mean_regret: float
    stderr: float
    n_paths: int
    v_dlp: float
    v_ho_hat: float


@dataclass(eq=False)
class RegretTable:
    """Per-path revenues and the regret statistics derived from them.

    ``hindsight[s, i]`` is the hindsight value of path ``i`` at sweep index
    ``s``; ``revenue[s, p, i]`` the revenue of policy ``p`` on that path.
    """

    axis: str
    values: tuple
    policies: tuple
    v_dlp: np.ndarray
    hindsight: np.ndarray
    revenue: np.ndarray
    spec: ExperimentSpec | None = field(default=None, repr=False)

    def _policy_index(self, policy) -> int:
        name = PolicyKind.parse(policy).value
        try:
            return self.policies.index(name)
        except ValueError:
            raise KeyError(f"policy {name} not in table {self.policies}") from None

    def per_path_regret(self, policy, sweep_index: int) -> np.ndarray:
        return self.hindsight[sweep_index] - self.revenue[sweep_index, self._policy_index(policy)]

    def regret(self, policy, sweep_index: int) -> Estimate:
        return mean_and_se(self.per_path_regret(policy, sweep_index))

    def mean_regrets(self, policy) -> np.ndarray:
        return np.array([self.per_path_regret(policy, s).mean() for s in range(len(self.values))])

    def paired_difference(self, policy_a, policy_b, sweep_index: int) -> Estimate:
        """Regret of ``policy_a`` minus regret of ``policy_b``, paired over paths."""
        a = self.revenue[sweep_index, self._policy_index(policy_a)]
        b = self.revenue[sweep_index, self._policy_index(policy_b)]
        return mean_and_se(b - a)

    def v_ho_hat(self, sweep_index: int) -> Estimate:
        return mean_and_se(self.hindsight[sweep_index])

    def rows(self) -> list:
        out = []
        for s, v in enumerate(self.values):
            ho = float(self.hindsight[s].mean())
            for policy in self.policies:
                est = self.regret(policy, s)
                out.append(RegretRow(v, policy, est.mean, est.stderr, est.n, float(self.v_dlp[s]), ho))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for row in self.rows():
            buf.write(",".join([repr(row.sweep), row.policy, repr(row.mean_regret), repr(row.stderr),
                                str(row.n_paths), repr(row.v_dlp), repr(row.v_ho_hat)]) + "\n")
        return buf.getvalue()


def export_csv(table: RegretTable, destination) -> None:
    """Write ``table`` as CSV; the bytes depend only on the table contents."""
    data = table.to_csv()
    if hasattr(destination, "write"):
        destination.write(data)
    else:
        with open(destination, "w", newline="") as fh:
            fh.write(data)


def _run_chunk(spec: ExperimentSpec, sweep_index: int, start: int, stop: int):
    inst = spec.instance_at(sweep_index)
    ho = np.empty(stop - start)
    rev = np.empty((len(spec.policies), stop - start))
    for i in range(start, stop):
        seed = spec.path_seed(sweep_index, i)
        try:
            path = sample_path(inst, seed)
            ho[i - start] = hindsight_optimum(inst, path).value
            for p, policy in enumerate(spec.policies):
                rev[p, i - start] = run_policy(policy, inst, path).revenue
        except NrmError as exc:
            raise ExperimentError(
                f"sweep {spec.axis}={spec.values[sweep_index]!r}, path {i} (seed {seed}): {exc}") from exc
    return sweep_index, start, ho, rev


def default_workers() -> int:
    raw = os.environ.get("NRM_LAB_WORKERS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise SpecError(f"NRM_LAB_WORKERS must be an integer, got {raw!r}") from None


def run_experiment(spec: ExperimentSpec, workers: int | None = None) -> RegretTable:
    """Run every (sweep value, path) work item and aggregate paired regrets."""
    workers = default_workers() if workers is None else max(1, int(workers))
    S, P, N = len(spec.values), len(spec.policies), spec.num_paths
    v_dlp = np.empty(S)
    for s in range(S):
        try:
            v_dlp[s] = dlp_value(spec.instance_at(s))
        except NrmError as exc:
            raise ExperimentError(f"sweep {spec.axis}={spec.values[s]!r}: {exc}") from exc
    hindsight = np.empty((S, N))
    revenue = np.empty((S, P, N))
    jobs = [(s, a, min(a + CHUNK, N)) for s in range(S) for a in range(0, N, CHUNK)]

    def store(result):
        s, a, ho, rev = result
        hindsight[s, a:a + ho.size] = ho
        revenue[s, :, a:a + ho.size] = rev

    if workers == 1 or len(jobs) == 1:
        for job in jobs:
            store(_run_chunk(spec, *job))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_chunk, spec, *job) for job in jobs]
            for fut in futures:
                store(fut.result())
    return RegretTable(spec.axis, spec.values, tuple(p.name for p in spec.policies),
                       v_dlp, hindsight, revenue, spec)


class SlopeFit(NamedTuple):
    slope: float
    intercept: float
    r2: float
    excluded: tuple


def fit_loglog_slope(table, policy=None) -> SlopeFit:
    """Least-squares slope of log(mean regret) against log(sweep value).

    ``table`` is a :class:`RegretTable` (with ``policy``) or a pair of
    sequences ``(sweep_values, mean_regrets)``. Points with nonpositive mean
    regret are dropped with a :class:`NonpositiveRegret` warning and listed
    in ``excluded``. At least four usable points are required.
    """
    if isinstance(table, RegretTable):
        xs, ys = np.array(table.values), table.mean_regrets(policy)
    else:
        xs, ys = (np.asarray(a, dtype=float) for a in table)
    keep = ys > 0
    excluded = tuple(float(v) for v in xs[~keep])
    if excluded:
        warnings.warn(f"dropping sweep points with nonpositive regret: {excluded}", NonpositiveRegret, stacklevel=2)
    if keep.sum() < 4:
        raise ValueError(f"need at least 4 positive-regret sweep points, have {int(keep.sum())}")
    lx, ly = np.log(xs[keep]), np.log(ys[keep])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return SlopeFit(float(slope), float(intercept), r2, excluded)


def summarize(table: RegretTable) -> str:
    lines = []
    for policy in table.policies:
        means = table.mean_regrets(policy)
        line = (f"{policy:>4}: regret {means[0]:.3f} at {table.axis}={table.values[0]:g}, "
                f"{means[-1]:.3f} at {table.axis}={table.values[-1]:g}")
        if table.axis == "horizon" and len(table.values) >= 4:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", NonpositiveRegret)
                try:
                    fit = fit_loglog_slope(table, policy)
                    line += f", log-log slope {fit.slope:.3f} (R^2 {fit.r2:.3f})"
                except ValueError:
                    line += ", log-log slope n/a"
        lines.append(line)
    return "\n".join(lines)
