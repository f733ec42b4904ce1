"""Admission-control heuristics driven by re-solving the deterministic LP.

All five policies share one event loop (see ``_pykernels.simulate``) and
differ only in their re-solve schedule and thresholding:

====  =============================  ==================  ===========================
kind  re-solve times                 rhs at a re-solve   thresholds
====  =============================  ==================  ===========================
SPA   0                              C / T               none
FR    0, 1, ..., ceil(T) - 1         C(t) / (T - t)      none
FRT   0, 1, ..., ceil(T) - 1         C(t) / (T - t)      (T - t) ** -1/4
IR    0 = t*_0 < t*_1 < ... < t*_K   C(t*_u) / tau_u     none
IRT   0 = t*_0 < t*_1 < ... < t*_K   C(t*_u) / tau_u     tau_u ** -1/4, except u = K
====  =============================  ==================  ===========================

with ``tau_u = T ** (5/6) ** u``, ``t*_u = T - tau_u`` and
``K = ceil(log log T / log 1.2)``. Thresholded probabilities are 0 when
``x_j < lambda_j * theta``, 1 when ``x_j > lambda_j * (1 - theta)`` and
``x_j / lambda_j`` otherwise. Every arrival consumes exactly one thinning
uniform, whether or not it is accepted.
"""
from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .arrivals import ArrivalPath, thinning_uniforms
from .errors import HorizonTooShort, NumericalFailure, SpecError
from .lp import PIVOT_TOL
from .model import Instance

NO_THRESHOLD = -1.0


class PolicyKind(str, enum.Enum):
    SPA = "SPA"
    FR = "FR"
    IR = "IR"
    IRT = "IRT"
    FRT = "FRT"

    @classmethod
    def parse(cls, name) -> "PolicyKind":
        if isinstance(name, PolicyKind):
            return name
        try:
            return cls(str(name).strip().upper())
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise SpecError(f"unknown policy {name!r}; valid names: {valid}") from None


DEFAULT_POLICY_IDS = {kind: i for i, kind in enumerate(PolicyKind)}


@dataclass(frozen=True)
class PolicySpec:
    kind: PolicyKind
    policy_id: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", PolicyKind.parse(self.kind))
        if self.policy_id is None:
            object.__setattr__(self, "policy_id", DEFAULT_POLICY_IDS[self.kind])
        elif int(self.policy_id) < 0:
            raise SpecError("policy_id must be nonnegative")
        else:
            object.__setattr__(self, "policy_id", int(self.policy_id))

    @property
    def name(self) -> str:
        return self.kind.value


@dataclass(frozen=True)
class ResolveSchedule:
    """Epoch structure of the infrequent re-solving policies.

    ``starts[u]`` is the re-solve time of epoch ``u`` (``starts[0] == 0``),
    ``taus[u]`` the remaining horizon at that time and ``thresholds[u]``
    (defined for ``u < K``) its rounding threshold. ``boundaries`` appends
    the horizon itself as the end of the last epoch.
    """

    horizon: float
    K: int
    starts: tuple
    taus: tuple
    thresholds: tuple

    @property
    def boundaries(self) -> tuple:
        return self.starts + (self.horizon,)


def acceptance_probability(x: float, lam: float, threshold: float = NO_THRESHOLD) -> float:
    """Acceptance probability derived from an LP value ``x`` for a class of rate ``lam``."""
    if threshold < 0:
        return x / lam
    if x < lam * threshold:
        return 0.0
    if x > lam * (1.0 - threshold):
        return 1.0
    return x / lam


def compute_schedule(T: float) -> ResolveSchedule:
    T = float(T)
    if not T > math.e:
        raise HorizonTooShort(f"the infrequent schedule needs T > e, got T={T}")
    K = math.ceil(math.log(math.log(T)) / math.log(6 / 5))
    taus = tuple(T ** ((5 / 6) ** u) for u in range(K + 1))
    starts = (0.0,) + tuple(T - tau for tau in taus[1:])
    thresholds = tuple(tau ** -0.25 for tau in taus[:K])
    return ResolveSchedule(T, K, starts, taus, thresholds)


def policy_epochs(kind: PolicyKind, T: float):
    """``(starts, horizons, thresholds)`` arrays consumed by the event loop."""
    kind = PolicyKind.parse(kind)
    if kind is PolicyKind.SPA:
        return np.array([0.0]), np.array([T]), np.array([NO_THRESHOLD])
    if kind in (PolicyKind.FR, PolicyKind.FRT):
        if T < 1:
            raise HorizonTooShort(f"{kind.value} needs T >= 1, got T={T}")
        starts = np.arange(math.ceil(T), dtype=float)
        horizons = T - starts
        if kind is PolicyKind.FR:
            return starts, horizons, np.full(starts.size, NO_THRESHOLD)
        return starts, horizons, horizons ** -0.25
    sched = compute_schedule(T)
    starts = np.array(sched.starts)
    horizons = np.array(sched.taus)
    if kind is PolicyKind.IR:
        return starts, horizons, np.full(starts.size, NO_THRESHOLD)
    return starts, horizons, np.array(sched.thresholds + (NO_THRESHOLD,))


@dataclass(frozen=True, eq=False)
class EventTrace:
    times: np.ndarray
    classes: np.ndarray
    decisions: np.ndarray
    probs: np.ndarray
    remaining: np.ndarray  # (events, m): capacity left after each decision

    def to_csv(self) -> str:
        out = io.StringIO()
        m = self.remaining.shape[1]
        out.write(",".join(["time", "class", "decision", "prob"] + [f"remaining_{l}" for l in range(m)]) + "\n")
        for k in range(self.times.size):
            cells = [repr(float(self.times[k])), str(int(self.classes[k])),
                     "accept" if self.decisions[k] else "reject", repr(float(self.probs[k]))]
            cells += [repr(float(c)) for c in self.remaining[k]]
            out.write(",".join(cells) + "\n")
        return out.getvalue()


@dataclass(frozen=True, eq=False)
class RunResult:
    """Outcome of one policy on one path.

    ``epoch_solutions[e]`` is the LP point at the ``e``-th re-solve and
    ``epoch_probs[e]`` the acceptance probabilities derived from it.
    """

    policy: PolicyKind
    revenue: float
    accepted: np.ndarray
    remaining_capacity: np.ndarray
    epoch_starts: np.ndarray
    epoch_rhs_horizons: np.ndarray
    epoch_solutions: np.ndarray
    epoch_probs: np.ndarray
    decisions: np.ndarray = field(repr=False)
    event_probs: np.ndarray = field(repr=False)
    trace: EventTrace | None = field(default=None, repr=False)

    def consumption(self, inst: Instance) -> np.ndarray:
        return inst.bom @ self.accepted


def _uniforms(thinning, path: ArrivalPath, spec: PolicySpec) -> np.ndarray:
    size = len(path.merged)
    if thinning is None:
        return thinning_uniforms(path.path_seed, spec.policy_id, size)
    if isinstance(thinning, np.random.Generator):
        return thinning.random(size)
    u = np.asarray(thinning, dtype=float)
    if u.shape != (size,):
        raise ValueError(f"need {size} thinning uniforms, got shape {u.shape}")
    return u


def run_policy(policy, inst: Instance, path: ArrivalPath, thinning=None, trace: bool = False,
               backend=None, schedule: ResolveSchedule | None = None) -> RunResult:
    """Run ``policy`` (a :class:`PolicySpec` or kind name) on ``path``.

    ``thinning`` supplies the coin flips: ``None`` derives them from
    ``(path.path_seed, policy_id)``, a :class:`numpy.random.Generator` is
    drawn from, and an array is used as-is (one uniform per merged event).
    A precomputed ``schedule`` may be passed for IR and IRT.
    """
    spec = policy if isinstance(policy, PolicySpec) else PolicySpec(PolicyKind.parse(policy))
    if path.n_classes != inst.n_classes:
        raise ValueError(f"path has {path.n_classes} classes, instance has {inst.n_classes}")
    if schedule is not None and spec.kind in (PolicyKind.IR, PolicyKind.IRT):
        if schedule.horizon != inst.horizon:
            raise ValueError(f"schedule built for T={schedule.horizon}, instance has T={inst.horizon}")
        starts, horizons = np.array(schedule.starts), np.array(schedule.taus)
        if spec.kind is PolicyKind.IR:
            thresholds = np.full(starts.size, NO_THRESHOLD)
        else:
            thresholds = np.array(schedule.thresholds + (NO_THRESHOLD,))
    else:
        starts, horizons, thresholds = policy_epochs(spec.kind, inst.horizon)
    events = path.merged
    uniforms = _uniforms(thinning, path, spec)
    k = kernels if backend is None else backend
    z, cap, probs, decisions, epoch_x, epoch_p, status, fail_epoch = k.simulate(
        inst.revenues, inst.bom, inst.capacity, inst.rates, starts, horizons, thresholds,
        events.times, events.classes, uniforms, PIVOT_TOL)
    if status != 0:
        raise NumericalFailure(
            f"{spec.name}: LP re-solve failed at epoch {fail_epoch} (t={starts[fail_epoch]})")
    revenue = float(inst.revenues @ z)
    tr = None
    if trace:
        used = np.cumsum(inst.bom[:, events.classes] * decisions, axis=1).T if len(events) else np.empty((0, inst.n_resources))
        tr = EventTrace(events.times, events.classes, decisions, probs, inst.capacity - used)
    return RunResult(spec.kind, revenue, z, cap, starts, horizons, epoch_x, epoch_p, decisions, probs, tr)


def run_spa(inst, path, thinning=None, **kw) -> RunResult:
    return run_policy(PolicySpec(PolicyKind.SPA), inst, path, thinning, **kw)


def run_fr(inst, path, thinning=None, **kw) -> RunResult:
    return run_policy(PolicySpec(PolicyKind.FR), inst, path, thinning, **kw)


def run_frt(inst, path, thinning=None, **kw) -> RunResult:
    return run_policy(PolicySpec(PolicyKind.FRT), inst, path, thinning, **kw)


def run_ir(inst, path, thinning=None, schedule=None, **kw) -> RunResult:
    return run_policy(PolicySpec(PolicyKind.IR), inst, path, thinning, schedule=schedule, **kw)


def run_irt(inst, path, thinning=None, schedule=None, **kw) -> RunResult:
    return run_policy(PolicySpec(PolicyKind.IRT), inst, path, thinning, schedule=schedule, **kw)
