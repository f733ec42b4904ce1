"""Poisson arrival sample paths and the seeding scheme for common random numbers.

Seeds are mixed with :class:`numpy.random.SeedSequence`:

* class ``j`` arrivals of a path use ``SeedSequence([path_seed, 0, j])``;
* thinning uniforms of policy ``policy_id`` use ``SeedSequence([path_seed, 1, policy_id])``;
* the harness derives ``path_seed`` from ``(base_seed, sweep_index, path_index)``.

Each stream drives its own PCG64 generator, so a path is a pure function of
``(rates, horizon, path_seed)`` and every policy sees the same arrivals.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple

import numpy as np

from .errors import InstanceFormatError, ParameterOutOfRange, WindowOutOfRange
from .model import Instance

ARRIVAL_STREAM = 0
THINNING_STREAM = 1


def _check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ParameterOutOfRange(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def derive_seed(*keys: int) -> int:
    """Mix nonnegative integer keys into one 64-bit seed."""
    state = np.random.SeedSequence([int(k) for k in keys]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def _generator(*keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(k) for k in keys])))


def poisson_event_times(rate: float, horizon: float, rng: np.random.Generator) -> np.ndarray:
    """Event times of a rate-``rate`` Poisson process on ``[0, horizon]``.

    Exponential gaps are accumulated until the running sum exceeds the horizon.
    """
    if horizon <= 0:
        return np.empty(0)
    mean = rate * horizon
    chunk = int(mean + 6.0 * math.sqrt(mean) + 16)
    scale = 1.0 / rate
    times = np.cumsum(rng.exponential(scale, chunk))
    parts = [times]
    last = times[-1]
    while last <= horizon:
        more = last + np.cumsum(rng.exponential(scale, chunk))
        parts.append(more)
        last = more[-1]
    times = np.concatenate(parts) if len(parts) > 1 else times
    return times[: np.searchsorted(times, horizon, side="right")]


class MergedEvent(NamedTuple):
    time: float
    class_j: int


class MergedStream(NamedTuple):
    times: np.ndarray
    classes: np.ndarray

    def __len__(self):
        return self.times.size

    def __iter__(self):
        return (MergedEvent(float(t), int(j)) for t, j in zip(self.times, self.classes))


@dataclass(frozen=True, eq=False)
class ArrivalPath:
    """One realized arrival path: sorted event times per class on ``[0, horizon]``."""

    times: tuple
    horizon: float
    path_seed: int = 0

    def __post_init__(self):
        frozen = []
        for t in self.times:
            arr = np.array(t, dtype=float, copy=True)
            if arr.ndim != 1:
                raise ParameterOutOfRange("per-class event times must be 1-d")
            arr.setflags(write=False)
            frozen.append(arr)
        object.__setattr__(self, "times", tuple(frozen))

    @property
    def n_classes(self) -> int:
        return len(self.times)

    @property
    def counts(self) -> np.ndarray:
        return np.array([t.size for t in self.times], dtype=np.int64)

    @cached_property
    def merged(self) -> MergedStream:
        return merge_events(self)

    def __eq__(self, other):
        if not isinstance(other, ArrivalPath):
            return NotImplemented
        return (self.horizon == other.horizon and self.n_classes == other.n_classes
                and all(np.array_equal(a, b) for a, b in zip(self.times, other.times)))

    __hash__ = None


def sample_arrival_times(rates, horizon: float, seed: int) -> tuple:
    seed = _check_seed(seed)
    return tuple(
        poisson_event_times(float(rate), float(horizon), _generator(seed, ARRIVAL_STREAM, j))
        for j, rate in enumerate(rates)
    )


def sample_path(inst: Instance, seed: int) -> ArrivalPath:
    """Independent Poisson arrivals for every class of ``inst``; deterministic in ``seed``."""
    return ArrivalPath(sample_arrival_times(inst.rates, inst.horizon, seed), inst.horizon, _check_seed(seed))


def thinning_uniforms(path_seed: int, policy_id: int, size: int) -> np.ndarray:
    """Uniform draws on [0, 1) for policy ``policy_id``'s accept/reject coin flips."""
    return _generator(_check_seed(path_seed), THINNING_STREAM, int(policy_id)).random(size)


def count_in_window(path: ArrivalPath, j: int, t1: float, t2: float) -> int:
    """Number of class-``j`` arrivals in ``(t1, t2]``."""
    if not 0 <= t1 <= t2 <= path.horizon:
        raise WindowOutOfRange(f"need 0 <= t1 <= t2 <= {path.horizon}, got ({t1}, {t2})")
    times = path.times[j]
    return int(np.searchsorted(times, t2, side="right") - np.searchsorted(times, t1, side="right"))


def merge_events(path: ArrivalPath) -> MergedStream:
    """All arrivals sorted by time; simultaneous events ordered by class index."""
    if not path.times:
        return MergedStream(np.empty(0), np.empty(0, dtype=np.int64))
    times = np.concatenate(path.times)
    classes = np.concatenate([np.full(t.size, j, dtype=np.int64) for j, t in enumerate(path.times)])
    order = np.lexsort((classes, times))
    times, classes = times[order], classes[order]
    times.setflags(write=False)
    classes.setflags(write=False)
    return MergedStream(times, classes)


def dump_path_jsonl(path: ArrivalPath, fp) -> None:
    for ev in path.merged:
        fp.write(json.dumps({"time": ev.time, "class": ev.class_j}) + "\n")


def load_path_jsonl(lines: Iterable[str], n_classes: int, horizon: float, path_seed: int = 0) -> ArrivalPath:
    per_class = [[] for _ in range(n_classes)]
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            t, j = float(rec["time"]), int(rec["class"])
        except (ValueError, KeyError, TypeError) as exc:
            raise InstanceFormatError(f"line {lineno}", f"expected {{\"time\": t, \"class\": j}}: {exc}") from exc
        if not 0 <= j < n_classes:
            raise InstanceFormatError(f"line {lineno}", f"class {j} out of range for n={n_classes}")
        if not 0 <= t <= horizon:
            raise InstanceFormatError(f"line {lineno}", f"time {t} outside [0, {horizon}]")
        per_class[j].append(t)
    return ArrivalPath(tuple(np.sort(np.array(ts, dtype=float)) for ts in per_class), horizon, path_seed)
