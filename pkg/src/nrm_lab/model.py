"""Problem instances for quantity-based network revenue management.

An :class:`Instance` bundles the horizon length, per-class Poisson arrival
rates and revenues, the bill-of-materials (BOM) matrix and initial resource
capacities. Consumption entries are accepted as arbitrary nonnegative reals;
airline-style seat counts are the integer special case.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, NamedTuple

import numpy as np

from .errors import (
    DimensionMismatch,
    InstanceFormatError,
    NegativeCapacity,
    NegativeConsumption,
    NonpositiveRate,
    NonpositiveRevenue,
    ParameterOutOfRange,
    SolutionInstanceMismatch,
    ZeroColumn,
)

DEGENERACY_TOL = 1e-7

JSON_KEYS = ("horizon", "lambda", "revenue", "bom", "capacity")


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Instance:
    """A validated, immutable NRM instance.

    Attributes
    ----------
    horizon : float
        Length ``T`` of the selling horizon.
    rates : ndarray, shape (n,)
        Poisson arrival rate of each customer class.
    revenues : ndarray, shape (n,)
        Revenue collected per accepted customer of each class.
    bom : ndarray, shape (m, n)
        ``bom[l, j]`` units of resource ``l`` consumed by one class-``j`` customer.
    capacity : ndarray, shape (m,)
        Initial capacity of each resource.
    """

    horizon: float
    rates: np.ndarray
    revenues: np.ndarray
    bom: np.ndarray
    capacity: np.ndarray

    def __post_init__(self):
        try:
            horizon = float(self.horizon)
            rates = _frozen(self.rates)
            revenues = _frozen(self.revenues)
            bom = _frozen(self.bom)
            capacity = _frozen(self.capacity)
        except (TypeError, ValueError) as exc:
            raise DimensionMismatch(f"instance fields must be numeric arrays: {exc}") from exc
        if rates.ndim == 0:
            rates = _frozen(rates.reshape(1))
        if revenues.ndim == 0:
            revenues = _frozen(revenues.reshape(1))
        if capacity.ndim == 0:
            capacity = _frozen(capacity.reshape(1))
        if bom.ndim == 1:
            bom = _frozen(bom.reshape(1, -1))

        if rates.ndim != 1 or rates.size == 0:
            raise DimensionMismatch("lambda must be a nonempty vector")
        n = rates.size
        if revenues.shape != (n,):
            raise DimensionMismatch(f"revenue has shape {revenues.shape}, expected ({n},)")
        if capacity.ndim != 1 or capacity.size == 0:
            raise DimensionMismatch("capacity must be a nonempty vector")
        m = capacity.size
        if bom.shape != (m, n):
            raise DimensionMismatch(f"bom has shape {bom.shape}, expected ({m}, {n})")

        if not (math.isfinite(horizon) and horizon > 0):
            raise ParameterOutOfRange(f"horizon must be a positive finite number, got {horizon!r}")
        for name, arr in (("lambda", rates), ("revenue", revenues), ("bom", bom), ("capacity", capacity)):
            if not np.all(np.isfinite(arr)):
                raise ParameterOutOfRange(f"{name} contains non-finite entries")
        if np.any(rates <= 0):
            raise NonpositiveRate(f"lambda[{int(np.argmax(rates <= 0))}] must be > 0")
        if np.any(revenues <= 0):
            raise NonpositiveRevenue(f"revenue[{int(np.argmax(revenues <= 0))}] must be > 0")
        if np.any(capacity < 0):
            raise NegativeCapacity(f"capacity[{int(np.argmax(capacity < 0))}] must be >= 0")
        if np.any(bom < 0):
            raise NegativeConsumption("bom entries must be >= 0")
        zero_cols = np.flatnonzero(~np.any(bom > 0, axis=0))
        if zero_cols.size:
            raise ZeroColumn(f"bom column {int(zero_cols[0])} consumes no resource")

        object.__setattr__(self, "horizon", horizon)
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "revenues", revenues)
        object.__setattr__(self, "bom", bom)
        object.__setattr__(self, "capacity", capacity)

    @property
    def n_classes(self) -> int:
        return self.rates.size

    @property
    def n_resources(self) -> int:
        return self.capacity.size

    def with_horizon(self, horizon: float, keep_rate: bool = True) -> "Instance":
        """Copy with a new horizon; by default capacity is rescaled so that C/T is unchanged."""
        capacity = self.capacity / self.horizon * horizon if keep_rate else self.capacity
        return Instance(horizon, self.rates, self.revenues, self.bom, capacity)

    def with_capacity_rate(self, b) -> "Instance":
        """Copy whose capacity is ``b * T`` (``b`` scalar or per-resource)."""
        b = np.broadcast_to(np.asarray(b, dtype=float), self.capacity.shape)
        return Instance(self.horizon, self.rates, self.revenues, self.bom, b * self.horizon)

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "lambda": self.rates.tolist(),
            "revenue": self.revenues.tolist(),
            "bom": self.bom.tolist(),
            "capacity": self.capacity.tolist(),
        }

    def __repr__(self):
        return (f"Instance(T={self.horizon:g}, n={self.n_classes}, m={self.n_resources}, "
                f"lambda={self.rates.tolist()}, r={self.revenues.tolist()}, C={self.capacity.tolist()})")


def _vector(raw: Mapping[str, Any], key: str) -> list:
    value = raw[key]
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value]
    if not isinstance(value, (list, tuple, np.ndarray)):
        raise InstanceFormatError(key, f"expected an array of numbers, got {type(value).__name__}")
    out = []
    for i, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, (int, float, np.integer, np.floating)):
            raise InstanceFormatError(f"{key}[{i}]", f"expected a number, got {v!r}")
        out.append(float(v))
    return out


def validate_instance(raw: Mapping[str, Any]) -> Instance:
    """Build an :class:`Instance` from a JSON-shaped mapping.

    Keys are ``horizon``, ``lambda``, ``revenue``, ``bom`` (row-major list of
    rows, one row per resource) and ``capacity``. Format problems raise
    :class:`InstanceFormatError` naming the key; value problems raise the
    matching :class:`ValidationError` subclass. Nothing is clamped.
    """
    if isinstance(raw, Instance):
        return raw
    if not isinstance(raw, Mapping):
        raise InstanceFormatError("<root>", f"expected a JSON object, got {type(raw).__name__}")
    for key in JSON_KEYS:
        if key not in raw:
            raise InstanceFormatError(key, "missing required key")
    unknown = sorted(set(raw) - set(JSON_KEYS))
    if unknown:
        raise InstanceFormatError(unknown[0], "unknown key")

    horizon = raw["horizon"]
    if isinstance(horizon, bool) or not isinstance(horizon, (int, float)):
        raise InstanceFormatError("horizon", f"expected a number, got {horizon!r}")
    bom = raw["bom"]
    if not isinstance(bom, (list, tuple)) or not bom:
        raise InstanceFormatError("bom", "expected a nonempty array of rows")
    rows = []
    for i, row in enumerate(bom):
        if not isinstance(row, (list, tuple)):
            raise InstanceFormatError(f"bom[{i}]", "expected an array of numbers")
        rows.append(_vector({f"bom[{i}]": row}, f"bom[{i}]"))
    if len({len(r) for r in rows}) != 1:
        raise DimensionMismatch("bom rows have unequal lengths")
    return Instance(
        horizon=float(horizon),
        rates=_vector(raw, "lambda"),
        revenues=_vector(raw, "revenue"),
        bom=rows,
        capacity=_vector(raw, "capacity"),
    )


def load_instance(path) -> Instance:
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError("<json>", str(exc)) from exc
    return validate_instance(raw)


def dump_instance(inst: Instance, path) -> None:
    Path(path).write_text(json.dumps(inst.to_dict(), indent=2) + "\n")


def capacity_rate(inst: Instance) -> np.ndarray:
    """Average capacity per unit time, ``C / T``."""
    b = inst.capacity / inst.horizon
    b.setflags(write=False)
    return b


class DegeneracyReport(NamedTuple):
    nondegenerate: bool
    bound_count: int
    binding_count: int
    n: int

    def describe(self) -> str:
        total = self.bound_count + self.binding_count
        relation = "=" if total == self.n else ">" if total > self.n else "<"
        verdict = "nondegenerate" if self.nondegenerate else "degenerate"
        return f"{verdict} (counts {self.bound_count}+{self.binding_count}={total} {relation} n={self.n})"


def is_nondegenerate(inst: Instance, sol, tol: float = DEGENERACY_TOL) -> DegeneracyReport:
    """Classify an optimal DLP point.

    Counts classes sitting at 0 or at their rate, and resources whose
    per-unit-time constraint is tight; the point is nondegenerate iff the
    two counts add up to exactly ``n``.
    """
    x = np.asarray(getattr(sol, "x_star", sol), dtype=float)
    if x.shape != (inst.n_classes,):
        raise SolutionInstanceMismatch(f"solution has shape {x.shape}, instance has n={inst.n_classes}")
    b = capacity_rate(inst)
    at_bound = (x <= tol) | (x >= inst.rates - tol)
    binding = np.abs(inst.bom @ x - b) <= tol
    nb, nr = int(at_bound.sum()), int(binding.sum())
    return DegeneracyReport(nb + nr == inst.n_classes, nb, nr, inst.n_classes)
