"""Discrete-time logistic maps on the integers.

Two unit-step maps come from placing the forward shift on different factors
of the logistic law ``x(t+1) - x(t) = r * (...) * (1 - (...)/k)``:

``StreipertZ``
    shift on the growth factor: ``x(t+1) = x / (1 - r (1 - x/k))``.  The
    denominator can vanish or turn negative, so orbits may leave the
    positive half-line (from ``r=2, k=5, x=2`` one step gives ``-10``).
``NonstandardZ``
    shift inside the crowding term: ``x(t+1) = (r+1) k x / (k + r x)``.
    Positive for every positive ``x``; fixed points exactly 0 and ``k``.

``ExplicitEulerZ(step)`` is the forward-Euler baseline.  ``NonstandardStepZ``
is an experimental step-``h`` variant ``(r h + 1) k x / (k + r h x)`` that
reduces to ``NonstandardZ`` at ``h = 1``.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple, Union

import numpy as np

from .dynamics import ModelParams, closed_form
from .errors import DomainError, SingularDenominator

__all__ = [
    "StreipertZ",
    "NonstandardZ",
    "ExplicitEulerZ",
    "NonstandardStepZ",
    "MapKind",
    "OrbitReport",
    "ScanSummary",
    "ConsistencyReport",
    "DENOMINATOR_TOL",
    "streipert_step",
    "nsfd_step",
    "euler_step",
    "step",
    "iterate",
    "positivity_scan",
    "random_positivity_scan",
    "consistency_compare",
    "seed_from_env",
]

DENOMINATOR_TOL = 1e-14
CONVERGENCE_RTOL = 1e-12
MAX_WITNESSES = 10


@dataclass(frozen=True)
class StreipertZ:
    name = "streipert"


@dataclass(frozen=True)
class NonstandardZ:
    name = "nsfd"


@dataclass(frozen=True)
class ExplicitEulerZ:
    step: float = 1.0
    name = "euler"

    def __post_init__(self):
        if not (math.isfinite(self.step) and self.step > 0):
            raise DomainError(f"Euler step must be positive, got {self.step!r}")


@dataclass(frozen=True)
class NonstandardStepZ:
    """Experimental: nonstandard map with step ``h`` (not a published scheme)."""

    step: float = 1.0
    name = "nsfd-step"

    def __post_init__(self):
        if not (math.isfinite(self.step) and self.step > 0):
            raise DomainError(f"step must be positive, got {self.step!r}")


MapKind = Union[StreipertZ, NonstandardZ, ExplicitEulerZ, NonstandardStepZ]


def _check_x(x):
    if np.any(np.isnan(x)) or np.any(np.asarray(x) < 0):
        raise DomainError(f"population must be nonnegative, got {x!r}")


def streipert_step(p: ModelParams, x):
    """``x / (1 - r (1 - x/k))``; may be negative.

    Raises :class:`SingularDenominator` when ``|1 - r(1 - x/k)| <= 1e-14``,
    i.e. at ``x = k (r - 1) / r``.
    """
    _check_x(x)
    # k * (1 - r (1 - x/k)), evaluated without the inner division
    denom = p.k - p.r * (p.k - x)
    if np.any(np.abs(denom) <= DENOMINATOR_TOL * p.k):
        raise SingularDenominator(x)
    return x * p.k / denom


def nsfd_step(p: ModelParams, x):
    """``(r + 1) k x / (k + r x)``; positive for ``x > 0``."""
    _check_x(x)
    return (p.r + 1.0) * p.k * x / (p.k + p.r * x)


def euler_step(p: ModelParams, x, h: float = 1.0):
    _check_x(x)
    return x + h * p.r * x * (1.0 - x / p.k)


def step(kind: MapKind, p: ModelParams, x):
    if isinstance(kind, StreipertZ):
        return streipert_step(p, x)
    if isinstance(kind, NonstandardZ):
        return nsfd_step(p, x)
    if isinstance(kind, ExplicitEulerZ):
        return euler_step(p, x, kind.step)
    if isinstance(kind, NonstandardStepZ):
        _check_x(x)
        rh = p.r * kind.step
        return (rh + 1.0) * p.k * x / (p.k + rh * x)
    raise DomainError(f"unknown map kind {kind!r}")


@dataclass(frozen=True)
class OrbitReport:
    """Orbit ``x(0..m)``, truncated right after the first violation.

    A negative or non-finite value is kept in the orbit and its index listed in
    ``violations``.  An undefined step (vanishing denominator) ends the orbit
    before the missing value, whose index is listed in ``undefined``.
    """

    orbit: np.ndarray
    violations: List[int] = field(default_factory=list)
    undefined: List[int] = field(default_factory=list)
    limit: Optional[float] = None

    @property
    def ok(self):
        return not self.violations and not self.undefined

    def flags(self) -> List[str]:
        out = ["ok"] * len(self.orbit)
        for i in self.violations:
            out[i] = "VIOLATION"
        return out

    def to_dict(self):
        return {
            "length": len(self.orbit),
            "final": float(self.orbit[-1]),
            "violations": list(self.violations),
            "undefined": list(self.undefined),
            "limit": self.limit,
        }


def iterate(kind: MapKind, p: ModelParams, x0: float, n: int) -> OrbitReport:
    """Apply the map ``n`` times from ``x0``, stopping at the first violation."""
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n!r}")
    _check_x(x0)
    orbit = [float(x0)]
    violations, undefined = [], []
    x = float(x0)
    for i in range(1, n + 1):
        try:
            x = float(step(kind, p, x))
        except SingularDenominator:
            undefined.append(i)
            break
        orbit.append(x)
        if not (math.isfinite(x) and x >= 0):
            violations.append(i)
            break
    limit = None
    if not violations and not undefined and len(orbit) > 1:
        if abs(orbit[-1] - orbit[-2]) < CONVERGENCE_RTOL * p.k:
            limit = orbit[-1]
    return OrbitReport(np.array(orbit), violations, undefined, limit)


@dataclass(frozen=True)
class ScanSummary:
    total: int
    violation_count: int
    # (r, k, x0, first offending index)
    witnesses: List[Tuple[float, float, float, int]] = field(default_factory=list)

    def to_dict(self):
        return {
            "total": self.total,
            "violation_count": self.violation_count,
            "witnesses": [list(w) for w in self.witnesses],
        }


def _scan_arrays(kind, r, k, x0, n):
    """Vectorized iteration; returns the first violating index per orbit (0 = none)."""
    x = x0.astype(float).copy()
    first_bad = np.zeros(x.shape, dtype=int)
    alive = np.ones(x.shape, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for i in range(1, n + 1):
            if isinstance(kind, StreipertZ):
                denom = k - r * (k - x)
                undefined = np.abs(denom) <= DENOMINATOR_TOL * k
                x_new = x * k / denom
            elif isinstance(kind, NonstandardZ):
                undefined = np.zeros(x.shape, dtype=bool)
                x_new = (r + 1.0) * k * x / (k + r * x)
            elif isinstance(kind, ExplicitEulerZ):
                undefined = np.zeros(x.shape, dtype=bool)
                x_new = x + kind.step * r * x * (1.0 - x / k)
            elif isinstance(kind, NonstandardStepZ):
                undefined = np.zeros(x.shape, dtype=bool)
                rh = r * kind.step
                x_new = (rh + 1.0) * k * x / (k + rh * x)
            else:
                raise DomainError(f"unknown map kind {kind!r}")
            bad = alive & (undefined | ~(x_new >= 0) | ~np.isfinite(x_new))
            first_bad[bad] = i
            alive &= ~bad
            x = np.where(alive, x_new, x)
    return first_bad


def positivity_scan(kind: MapKind, params: Iterable[ModelParams], x0s: Iterable[float], n: int) -> ScanSummary:
    """Iterate every (params, x0) combination ``n`` times and count violating orbits."""
    params = list(params)
    x0s = [float(v) for v in x0s]
    if any(not math.isfinite(v) or v < 0 for v in x0s):
        raise DomainError("initial populations must be finite and nonnegative")
    r = np.repeat([q.r for q in params], len(x0s))
    k = np.repeat([q.k for q in params], len(x0s))
    x0 = np.tile(x0s, len(params))
    return _summarize(kind, r, k, x0, n)


def _summarize(kind, r, k, x0, n):
    first_bad = _scan_arrays(kind, r, k, x0, n)
    hits = np.flatnonzero(first_bad)
    witnesses = [(float(r[j]), float(k[j]), float(x0[j]), int(first_bad[j])) for j in hits[:MAX_WITNESSES]]
    return ScanSummary(len(x0), int(len(hits)), witnesses)


def seed_from_env(default: int = 0) -> int:
    """Seed for randomized scans, read from ``LOGLAB_SEED`` when set."""
    value = os.environ.get("LOGLAB_SEED")
    return default if value in (None, "") else int(value)


def random_positivity_scan(
    kind: MapKind,
    draws: int,
    n: int,
    seed: Optional[int] = None,
    r_max: float = 10.0,
    k_max: float = 10.0,
    x0_factor: float = 3.0,
) -> ScanSummary:
    """Scan ``draws`` random orbits with ``r in (0, r_max]``, ``k in (0, k_max]``, ``x0 in (0, x0_factor k]``."""
    rng = np.random.default_rng(seed_from_env() if seed is None else seed)
    # 1 - U[0, 1) lies in (0, 1]
    r = r_max * (1.0 - rng.random(draws))
    k = k_max * (1.0 - rng.random(draws))
    x0 = x0_factor * k * (1.0 - rng.random(draws))
    return _summarize(kind, r, k, x0, n)


@dataclass(frozen=True)
class ConsistencyReport:
    orbit: OrbitReport
    max_deviation: Optional[float]

    def to_dict(self):
        return {"max_deviation": self.max_deviation, "orbit": self.orbit.to_dict()}


def consistency_compare(kind: MapKind, p: ModelParams, x0: float, n: int) -> ConsistencyReport:
    """Largest gap between the orbit and the continuous solution at ``t = 0..n``.

    ``max_deviation`` is None when the orbit has a violation or undefined step.
    """
    if not x0 > 0:
        raise DomainError(f"x0 must be positive, got {x0!r}")
    report = iterate(kind, p, x0, n)
    if not report.ok:
        return ConsistencyReport(report, None)
    exact = closed_form(p, x0, np.arange(len(report.orbit), dtype=float))
    return ConsistencyReport(report, float(np.max(np.abs(report.orbit - exact))))
