"""Logistic vector field under the supported harvesting regimes.

The unexploited model is ``dx/dt = r x (1 - x/k)``.  Harvesting subtracts
``e x`` (constant effort), ``h`` (constant quota) or a time-varying rate ``u``
supplied by a control schedule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Optional, Union

import numpy as np

from .errors import DomainError, UsageError

__all__ = [
    "ModelParams",
    "Unexploited",
    "ConstantEffort",
    "ConstantQuota",
    "Scheduled",
    "HarvestMode",
    "State",
    "vector_field",
    "closed_form",
    "per_capita_growth",
    "mode_to_dict",
    "mode_from_dict",
]


def _check_positive_finite(name, value):
    if not isinstance(value, (int, float, np.floating, np.integer)) or isinstance(value, bool):
        raise DomainError(f"{name} must be a real number, got {value!r}")
    if not math.isfinite(value) or value <= 0:
        raise DomainError(f"{name} must be positive and finite, got {value!r}")


def _check_nonnegative_finite(name, value):
    if not isinstance(value, (int, float, np.floating, np.integer)) or isinstance(value, bool):
        raise DomainError(f"{name} must be a real number, got {value!r}")
    if not math.isfinite(value) or value < 0:
        raise DomainError(f"{name} must be nonnegative and finite, got {value!r}")


@dataclass(frozen=True)
class ModelParams:
    """Growth rate ``r`` and carrying capacity ``k`` of the logistic model."""

    r: float
    k: float

    def __post_init__(self):
        _check_positive_finite("r", self.r)
        _check_positive_finite("k", self.k)
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "k", float(self.k))

    @property
    def msy(self):
        """Maximum sustainable yield ``r k / 4`` (peak of the growth curve)."""
        return self.r * self.k / 4.0


@dataclass(frozen=True)
class Unexploited:
    pass


@dataclass(frozen=True)
class ConstantEffort:
    """Harvest proportional to the stock: rate ``e * x``."""

    e: float

    def __post_init__(self):
        _check_nonnegative_finite("effort", self.e)
        object.__setattr__(self, "e", float(self.e))


@dataclass(frozen=True)
class ConstantQuota:
    """Harvest at the fixed absolute rate ``h``."""

    h: float

    def __post_init__(self):
        _check_nonnegative_finite("quota", self.h)
        object.__setattr__(self, "h", float(self.h))


@dataclass(frozen=True)
class Scheduled:
    """Harvest rate chosen by a control schedule; the rate is passed as ``u``."""

    schedule: Any = None


HarvestMode = Union[Unexploited, ConstantEffort, ConstantQuota, Scheduled]


@dataclass(frozen=True)
class State:
    x: float
    t: float = 0.0

    def __post_init__(self):
        _check_nonnegative_finite("x", self.x)
        _check_nonnegative_finite("t", self.t)


def _check_population(x, strictly_positive=False):
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)):
        raise DomainError(f"population must not be NaN, got {x!r}")
    if strictly_positive:
        if np.any(arr <= 0):
            raise DomainError(f"population must be positive, got {x!r}")
    elif np.any(arr < 0):
        raise DomainError(f"population must be nonnegative, got {x!r}")


def vector_field(p: ModelParams, mode: HarvestMode, x, u: Optional[float] = None):
    """Rate of change of the population under the harvesting ``mode``.

    ``u`` is the instantaneous harvest rate and must be given exactly when
    ``mode`` is :class:`Scheduled`.  Accepts scalars or arrays for ``x``.
    """
    _check_population(x)
    growth = p.r * x * (1.0 - x / p.k)
    if isinstance(mode, Scheduled):
        if u is None:
            raise UsageError("a Scheduled mode needs the control rate u")
        return growth - u
    if u is not None:
        raise UsageError(f"control rate u given for non-scheduled mode {mode!r}")
    if isinstance(mode, Unexploited):
        return growth
    if isinstance(mode, ConstantEffort):
        return growth - mode.e * x
    if isinstance(mode, ConstantQuota):
        return growth - mode.h
    raise UsageError(f"unknown harvest mode {mode!r}")


def per_capita_growth(p: ModelParams, mode: HarvestMode, x):
    """Factor ``f`` in ``dx/dt = x f(x)``.

    In quota mode ``f(x) = r(1 - x/k) - h/x``, so ``x`` must be positive.
    """
    if isinstance(mode, ConstantQuota):
        _check_population(x, strictly_positive=True)
        return p.r * (1.0 - x / p.k) - mode.h / x
    _check_population(x)
    if isinstance(mode, Unexploited):
        return p.r * (1.0 - x / p.k)
    if isinstance(mode, ConstantEffort):
        return p.r * (1.0 - x / p.k) - mode.e
    raise UsageError(f"per-capita growth is undefined for mode {mode!r}")


def closed_form(p: ModelParams, x0, t):
    """Exact solution of the unexploited model started from ``x0`` at time 0.

    Evaluated as ``k / (1 + (k/x0 - 1) exp(-r t))``, which equals
    ``x0 k e^{rt} / (k + x0 (e^{rt} - 1))`` but cannot overflow for large ``t``.
    """
    if np.any(np.asarray(x0, dtype=float) <= 0) or np.any(np.isnan(x0)):
        raise DomainError(f"initial population must be positive, got {x0!r}")
    if np.any(np.asarray(t, dtype=float) < 0):
        raise DomainError(f"time must be nonnegative, got {t!r}")
    return p.k / (1.0 + (p.k / x0 - 1.0) * np.exp(-p.r * np.asarray(t, dtype=float)))


def mode_to_dict(mode: HarvestMode) -> dict:
    if isinstance(mode, Unexploited):
        return {"kind": "none"}
    if isinstance(mode, ConstantEffort):
        return {"kind": "effort", "e": mode.e}
    if isinstance(mode, ConstantQuota):
        return {"kind": "quota", "h": mode.h}
    if isinstance(mode, Scheduled):
        return {"kind": "scheduled"}
    raise UsageError(f"unknown harvest mode {mode!r}")


def mode_from_dict(data: dict) -> HarvestMode:
    kind = data.get("kind")
    if kind == "none":
        return Unexploited()
    if kind == "effort":
        return ConstantEffort(data["e"])
    if kind == "quota":
        return ConstantQuota(data["h"])
    if kind == "scheduled":
        return Scheduled()
    raise DomainError(f"unknown harvest mode kind {kind!r}")
