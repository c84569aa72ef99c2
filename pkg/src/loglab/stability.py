"""Equilibria and Lyapunov-based stability verdicts for the harvested logistic model.

Every positive equilibrium ``xe`` is tested with ``V(x) = x - xe - xe ln(x/xe)``,
whose derivative along solutions of ``dx/dt = x f(x)`` is ``(x - xe) f(x)``.
The verdict follows from the sign of ``f`` on either side of ``xe``:

* ``f > 0`` below and ``f < 0`` above, with no other positive equilibrium
  below: globally asymptotically stable on the positive half-line;
* same signs but a lower positive equilibrium ``x1``: stable with region
  ``{x > x1}``;
* ``f < 0`` somewhere below (so ``dV/dt > 0`` there) or ``f > 0`` above:
  unstable.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .dynamics import (
    ConstantEffort,
    ConstantQuota,
    HarvestMode,
    ModelParams,
    Unexploited,
    mode_from_dict,
    mode_to_dict,
    per_capita_growth,
)
from .errors import DomainError, UsageError

__all__ = [
    "Verdict",
    "QuotaCase",
    "Equilibrium",
    "StabilityReport",
    "TANGENT_RTOL",
    "quota_case",
    "quota_roots",
    "equilibria",
    "lyapunov_value",
    "lyapunov_derivative",
    "classify",
    "sign_grid",
]

TANGENT_RTOL = 1e-12
GRID_POINTS = 10_000


class Verdict(str, enum.Enum):
    GAS = "GloballyAsymptoticallyStable"
    UNSTABLE = "Unstable"
    STABLE_WITH_REGION = "StableWithRegion"
    TRIVIAL = "Trivial"


class QuotaCase(str, enum.Enum):
    NO_EQUILIBRIUM = "NoEquilibrium"
    TANGENT = "Tangent"
    TWO_EQUILIBRIA = "TwoEquilibria"


@dataclass(frozen=True)
class Equilibrium:
    value: float
    verdict: Verdict
    rationale: str = ""
    # lower edge of the stability region {x > region}, for StableWithRegion only
    region: Optional[float] = None

    def to_dict(self):
        out = {"value": self.value, "verdict": self.verdict.value}
        if self.region is not None:
            out["region"] = {"lower": self.region}
        out["rationale"] = self.rationale
        return out

    @classmethod
    def from_dict(cls, data):
        region = data.get("region")
        return cls(
            value=float(data["value"]),
            verdict=Verdict(data["verdict"]),
            rationale=data.get("rationale", ""),
            region=None if region is None else float(region["lower"]),
        )


@dataclass(frozen=True)
class StabilityReport:
    mode: HarvestMode
    equilibria: List[Equilibrium] = field(default_factory=list)
    case: Optional[QuotaCase] = None
    note: str = ""

    def to_dict(self):
        return {
            "mode": mode_to_dict(self.mode),
            "case": None if self.case is None else self.case.value,
            "equilibria": [eq.to_dict() for eq in self.equilibria],
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, data):
        case = data.get("case")
        return cls(
            mode=mode_from_dict(data["mode"]),
            equilibria=[Equilibrium.from_dict(d) for d in data["equilibria"]],
            case=None if case is None else QuotaCase(case),
            note=data.get("note", ""),
        )


def quota_case(p: ModelParams, h: float) -> QuotaCase:
    """Which of the three quota regimes ``h`` falls in, relative to ``r k / 4``."""
    cap = p.msy
    if abs(h - cap) <= TANGENT_RTOL * cap:
        return QuotaCase.TANGENT
    return QuotaCase.NO_EQUILIBRIUM if h > cap else QuotaCase.TWO_EQUILIBRIA


def quota_roots(p: ModelParams, h: float) -> List[float]:
    """Roots of ``r x (1 - x/k) = h`` in increasing order.

    The small root comes from the product of roots ``x1 * x2 = h k / r``
    rather than from ``(k - sqrt(disc)) / 2``, which cancels badly for small h.
    """
    case = quota_case(p, h)
    if case is QuotaCase.NO_EQUILIBRIUM:
        return []
    if case is QuotaCase.TANGENT:
        return [p.k / 2.0]
    disc = p.k * p.k - 4.0 * h * p.k / p.r
    upper = 0.5 * (p.k + math.sqrt(disc))
    lower = (h * p.k / p.r) / upper
    return [lower, upper]


def equilibria(p: ModelParams, mode: HarvestMode) -> List[float]:
    """Nonnegative equilibria of the model, sorted increasingly."""
    if isinstance(mode, Unexploited):
        return [0.0, p.k]
    if isinstance(mode, ConstantEffort):
        if mode.e < p.r:
            return [0.0, p.k * (1.0 - mode.e / p.r)]
        return [0.0]
    if isinstance(mode, ConstantQuota):
        return quota_roots(p, mode.h)
    raise UsageError(f"equilibria are not defined for mode {mode!r}")


def lyapunov_value(x, x_eq):
    """``V(x) = x - xe - xe ln(x / xe)``: zero at ``xe``, positive elsewhere."""
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)) or not x_eq > 0:
        raise DomainError("lyapunov_value needs x > 0 and x_eq > 0")
    return x - x_eq - x_eq * np.log(x / x_eq)


def lyapunov_derivative(p: ModelParams, mode: HarvestMode, x, x_eq):
    """Time derivative of :func:`lyapunov_value` along solutions: ``(x - xe) f(x)``."""
    return (x - x_eq) * per_capita_growth(p, mode, x)


def sign_grid(p: ModelParams, points: int = GRID_POINTS) -> np.ndarray:
    """Log-spaced sample points on ``(1e-6 k, 1e2 k)`` used by the sign tests."""
    return np.logspace(math.log10(1e-6 * p.k), math.log10(1e2 * p.k), points)


def _signs(p, mode, xs):
    f = per_capita_growth(p, mode, xs)
    tol = 1e-12 * p.r
    return np.where(f > tol, 1, np.where(f < -tol, -1, 0))


def _verdict_for(p, mode, x_eq, lower_neighbor, upper_neighbor, grid):
    """Apply the sign tests to one positive equilibrium."""
    # midpoint probes keep the tests meaningful when no grid point falls in a gap
    mid_above = 2.0 * x_eq if math.isinf(upper_neighbor) else 0.5 * (x_eq + upper_neighbor)
    below = np.append(grid[(grid > lower_neighbor) & (grid < x_eq)], 0.5 * (lower_neighbor + x_eq))
    above = np.append(grid[(grid > x_eq) & (grid < upper_neighbor)], mid_above)
    s_below = _signs(p, mode, below)
    s_above = _signs(p, mode, above)

    if np.any(s_below < 0):
        return Verdict.UNSTABLE, None, "f < 0 just below the equilibrium, so dV/dt > 0 there (instability theorem)"
    if np.any(s_above > 0):
        return Verdict.UNSTABLE, None, "f > 0 just above the equilibrium, so dV/dt > 0 there (instability theorem)"
    if not (np.any(s_below > 0) and np.any(s_above < 0)):
        return Verdict.UNSTABLE, None, "no sign change of f across the equilibrium"
    if lower_neighbor > 0:
        return (
            Verdict.STABLE_WITH_REGION,
            lower_neighbor,
            "f > 0 between the lower equilibrium and this one, f < 0 above; dV/dt < 0 on {x > lower root}",
        )
    return Verdict.GAS, None, "f > 0 below and f < 0 above the positive equilibrium (single-species criterion)"


def classify(p: ModelParams, mode: HarvestMode) -> StabilityReport:
    """Equilibria of ``mode`` with their stability verdicts."""
    values = equilibria(p, mode)
    case = quota_case(p, mode.h) if isinstance(mode, ConstantQuota) else None
    grid = sign_grid(p)
    positive = [v for v in values if v > 0]

    found = []
    for v in values:
        if v == 0.0:
            found.append(Equilibrium(0.0, Verdict.TRIVIAL, "zero state; excluded from the Lyapunov analysis"))
            continue
        i = positive.index(v)
        lower = positive[i - 1] if i > 0 else 0.0
        upper = positive[i + 1] if i + 1 < len(positive) else math.inf
        verdict, region, why = _verdict_for(p, mode, v, lower, upper, grid)
        found.append(Equilibrium(v, verdict, why, region))

    note = ""
    if case is QuotaCase.NO_EQUILIBRIUM:
        note = "quota exceeds r*k/4: no equilibrium, every trajectory reaches extinction in finite time"
    elif isinstance(mode, ConstantEffort) and not positive:
        note = "effort at or above the growth rate: no positive equilibrium"
    return StabilityReport(mode, found, case, note)
