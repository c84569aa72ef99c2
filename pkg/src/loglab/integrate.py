"""Fixed-step RK4 integration with extinction handling and threshold events."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .dynamics import (
    ConstantEffort,
    ConstantQuota,
    HarvestMode,
    ModelParams,
    Scheduled,
    Unexploited,
)
from .errors import DomainError, NumericalError, UsageError

__all__ = [
    "HorizonEnd",
    "Extinction",
    "Trajectory",
    "CrossingEvent",
    "rk4_step",
    "step_count",
    "integrate",
    "integrate_with_events",
    "find_crossings",
]


@dataclass(frozen=True)
class HorizonEnd:
    pass


@dataclass(frozen=True)
class Extinction:
    t_ext: float


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution.

    ``u[i]`` is the harvest rate applied on ``[t[i], t[i+1])``; ``u`` is None
    for an unharvested run.  When ``termination`` is :class:`Extinction` the
    last sample sits at the extinction time with ``x == 0``.
    """

    t: np.ndarray
    x: np.ndarray
    u: Optional[np.ndarray] = None
    termination: object = field(default_factory=HorizonEnd)

    @property
    def extinct(self) -> bool:
        return isinstance(self.termination, Extinction)

    @property
    def samples(self) -> List[Tuple[float, float, Optional[float]]]:
        u = self.u if self.u is not None else [None] * len(self.t)
        return [(float(a), float(b), None if c is None else float(c)) for a, b, c in zip(self.t, self.x, u)]

    def __len__(self):
        return len(self.t)


@dataclass(frozen=True)
class CrossingEvent:
    threshold: float
    t_cross: float
    direction: str  # "upward" or "downward"


def rk4_step(rhs: Callable[[float], float], x: float, dt: float):
    """One classical RK4 step of an autonomous scalar field.

    Returns ``(x_new, tau)``.  ``tau`` is None for a regular step.  If any
    stage state or the result is negative, ``x_new`` is 0 and ``tau`` is the
    linearly interpolated time offset (within the step) at which the offending
    sub-step crossed zero.  ``rhs`` is never evaluated at a negative state.
    """
    half = 0.5 * dt
    k1 = rhs(x)
    y = x + half * k1
    if not y >= 0.0:
        return _hit_zero(x, y, half)
    k2 = rhs(y)
    y = x + half * k2
    if not y >= 0.0:
        return _hit_zero(x, y, half)
    k3 = rhs(y)
    y = x + dt * k3
    if not y >= 0.0:
        return _hit_zero(x, y, dt)
    k4 = rhs(y)
    y = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not y >= 0.0:
        return _hit_zero(x, y, dt)
    if not math.isfinite(y):
        raise NumericalError(f"non-finite state {y!r} in RK4 step")
    return y, None


def _hit_zero(x, y, h):
    # `not y >= 0` also catches NaN
    if not math.isfinite(y):
        raise NumericalError(f"non-finite state {y!r} in RK4 step")
    return 0.0, h * x / (x - y)


def step_count(t0: float, t1: float, dt: float) -> int:
    """Number of whole steps of size ``dt`` that fit in ``[t0, t1]``."""
    return int(math.floor((t1 - t0) / dt + 1e-9))


def _validate_run(x0, t_span, dt):
    if not math.isfinite(x0) or x0 < 0:
        raise DomainError(f"x0 must be nonnegative, got {x0!r}")
    if not (math.isfinite(dt) and dt > 0):
        raise DomainError(f"dt must be positive, got {dt!r}")
    a, b = t_span
    if not (math.isfinite(a) and math.isfinite(b)) or b <= a:
        raise DomainError(f"t_span must satisfy a < b, got {t_span!r}")
    return float(a), float(b)


def _fast_field(p: ModelParams, mode: HarvestMode):
    r, k = p.r, p.k
    if isinstance(mode, Unexploited):
        return (lambda x: r * x * (1.0 - x / k)), None
    if isinstance(mode, ConstantEffort):
        e = mode.e
        return (lambda x: r * x * (1.0 - x / k) - e * x), (lambda x: e * x)
    if isinstance(mode, ConstantQuota):
        h = mode.h
        return (lambda x: r * x * (1.0 - x / k) - h), (lambda x: h)
    if isinstance(mode, Scheduled):
        raise UsageError("scheduled harvesting is simulated by loglab.control.simulate_policy")
    raise UsageError(f"unknown harvest mode {mode!r}")


def integrate(p: ModelParams, mode: HarvestMode, x0: float, t_span: Sequence[float], dt: float) -> Trajectory:
    """Integrate the harvested logistic equation with fixed-step RK4.

    Samples are placed at ``a + i*dt`` for ``i = 0..floor((b-a)/dt)``.  The run
    stops early with an :class:`Extinction` record if the population would go
    negative.
    """
    a, b = _validate_run(x0, t_span, dt)
    rhs, harvest = _fast_field(p, mode)
    n = step_count(a, b, dt)

    ts = [a]
    xs = [float(x0)]
    termination = HorizonEnd()
    x = float(x0)
    for i in range(n):
        t = a + i * dt
        try:
            x, tau = rk4_step(rhs, x, dt)
        except NumericalError as err:
            raise NumericalError(str(err), t=t) from None
        if tau is not None:
            t_ext = t + tau
            ts.append(t_ext)
            xs.append(0.0)
            termination = Extinction(t_ext)
            break
        ts.append(a + (i + 1) * dt)
        xs.append(x)

    t_arr = np.array(ts)
    x_arr = np.array(xs)
    u_arr = None
    if harvest is not None:
        u_arr = np.array([harvest(v) for v in xs])
    return Trajectory(t_arr, x_arr, u_arr, termination)


def find_crossings(t: np.ndarray, x: np.ndarray, threshold: float) -> List[CrossingEvent]:
    """Sign changes of ``x - threshold`` between samples, linearly interpolated.

    Samples lying exactly on the threshold carry no sign; a start on the
    threshold therefore produces no event.
    """
    d = np.asarray(x, dtype=float) - threshold
    nz = np.flatnonzero(d != 0.0)
    events = []
    for j, l in zip(nz[:-1], nz[1:]):
        if (d[j] > 0) == (d[l] > 0):
            continue
        if l == j + 1:
            t_cross = t[j] + (t[l] - t[j]) * d[j] / (d[j] - d[l])
        else:
            t_cross = t[j + 1]
        events.append(CrossingEvent(float(threshold), float(t_cross), "upward" if d[l] > 0 else "downward"))
    return events


def integrate_with_events(p, mode, x0, t_span, dt, thresholds: Sequence[float]):
    """Integrate and report every crossing of each threshold, ordered by time."""
    for thr in thresholds:
        if not math.isfinite(thr) or thr < 0:
            raise DomainError(f"thresholds must be finite and nonnegative, got {thr!r}")
    traj = integrate(p, mode, x0, t_span, dt)
    events = []
    for thr in thresholds:
        events.extend(find_crossings(traj.t, traj.x, thr))
    events.sort(key=lambda ev: ev.t_cross)
    return traj, events
