"""Optimal harvesting of a logistic stock with a bounded, linear-in-control rate.

Problem: maximise the total catch ``int_0^b u dt`` subject to
``dx/dt = r x (1 - x/k) - u``, ``x(0) = x0``, ``x(b) >= x_b``, ``0 <= u <= u_max``.

The Hamiltonian is linear in ``u``, so the maximum principle leaves a singular
arc at ``x = k/2`` held by ``u = r k / 4``.  The synthesized feedback policy is

* ``u_max > r k / 4``: drive the stock to ``k/2`` with ``u = u_max`` (from above)
  or ``u = 0`` (from below), then hold it there with ``u = r k / 4``;
* ``u_max < r k / 4``: harvest at ``u_max`` above the lower root of
  ``r x (1 - x/k) = u_max`` and stop harvesting below it.

The costate is never integrated; :func:`adjoint_rhs` serves the optimality checks.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from .dynamics import ModelParams
from .errors import DomainError, NumericalError, UsageError
from .integrate import CrossingEvent, Extinction, HorizonEnd, Trajectory, rk4_step, step_count
from .stability import TANGENT_RTOL, quota_roots

__all__ = [
    "ControlProblem",
    "Costate",
    "Regime",
    "SegmentKind",
    "Trigger",
    "Segment",
    "PolicySchedule",
    "GohCertificate",
    "PolicyRun",
    "hamiltonian",
    "adjoint_rhs",
    "switching_function",
    "singular_pair",
    "goh_certificate",
    "synthesize_policy",
    "singular_from_start",
    "simulate_policy",
    "HYSTERESIS_BAND",
]

# total width of the dead band around the hysteresis threshold, relative to k
HYSTERESIS_BAND = 1e-3


@dataclass(frozen=True)
class ControlProblem:
    params: ModelParams
    b: float
    x0: float
    x_b: float
    u_max: float
    lambda0: int = 1

    def __post_init__(self):
        for name in ("b", "x0", "u_max"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive and finite, got {v!r}")
        if not (isinstance(self.x_b, (int, float)) and math.isfinite(self.x_b) and self.x_b >= 0):
            raise DomainError(f"x_b must be nonnegative, got {self.x_b!r}")
        if self.lambda0 not in (0, 1):
            raise DomainError(f"lambda0 must be 0 or 1, got {self.lambda0!r}")

    @property
    def r(self):
        return self.params.r

    @property
    def k(self):
        return self.params.k


@dataclass(frozen=True)
class Costate:
    lam: float
    lambda0: int = 1

    def __post_init__(self):
        if self.lambda0 not in (0, 1):
            raise DomainError(f"lambda0 must be 0 or 1, got {self.lambda0!r}")
        if self.lambda0 == 0 and self.lam == 0:
            raise DomainError("the multipliers (lambda0, lambda) must not both vanish")


def hamiltonian(prob: ControlProblem, x, u, lam, lambda0=1):
    """``H = lambda0 u + lambda (r x (1 - x/k) - u)``."""
    if np.any(np.asarray(u) < 0) or np.any(np.asarray(u) > prob.u_max):
        raise DomainError(f"control {u!r} outside [0, {prob.u_max}]")
    return lambda0 * u + lam * (prob.r * x * (1.0 - x / prob.k) - u)


def _adjoint(r, k, x, lam):
    return -lam * (r / k) * (k - 2 * x)


def adjoint_rhs(prob: ControlProblem, x, lam):
    """``d(lambda)/dt = -dH/dx = -lambda (r/k)(k - 2x)``."""
    return _adjoint(prob.r, prob.k, x, lam)


def switching_function(lam, lambda0=1):
    """``dH/du = lambda0 - lambda``; its sign selects the bang level."""
    return lambda0 - lam


def singular_pair(p: ModelParams) -> Tuple[float, float]:
    """State and control on the singular arc: ``(k/2, r k / 4)``."""
    return p.k / 2.0, p.r * p.k / 4.0


@dataclass(frozen=True)
class GohCertificate:
    d2H_du2: float
    first_order: float
    first_order_u_derivative: float
    second_order_at_singular: float
    strengthened_value: float
    strengthened_value_raw: float
    satisfied: bool

    @property
    def verdict(self):
        return "satisfied" if self.satisfied else "violated"


def goh_certificate(prob: ControlProblem) -> GohCertificate:
    """Check the generalized Legendre (Goh) conditions on the singular arc.

    The derivatives of the switching function are evaluated in exact rational
    arithmetic from the float parameters, so the identities hold exactly:

    * ``d2H/du2 = 0``;
    * ``d/dt(dH/du) = -d(lambda)/dt`` vanishes at ``x = k/2`` and does not depend on ``u``;
    * ``-d/du [d2/dt2 (dH/du)] = -2 r/k`` (``strengthened_value_raw``).

    ``strengthened_value`` reports the last quantity after multiplying the second
    derivative by ``k/r``, giving the parameter-free value ``-2``; the factor is
    positive so the sign test is unchanged.
    """
    if prob.lambda0 != 1:
        raise UsageError("the Goh certificate is computed for the normal case lambda0 = 1")
    r, k = Fraction(prob.r), Fraction(prob.k)
    lam = Fraction(1)  # dH/du = 1 - lambda = 0 on the arc
    xs, us = k / 2, r * k / 4

    def H(x, u):
        return u + lam * (r * x * (1 - x / k) - u)

    def first(x, u):
        # d/dt (1 - lambda) = -lambda_dot
        return -_adjoint(r, k, x, lam)

    def second(x, u):
        lam_dot = _adjoint(r, k, x, lam)
        x_dot = r * x * (1 - x / k) - u
        return lam_dot * (r / k) * (k - 2 * x) + lam * (r / k) * (-2 * x_dot)

    d2H = H(xs, us + 2) - 2 * H(xs, us + 1) + H(xs, us)
    first_val = first(xs, us)
    first_du = first(xs, us + 1) - first(xs, us)
    raw = -(second(xs, us + 1) - second(xs, us))
    scaled = raw * k / r
    at_singular = second(xs, us) * k / r
    ok = d2H == 0 and first_val == 0 and first_du == 0 and scaled <= 0
    return GohCertificate(
        d2H_du2=float(d2H),
        first_order=float(first_val),
        first_order_u_derivative=float(first_du),
        second_order_at_singular=float(at_singular),
        strengthened_value=float(scaled),
        strengthened_value_raw=float(raw),
        satisfied=bool(ok),
    )


class Regime(str, enum.Enum):
    ABOVE = "AboveSingularCap"
    BELOW = "BelowSingularCap"


class SegmentKind(str, enum.Enum):
    BANG_MAX = "BangMax"
    ZERO = "Zero"
    SINGULAR = "Singular"


@dataclass(frozen=True)
class Trigger:
    """When a segment becomes active.

    ``kind`` is ``"start"`` (active at t = 0), ``"crossing"`` (the state crosses
    ``threshold`` in ``direction`` "upward"/"downward") or ``"state"`` (active
    whenever the state is ``direction`` "above"/"below" ``threshold``).
    """

    kind: str
    threshold: Optional[float] = None
    direction: Optional[str] = None

    def to_dict(self):
        return {"kind": self.kind, "threshold": self.threshold, "direction": self.direction}


@dataclass(frozen=True)
class Segment:
    kind: SegmentKind
    level: float
    trigger: Trigger

    def to_dict(self):
        return {"mode": self.kind.value, "level": self.level, "trigger": self.trigger.to_dict()}

    @classmethod
    def from_dict(cls, d):
        return cls(SegmentKind(d["mode"]), float(d["level"]), Trigger(**d["trigger"]))


@dataclass(frozen=True)
class PolicySchedule:
    """Harvest plan.

    Sequential schedules (``feedback=False``) run their segments in order, each
    one starting when its trigger fires.  Feedback schedules pick, at every
    step, the segment whose state condition holds, with a dead band of
    half-width ``band`` around ``threshold``.
    """

    regime: Regime
    segments: Tuple[Segment, ...]
    threshold: float
    u_max: float
    band: float = 0.0
    feedback: bool = False
    label: str = "bang-singular"
    # terminal check from a predictive run; None when not evaluated
    feasible: Optional[bool] = None
    predicted_x_end: Optional[float] = None

    def __post_init__(self):
        for seg in self.segments:
            if not 0.0 <= seg.level <= self.u_max * (1 + 1e-12):
                raise DomainError(f"segment level {seg.level} outside [0, {self.u_max}]")
            if seg.kind is SegmentKind.SINGULAR and self.regime is not Regime.ABOVE:
                raise DomainError("singular segments need u_max >= r k / 4")

    def to_dict(self):
        return {
            "regime": self.regime.value,
            "label": self.label,
            "threshold": self.threshold,
            "band": self.band,
            "feedback": self.feedback,
            "u_max": self.u_max,
            "segments": [s.to_dict() for s in self.segments],
            "feasible": self.feasible,
            "predicted_x_end": self.predicted_x_end,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            regime=Regime(d["regime"]),
            segments=tuple(Segment.from_dict(s) for s in d["segments"]),
            threshold=float(d["threshold"]),
            u_max=float(d["u_max"]),
            band=float(d["band"]),
            feedback=bool(d["feedback"]),
            label=d["label"],
            feasible=d.get("feasible"),
            predicted_x_end=d.get("predicted_x_end"),
        )


def _regime(prob: ControlProblem) -> Regime:
    cap = prob.params.msy
    if prob.u_max > cap or abs(prob.u_max - cap) <= TANGENT_RTOL * cap:
        return Regime.ABOVE
    return Regime.BELOW


def _predict(prob, schedule, dt):
    if dt is None:
        dt = prob.b / 20_000
    run = simulate_policy(prob, schedule, dt)
    return replace(schedule, feasible=run.terminal_ok, predicted_x_end=run.x_end)


def synthesize_policy(prob: ControlProblem, check_dt: Optional[float] = None) -> PolicySchedule:
    """Build the bang-singular (or hysteresis) harvest schedule for ``prob``.

    The returned schedule carries ``feasible``: whether a predictive run with
    step ``check_dt`` (default ``b / 20000``) ends with ``x(b) >= x_b``.  An
    infeasible terminal state is reported, never corrected.
    """
    x_s, u_s = singular_pair(prob.params)
    regime = _regime(prob)
    if regime is Regime.ABOVE:
        singular_level = min(u_s, prob.u_max)
        if prob.x0 > x_s:
            segments = (
                Segment(SegmentKind.BANG_MAX, prob.u_max, Trigger("start")),
                Segment(SegmentKind.SINGULAR, singular_level, Trigger("crossing", x_s, "downward")),
            )
        elif prob.x0 < x_s:
            segments = (
                Segment(SegmentKind.ZERO, 0.0, Trigger("start")),
                Segment(SegmentKind.SINGULAR, singular_level, Trigger("crossing", x_s, "upward")),
            )
        else:
            segments = (Segment(SegmentKind.SINGULAR, singular_level, Trigger("start")),)
        schedule = PolicySchedule(regime, segments, x_s, prob.u_max)
    else:
        x1 = quota_roots(prob.params, prob.u_max)[0]
        segments = (
            Segment(SegmentKind.BANG_MAX, prob.u_max, Trigger("state", x1, "above")),
            Segment(SegmentKind.ZERO, 0.0, Trigger("state", x1, "below")),
        )
        schedule = PolicySchedule(
            regime,
            segments,
            x1,
            prob.u_max,
            band=0.5 * HYSTERESIS_BAND * prob.k,
            feedback=True,
            label="hysteresis",
        )
    return _predict(prob, schedule, check_dt)


def singular_from_start(prob: ControlProblem, check_dt: Optional[float] = None) -> PolicySchedule:
    """Apply ``u = r k / 4`` from t = 0, for comparison with the synthesized policy.

    From ``x0 > k/2`` the stock then decays toward ``k/2`` without reaching it.
    No optimality is claimed for this schedule.
    """
    x_s, u_s = singular_pair(prob.params)
    if _regime(prob) is not Regime.ABOVE:
        raise DomainError("u = r k / 4 is not admissible when u_max < r k / 4")
    seg = Segment(SegmentKind.SINGULAR, min(u_s, prob.u_max), Trigger("start"))
    schedule = PolicySchedule(Regime.ABOVE, (seg,), x_s, prob.u_max, label="singular-from-start")
    return _predict(prob, schedule, check_dt)


@dataclass(frozen=True)
class PolicyRun:
    trajectory: Trajectory
    yield_: float
    x_end: float
    terminal_ok: bool
    switch_times: List[float] = field(default_factory=list)
    events: List[CrossingEvent] = field(default_factory=list)
    # largest |x - k/2| while a singular segment was active; None if none was
    singular_drift: Optional[float] = None

    @property
    def extinct(self):
        return self.trajectory.extinct

    def to_dict(self):
        term = self.trajectory.termination
        return {
            "yield": self.yield_,
            "x_end": self.x_end,
            "terminal_ok": self.terminal_ok,
            "extinction": term.t_ext if isinstance(term, Extinction) else None,
            "switch_times": list(self.switch_times),
            "events": [{"threshold": e.threshold, "t": e.t_cross, "direction": e.direction} for e in self.events],
            "singular_drift": self.singular_drift,
        }


def _trapezoid(y, x):
    return float(np.trapezoid(y, x)) if hasattr(np, "trapezoid") else float(np.trapz(y, x))


def simulate_policy(prob: ControlProblem, schedule: PolicySchedule, dt: float, reanchor: bool = True) -> PolicyRun:
    """Integrate the stock under ``schedule`` with fixed RK4 steps of size ``dt``.

    The control is held constant over each step.  When a sequential schedule
    switches onto a singular segment at ``k/2`` the state is reset to exactly
    ``k/2`` (``reanchor``); the interpolated crossing otherwise leaves an
    O(dt^2) offset that the unstable arc amplifies.  The catch is the trapezoid
    integral of the applied control, up to extinction if that happens.
    """
    if not (math.isfinite(dt) and dt > 0):
        raise DomainError(f"dt must be positive, got {dt!r}")
    r, k = prob.r, prob.k
    x_s = k / 2.0
    n = step_count(0.0, prob.b, dt)

    segs = schedule.segments
    idx = 0
    if schedule.feedback:
        on = prob.x0 > schedule.threshold
        level = schedule.u_max if on else 0.0
    else:
        level = segs[0].level

    x = float(prob.x0)
    singular_active = not schedule.feedback and segs[0].kind is SegmentKind.SINGULAR
    drift = abs(x - x_s) if singular_active else None

    ts, xs, us = [0.0], [x], [level]
    switch_times, events = [], []
    termination = HorizonEnd()

    for i in range(n):
        t = i * dt
        u = level
        try:
            x_new, tau = rk4_step(lambda y: r * y * (1.0 - y / k) - u, x, dt)
        except NumericalError as err:
            raise NumericalError(str(err), t=t) from None
        if tau is not None:
            ts.append(t + tau)
            xs.append(0.0)
            us.append(u)
            termination = Extinction(t + tau)
            break
        t_new = (i + 1) * dt

        if schedule.feedback:
            lo = schedule.threshold - schedule.band
            hi = schedule.threshold + schedule.band
            edge = None
            if on and x_new < lo:
                on, edge = False, lo
            elif not on and x_new > hi:
                on, edge = True, hi
            if edge is not None:
                t_cross = t + dt * (x - edge) / (x - x_new)
                switch_times.append(t_cross)
                events.append(CrossingEvent(edge, t_cross, "upward" if on else "downward"))
                level = schedule.u_max if on else 0.0
        elif idx + 1 < len(segs):
            nxt = segs[idx + 1]
            trig = nxt.trigger
            d0, d1 = x - trig.threshold, x_new - trig.threshold
            crossed = (trig.direction == "downward" and d0 > 0 >= d1) or (trig.direction == "upward" and d0 < 0 <= d1)
            if crossed:
                t_cross = t + dt * d0 / (d0 - d1)
                switch_times.append(t_cross)
                events.append(CrossingEvent(trig.threshold, t_cross, trig.direction))
                idx += 1
                level = nxt.level
                if nxt.kind is SegmentKind.SINGULAR:
                    singular_active = True
                    if reanchor:
                        x_new = x_s
                    drift = 0.0 if drift is None else drift

        x = x_new
        if singular_active:
            drift = max(drift or 0.0, abs(x - x_s))
        ts.append(t_new)
        xs.append(x)
        us.append(level)

    t_arr, x_arr, u_arr = np.array(ts), np.array(xs), np.array(us)
    traj = Trajectory(t_arr, x_arr, u_arr, termination)
    catch = _trapezoid(u_arr, t_arr)
    x_end = float(x_arr[-1])
    ok = not traj.extinct and x_end >= prob.x_b
    return PolicyRun(traj, catch, x_end, ok, switch_times, events, drift)
