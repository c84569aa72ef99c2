"""Acceptance gate: one test per exit criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py``; the summary lines are
printed even without ``-s``.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from loglab.control import ControlProblem, goh_certificate, simulate_policy, singular_pair, synthesize_policy
from loglab.dynamics import ConstantQuota, ModelParams, Unexploited, closed_form, per_capita_growth
from loglab.integrate import integrate, integrate_with_events
from loglab.stability import (
    QuotaCase,
    Verdict,
    classify,
    lyapunov_derivative,
    lyapunov_value,
    sign_grid,
)
from loglab.timescale import NonstandardZ, random_positivity_scan, seed_from_env, streipert_step


@pytest.fixture
def verdict(request, capsys):
    """Record named checks and print one line for the criterion at teardown."""
    checks = []

    def check(name, ok, detail=""):
        checks.append((name, bool(ok), detail))
        return bool(ok)

    yield check
    ok = bool(checks) and all(c[1] for c in checks)
    failed = [f"{n} ({d})" if d else n for n, good, d in checks if not good]
    line = f"[{'PASS' if ok else 'FAIL'}] {request.node.name}"
    if failed:
        line += ": " + "; ".join(failed)
    with capsys.disabled():
        print("\n" + line)


def assert_all(verdict_checks):
    assert all(verdict_checks)


ABOVE_CAP = dict(r=0.01, k=0.05, b=500.0, x_b=0.001, u_max=0.0002)


def above_cap_problem(x0):
    return ControlProblem(ModelParams(ABOVE_CAP["r"], ABOVE_CAP["k"]), ABOVE_CAP["b"], x0, ABOVE_CAP["x_b"], ABOVE_CAP["u_max"])


def test_ac1_streipert_counterexample(verdict):
    exact = Fraction(2) / (1 - Fraction(2) * (1 - Fraction(2) / Fraction(5)))
    p = ModelParams(2.0, 5.0)
    value = streipert_step(p, 2.0)
    best = math.inf
    for _ in range(20):
        t0 = time.perf_counter()
        streipert_step(p, 2.0)
        best = min(best, time.perf_counter() - t0)
    assert_all([
        verdict("rational value is -10", exact == -10, str(exact)),
        verdict("float within 1e-12", abs(value + 10) <= 1e-12, repr(value)),
        verdict("runtime < 1 ms", best < 1e-3, f"{best:.2e}s"),
    ])


def test_ac2_nonstandard_positivity(verdict):
    t0 = time.perf_counter()
    summary = random_positivity_scan(NonstandardZ(), 100_000, 100, seed=seed_from_env())
    elapsed = time.perf_counter() - t0
    assert_all([
        verdict("1e5 draws scanned", summary.total == 100_000),
        verdict("zero violations", summary.violation_count == 0, str(summary.witnesses)),
        verdict("runtime < 10 s", elapsed < 10.0, f"{elapsed:.2f}s"),
    ])


def test_ac3_quota_equilibria_and_basins(verdict):
    p = ModelParams(0.5, 0.8)
    tangent = classify(p, ConstantQuota(0.1))
    two = classify(p, ConstantQuota(0.05))
    lower, upper = two.equilibria
    high = integrate(p, ConstantQuota(0.05), 0.2, (0.0, 400.0), 0.01)
    low = integrate(p, ConstantQuota(0.05), 0.1, (0.0, 400.0), 0.01)
    assert_all([
        verdict("h=0.1 single equilibrium 0.4", [e.value for e in tangent.equilibria] == [0.4]),
        verdict("h=0.1 unstable", tangent.equilibria[0].verdict is Verdict.UNSTABLE),
        verdict("h=0.05 two equilibria", two.case is QuotaCase.TWO_EQUILIBRIA),
        verdict("lower root 0.117157", abs(lower.value - 0.117157) <= 1e-6, repr(lower.value)),
        verdict("upper root 0.682843", abs(upper.value - 0.682843) <= 1e-6, repr(upper.value)),
        verdict("lower unstable", lower.verdict is Verdict.UNSTABLE),
        verdict("upper stable on x > lower", upper.verdict is Verdict.STABLE_WITH_REGION and upper.region == lower.value),
        verdict("x0=0.2 converges by t=400", abs(high.x[-1] - 0.682843) <= 1e-4, repr(high.x[-1])),
        verdict("x0=0.1 goes extinct", low.extinct),
    ])


def test_ac4_singular_pair_and_goh(verdict):
    pair = singular_pair(ModelParams(0.01, 0.05))
    rng = np.random.default_rng(seed_from_env())
    values = []
    for _ in range(100):
        r, k = rng.uniform(1e-3, 10), rng.uniform(1e-3, 100)
        prob = ControlProblem(ModelParams(r, k), b=1.0, x0=k / 3, x_b=0.0, u_max=r * k)
        cert = goh_certificate(prob)
        values.append((cert.strengthened_value, cert.satisfied))
    assert_all([
        verdict("pair (0.025, 0.000125)", math.isclose(pair[0], 0.025, rel_tol=1e-15)
                and math.isclose(pair[1], 0.000125, rel_tol=1e-15), repr(pair)),
        verdict("strengthened value -2 on 100 draws", all(v == -2.0 for v, _ in values)),
        verdict("certificate satisfied", all(s for _, s in values)),
    ])


def oracle_switch(x0, dt):
    """Bang phase on its own: integrate the constant-rate field and find where it meets k/2."""
    p = ModelParams(ABOVE_CAP["r"], ABOVE_CAP["k"])
    mode = ConstantQuota(ABOVE_CAP["u_max"]) if x0 > p.k / 2 else Unexploited()
    _, events = integrate_with_events(p, mode, x0, (0.0, ABOVE_CAP["b"]), dt, [p.k / 2])
    t_switch = events[0].t_cross
    bang = ABOVE_CAP["u_max"] * t_switch if x0 > p.k / 2 else 0.0
    return t_switch, bang


@pytest.mark.parametrize("x0", [0.01, 0.04])
def test_ac5_policy_reproduction_above_cap(verdict, x0):
    dt = 0.01
    prob = above_cap_problem(x0)
    run = simulate_policy(prob, synthesize_policy(prob), dt)
    t, x = run.trajectory.t, run.trajectory.x
    t_sw = run.switch_times[0] if run.switch_times else math.inf
    held = x[t >= t_sw + dt]
    t_or, bang = oracle_switch(x0, dt / 2)
    expected = 0.000125 * (ABOVE_CAP["b"] - t_or) + bang
    assert_all([
        verdict("one switch onto k/2", len(run.switch_times) == 1),
        verdict("holds k/2 within 1e-5", held.size > 0 and np.max(np.abs(held - 0.025)) <= 1e-5),
        verdict("x(b) = 0.025 >= x_b", abs(run.x_end - 0.025) <= 1e-5 and run.x_end >= ABOVE_CAP["x_b"] and run.terminal_ok),
        verdict("yield within 1% of oracle", abs(run.yield_ - expected) <= 0.01 * expected,
                f"{run.yield_:.6g} vs {expected:.6g}"),
    ])


def test_ac6_policy_regime_below_cap(verdict):
    prob = ControlProblem(ModelParams(0.01, 0.05), b=1500.0, x0=0.03, x_b=0.001, u_max=0.0001)
    sched = synthesize_policy(prob)
    run = simulate_policy(prob, sched, 0.01)
    assert_all([
        verdict("hysteresis regime", sched.regime.value == "BelowSingularCap" and sched.feedback),
        verdict("threshold 0.013820", abs(sched.threshold - 0.013820) <= 1e-5, repr(sched.threshold)),
        verdict("x(1500) near 0.036180", abs(run.x_end - 0.036180) <= 1e-3, repr(run.x_end)),
    ])


def test_ac7_integrator_convergence(verdict):
    p = ModelParams(0.1, 150.0)

    def err(dt):
        traj = integrate(p, Unexploited(), 30.0, (0.0, 100.0), dt)
        return float(np.max(np.abs(traj.x - closed_form(p, 30.0, traj.t))))

    e01, e05, e025 = err(0.01), err(0.05), err(0.025)
    assert_all([
        verdict("max error at dt=0.01 < 1e-8", e01 < 1e-8, f"{e01:.2e}"),
        verdict("error ratio >= 12", e05 / e025 >= 12, f"{e05 / e025:.2f}"),
    ])


def test_ac8_lyapunov_suite(verdict):
    rng = np.random.default_rng(seed_from_env())
    xe = 0.8
    xs = np.sort(np.concatenate([rng.uniform(1e-6, 100, 20_000), np.logspace(-6, 2, 10_000), [xe]]))
    v = lyapunov_value(xs, xe)
    zero_at = xs[v == 0.0]
    dv = 1 - xe / xs
    flips = np.flatnonzero(np.sign(dv[:-1]) * np.sign(dv[1:]) < 0)

    p = ModelParams(0.5, 0.8)
    grid = sign_grid(p)
    grid = grid[np.abs(grid - p.k) > 1e-6]
    vdot = lyapunov_derivative(p, Unexploited(), grid, p.k)

    mode = ConstantQuota(0.05)
    x1, x2 = [e.value for e in classify(p, mode).equilibria]
    dense = sign_grid(p, 200_000)
    f = per_capita_growth(p, mode, dense)
    m = 1e-6
    assert_all([
        verdict("V >= 0", np.all(v >= 0)),
        verdict("unique zero at equilibrium", list(zero_at) == [xe]),
        verdict("V' vanishes only at equilibrium", len(flips) == 0 and np.all(dv[xs < xe] < 0) and np.all(dv[xs > xe] > 0)),
        verdict("dV/dt < 0 on 1e4 grid (unexploited)", grid.size >= 9_990 and np.all(vdot < -1e-12)),
        verdict("f < 0 below lower root", np.all(f[dense < x1 - m] < 0)),
        verdict("f > 0 between roots", np.all(f[(dense > x1 + m) & (dense < x2 - m)] > 0)),
        verdict("f < 0 above upper root", np.all(f[dense > x2 + m] < 0)),
    ])


@pytest.mark.parametrize("x0", [0.01, 0.04])
def test_ac9_yield_dominance(verdict, x0):
    dt = 0.01
    p = ModelParams(ABOVE_CAP["r"], ABOVE_CAP["k"])
    prob = above_cap_problem(x0)
    best = simulate_policy(prob, synthesize_policy(prob), dt).yield_
    checks = []
    for frac in (0.25, 0.5, 0.75, 1.0):
        h = frac * p.msy
        traj = integrate(p, ConstantQuota(h), x0, (0.0, ABOVE_CAP["b"]), dt)
        # harvest stops at extinction
        catch = h * (traj.t[-1] - traj.t[0])
        tag = "extinct" if traj.extinct else "survives"
        checks.append(verdict(f"beats quota {frac}*rk/4 ({tag})", best >= catch, f"{best:.6g} vs {catch:.6g}"))
    assert_all(checks)
