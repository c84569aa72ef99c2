"""Command-line interface.

Subcommands::

    loglab simulate  --r R --k K --x0 X0 --t1 T1 [--dt DT] [--effort E | --quota H]
    loglab stability --r R --k K [--effort E | --quota H]
    loglab policy    --r R --k K --x0 X0 --b B --umax UMAX [--xb XB] [--dt DT] [--csv PATH]
    loglab discrete  --map {streipert,nsfd,euler} --r R --k K --x0 X0 --n N [--scan DRAWS] [--compare]

``--config FILE`` loads the same fields from a JSON object or from
``key = value`` lines; command-line flags win over file values.

Exit status: 0 on success, 2 on invalid input, 3 on a numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, fields
from typing import Optional

from .control import ControlProblem, PolicySchedule, simulate_policy, synthesize_policy
from .dynamics import ConstantEffort, ConstantQuota, ModelParams, Unexploited
from .errors import LoglabError, NumericalError
from .integrate import Extinction, integrate
from .stability import classify
from .timescale import (
    ExplicitEulerZ,
    NonstandardZ,
    StreipertZ,
    consistency_compare,
    iterate,
    random_positivity_scan,
    seed_from_env,
)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3

MAPS = {"streipert": StreipertZ, "nsfd": NonstandardZ, "euler": ExplicitEulerZ}


class ValidationError(Exception):
    pass


@dataclass
class Scenario:
    r: Optional[float] = None
    k: Optional[float] = None
    effort: Optional[float] = None
    quota: Optional[float] = None
    x0: Optional[float] = None
    t0: float = 0.0
    t1: Optional[float] = None
    b: Optional[float] = None
    xb: float = 0.0
    umax: Optional[float] = None
    dt: float = 0.01
    n: Optional[int] = None
    map: str = "nsfd"
    step: float = 1.0
    out: Optional[str] = None

    def require(self, *names):
        for name in names:
            if getattr(self, name) is None:
                raise ValidationError(f"missing required field '{name}'")

    def params(self) -> ModelParams:
        self.require("r", "k")
        return _checked("r/k", ModelParams, self.r, self.k)

    def mode(self):
        if self.effort is not None and self.quota is not None:
            raise ValidationError("fields 'effort' and 'quota' are mutually exclusive")
        if self.effort is not None:
            return _checked("effort", ConstantEffort, self.effort)
        if self.quota is not None:
            return _checked("quota", ConstantQuota, self.quota)
        return Unexploited()


def _checked(field_name, factory, *args):
    try:
        return factory(*args)
    except (LoglabError, ValueError, TypeError) as err:
        raise ValidationError(f"invalid {field_name}: {err}") from None


_FIELD_TYPES = {f.name: float for f in fields(Scenario)}
_FIELD_TYPES.update(n=int, map=str, out=str)


def _coerce(name, value):
    try:
        return _FIELD_TYPES[name](value)
    except (TypeError, ValueError):
        raise ValidationError(f"field '{name}' has invalid value {value!r}") from None


def load_config(path: str) -> dict:
    """Read a flat key-value document (JSON object or ``key = value`` lines)."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise ValidationError(f"cannot read config {path!r}: {err}") from None
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as err:
            raise ValidationError(f"config {path!r} is not valid JSON: {err}") from None
    else:
        data = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"config {path!r} line {lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            data[key] = value.strip("\"'")
    unknown = sorted(set(data) - set(_FIELD_TYPES))
    if unknown:
        raise ValidationError(f"unknown config field(s): {', '.join(unknown)}")
    return {key: _coerce(key, value) for key, value in data.items()}


def build_scenario(args: argparse.Namespace) -> Scenario:
    values = load_config(args.config) if args.config else {}
    for name in _FIELD_TYPES:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    return Scenario(**values)


def _fmt(v) -> str:
    # repr of a float is the shortest string that parses back to the same value
    return repr(float(v))


def _emit(text: str, path: Optional[str]):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def trajectory_csv(traj, include_u=True) -> str:
    lines = ["t,x,u"]
    u = traj.u
    for i in range(len(traj.t)):
        u_text = _fmt(u[i]) if (include_u and u is not None) else ""
        lines.append(f"{_fmt(traj.t[i])},{_fmt(traj.x[i])},{u_text}")
    if isinstance(traj.termination, Extinction):
        lines.append(f"# extinction t={_fmt(traj.termination.t_ext)}")
    return "\n".join(lines) + "\n"


def cmd_simulate(sc: Scenario) -> int:
    p, mode = sc.params(), sc.mode()
    sc.require("x0", "t1")
    if not sc.dt > 0:
        raise ValidationError("field 'dt' must be positive")
    if not sc.t1 > sc.t0:
        raise ValidationError("field 't1' must exceed 't0'")
    if not (math.isfinite(sc.x0) and sc.x0 >= 0):
        raise ValidationError("field 'x0' must be nonnegative")
    traj = integrate(p, mode, sc.x0, (sc.t0, sc.t1), sc.dt)
    _emit(trajectory_csv(traj), sc.out)
    return EXIT_OK


def cmd_stability(sc: Scenario) -> int:
    report = classify(sc.params(), sc.mode())
    _emit(_dump_json(report.to_dict()), sc.out)
    return EXIT_OK


def policy_report(prob: ControlProblem, schedule: PolicySchedule, run) -> dict:
    out = {
        "problem": {
            "r": prob.r,
            "k": prob.k,
            "b": prob.b,
            "x0": prob.x0,
            "xb": prob.x_b,
            "umax": prob.u_max,
        },
        "regime": schedule.regime.value,
        "schedule": schedule.to_dict(),
    }
    out.update(run.to_dict())
    out["feasible"] = run.terminal_ok
    return out


def cmd_policy(sc: Scenario, csv_path: Optional[str] = None) -> int:
    p = sc.params()
    sc.require("x0", "b", "umax")
    if not sc.dt > 0:
        raise ValidationError("field 'dt' must be positive")
    prob = _checked("control problem", ControlProblem, p, sc.b, sc.x0, sc.xb, sc.umax)
    schedule = synthesize_policy(prob)
    run = simulate_policy(prob, schedule, sc.dt)
    _emit(_dump_json(policy_report(prob, schedule, run)), sc.out)
    if csv_path:
        _emit(trajectory_csv(run.trajectory), csv_path)
    return EXIT_OK


def orbit_csv(report) -> str:
    lines = ["t,x,flag"]
    for i, (x, flag) in enumerate(zip(report.orbit, report.flags())):
        lines.append(f"{i},{_fmt(x)},{flag}")
    for i in report.undefined:
        lines.append(f"# undefined t={i}")
    return "\n".join(lines) + "\n"


def cmd_discrete(sc: Scenario, scan: Optional[int] = None, compare=False, summary_path=None) -> int:
    p = sc.params()
    sc.require("x0", "n")
    if sc.map not in MAPS:
        raise ValidationError(f"field 'map' must be one of {sorted(MAPS)}, got {sc.map!r}")
    if sc.n < 0:
        raise ValidationError("field 'n' must be nonnegative")
    if not (math.isfinite(sc.x0) and sc.x0 >= 0):
        raise ValidationError("field 'x0' must be nonnegative")
    kind = _checked("step", ExplicitEulerZ, sc.step) if sc.map == "euler" else MAPS[sc.map]()
    report = iterate(kind, p, sc.x0, sc.n)
    _emit(orbit_csv(report), sc.out)

    summary = {"map": sc.map, "r": p.r, "k": p.k, "x0": sc.x0, "n": sc.n, "orbit": report.to_dict()}
    if compare:
        summary["consistency"] = consistency_compare(kind, p, sc.x0, sc.n).to_dict() if sc.x0 > 0 else None
    if scan:
        seed = seed_from_env()
        summary["scan"] = dict(random_positivity_scan(kind, scan, sc.n, seed=seed).to_dict(), seed=seed, draws=scan)
    if summary_path:
        _emit(_dump_json(summary), summary_path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="loglab", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key-value file with scenario fields")
    common.add_argument("--r", type=float, help="growth rate")
    common.add_argument("--k", type=float, help="carrying capacity")
    common.add_argument("--out", help="output file (default: stdout)")

    harvest = argparse.ArgumentParser(add_help=False)
    group = harvest.add_mutually_exclusive_group()
    group.add_argument("--effort", type=float, help="constant effort e (harvest e*x)")
    group.add_argument("--quota", type=float, help="constant quota h")

    s = sub.add_parser("simulate", parents=[common, harvest], help="integrate the harvested logistic equation")
    s.add_argument("--x0", type=float)
    s.add_argument("--t0", type=float)
    s.add_argument("--t1", type=float)
    s.add_argument("--dt", type=float)

    sub.add_parser("stability", parents=[common, harvest], help="equilibria and stability verdicts (JSON)")

    pol = sub.add_parser("policy", parents=[common], help="synthesize and simulate the optimal harvest policy")
    pol.add_argument("--x0", type=float)
    pol.add_argument("--b", type=float, help="horizon")
    pol.add_argument("--xb", type=float, help="terminal floor x(b) >= xb")
    pol.add_argument("--umax", type=float, help="maximal harvest rate")
    pol.add_argument("--dt", type=float)
    pol.add_argument("--csv", help="write the simulated trajectory to this CSV file")

    d = sub.add_parser("discrete", parents=[common], help="iterate a discrete logistic map")
    d.add_argument("--map", choices=sorted(MAPS))
    d.add_argument("--x0", type=float)
    d.add_argument("--n", type=int)
    d.add_argument("--step", type=float, help="Euler step size")
    d.add_argument("--scan", type=int, metavar="DRAWS", help="random positivity scan with DRAWS orbits")
    d.add_argument("--compare", action="store_true", help="compare with the continuous solution")
    d.add_argument("--summary", help="write a JSON summary to this file")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        sc = build_scenario(args)
        if args.command == "simulate":
            return cmd_simulate(sc)
        if args.command == "stability":
            return cmd_stability(sc)
        if args.command == "policy":
            return cmd_policy(sc, args.csv)
        return cmd_discrete(sc, args.scan, args.compare, args.summary)
    except ValidationError as err:
        print(f"loglab: error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as err:
        where = "" if err.t is None else f" at t={err.t!r}"
        print(f"loglab: numerical error{where}: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except LoglabError as err:
        print(f"loglab: error: {err}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
