"""Command line: ``heatsched solve | oracle | simulate``.

Scenario files are JSON with the physical constants and the raw harvested
energies per slot; energies are divided by the slot duration on load.
Results are written as ``<prefix>.csv`` (one row per slot) and
``<prefix>.json`` (summary).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import thermo
from .dispatch import REGIMES, solve
from .errors import (DegenerateBudget, HeatschedError, InfeasibleScenario,
                     IterationLimitExceeded, NoStrictlyFeasiblePoint, NotTemperatureLimited,
                     NoValidHitSlot, ParseError, ValidationError)
from .numerics import SolverConfig, grid_oracle
from .report import make_report
from .thermo import Scenario, ThermalParams

log = logging.getLogger("heatsched")

SCHEMA_VERSION = 1
CSV_HEADER = ("slot", "power", "temperature", "sinr", "cum_energy_used", "cum_energy_avail")

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_NONCONVERGED = 0, 1, 2, 3
_INFEASIBLE = (InfeasibleScenario, DegenerateBudget, NoStrictlyFeasiblePoint,
               NotTemperatureLimited, NoValidHitSlot)


# -- scenario files ----------------------------------------------------------

def _number(obj, key, default=None):
    if key not in obj or obj[key] is None:
        if default is None:
            raise ParseError(f"missing field {key!r}")
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"field {key!r} must be a number")
    if not math.isfinite(value):
        raise ValidationError(f"field {key!r} must be finite")
    return float(value)


def parse_scenario(obj):
    """Build a scenario from a decoded scenario file."""
    if not isinstance(obj, dict):
        raise ParseError("scenario file must hold a JSON object")
    if obj.get("v") != SCHEMA_VERSION:
        raise ParseError(f"unsupported scenario version {obj.get('v')!r}")
    delta = _number(obj, "delta")
    params = ThermalParams(a=_number(obj, "a"), b=_number(obj, "b"), delta=delta,
                           T_e=_number(obj, "T_e"), T_c=_number(obj, "T_c", math.inf),
                           sigma2=_number(obj, "sigma2", 1.0), c=_number(obj, "c", 0.0))
    raw = obj.get("energies")
    if not isinstance(raw, list) or not raw:
        raise ParseError("energies must be a non-empty array")
    if any(isinstance(e, bool) or not isinstance(e, (int, float)) for e in raw):
        raise ParseError("energies must be numbers")
    return Scenario(params, np.asarray(raw, dtype=float) / delta)


def load_scenario(path):
    """Read and validate a scenario file.

    Raises
    ------
    ParseError
        Unreadable file, malformed JSON or wrong schema.
    ValidationError
        Out-of-range values (negative energy, ``b <= 0``, ``delta <= 0``).
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return parse_scenario(obj)


def scenario_to_dict(scenario):
    p = scenario.params
    return {"v": SCHEMA_VERSION, "a": p.a, "b": p.b, "delta": p.delta, "T_e": p.T_e,
            "T_c": None if math.isinf(p.T_c) else p.T_c, "sigma2": p.sigma2, "c": p.c,
            "energies": (scenario.energies * p.delta).tolist()}


def dump_scenario(scenario, path):
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=2) + "\n",
                          encoding="utf-8")


# -- outputs -----------------------------------------------------------------

def _fmt(x):
    return repr(float(x))


def emit_csv(report, path):
    """Write the per-slot trajectory; ``sinr`` is left empty when the
    report carries none (explicit model)."""
    used = np.cumsum(report.powers)
    avail = report.cumulative_energy
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for i in range(report.D):
            w.writerow([i + 1, _fmt(report.powers[i]), _fmt(report.temperatures[i]),
                        "" if report.sinrs is None else _fmt(report.sinrs[i]),
                        _fmt(used[i]), "" if avail is None else _fmt(avail[i])])


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else str(v)
    return value


def summary(report, **extra):
    out = {"objective": report.objective, "regime": report.regime, "model": report.model,
           "form": report.form, "duals": report.duals.as_dict() if report.duals else None,
           "iterations": report.iterations, "kkt_residual": report.kkt_residual,
           "local_only": report.local_only, "powers": report.powers,
           "diagnostics": report.diagnostics}
    out.update(extra)
    return _jsonable(out)


def _write_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def read_powers(path):
    """Schedule from a CSV: a ``power`` column if there is a header row,
    else the first column."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise ParseError(f"{path} holds no schedule")
    col = 0
    if "power" in [c.strip() for c in rows[0]]:
        col = [c.strip() for c in rows[0]].index("power")
        rows = rows[1:]
    try:
        return np.array([float(r[col]) for r in rows])
    except (ValueError, IndexError) as exc:
        raise ParseError(f"{path}: bad power value ({exc})") from exc


# -- commands ----------------------------------------------------------------

def _config(args):
    kw = {}
    if getattr(args, "tol", None) is not None:
        kw["tol_kkt"] = args.tol
    if getattr(args, "max_iter", None) is not None:
        kw["max_iter"] = args.max_iter
    return SolverConfig(**kw)


def _default_model(scenario):
    p = scenario.params
    if p.kappa > 0:
        return "combined" if math.isfinite(p.T_c) else "implicit"
    return "explicit"


def _out_prefix(args, path, many):
    if args.out is None:
        return None
    return f"{args.out}_{Path(path).stem}" if many else args.out


def cmd_solve(args, path, prefix):
    scenario = load_scenario(path)
    report = solve(scenario, args.model, args.regime, _config(args), heuristic=args.heuristic)
    extra = {}
    if args.oracle_check:
        oracle = grid_oracle(scenario, args.model, _oracle_regime(report.regime),
                             args.resolution)
        extra = {"oracle_objective": oracle.objective,
                 "oracle_gap": report.objective - oracle.objective,
                 "oracle_bound": oracle.gap, "oracle_bound_is_rigorous": oracle.gap_is_bound}
    result = summary(report, **extra)
    if prefix:
        emit_csv(report, f"{prefix}.csv")
        _write_json(result, f"{prefix}.json")
    return result


def _oracle_regime(regime):
    return regime if regime in ("low-sinr", "high-sinr") else "general"


def cmd_oracle(args, path, prefix):
    scenario = load_scenario(path)
    model = args.model
    regime = "general" if args.regime in ("auto", "temp-limited", "energy-limited") else args.regime
    res = grid_oracle(scenario, model, regime, args.resolution)
    form = thermo.objective_form(model, regime)
    result = _jsonable({"model": model, "regime": regime, "form": form,
                        "objective": res.objective, "powers": res.powers, "gap": res.gap,
                        "gap_is_bound": res.gap_is_bound, "step": res.step,
                        "points": res.points})
    if prefix:
        rep = make_report(scenario, res.powers, model=model, form=form, regime=regime)
        emit_csv(rep, f"{prefix}.csv")
        _write_json(result, f"{prefix}.json")
    return result


def cmd_simulate(args, path, prefix):
    scenario = load_scenario(path)
    powers = read_powers(args.powers)
    if powers.size != scenario.D:
        raise ValidationError(f"schedule has {powers.size} slots, scenario has {scenario.D}")
    model = args.model or _default_model(scenario)
    regime = "general" if args.regime in ("auto", "temp-limited", "energy-limited") else args.regime
    form = thermo.objective_form(model, regime)
    feas = thermo.check_feasible(scenario, powers, model)
    rep = make_report(scenario, np.maximum(powers, 0.0), model=model, form=form,
                      regime=regime)
    result = _jsonable({"model": model, "form": form, "feasible": feas.feasible,
                        "max_violation": feas.max_violation,
                        "objective": float(thermo.objective(scenario, powers, form)),
                        "max_temperature": float(np.max(rep.temperatures))})
    if prefix:
        emit_csv(rep, f"{prefix}.csv")
        _write_json(result, f"{prefix}.json")
    return result


COMMANDS = {"solve": cmd_solve, "oracle": cmd_oracle, "simulate": cmd_simulate}


def exit_code(exc):
    if isinstance(exc, IterationLimitExceeded):
        return EXIT_NONCONVERGED
    if isinstance(exc, _INFEASIBLE):
        return EXIT_INFEASIBLE
    return EXIT_USAGE


def _run_one(args, path, many):
    """Returns ``(exit code, result or message)``; never raises."""
    try:
        result = COMMANDS[args.command](args, path, _out_prefix(args, path, many))
        return EXIT_OK, result
    except HeatschedError as exc:
        return exit_code(exc), f"{path}: {type(exc).__name__}: {exc}"
    except OSError as exc:
        return EXIT_USAGE, f"{path}: {exc}"


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="heatsched", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, model_required=True):
        p.add_argument("--scenario", required=True, nargs="+", help="scenario JSON file(s)")
        p.add_argument("--out", help="output prefix for <prefix>.csv and <prefix>.json")
        p.add_argument("--model", choices=thermo.MODELS, required=model_required,
                       default=None)
        p.add_argument("--regime", choices=REGIMES, default="auto")
        p.add_argument("--jobs", type=int, default=1,
                       help="scenarios solved concurrently when several are given")

    s = sub.add_parser("solve", help="compute an optimal schedule")
    common(s)
    s.add_argument("--oracle-check", action="store_true",
                   help="compare against the grid oracle (at most four slots)")
    s.add_argument("--resolution", type=float, default=0.01)
    s.add_argument("--tol", type=float)
    s.add_argument("--max-iter", type=int)
    s.add_argument("--heuristic", action="store_true",
                   help="random restarts for the local (condensation) solvers")

    o = sub.add_parser("oracle", help="exhaustive grid search")
    common(o)
    o.add_argument("--resolution", type=float, default=0.01)

    m = sub.add_parser("simulate", help="evaluate a given schedule")
    common(m, model_required=False)
    m.add_argument("--powers", required=True, help="CSV with the schedule")
    return parser


def _setup_logging():
    level = os.environ.get("HEATSCHED_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.ERROR), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def run(argv=None):
    """Parse ``argv`` and execute; returns the process exit code."""
    _setup_logging()
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    paths = args.scenario
    many = len(paths) > 1
    if args.jobs > 1 and many:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(_run_one, [args] * len(paths), paths, [many] * len(paths)))
    else:
        outcomes = [_run_one(args, p, many) for p in paths]
    code = EXIT_OK
    for code_i, payload in outcomes:
        if code_i == EXIT_OK:
            if args.out is None:
                print(json.dumps(payload, indent=2))
        else:
            print(payload, file=sys.stderr)
        code = max(code, code_i)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
