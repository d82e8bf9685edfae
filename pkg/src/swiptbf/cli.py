"""Command-line entry point ``swipt``.

Exit codes: 0 success, 1 usage/parse/I-O error, 2 infeasible targets,
3 verification failure.
"""

import argparse
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

from .duality import SolverOptions, classify_region, DualSolver
from .errors import ClassificationError, InfeasibleError, InputError, SdpError, SwiptError
from .experiments import ALL_DESIGNS, ExperimentConfig, compare_designs, load_config, sweep_gamma, write_csv
from .feasibility import feasibility_report
from .model import ReceiverType, Region, energy_matrix
from .sdr import build_sdr, dominant_ratio, solve_sdr, verify_structure
from .serialization import load_scenario

__all__ = ["main", "build_parser", "EXIT_OK", "EXIT_ERROR", "EXIT_INFEASIBLE", "EXIT_VERIFY"]

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2
EXIT_VERIFY = 3

DEFAULT_VERIFY_TOL = 1e-3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def build_parser():
    parser = _Parser(prog="swipt", description="Joint information/energy beamforming for SWIPT downlinks.")
    sub = parser.add_subparsers(dest="command", metavar="{solve,check,sweep,compare,verify}")
    sub.required = True

    def common(p, scenario=True):
        if scenario:
            p.add_argument("--scenario", required=True, metavar="PATH", help="scenario JSON file")
        p.add_argument("--out", metavar="PATH", help="output file")
        p.add_argument("--json", action="store_true", help="print machine-readable JSON")
        p.add_argument("--tol", type=float, metavar="X", help="tolerance override")

    p = sub.add_parser("solve", help="solve the joint design for one scenario")
    common(p)
    p.add_argument("--type", choices=["1", "2", "both"], default="both", help="ID receiver type")
    p = sub.add_parser("check", help="feasibility and OeBF check")
    common(p)
    p = sub.add_parser("verify", help="cross-check the dual solver against the SDR oracle")
    common(p)
    p.add_argument("--type", choices=["1", "2", "both"], default="both")
    for name, text in (("sweep", "Monte-Carlo sweep over the SINR target"),
                       ("compare", "joint versus separate designs")):
        p = sub.add_parser(name, help=text)
        common(p, scenario=False)
        p.add_argument("--config", metavar="PATH", help="experiment config JSON (defaults if omitted)")
        p.add_argument("--seed", type=int, metavar="N")
        p.add_argument("--trials", type=int, metavar="N")
    return parser


def _types(flag):
    if flag == "both":
        return [ReceiverType.TYPE_I, ReceiverType.TYPE_II]
    return [ReceiverType.parse(int(flag))]


def _check_out(path):
    if path is None:
        return
    parent = Path(path).resolve().parent
    if not parent.is_dir():
        raise _UsageError(f"output directory does not exist: {parent}")
    if not os.access(parent, os.W_OK):
        raise _UsageError(f"output directory is not writable: {parent}")


def _emit(args, doc, text):
    payload = json.dumps(doc, indent=2) if args.json else text
    print(payload)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(doc, indent=2) + "\n")


def _opts(args):
    opts = SolverOptions()
    if args.tol is not None:
        if not args.tol > 0:
            raise _UsageError("--tol must be positive")
        opts = replace(opts, bisect_tol=args.tol)
    return opts


def _fmt_vec(v):
    return "[" + ", ".join(f"{x:.6g}" for x in v) + "]"


def _report_text(rep):
    t = rep.solution.receiver_type
    lines = [
        f"receiver type     : {'I' if t is ReceiverType.TYPE_I else 'II'}",
        f"harvested power   : {rep.objective:.9g} W",
        f"dual value        : {rep.dual_value:.9g} W",
        f"region            : {rep.region.value}",
        f"optimal beta      : {rep.dual_beta:.9g}",
        f"total power       : {rep.total_power:.9g} W",
        f"energy beam power : {rep.energy_beam_power:.9g} W",
        f"ID SINRs          : {_fmt_vec(rep.per_id_sinr)}",
        f"EH powers (W)     : {_fmt_vec(rep.per_eh_power)}",
        f"uplink lambdas    : {_fmt_vec(rep.uplink_lambdas)}",
        f"iterations        : {rep.iterations}",
    ]
    return "\n".join(lines)


def run_solve(args):
    s = load_scenario(args.scenario)
    solver = DualSolver(s, _opts(args))
    reports = {ReceiverType.TYPE_I: solver.solve_p1(), ReceiverType.TYPE_II: solver.solve_p2()}
    try:
        region = classify_region(s, reports[ReceiverType.TYPE_I], reports[ReceiverType.TYPE_II])
    except ClassificationError:
        region = Region.NA
    for rep in reports.values():
        rep.region = region
    chosen = [reports[t] for t in _types(args.type)]
    doc = {"reports": [r.to_dict() for r in chosen]}
    _emit(args, doc, "\n\n".join(_report_text(r) for r in chosen))
    return EXIT_OK


def run_check(args):
    s = load_scenario(args.scenario)
    prof = energy_matrix(s)
    rep = feasibility_report(s, prof)
    doc = {
        "feasible": rep.feasible,
        "min_power_w": rep.min_power,
        "power_budget_w": s.power,
        "oebf_feasible": rep.oebf_powers is not None,
        "xi_E": prof.xi_E,
        "oebf_value_w": prof.xi_E * s.power,
    }
    text = (f"feasible          : {'yes' if rep.feasible else 'no'}\n"
            f"minimum power     : {rep.min_power:.9g} W (budget {s.power:.9g} W)\n"
            f"OeBF feasible     : {'yes' if rep.oebf_powers is not None else 'no'}\n"
            f"xi_E * P          : {prof.xi_E * s.power:.9g} W")
    _emit(args, doc, text)
    return EXIT_OK if rep.feasible else EXIT_INFEASIBLE


def run_verify(args):
    s = load_scenario(args.scenario)
    tol = DEFAULT_VERIFY_TOL if args.tol is None else args.tol
    if not tol > 0:
        raise _UsageError("--tol must be positive")
    solver = DualSolver(s)
    reports = {ReceiverType.TYPE_I: solver.solve_p1(), ReceiverType.TYPE_II: solver.solve_p2()}
    oebf = reports[ReceiverType.TYPE_I].oebf_feasible
    entries, ok = [], True
    for rtype in _types(args.type):
        rep = reports[rtype]
        try:
            sdr = solve_sdr(build_sdr(s, rtype))
        except SdpError as exc:
            entries.append({"receiver_type": rtype.value, "error": f"SDR oracle failed: {exc} ({exc.status})"})
            ok = False
            continue
        gap = abs(rep.objective - sdr.value) / max(abs(sdr.value), 1e-300)
        structure = verify_structure(sdr, s, rtype)
        # with the OeBF feasible the energy covariance of the relaxation is not unique
        failures = [f for f in structure.failures if not (oebf and "W_E" in f)]
        passed = gap <= tol and not failures
        ok &= passed
        entries.append({
            "receiver_type": rtype.value,
            "duality_value_w": rep.objective,
            "sdr_value_w": sdr.value,
            "relative_gap": gap,
            "rank_profile": [dominant_ratio(w) for w in sdr.W],
            "trace_WE": structure.values["trace_WE"],
            "structure": {k: v for k, v in structure.values.items()},
            "failures": failures,
            "passed": passed,
        })
    doc = {"tolerance": tol, "oebf_feasible": oebf, "checks": entries, "passed": ok}
    lines = []
    for e in entries:
        name = "I" if e["receiver_type"] == 1 else "II"
        if "error" in e:
            lines.append(f"type {name}: {e['error']}")
            continue
        lines.append(f"type {name}: duality {e['duality_value_w']:.9g} W, SDR {e['sdr_value_w']:.9g} W, "
                     f"relative gap {e['relative_gap']:.3e}")
        lines.append(f"  dominant ratios {_fmt_vec(e['rank_profile'])}, trace(W_E) {e['trace_WE']:.3e}")
        for f in e["failures"]:
            lines.append(f"  FAIL {f}")
        lines.append(f"  {'PASS' if e['passed'] else 'FAIL'}")
    lines.append("verification " + ("passed" if ok else "failed"))
    _emit(args, doc, "\n".join(lines))
    return EXIT_OK if ok else EXIT_VERIFY


def _experiment_config(args, designs=None):
    overrides = {"seed": args.seed, "trials": args.trials}
    if args.config:
        try:
            cfg = load_config(args.config, **overrides)
        except (OSError, json.JSONDecodeError, TypeError) as exc:
            raise InputError(f"cannot load config {args.config}: {exc}") from None
    else:
        cfg = ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})
    return cfg


def _run_experiment(args, compare):
    cfg = _experiment_config(args)
    out = args.out or ("compare.csv" if compare else "sweep.csv")
    _check_out(out)
    table = compare_designs(cfg) if compare else sweep_gamma(cfg)
    write_csv(table, out)
    summary = []
    for design in (ALL_DESIGNS if compare else cfg.designs):
        rows = [r for r in table.rows if r.design == design]
        finite = [r for r in rows if math.isfinite(r.mean_mw)]
        best = max((r.mean_mw for r in finite), default=math.nan)
        summary.append({"design": design, "grid_points": len(rows), "flagged_points": len(rows) - len(finite),
                        "max_mean_mw": best})
    if args.json:
        print(json.dumps({"csv": str(out), "summary": summary}, indent=2))
    else:
        for d in summary:
            print(f"{d['design']}: {d['grid_points']} grid points, {d['flagged_points']} flagged, "
                  f"max mean {d['max_mean_mw']:.6g} mW")
        print(f"wrote {out}")
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command in ("sweep", "compare"):
            return _run_experiment(args, args.command == "compare")
        _check_out(args.out)
        return {"solve": run_solve, "check": run_check, "verify": run_verify}[args.command](args)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_ERROR
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except SwiptError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_VERIFY if args.command == "verify" else EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
