"""Command-line front door.

Subcommands operate on self-contained scenario files:

    inred analyze    scenario.json ...   exact redundancy classification
    inred certify    scenario.json ...   constructive certificate for a pair
    inred simulate   scenario.json ...   trajectory CSV + admissibility summary
    inred synthesize scenario.json ...   raw output-invisible increment

Exit codes: 0 success, 2 non-linear constraints where linear ones are
required, 3 parse error, 4 no interior window (inconclusive), 5 synthesis or
verification failure, 6 dimension mismatch.  With several input files the
worst code wins.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

import numpy as np

from . import analysis, synthesis
from .exact import DimensionMismatch
from .geometry import PinnedInvalid, SingularGramian
from .scenario import (
    NonLinearConstraints,
    Scenario,
    ScenarioError,
    dump_scenario,
    load_scenario,
    require_linear,
    signal_to_obj,
)
from .trajectory import (
    Grid,
    GridMismatch,
    SampledSignal,
    boundary_residence,
    check_admissible,
    simulate,
)

EXIT_OK = 0
EXIT_NONLINEAR = 2
EXIT_PARSE = 3
EXIT_NO_WINDOW = 4
EXIT_FAILED = 5
EXIT_DIMENSION = 6


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="inred",
        description="Input-redundancy analysis and certification for constrained LTI systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("paths", nargs="+", help="scenario JSON file(s)")
        p.add_argument("--out", help="output file (or directory with several inputs)")
        p.add_argument("--tol", type=float, default=1e-6,
                       help="signal-equality tolerance (default 1e-6)")
        p.add_argument("--dt", type=float, default=None,
                       help="resample signals to this step before running")
        p.add_argument("--horizon", type=float, default=None,
                       help="truncate signals to this horizon")
        p.add_argument("--jobs", type=int, default=1,
                       help="process several scenario files in parallel")

    p_an = sub.add_parser("analyze", help="exact redundancy classification")
    common(p_an)
    p_an.add_argument("--pin-bases", action="store_true",
                      help="use the scenario's pinned R/F/L matrices")
    p_an.add_argument("--format", choices=("json", "text"), default="json")

    p_ce = sub.add_parser("certify", help="certify an input-redundant pair")
    common(p_ce)
    p_ce.add_argument("--nominal", help="name of the nominal input signal")
    p_ce.add_argument("--x0", help="comma-separated initial state, overrides the file")
    p_ce.add_argument("--check-boundary", action="store_true",
                      help="on an inconclusive result, also test boundary residence")

    p_si = sub.add_parser("simulate", help="simulate and check admissibility")
    common(p_si)
    p_si.add_argument("--input", dest="input_name", help="name of the input signal")

    p_sy = sub.add_parser("synthesize", help="raw output-invisible increment")
    common(p_sy)
    p_sy.add_argument("--window", nargs=2, type=float, metavar=("T1", "T2"),
                      help="synthesis window, overrides the file")
    p_sy.add_argument("--route", choices=("auto", "kernel", "loop"), default="auto")
    return parser


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        out.write_text(text if text.endswith("\n") else text + "\n")


def _pick_signal(scenario: Scenario, name: Optional[str], fallback: Optional[str],
                 what: str) -> SampledSignal:
    chosen = name or fallback
    if chosen is None:
        if len(scenario.signals) == 1:
            chosen = next(iter(scenario.signals))
        else:
            raise ScenarioError(f"no {what} signal selected and none is unambiguous")
    if chosen not in scenario.signals:
        raise ScenarioError(f"unknown signal {chosen!r}")
    return scenario.signals[chosen]


def _regrid(sig: SampledSignal, dt: Optional[float], horizon: Optional[float]) -> SampledSignal:
    if dt is None and horizon is None:
        return sig
    new_dt = dt if dt is not None else sig.dt
    span = sig.grid.horizon if horizon is None else min(horizon, sig.grid.horizon)
    return sig.resample(Grid.from_horizon(sig.t0, new_dt, span))


def _trajectory_csv(triple) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    header = (["t"]
              + [f"u{i}" for i in range(triple.u.dim)]
              + [f"x{i}" for i in range(triple.x.dim)]
              + [f"y{i}" for i in range(triple.y.dim)])
    writer.writerow(header)
    times = triple.u.times()
    for k in range(triple.u.n_samples):
        writer.writerow(
            [repr(float(times[k]))]
            + [repr(float(v)) for v in triple.u.values[k]]
            + [repr(float(v)) for v in triple.x.values[k]]
            + [repr(float(v)) for v in triple.y.values[k]]
        )
    return buf.getvalue()


def _certificate_dict(cert: synthesis.IRCertificate) -> dict:
    if isinstance(cert.route, synthesis.KernelBump):
        route: dict = {"type": "kernel_bump"}
    else:
        route = {
            "type": "state_loop",
            "x_peak": cert.route.x_peak.tolist(),
            "t_mid": cert.route.t_mid,
        }
    return {
        "window": list(cert.window),
        "alpha": cert.alpha,
        "route": route,
        "u_hat": signal_to_obj(cert.u_hat),
        "verification": {
            "y_sup_diff": cert.verification.y_sup_diff,
            "admissible_both": cert.verification.admissible_both,
        },
    }


def _cmd_analyze(scenario: Scenario, args: argparse.Namespace, out: Optional[Path]) -> int:
    u_sub = require_linear(scenario.u_constraint)
    x_sub = require_linear(scenario.x_constraint)
    pinned = scenario.pinned if args.pin_bases else None
    report = analysis.analyze(scenario.system, u_sub, x_sub, pinned=pinned)
    if args.format == "text":
        _emit(analysis.report_to_text(report), out)
    else:
        _emit(json.dumps(analysis.report_to_dict(report), indent=2), out)
    return EXIT_OK


def _cmd_certify(scenario: Scenario, args: argparse.Namespace, out: Optional[Path]) -> int:
    nominal = _pick_signal(scenario, args.nominal, scenario.nominal, "nominal")
    nominal = _regrid(nominal, args.dt, args.horizon)
    if args.x0:
        x0 = np.array([float(v) for v in args.x0.split(",")])
    elif scenario.x0 is not None:
        x0 = scenario.x0
    else:
        raise ScenarioError("no initial state: provide scenario.x0 or --x0")
    try:
        cert = synthesis.certify_ir_pair(
            scenario.system, scenario.u_constraint, scenario.x_constraint,
            x0, nominal, tol=args.tol,
        )
    except synthesis.NoInteriorWindow as exc:
        payload: dict = {"certificate": None, "inconclusive": True, "reason": str(exc)}
        if args.check_boundary:
            triple = simulate(scenario.system, x0, nominal)
            rho = analysis.joint_kernel_dim(scenario.system.B, scenario.system.D)
            payload["boundary_residence"] = boundary_residence(
                triple, scenario.u_constraint, scenario.x_constraint, rho)
        _emit(json.dumps(payload, indent=2), out)
        return EXIT_NO_WINDOW
    except (synthesis.VerificationFailed, synthesis.RhoZero, synthesis.RZero,
            synthesis.NotAdmissibleNominal, synthesis.ZeroMargin, SingularGramian) as exc:
        _emit(json.dumps({"certificate": None, "error": str(exc)}, indent=2), out)
        return EXIT_FAILED
    _emit(json.dumps(_certificate_dict(cert), indent=2), out)
    return EXIT_OK


def _cmd_simulate(scenario: Scenario, args: argparse.Namespace, out: Optional[Path]) -> int:
    sig = _pick_signal(scenario, args.input_name, scenario.input_name or scenario.nominal,
                       "input")
    sig = _regrid(sig, args.dt, args.horizon)
    x0 = scenario.x0 if scenario.x0 is not None else np.zeros(scenario.system.n)
    triple = simulate(scenario.system, x0, sig)
    adm = check_admissible(triple, scenario.u_constraint, scenario.x_constraint)
    summary = json.dumps(
        {"admissible": adm.ok, "first_violation": adm.first_violation}, indent=2)
    csv_text = _trajectory_csv(triple)
    if out is None:
        sys.stdout.write(csv_text)
        sys.stdout.write(summary + "\n")
    else:
        out.write_text(csv_text)
        out.with_suffix(out.suffix + ".summary.json").write_text(summary + "\n")
    return EXIT_OK


def _cmd_synthesize(scenario: Scenario, args: argparse.Namespace, out: Optional[Path]) -> int:
    window = tuple(args.window) if args.window else scenario.window
    if window is None:
        raise ScenarioError("no synthesis window: provide scenario.window or --window")
    if scenario.grid is None:
        raise ScenarioError("synthesize needs a scenario.grid block")
    grid = scenario.grid
    if args.dt is not None or args.horizon is not None:
        grid = Grid.from_horizon(grid.t0, args.dt or grid.dt,
                                 args.horizon or grid.horizon)
    rho = analysis.joint_kernel_dim(scenario.system.B, scenario.system.D)
    route = args.route
    if route == "auto":
        route = "kernel" if rho > 0 else "loop"
    try:
        if route == "kernel":
            u_hat = synthesis.synthesize_kernel_bump(
                scenario.system.B, scenario.system.D, window, grid)
            x_hat = None
        else:
            u_hat, x_hat = synthesis.synthesize_state_loop(scenario.system, window, grid)
    except (synthesis.RhoZero, synthesis.RZero, synthesis.EmptyWindow,
            SingularGramian) as exc:
        _emit(json.dumps({"error": str(exc)}, indent=2), out)
        return EXIT_FAILED
    buf = io.StringIO()
    writer = csv.writer(buf)
    header = ["t"] + [f"u{i}" for i in range(u_hat.dim)]
    if x_hat is not None:
        header += [f"x{i}" for i in range(x_hat.dim)]
    writer.writerow(header)
    times = u_hat.times()
    for k in range(u_hat.n_samples):
        row = [repr(float(times[k]))] + [repr(float(v)) for v in u_hat.values[k]]
        if x_hat is not None:
            row += [repr(float(v)) for v in x_hat.values[k]]
        writer.writerow(row)
    _emit(buf.getvalue(), out)
    return EXIT_OK


_COMMANDS = {
    "analyze": _cmd_analyze,
    "certify": _cmd_certify,
    "simulate": _cmd_simulate,
    "synthesize": _cmd_synthesize,
}

_OUT_SUFFIX = {
    "analyze": ".report.json",
    "certify": ".certificate.json",
    "simulate": ".csv",
    "synthesize": ".increment.csv",
}


def _run_one(path: str, args: argparse.Namespace, out: Optional[Path]) -> int:
    try:
        scenario = load_scenario(path)
        return _COMMANDS[args.command](scenario, args, out)
    except NonLinearConstraints as exc:
        print(f"{path}: {exc}", file=sys.stderr)
        return EXIT_NONLINEAR
    except (ScenarioError, FileNotFoundError, PinnedInvalid) as exc:
        print(f"{path}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (DimensionMismatch, GridMismatch) as exc:
        print(f"{path}: {exc}", file=sys.stderr)
        return EXIT_DIMENSION


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    paths = args.paths
    if len(paths) == 1:
        out = Path(args.out) if args.out else None
        return _run_one(paths[0], args, out)
    out_dir = Path(args.out) if args.out else None
    if out_dir is not None and not out_dir.is_dir():
        print("--out must name a directory when several files are given", file=sys.stderr)
        return EXIT_PARSE

    def target(path: str) -> int:
        out = None
        if out_dir is not None:
            out = out_dir / (Path(path).stem + _OUT_SUFFIX[args.command])
        return _run_one(path, args, out)

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            codes = list(pool.map(target, paths))
    else:
        codes = [target(p) for p in paths]
    return max(codes)


if __name__ == "__main__":
    raise SystemExit(main())
