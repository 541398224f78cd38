"""Command-line front end: ``tomoewv {matrix,ewv,sweep,simulate,export}``.

Exit codes: 0 success, 1 statistical check failed (``simulate``),
2 usage or parse error, 3 mathematical precondition failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys

import numpy as np

from .errors import InvalidOperatorError, TomographyError
from .ewv import ewv_report, ewv_state
from .measmat import build_matrix
from .optimize import retardance_grid, scenario_a, scenario_b
from .povm import (
    Scheme,
    ftt_scheme,
    pauli_six_scheme,
    sic_povm_qubit,
    two_waveplate_scheme,
)
from .simulate import TrialConfig, run_trials, verify_average

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_MATH = 0, 1, 2, 3

DEFAULT_TWOPLATE_ANGLES = "0,0;0.7pi,0.7pi;0.7pi,0.2pi"
DEFAULT_SWEEP_BETAS = "0.15pi:0.85pi:0.05pi"


class UsageError(Exception):
    pass


_PI_RE = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?\s*$", re.I)


def parse_angle(text: str) -> float:
    """Parse ``"1.3"``, ``"0.7pi"``, ``"pi/2"`` or ``"7pi/10"`` to radians."""
    m = _PI_RE.match(text)
    if m:
        coef = m.group(1)
        if coef in ("", "+", None):
            value = 1.0
        elif coef == "-":
            value = -1.0
        else:
            value = float(coef)
        if m.group(2):
            value /= float(m.group(2))
        return value * math.pi
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"cannot parse angle {text!r}") from None


def parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise UsageError(f"cannot parse vector {text!r}") from None


def parse_angle_pairs(text: str):
    pairs = []
    for chunk in text.split(";"):
        parts = chunk.split(",")
        if len(parts) != 2:
            raise UsageError(f"angle pair {chunk!r} must be 'phi1,phi2'")
        pairs.append((parse_angle(parts[0]), parse_angle(parts[1])))
    return pairs


def parse_betas(text: str) -> np.ndarray:
    """``"a:b:step"`` (inclusive) or a comma-separated list of angles."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"range {text!r} must be 'start:stop:step'")
        start, stop, step = (parse_angle(p) for p in parts)
        if step <= 0:
            raise UsageError("range step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return start + step * np.arange(n)
    return np.array([parse_angle(p) for p in text.split(",")])


def worker_count() -> int:
    cap = os.environ.get("TOMO_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise UsageError(f"TOMO_THREADS must be an integer, got {cap!r}") from None
    return n


def load_scheme_file(path: str) -> Scheme:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read scheme file: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    try:
        return Scheme.from_dict(data)
    except InvalidOperatorError as exc:
        raise UsageError(f"{path}: invalid scheme: {exc}") from None


def scheme_from_args(args) -> Scheme:
    if (args.builtin is None) == (args.scheme is None):
        raise UsageError("give exactly one of --builtin or --scheme")
    if args.scheme is not None:
        return load_scheme_file(args.scheme)
    ncal = args.ncal
    if args.builtin == "pauli6":
        return pauli_six_scheme(ncal)
    if args.builtin == "sic2":
        return sic_povm_qubit(ncal)
    if args.beta is None:
        raise UsageError(f"--builtin {args.builtin} needs --beta")
    beta = parse_angle(args.beta)
    if args.builtin == "ftt":
        return ftt_scheme(beta, args.settings, ncal)
    return two_waveplate_scheme(beta, parse_angle_pairs(args.angles), ncal)


def _fmt(v) -> str:
    return format(float(v), ".17g")


def _csv_rows(rows) -> str:
    rows = np.atleast_2d(rows)
    return "".join(",".join(_fmt(v) for v in row) + "\n" for row in rows)


def _emit(text: str, output):
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(output, "w", newline="\n") as fh:
            fh.write(text)


def cmd_matrix(args) -> int:
    scheme = scheme_from_args(args)
    m = build_matrix(scheme, row_order=args.row_order)
    if args.require_complete:
        m.require_complete()
    sv = m.singular_values
    if args.format == "json":
        doc = {
            "dimension": m.dimension,
            "rows": m.n_rows,
            "rank": m.rank,
            "complete": m.is_complete,
            "matrix": m.matrix.tolist(),
            "singular_values": sv.tolist(),
            "pseudo_inverse": m.pinv.tolist(),
        }
        _emit(json.dumps(doc, indent=2) + "\n", args.output)
        return EXIT_OK
    sections = {
        "matrix": m.matrix,
        "singular_values": sv[None, :],
        "rank": np.array([[m.rank]]),
        "pseudo_inverse": m.pinv,
    }
    if args.only:
        text = _csv_rows(sections[args.only])
    else:
        text = "".join(f"# {name}\n" + _csv_rows(val) for name, val in sections.items())
    _emit(text, args.output)
    return EXIT_OK


def cmd_ewv(args) -> int:
    scheme = scheme_from_args(args)
    m = build_matrix(scheme)
    m.require_complete()
    if args.state is not None:
        report = ewv_state(m, parse_vector(args.state))
        doc = report.to_dict()
        doc["kind"] = "state"
    else:
        doc = ewv_report(m).to_dict()
        doc["kind"] = "average"
    if doc["lower_bound"] is not None:
        doc["lower_bound_times_nt"] = doc["lower_bound"] * m.total_counts
    if args.format == "csv":
        keys = ["kind", "value", "value_times_nt", "lower_bound", "n_total"]
        text = ",".join(keys) + "\n" + ",".join(
            str(doc[k]) if isinstance(doc[k], str) or doc[k] is None else _fmt(doc[k]) for k in keys
        ) + "\n"
    else:
        text = json.dumps(doc, indent=2) + "\n"
    _emit(text, args.output)
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.scheme is not None or args.builtin not in ("ftt", "twoplate"):
        raise UsageError("sweep needs --builtin ftt or --builtin twoplate")
    bound = 10.0
    if args.builtin == "ftt":
        result = scenario_a(args.settings, args.points)
        rows = np.column_stack([result.beta_grid, result.ewv_curve, np.full(result.beta_grid.size, bound)])
        header = "beta,ewv_times_nt,bound_times_nt\n"
        summary = result.to_dict()
        summary.pop("beta_grid")
        summary.pop("ewv_times_nt")
    else:
        betas = parse_betas(args.betas)
        results = [
            scenario_b(b, args.restarts, args.seed, trace=args.trace, n_jobs=worker_count())
            for b in betas
        ]
        opt = np.array([r.ewv_opt for r in results])
        rows = np.column_stack([betas, opt, np.full(betas.size, bound)])
        header = "beta,ewv_opt_times_nt,bound_times_nt\n"
        summary = {"results": [r.to_dict(include_trace=args.trace) for r in results]}
    if args.format == "json":
        summary["bound_times_nt"] = bound
        summary["rows"] = rows.tolist()
        _emit(json.dumps(summary, indent=2) + "\n", args.output)
    else:
        _emit(header + _csv_rows(rows), args.output)
    return EXIT_OK


def cmd_optimize(args) -> int:
    if args.beta is None:
        raise UsageError("optimize needs --beta")
    result = scenario_b(
        parse_angle(args.beta), args.restarts, args.seed, trace=args.trace, n_jobs=worker_count()
    )
    _emit(json.dumps(result.to_dict(include_trace=args.trace), indent=2) + "\n", args.output)
    return EXIT_OK


def cmd_simulate(args) -> int:
    scheme = scheme_from_args(args)
    d = scheme.dimension
    state = parse_vector(args.state) if args.state is not None else np.eye(d * d)[0]
    cfg = TrialConfig(scheme, state, args.trials, args.seed, project_physical=args.project_physical)
    report = run_trials(cfg, workers=worker_count(), dump_csv=args.dump_csv)
    doc = {"trials": report.to_dict()}
    ok = report.passed
    if args.haar_samples:
        avg = verify_average(scheme, args.haar_samples, args.seed)
        doc["average"] = avg.to_dict()
        ok = ok and avg.passed
    doc["passed"] = ok
    if args.format == "json":
        _emit(json.dumps(doc, indent=2) + "\n", args.output)
    else:
        lines = [
            f"empirical_ewv,{_fmt(report.empirical_ewv)}",
            f"standard_error,{_fmt(report.standard_error)}",
            f"analytic_ewv,{_fmt(report.analytic_ewv)}",
            f"z_score,{_fmt(report.z_score)}",
        ]
        for k, (v, w) in enumerate(zip(report.component_variances, report.analytic_component_variances)):
            lines.append(f"variance_S{k},{_fmt(v)},{_fmt(w)}")
        if "average" in doc:
            lines.append(f"average_z_score,{_fmt(doc['average']['z_score'])}")
        lines.append("result," + ("PASS" if ok else "FAIL"))
        _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_export(args) -> int:
    scheme = scheme_from_args(args)
    _emit(scheme.to_json(indent=2) + "\n", args.output)
    return EXIT_OK


def _add_scheme_args(p):
    p.add_argument("--builtin", choices=["pauli6", "sic2", "ftt", "twoplate"])
    p.add_argument("--scheme", metavar="FILE", help="scheme JSON document")
    p.add_argument("--ncal", type=float, default=1.0, help="counts per POVM group")
    p.add_argument("--beta", help="retardance, e.g. 0.7pi")
    p.add_argument("--settings", type=int, default=6, help="FTT orientations")
    p.add_argument(
        "--angles", default=DEFAULT_TWOPLATE_ANGLES, help="two-plate orientations 'p1,p2;p1,p2;...'"
    )


def _add_output_args(p, default_format="json"):
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--format", choices=["json", "csv"], default=default_format)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tomoewv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("matrix", help="measurement matrix, SVD and pseudo-inverse")
    _add_scheme_args(p)
    _add_output_args(p, "csv")
    p.add_argument("--row-order", choices=["group", "outcome"], default="group")
    p.add_argument("--only", choices=["matrix", "singular_values", "rank", "pseudo_inverse"])
    p.add_argument("--require-complete", action="store_true")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("ewv", help="average or state-dependent EWV and lower bound")
    _add_scheme_args(p)
    _add_output_args(p)
    p.add_argument("--state", help="coefficient vector S_0,...,S_{d^2-1}")
    p.set_defaults(func=cmd_ewv)

    p = sub.add_parser("sweep", help="retardance sweep data (FTT or two plates)")
    _add_scheme_args(p)
    _add_output_args(p, "csv")
    p.add_argument("--points", type=int, default=256)
    p.add_argument("--betas", default=DEFAULT_SWEEP_BETAS)
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("optimize", help="two-plate orientation optimization at one retardance")
    _add_output_args(p)
    p.add_argument("--beta")
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", action="store_true")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("simulate", help="Poisson Monte Carlo against the analytic EWV")
    _add_scheme_args(p)
    _add_output_args(p, "csv")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--state", help="true coefficient vector (default maximally mixed)")
    p.add_argument("--project-physical", action="store_true")
    p.add_argument("--haar-samples", type=int, default=0)
    p.add_argument("--dump-csv", metavar="FILE")
    # Poisson closure checks need large counts; 1e4 per group by default
    p.set_defaults(func=cmd_simulate, ncal=1e4)

    p = sub.add_parser("export", help="write a built-in scheme as JSON")
    _add_scheme_args(p)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"tomoewv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TomographyError as exc:
        print(f"tomoewv: {exc}", file=sys.stderr)
        return EXIT_MATH


if __name__ == "__main__":
    sys.exit(main())
