"""Command-line front end: verification commands and machine-readable reports.

Exit codes: 0 when every case passes, 1 when any numerical case fails,
2 on configuration errors.  Reports are CSV (RFC 4180) or JSON; floats are
serialized with 17 significant digits so reruns diff cleanly.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import estimate, flow
from .errors import BieberbachLabError, ConfigError
from .geometry import build_surface, mobius_recentered

__all__ = ["main", "run", "ReportRow", "DEFAULT_TOLERANCES"]

DEFAULT_TOLERANCES = {
    "slack": 1e-9,        # admissible negative slack in the estimate battery
    "first_var": 1e-6,    # sup_t || M(t) - e^{-t} I ||
    "din8": 1e-7,         # relative residual of the scaled second variation law
    "lemma24": 1e-5,      # scaled cross-pipeline Hessian residual
    "lemma22": 1e-12,     # admissible negative margin in the composition check
    "scan_slack": 1e-9,   # admissible negative slack in the scan table
}

CSV_COLUMNS = ("case_id", "surface", "basepoint", "quantity", "value",
               "reference_value", "residual", "pass")


@dataclass(frozen=True)
class ReportRow:
    case_id: str
    surface: str
    basepoint: str
    quantity: str
    value: float
    reference_value: float | None
    residual: float
    passed: bool


def _fmt(x) -> str:
    if x is None:
        return ""
    return "%.17g" % float(x)


def _write_csv(rows, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow([r.case_id, r.surface, r.basepoint, r.quantity,
                         _fmt(r.value), _fmt(r.reference_value),
                         _fmt(r.residual), str(r.passed).lower()])


def _write_json(rows, stream, command, seed):
    doc = {
        "command": command,
        "seed": seed,
        "rows": [{
            "case_id": r.case_id,
            "surface": r.surface,
            "basepoint": r.basepoint,
            "quantity": r.quantity,
            "value": r.value,
            "reference_value": r.reference_value,
            "residual": r.residual,
            "pass": r.passed,
        } for r in rows],
    }
    json.dump(doc, stream, indent=2)
    stream.write("\n")


def _emit(rows, args, command, seed=None):
    buf = io.StringIO()
    if args.format == "json":
        _write_json(rows, buf, command, seed)
    else:
        _write_csv(rows, buf)
    text = buf.getvalue()
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _thread_count() -> int:
    raw = os.environ.get("BIEBERBACH_LAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _case_mapper():
    """An order-preserving map honoring the thread cap from the environment."""
    workers = _thread_count()
    if workers == 1:
        return map

    def mapper(fn, items):
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))

    return mapper


def _parse_params(pairs) -> dict:
    out = {}
    for chunk in pairs or []:
        for item in chunk.split(","):
            if not item:
                continue
            if "=" not in item:
                raise ConfigError(f"malformed parameter {item!r}, expected key=value")
            key, _, raw = item.partition("=")
            try:
                out[key.strip()] = float(raw)
            except ValueError:
                raise ConfigError(f"parameter {key!r} has a non-numeric value {raw!r}")
    return out


def _parse_mobius(spec) -> tuple[complex, float]:
    a = 0j
    theta = 0.0
    if not spec:
        return a, theta
    for item in spec.split(","):
        if not item:
            continue
        key, _, raw = item.partition("=")
        key = key.strip()
        try:
            if key == "a":
                a = complex(raw)
            elif key == "theta":
                theta = float(raw)
            else:
                raise ConfigError(f"unknown recentring key {key!r}")
        except ValueError:
            raise ConfigError(f"malformed recentring value {raw!r}")
    if abs(a) >= 1.0:
        raise ConfigError("recentring parameter must satisfy |a| < 1")
    return a, theta


def _extract_tolerances(argv):
    tols = dict(DEFAULT_TOLERANCES)
    rest = []
    for token in argv:
        if token.startswith("--tol."):
            body = token[len("--tol."):]
            name, eq, raw = body.partition("=")
            if not eq or name not in tols:
                raise ConfigError(f"unknown tolerance flag {token!r}")
            try:
                tols[name] = float(raw)
            except ValueError:
                raise ConfigError(f"malformed tolerance value {raw!r}")
        else:
            rest.append(token)
    return tols, rest


def _point_label(p) -> str:
    return "(" + ";".join(_fmt(c) for c in np.asarray(p, dtype=float)) + ")"


# -- commands -----------------------------------------------------------------


def _cmd_verify_theorem(args, tols) -> tuple[list[ReportRow], int]:
    rows = []
    tol = tols["slack"]
    if args.surface:
        params = _parse_params(args.param)
        a, theta = _parse_mobius(args.mobius)
        surface = build_surface(args.surface, **params)
        if a != 0j or theta != 0.0:
            surface = mobius_recentered(surface, a, theta)
        report = estimate.evaluate_theorem(surface)
        rows.append(ReportRow(
            case_id="theorem-0000", surface=surface.name,
            basepoint=_point_label(surface.basepoint()), quantity="slack",
            value=report.slack, reference_value=0.0,
            residual=max(0.0, -report.slack), passed=report.slack >= -tol))
    else:
        cases = estimate.theorem_battery(count=args.battery, seed=args.seed,
                                         mapper=_case_mapper())
        for case in cases:
            rows.append(ReportRow(
                case_id=case.case_id,
                surface=f"{case.surface_key}{case.params or ''}",
                basepoint=f"(a={_fmt(case.mobius_a.real)}+{_fmt(case.mobius_a.imag)}i;"
                          f"theta={_fmt(case.mobius_theta)})",
                quantity="slack", value=case.report.slack, reference_value=0.0,
                residual=max(0.0, -case.report.slack),
                passed=case.report.slack >= -tol))
    return rows, 0 if all(r.passed for r in rows) else 1


def _lemma21_rows(args, tols) -> list[ReportRow]:
    params = _parse_params(args.param)
    field_key = args.field or "bernoulli"
    F = flow.build_field(field_key, **params)
    if F.dim == 1:
        v = w = np.ones(1)
    else:
        v = np.eye(F.dim)[0]
        w = np.eye(F.dim)[1]
    report = flow.check_lemma21(F, v, w, T=args.T)
    base = _point_label(F.fixed_point)
    rows = [
        ReportRow("lemma21-firstvar", F.name, base, "first_var_sup",
                  report.first_var_sup, 0.0, report.first_var_sup,
                  report.first_var_sup <= tols["first_var"]),
        ReportRow("lemma21-din8", F.name, base, "din8_relative_residual",
                  report.din8_relative, 0.0, report.din8_relative,
                  report.din8_relative <= tols["din8"]),
        ReportRow("lemma21-tail", F.name, base, "tail_discrepancy",
                  report.tail, 0.0, report.tail, True),
    ]
    if args.dump_trajectory:
        with open(args.dump_trajectory, "w", encoding="utf-8") as fh:
            json.dump(flow.trajectory_records(report.trajectory), fh, indent=2)
            fh.write("\n")
    return rows


def _lemma22_rows(args, tols) -> list[ReportRow]:
    params = _parse_params(args.param)
    surface = build_surface(args.surface or "plane", **params)
    germ = estimate.build_germ(args.phi or "half")
    center = complex(args.center) if args.center else 0j
    report = estimate.lemma22_check(surface, germ, center=center, grid_check=True)
    passed = report.margin >= -tols["lemma22"]
    if germ.a2 == 0:
        # only then is the analytic unimodular factor the norm minimizer
        passed = passed and report.grid_gap <= 1e-6
    return [ReportRow("lemma22-0000", surface.name, f"(center={args.center or 0})",
                      "margin", report.margin, 0.0, max(0.0, -report.margin), passed)]


def _lemma24_rows(args, tols) -> list[ReportRow]:
    if args.surface:
        params = _parse_params(args.param)
        surfaces = [(args.surface, params,
                     "tangential" if args.surface == "graph" else "conformal")]
        cases = estimate.lemma24_battery(seed=args.seed, pairs=args.pairs,
                                         surfaces=surfaces)
    else:
        cases = estimate.lemma24_battery(seed=args.seed, pairs=args.pairs)
    return [ReportRow(c.case_id, c.surface, "(0;0)", "hessian_identity_residual",
                      c.residual_scaled, 0.0, c.residual_scaled,
                      c.residual_scaled <= tols["lemma24"]) for c in cases]


def _cmd_verify_lemma(args, tols) -> tuple[list[ReportRow], int]:
    which = args.which
    if which == "2.1":
        rows = _lemma21_rows(args, tols)
    elif which == "2.2":
        rows = _lemma22_rows(args, tols)
    elif which == "2.4":
        rows = _lemma24_rows(args, tols)
    else:
        raise ConfigError(f"unknown lemma {which!r}; choose 2.1, 2.2 or 2.4")
    return rows, 0 if all(r.passed for r in rows) else 1


def _cmd_helicoid_scan(args, tols) -> tuple[list[ReportRow], int]:
    try:
        values = [float(tok) for tok in args.R.split(",") if tok]
    except ValueError:
        raise ConfigError(f"malformed scale list {args.R!r}")
    if not values or any(v <= 0 for v in values):
        raise ConfigError("scan requires a nonempty list of positive scales")
    rows = []
    scan = estimate.helicoid_scan(values, basepoint_x=args.basepoint)
    for i, row in enumerate(scan):
        ok = row.slack >= -tols["scan_slack"]
        for quantity, value in (("naive_ratio", row.naive_ratio),
                                ("geometric_ratio", row.geometric_ratio),
                                ("slack", row.slack)):
            rows.append(ReportRow(
                case_id=f"scan-{i:02d}-{quantity}", surface=f"helicoid(r={_fmt(row.R)})",
                basepoint=f"(x0={_fmt(args.basepoint)})", quantity=quantity,
                value=value, reference_value=None,
                residual=max(0.0, -row.slack) if quantity == "slack" else 0.0,
                passed=ok if quantity == "slack" else True))
    return rows, 0 if all(r.passed for r in rows) else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bieberbach-lab",
        description="Verification commands for the conformal coefficient estimate lab")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--output", help="write the report to this path")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--seed", type=int, default=0)

    p_thm = sub.add_parser("verify-theorem", help="estimate slack per case")
    p_thm.add_argument("--surface", help="registry key for a single-case run")
    p_thm.add_argument("--param", action="append", help="surface parameters k=v[,k=v]")
    p_thm.add_argument("--mobius", help="recentring a=<complex>[,theta=<float>]")
    p_thm.add_argument("--battery", type=int, default=108,
                       help="randomized case count when --surface is omitted")
    common(p_thm)

    p_lem = sub.add_parser("verify-lemma", help="supporting-identity batteries")
    p_lem.add_argument("--which", required=True, help="2.1, 2.2 or 2.4")
    p_lem.add_argument("--field", help="field key for lemma 2.1")
    p_lem.add_argument("--surface", help="surface key for lemmas 2.2 / 2.4")
    p_lem.add_argument("--param", action="append", help="parameters k=v[,k=v]")
    p_lem.add_argument("--phi", help="germ key for lemma 2.2")
    p_lem.add_argument("--center", help="recentring point for lemma 2.2")
    p_lem.add_argument("--pairs", type=int, default=10,
                       help="random direction pairs per surface for lemma 2.4")
    p_lem.add_argument("--T", type=float, default=15.0, help="horizon for lemma 2.1")
    p_lem.add_argument("--dump-trajectory", help="write lemma 2.1 trajectory records here")
    common(p_lem)

    p_scan = sub.add_parser("helicoid-scan", help="scaling experiment table")
    p_scan.add_argument("--R", default="1,2,4,8", help="comma list of chart scales")
    p_scan.add_argument("--basepoint", type=float, default=0.0,
                        help="surface x-coordinate of the evaluation basepoint")
    common(p_scan)
    return parser


def run(argv) -> int:
    try:
        tols, rest = _extract_tolerances(list(argv))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    parser = _build_parser()
    try:
        args = parser.parse_args(rest)
    except SystemExit as exc:
        return int(exc.code or 0)

    handlers = {
        "verify-theorem": _cmd_verify_theorem,
        "verify-lemma": _cmd_verify_lemma,
        "helicoid-scan": _cmd_helicoid_scan,
    }
    try:
        rows, code = handlers[args.command](args, tols)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BieberbachLabError as exc:
        print(f"case failure: {exc}", file=sys.stderr)
        return 1
    _emit(rows, args, args.command, getattr(args, "seed", None))
    return code


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
