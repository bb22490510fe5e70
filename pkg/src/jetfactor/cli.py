"""Command-line front end: check, find-mu, reduce, verify."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional

from . import mufinder as mf
from .numverify import (
    DEFAULT_RUNS,
    DEFAULT_SPAN,
    DEFAULT_STEP,
    DEFAULT_TOL,
    DriftReport,
    NumVerifyError,
    rk4_trajectory,
    verify_first_integral,
    write_trajectory_csv,
)
from .ode_model import (
    BasePointSingular,
    ExactnessReport,
    FirstIntegral,
    OdeError,
    QuasiLinearOde,
    apply_factor,
    exactness_report,
    first_integral,
    format_ode,
    parse_base,
    read_ode_file,
)
from .symcore import (
    EvaluationError,
    InconclusiveDomain,
    ParseError,
    ProbeBox,
    ProbeSettings,
    as_var,
    parse_expr,
    print_expr,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_EXACT = 3
EXIT_NO_FACTOR = 4
EXIT_VERIFY_FAILED = 5


@dataclass
class RunDocument:
    command: str
    seed: int
    input: Optional[str] = None
    exactness: Optional[dict] = None
    factor: Optional[dict] = None
    first_integral: Optional[dict] = None
    verification: Optional[List[dict]] = None
    diagnostics: List[str] = field(default_factory=list)
    error: Optional[dict] = None
    exit_code: int = EXIT_OK

    def to_dict(self) -> dict:
        out = {"command": self.command, "seed": self.seed, "exit_code": self.exit_code}
        for key in ("input", "exactness", "factor", "first_integral", "verification", "error"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        out["diagnostics"] = list(self.diagnostics)
        return out


# --------------------------------------------------------------------------
# summaries


def _num(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def exactness_summary(report: ExactnessReport) -> dict:
    return {
        "exact": report.exact,
        "violated": len(report.violated),
        "conditions": [
            {
                "kind": c.kind,
                "pair": list(c.pair),
                "condition": c.label,
                "residual": print_expr(c.residual),
                "holds": c.holds,
                "verdict": c.verdict.describe(),
            }
            for c in report.conditions
        ],
        "notes": list(report.notes),
    }


def factor_summary(res: mf.FactorResult, attempts=()) -> dict:
    out = {
        "mu": print_expr(res.mu),
        "path": res.path,
        "xi": print_expr(res.xi.xi) if res.xi is not None else None,
        "g": print_expr(res.g),
        "certified": res.certificate.exact,
    }
    if res.exponents is not None:
        out["exponents"] = [_num(a) for a in res.exponents]
        out["family"] = [[_num(a) for a in v] for v in res.family]
    out["notes"] = list(res.notes)
    out["attempts"] = [{"path": p, "error": e} for p, e in attempts]
    return out


def integral_summary(fi: FirstIntegral) -> dict:
    return {
        "psi": print_expr(fi.psi),
        "equation": f"{print_expr(fi.psi)} = c",
        "base_point": {k: _num(v) for k, v in fi.base_point.items()},
        "status": fi.status,
        "blocked": list(fi.blocked),
    }


def drift_summary(rep: DriftReport) -> dict:
    return {
        "run": rep.seed,
        "t0": rep.t0,
        "init": list(rep.init),
        "psi0": rep.psi0,
        "max_drift": rep.max_drift,
        "normalized_drift": rep.normalized_drift,
        "steps_used": rep.steps_used,
        "tol": rep.tol,
        "passed": rep.passed,
        "early_stop": rep.early_stop,
    }


# --------------------------------------------------------------------------
# rendering


def render_text(doc: RunDocument) -> str:
    lines = [f"command: {doc.command}", f"seed: {doc.seed}"]
    if doc.input is not None:
        lines.append("input:")
        lines += [f"  {ln}" for ln in doc.input.strip().splitlines()]
    if doc.exactness is not None:
        ex = doc.exactness
        lines.append(f"exactness: {'exact' if ex['exact'] else 'conditions violated'} ({ex['violated']} violated)")
        for c in ex["conditions"]:
            mark = "ok  " if c["holds"] else "FAIL"
            lines.append(f"  [{mark}] {c['condition']}: {c['verdict']}")
        lines += [f"  note: {n}" for n in ex["notes"]]
    if doc.factor is not None:
        f = doc.factor
        if "mu" in f:
            lines.append(f"factor: mu = {f['mu']} (path {f['path']})")
        else:
            lines.append("factor: none certified")
        if f.get("xi") is not None:
            lines.append(f"  xi = {f['xi']}, g(s) = {f['g']}")
        if "exponents" in f:
            lines.append(f"  exponents (t, y, y1, ...) = ({', '.join(f['exponents'])})")
        if "certified" in f:
            lines.append(f"  certificate: {'exact' if f['certified'] else 'FAILED'}")
        lines += [f"  note: {n}" for n in f.get("notes", [])]
        lines += [f"  tried {a['path']}: {a['error']}" for a in f["attempts"]]
    if doc.first_integral is not None:
        fi = doc.first_integral
        lines.append(f"first integral ({fi.get('status', 'supplied')}): {fi['equation']}")
        if "base_point" in fi:
            lines.append(f"  base point: {', '.join(f'{k}={v}' for k, v in fi['base_point'].items())}")
        lines += [f"  blocked: {b}" for b in fi.get("blocked", [])]
    if doc.verification is not None:
        lines.append("verification:")
        for r in doc.verification:
            mark = "pass" if r["passed"] else "FAIL"
            lines.append(
                f"  [{mark}] run {r['run']}: t0={r['t0']:.6g} normalized drift {r['normalized_drift']:.3e}"
                f" (tol {r['tol']:g}, {r['steps_used']} steps)"
            )
    if doc.error is not None:
        lines.append(f"error: {doc.error['type']}: {doc.error['message']}")
    lines += [f"diagnostic: {d}" for d in doc.diagnostics]
    lines.append(f"exit code: {doc.exit_code}")
    return "\n".join(lines) + "\n"


def render_json(doc: RunDocument) -> str:
    return json.dumps(doc.to_dict(), indent=2) + "\n"


# --------------------------------------------------------------------------
# commands


def _settings(args) -> ProbeSettings:
    box = ProbeBox()
    if args.box:
        lo, sep, hi = args.box.partition(":")
        if not sep:
            raise ValueError(f"--box expects lo:hi, got {args.box!r}")
        box = ProbeBox.uniform(float(lo), float(hi))
    if args.probes < 1:
        raise ValueError("--probes must be positive")
    return ProbeSettings(args.probes, args.tol, box, args.seed)


def _load(doc: RunDocument, args, settings):
    ode, base = read_ode_file(args.input, settings)
    doc.input = format_ode(ode, base)
    return ode, base


def _fail(doc: RunDocument, exc: Exception, code: int) -> RunDocument:
    doc.error = {"type": type(exc).__name__, "message": str(exc)}
    doc.exit_code = code
    return doc


def cmd_check(args, settings, doc: RunDocument) -> RunDocument:
    ode, _ = _load(doc, args, settings)
    report = exactness_report(ode, settings)
    doc.exactness = exactness_summary(report)
    doc.exit_code = EXIT_OK if report.exact else EXIT_NOT_EXACT
    return doc


def _xi_choice(text: str, n: int):
    """--xi value -> ('auto'|'ansatz'|'time'|'jet'|'given', payload)."""
    if text in ("auto", "ansatz", "t"):
        return ({"t": "time"}.get(text, text), None)
    if text.startswith("expr:"):
        return ("given", mf.XiSpec.from_expr(parse_expr(text[5:], max_order=n - 1), n))
    try:
        v = as_var(text)
    except ValueError:
        raise ValueError(f"--xi expects t, y, y1..y{n - 1}, auto, ansatz or expr:<text>; got {text!r}") from None
    if v.kind != "y" or v.k >= n:
        raise ValueError(f"--xi {text}: jet variable must be one of y..y{n - 1}")
    return ("jet", v.k + 1)


def _find_factor(ode: QuasiLinearOde, xi_text: str, bound: int, settings):
    kind, payload = _xi_choice(xi_text, ode.n)
    if kind == "auto":
        out = mf.find_mu_auto(ode, settings, bound)
        return out.result, out.attempts, None
    try:
        if kind == "time":
            res = mf.find_mu_time(ode, settings)
        elif kind == "jet":
            res = mf.find_mu_jet(ode, payload, settings)
        elif kind == "ansatz":
            res = mf.find_mu_power_ansatz(ode, bound, settings)
        else:
            res = mf.find_mu_given_xi(ode, payload, settings)
    except mf.MuFinderError as exc:
        return None, ((kind, str(exc)),), exc
    return res, (), None


def cmd_find_mu(args, settings, doc: RunDocument) -> RunDocument:
    ode, _ = _load(doc, args, settings)
    report = exactness_report(ode, settings)
    doc.exactness = exactness_summary(report)
    res, attempts, exc = _find_factor(ode, args.xi, args.ansatz_bounds, settings)
    if res is None:
        doc.factor = {"attempts": [{"path": p, "error": e} for p, e in attempts]}
        if exc is not None:
            return _fail(doc, exc, EXIT_NO_FACTOR)
        doc.error = {"type": "NoCertifiedFactor", "message": "no candidate factor certified"}
        doc.exit_code = EXIT_NO_FACTOR
        return doc
    doc.factor = factor_summary(res, attempts)
    return doc


def _integral_with_retry(ode: QuasiLinearOde, base, settings, doc: RunDocument) -> FirstIntegral:
    seen = set()
    if base is not None:
        try:
            return first_integral(ode, base, settings)
        except BasePointSingular as exc:
            seen.add(str(exc))
            doc.diagnostics.append(f"{exc}; retrying with the default base points")
    fi = first_integral(ode, None, settings)
    for msg in fi.attempts:
        if msg not in seen:
            doc.diagnostics.append(f"{msg}; retrying with the next default base point")
    return fi


def cmd_reduce(args, settings, doc: RunDocument) -> RunDocument:
    ode, file_base = _load(doc, args, settings)
    report = exactness_report(ode, settings)
    doc.exactness = exactness_summary(report)
    scaled = ode
    if not report.exact:
        res, attempts, exc = _find_factor(ode, args.xi, args.ansatz_bounds, settings)
        if res is None:
            doc.factor = {"attempts": [{"path": p, "error": e} for p, e in attempts]}
            if exc is not None:
                return _fail(doc, exc, EXIT_NO_FACTOR)
            doc.error = {"type": "NoCertifiedFactor", "message": "no candidate factor certified"}
            doc.exit_code = EXIT_NO_FACTOR
            return doc
        doc.factor = factor_summary(res, attempts)
        scaled = apply_factor(ode, res.mu, settings)
    base = parse_base(args.base) if args.base else file_base
    fi = _integral_with_retry(scaled, base, settings, doc)
    doc.first_integral = integral_summary(fi)
    if not fi.closed:
        doc.exit_code = EXIT_VERIFY_FAILED
        doc.diagnostics.append("first integral is incomplete: some coordinate integrals are unsupported")
        return doc
    if args.verify or args.dump_csv:
        reports = verify_first_integral(ode, fi.psi, settings, args.runs, args.span, args.step, args.drift_tol)
        if args.verify:
            doc.verification = [drift_summary(r) for r in reports]
            if not all(r.passed for r in reports):
                doc.exit_code = EXIT_VERIFY_FAILED
        if args.dump_csv:
            first = reports[0]
            traj = rk4_trajectory(ode, first.init, (first.t0, first.t0 + args.span), args.step)
            with open(args.dump_csv, "w", encoding="utf-8", newline="") as fh:
                write_trajectory_csv(fh, traj, fi.psi)
            doc.diagnostics.append(f"trajectory of run 0 written to {args.dump_csv}")
    return doc


def cmd_verify(args, settings, doc: RunDocument) -> RunDocument:
    ode, _ = _load(doc, args, settings)
    psi = parse_expr(args.psi, max_order=ode.n - 1)
    doc.first_integral = {"psi": print_expr(psi), "equation": f"{print_expr(psi)} = c", "supplied": True}
    reports = verify_first_integral(ode, psi, settings, args.runs, args.span, args.step, args.drift_tol)
    doc.verification = [drift_summary(r) for r in reports]
    worst = max(r.normalized_drift for r in reports)
    doc.diagnostics.append(f"largest normalized drift {worst:.3e} (tol {args.drift_tol:g})")
    doc.exit_code = EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFY_FAILED
    return doc


COMMANDS = {"check": cmd_check, "find-mu": cmd_find_mu, "reduce": cmd_reduce, "verify": cmd_verify}


# --------------------------------------------------------------------------
# argument parsing


def _add_globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    def d(value):
        return argparse.SUPPRESS if suppress else value

    p.add_argument("--json", action="store_true", default=d(False), help="emit a JSON document")
    p.add_argument("--seed", type=int, default=d(0), help="probe and trajectory seed (default 0)")
    p.add_argument("--probes", type=int, default=d(32), help="random probes per zero test (default 32)")
    p.add_argument("--tol", type=float, default=d(1e-9), help="relative tolerance of zero tests (default 1e-9)")
    p.add_argument("--box", default=d(None), metavar="LO:HI", help="probe interval for every variable, e.g. --box=-2:2")


def _add_verify_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--runs", type=int, default=DEFAULT_RUNS, help="number of random trajectories")
    p.add_argument("--span", type=float, default=DEFAULT_SPAN, help="length of each trajectory in t")
    p.add_argument("--step", type=float, default=DEFAULT_STEP, help="RK4 step size")
    p.add_argument("--drift-tol", type=float, default=DEFAULT_TOL, help="bound on normalized drift")


def _add_xi_opts(p: argparse.ArgumentParser, default: str) -> None:
    p.add_argument(
        "--xi",
        default=default,
        help="factor shape: t, y, y1, ..., auto, ansatz, or expr:<product in t, y, ...>",
    )
    p.add_argument("--ansatz-bounds", type=int, default=mf.DEFAULT_BOUND, help="max |numerator|, denominator of exponents")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jetfactor", description="Exactness, integrating factors and first integrals of quasi-linear ODEs.")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="decide exactness")
    p.add_argument("input", help="ODE file")
    _add_globals(p, suppress=True)

    p = sub.add_parser("find-mu", help="search for an integrating factor")
    p.add_argument("input")
    _add_xi_opts(p, "auto")
    _add_globals(p, suppress=True)

    p = sub.add_parser("reduce", help="first integral (after a factor if needed)")
    p.add_argument("input")
    p.add_argument("--base", help="base point, e.g. 't0=0, y0=1, y1=0'")
    p.add_argument("--verify", action="store_true", help="check the first integral along random trajectories")
    p.add_argument("--dump-csv", metavar="PATH", help="write one trajectory with psi values as CSV")
    _add_xi_opts(p, "auto")
    _add_verify_opts(p)
    _add_globals(p, suppress=True)

    p = sub.add_parser("verify", help="drift check of a supplied first integral")
    p.add_argument("input")
    p.add_argument("--psi", required=True, help="candidate first integral")
    _add_verify_opts(p)
    _add_globals(p, suppress=True)
    return parser


def run(argv=None) -> RunDocument:
    args = build_parser().parse_args(argv)
    doc = RunDocument(args.command, args.seed)
    try:
        settings = _settings(args)
        return COMMANDS[args.command](args, settings, doc)
    except (OSError, ParseError, OdeError, EvaluationError, InconclusiveDomain, NumVerifyError, ValueError) as exc:
        return _fail(doc, exc, EXIT_ERROR)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    doc = run(argv)
    out = render_json(doc) if args.json else render_text(doc)
    sys.stdout.write(out)
    return doc.exit_code


if __name__ == "__main__":
    sys.exit(main())
