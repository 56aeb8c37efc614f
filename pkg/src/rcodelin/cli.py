"""Command-line front end.

Exit codes: 0 pass, 1 fail, 2 inconclusive, 64 usage error, 65 bad input.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import cubic, odeint, realify, registry, symmetry, transform
from .cubic import COEFF_SYMBOLS, ODE_SYMBOLS
from .expr import EvaluationError, ParseError, parse, to_string
from .problem import ProblemError, ProblemFile, load_problem, parse_box_spec
from .sampling import FAIL, INCONCLUSIVE, PASS, ResidualReport, SamplingConfig

EXIT_PASS, EXIT_FAIL, EXIT_INCONCLUSIVE = 0, 1, 2
EXIT_USAGE, EXIT_DATA = 64, 65
SCHEMA = 1

_EXIT = {PASS: EXIT_PASS, FAIL: EXIT_FAIL, INCONCLUSIVE: EXIT_INCONCLUSIVE}
_INTERP = {"W=K": cubic.W_MEANS_K, "W=k": cubic.W_MEANS_k}
_CONVENTION = {"full": symmetry.FULL_WEIGHT, "half": symmetry.HALF_WEIGHT}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_common(p, suppress: bool):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--tol", type=float, default=d, help="residual tolerance (default 1e-8)")
    p.add_argument("--samples", type=int, default=d, help="sample points (default 64)")
    p.add_argument("--seed", type=int, default=d, help="random seed (default 42)")
    p.add_argument("--box", default=d, help="sampling boxes, e.g. x=0.1:2.1,u=-2:2:-2:2")
    p.add_argument("--format", choices=("text", "json"), default=d)
    p.add_argument("--interp", choices=tuple(_INTERP), default=d,
                   help="reading of W in the auxiliary system (default W=K)")
    p.add_argument("--convention", choices=tuple(_CONVENTION), default=d,
                   help="vector-field split weight (default full)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rcodelin", description="Linearizability checks for complex ODEs and real systems.")
    _add_common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    for name, help_text in (
        ("check-complex", "Lie compatibility conditions of a complex cubic ODE"),
        ("check-real", "real conditions of the split system"),
        ("decompose", "cubic coefficients and their real split"),
        ("symmetry", "verify candidate point symmetries"),
        ("classify", "classify a pair of symmetries"),
        ("transform", "verify a point transformation"),
        ("verify-solution", "substitute a closed-form solution"),
        ("integrate", "integrate a real system with RK4"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("problem", help="TOML problem file")
        _add_common(p, suppress=True)
        if name == "integrate":
            p.add_argument("--output", help="write the trajectory CSV here ('-' for stdout)")
    ex = sub.add_parser("examples", help="built-in worked examples")
    _add_common(ex, suppress=True)
    ex.add_argument("action", choices=("list", "run", "run-all"))
    ex.add_argument("id", nargs="?")
    return parser


def _config(args, problem: ProblemFile | None = None) -> SamplingConfig:
    changes = dict(problem.sampling) if problem else {}
    if problem and problem.ufuncs:
        changes["ufunc_instantiations"] = dict(problem.ufuncs)
    if args.tol is not None:
        changes["tolerance"] = args.tol
    if args.samples is not None:
        changes["points"] = args.samples
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.box:
        try:
            boxes = parse_box_spec(args.box)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        changes["box"] = {**changes.get("box", {}), **boxes}
    try:
        return SamplingConfig().with_overrides(**changes)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _report(command, source, conditions, verdict, cfg, **extra) -> dict:
    out = {
        "schema": SCHEMA,
        "command": command,
        "input": source,
        "conditions": conditions,
        "verdict": verdict,
        "seed": cfg.seed,
    }
    out.update(extra)
    return out


def _conditions(report: ResidualReport) -> list:
    return [
        {
            "name": c.name,
            "max_residual": c.max_normalized_residual,
            "samples": c.sample_count,
            "verdict": PASS if c.passed(report.tolerance) else FAIL,
        }
        for c in report.conditions
    ]


def _merge(reports) -> tuple:
    conds = [c for r in reports for c in _conditions(r)]
    verdicts = [r.verdict for r in reports]
    if INCONCLUSIVE in verdicts:
        return conds, INCONCLUSIVE
    return conds, PASS if all(v == PASS for v in verdicts) else FAIL


def _interp(args):
    return _INTERP[args.interp or "W=K"]


def _convention(args):
    return _CONVENTION[args.convention or "full"]


def _rhs(problem: ProblemFile, key="rhs", order=2):
    (text,) = problem.require(key)
    return parse(text, ODE_SYMBOLS if order == 2 else COEFF_SYMBOLS)


def _extract(problem, cfg):
    w = _rhs(problem)
    try:
        return w, cubic.extract_cubic(w, cfg), None
    except cubic.NotCubic as exc:
        cond = {"name": "cubic_form", "max_residual": exc.max_residual, "samples": cfg.points, "verdict": FAIL}
        return w, None, cond


def _need_kind(problem, *kinds):
    if problem.kind not in kinds:
        raise ProblemError(f"{problem.path}: this command needs kind {' or '.join(kinds)}, not {problem.kind!r}")


def _coefficients_dict(ode):
    return {k: to_string(v) for k, v in ode.coefficients().items()}


def cmd_check_complex(args, problem, cfg):
    _need_kind(problem, "complex_ode", "symmetry_check")
    _, ode, bad = _extract(problem, cfg)
    if ode is None:
        return _report(args.command, problem.path, [bad], FAIL, cfg)
    reports = [cubic.check_linearizable_complex(ode, cfg)]
    aux = problem.table("auxiliary", required=False)
    if aux:
        k = parse(aux.get("k", "0"), COEFF_SYMBOLS)
        K = parse(aux.get("K", "0"), COEFF_SYMBOLS)
        reports.append(cubic.check_auxiliary(ode, k, K, cfg, _interp(args)))
    conds, verdict = _merge(reports)
    extra = {"coefficients": _coefficients_dict(ode)}
    if aux:
        extra["interp"] = _interp(args)
    return _report(args.command, problem.path, conds, verdict, cfg, **extra)


def cmd_check_real(args, problem, cfg):
    _need_kind(problem, "complex_ode", "real_system")
    if problem.kind == "real_system":
        coeffs = problem.table("coefficients")
        system = realify.RealCubicSystem.direct(**{k: str(v) for k, v in coeffs.items()})
        report = realify.check_printed_real(system, cfg)
        conds, verdict = _merge([report])
        return _report(args.command, problem.path, conds, verdict, cfg,
                       conditions_source="printed",
                       note="coefficients given directly; no complex parent to cross-check")
    _, ode, bad = _extract(problem, cfg)
    if ode is None:
        return _report(args.command, problem.path, [bad], FAIL, cfg)
    report = realify.check_linearizable_real(ode, cfg)
    conds, verdict = _merge([report])
    audit = realify.cross_check_conditions(ode, cfg)
    return _report(args.command, problem.path, conds, verdict, cfg, conditions_source="derived",
                   printed_audit=audit)


def cmd_decompose(args, problem, cfg):
    _need_kind(problem, "complex_ode")
    w, ode, bad = _extract(problem, cfg)
    if ode is None:
        return _report(args.command, problem.path, [bad], FAIL, cfg)
    conds, verdict = _merge([cubic.check_tresse(w, cfg)])
    coeffs = _coefficients_dict(ode)
    split = {}
    for letter, text in coeffs.items():
        split[f"{letter}1"] = f"Re({text})"
        split[f"{letter}2"] = f"Im({text})"
    return _report(args.command, problem.path, conds, verdict, cfg, coefficients=coeffs, real_coefficients=split)


def _fields(problem, minimum=1):
    fields = problem.get("fields")
    if not isinstance(fields, list) or len(fields) < minimum:
        raise ProblemError(f"{problem.path}: needs at least {minimum} [[fields]] entries")
    out = []
    for f in fields:
        out.append(symmetry.VectorField2.parse(str(f.get("xi", "0")), str(f.get("eta", "0"))))
    return out


def cmd_symmetry(args, problem, cfg):
    _need_kind(problem, "symmetry_check")
    w = _rhs(problem)
    conds = []
    verdicts = []
    for n, Z in enumerate(_fields(problem), 1):
        r = symmetry.symmetry_residual(w, Z, cfg)
        for c in _conditions(r):
            c["name"] = f"Z{n}"
            conds.append(c)
        verdicts.append(r.verdict)
    verdict = INCONCLUSIVE if INCONCLUSIVE in verdicts else (PASS if all(v == PASS for v in verdicts) else FAIL)
    return _report(args.command, problem.path, conds, verdict, cfg)


def cmd_classify(args, problem, cfg):
    _need_kind(problem, "symmetry_check")
    w = _rhs(problem)
    Z1, Z2 = _fields(problem, minimum=2)[:2]
    try:
        c = symmetry.classify_pair(w, Z1, Z2, cfg)
    except symmetry.NotSymmetry as exc:
        conds = _conditions(exc.report)
        for cond in conds:
            cond["name"] = exc.field_name
        return _report(args.command, problem.path, conds, FAIL, cfg, error=str(exc))
    except symmetry.Degenerate as exc:
        return _report(args.command, problem.path, [], INCONCLUSIVE, cfg, error=str(exc))
    split = symmetry.split_pair_checks(Z1, Z2, cfg, _convention(args))
    verdict = FAIL if c.case == symmetry.UNCLASSIFIED else PASS
    expected = problem.get("expected_case")
    if expected is not None and expected != c.case:
        verdict = FAIL
    conds = [{"name": "classification", "max_residual": 0.0, "samples": cfg.points, "verdict": verdict}]
    return _report(args.command, problem.path, conds, verdict, cfg, classification=c.to_dict(), real_split=split)


def _real_system(entry, order, where):
    if isinstance(entry, str):
        return realify.RealSystem.from_complex(parse(entry, ODE_SYMBOLS if order == 2 else COEFF_SYMBOLS), order)
    if isinstance(entry, list) and len(entry) == 2:
        return realify.RealSystem.parse(str(entry[0]), str(entry[1]), order)
    raise ProblemError(f"{where}: a real system is a complex rhs string or a [fy, fz] pair")


def cmd_transform(args, problem, cfg):
    _need_kind(problem, "transform_check")
    order = int(problem.get("order", 2))
    m = problem.table("map")
    reports = []
    if problem.get("real", False):
        source = _real_system(problem.require("source")[0], order, problem.path)
        target = problem.require("target")[0]
        if not (isinstance(target, list) and len(target) == 2):
            raise ProblemError(f"{problem.path}: real target must be a [fy, fz] pair")
        m3 = transform.PointMap3.parse(str(m["chi"]), str(m["upsilon"]), str(m["zeta"]))
        reports.append(transform.verify_real_transformation(source, tuple(map(str, target)), m3, cfg))
    else:
        source, target = problem.require("source", "target")
        src = parse(source, ODE_SYMBOLS if order == 2 else COEFF_SYMBOLS)
        tgt = parse(target, transform.TARGET_SYMBOLS if order == 2 else transform.FIRST_ORDER_TARGET_SYMBOLS)
        inverse = m.get("inverse")
        pm = transform.PointMap2.parse(str(m["chi"]), str(m["U"]), tuple(inverse) if inverse else None)
        reports.append(transform.verify_transformation(src, tgt, pm, cfg, order))
        if inverse:
            reports.append(transform.check_inverse(pm, cfg))
        canon = problem.table("canonical", required=False)
        if canon:
            reports.append(transform.match_canonical_cubic(tgt, canon.get("a", 1), canon.get("b", 0), cfg))
    conds, verdict = _merge(reports)
    notes = [n for r in reports for n in r.notes]
    extra = {"notes": notes} if notes else {}
    return _report(args.command, problem.path, conds, verdict, cfg, **extra)


def _solution(problem):
    sol = problem.table("solution")
    params = {}
    for k, v in problem.table("params", required=False).items():
        params[k] = complex(v[0], v[1]) if isinstance(v, list) else complex(v)
    names = list(problem.get("parameters", []))
    return odeint.ClosedFormSolution.parse(
        u=sol.get("u"), y=sol.get("y"), z=sol.get("z"), parameters=names + list(params), params=params
    )


def cmd_verify_solution(args, problem, cfg):
    _need_kind(problem, "solution_check")
    order = int(problem.get("order", 2))
    sol = _solution(problem)
    if "system" in problem.data:
        equation = _real_system(problem.data["system"], order, problem.path)
    else:
        (text,) = problem.require("equation")
        equation = parse(text, ODE_SYMBOLS if order == 2 else COEFF_SYMBOLS)
    report = odeint.verify_solution(equation, sol, cfg, order)
    conds, verdict = _merge([report])
    return _report(args.command, problem.path, conds, verdict, cfg)


def cmd_integrate(args, problem, cfg):
    _need_kind(problem, "integrate")
    order = int(problem.get("order", 2))
    system = _real_system(problem.require("system")[0], order, problem.path)
    initial, span = problem.require("initial", "span")
    functions = {k: v[0] for k, v in problem.ufuncs.items()}
    try:
        traj = odeint.integrate(
            system, (float(span[0]), *(float(v) for v in initial)), tuple(float(v) for v in span),
            h=float(problem.get("h", 1e-3)), method=problem.get("method", odeint.RK4_FIXED),
            tol=float(problem.get("tol", 1e-9)), functions=functions,
        )
    except (odeint.SingularityEncountered, odeint.StepUnderflow) as exc:
        cond = {"name": "integration", "max_residual": float("inf"), "samples": 0, "verdict": FAIL}
        return _report(args.command, problem.path, [cond], FAIL, cfg, error=str(exc))
    output = getattr(args, "output", None) or problem.get("output")
    conds = []
    verdict = PASS
    if "solution" in problem.data:
        sol = _solution(problem)
        exact = odeint.closed_form_values(sol, traj.x, functions)
        err = float(abs(traj.states[:, :2] - exact[:, :2]).max())
        bound = float(problem.get("track_tol", 1e-5))
        verdict = PASS if err <= bound else FAIL
        conds.append({"name": "closed_form_tracking", "max_residual": err, "samples": len(traj.x),
                      "verdict": verdict})
    else:
        conds.append({"name": "integration", "max_residual": 0.0, "samples": len(traj.x), "verdict": PASS})
    extra = {
        "steps": traj.accepted_steps,
        "rejected_steps": traj.rejected_steps,
        "method": traj.method,
        "final": [float(traj.x[-1]), *map(float, traj.states[-1])],
    }
    if output == "-":
        extra["_csv"] = traj.to_csv()
    elif output:
        traj.to_csv(output)
        extra["output"] = output
    return _report(args.command, problem.path, conds, verdict, cfg, **extra)


def cmd_examples(args, cfg):
    if args.action == "list":
        entries = [{"id": e.id, "title": e.title, "checks": len(e.checks)} for e in registry.registry()]
        return _report("examples list", "registry", [], PASS, cfg, entries=entries)
    if args.action == "run":
        if not args.id:
            raise UsageError("examples run needs an example id")
        try:
            examples = [registry.find(args.id)]
        except KeyError:
            raise UsageError(f"unknown example {args.id!r}") from None
    else:
        if args.id:
            raise UsageError("examples run-all takes no id")
        examples = registry.registry()
    results = [registry.run_example(e, cfg) for e in examples]
    conds = [c for r in results for c in r["checks"]]
    verdict = PASS if all(r["verdict"] == PASS for r in results) else FAIL
    entries = [{"id": r["id"], "title": r["title"], "verdict": r["verdict"],
                "checks": len(r["checks"]), "as_expected": sum(c["verdict"] == PASS for c in r["checks"])}
               for r in results]
    command = "examples run" if args.action == "run" else "examples run-all"
    return _report(command, "registry", conds, verdict, cfg, entries=entries)


def _fmt(v):
    return f"{v:.3e}" if isinstance(v, float) else str(v)


def render_text(report: dict) -> str:
    lines = []
    command = report["command"]
    if command.startswith("examples"):
        for e in report.get("entries", []):
            if "verdict" in e:
                lines.append(f"{e['id']:<3} {e['verdict']:<5} {e['title']} ({e['as_expected']}/{e['checks']} checks as expected)")
            else:
                lines.append(f"{e['id']:<3} {e['title']} ({e['checks']} checks)")
        if command == "examples run":
            for c in report["conditions"]:
                lines.append(f"    {c['verdict']:<5} {c['name']}  outcome={c['outcome']} expected={c['expected']}")
        if command != "examples list":
            lines.append(f"verdict: {report['verdict']} (seed {report['seed']})")
        return "\n".join(lines)
    lines.append(f"{command} {report['input']}")
    for key in ("coefficients", "real_coefficients"):
        if key in report:
            for name, text in report[key].items():
                lines.append(f"  {name} = {text}")
    for c in report["conditions"]:
        lines.append(f"  {c['name']:<24} max_residual={_fmt(c['max_residual'])}  samples={c['samples']}  {c['verdict']}")
    if "classification" in report:
        lines.append(f"  case: {report['classification']['case']}")
    if "printed_audit" in report:
        for c in report["printed_audit"]["conditions"]:
            for m in c["term_mismatches"]:
                lines.append(
                    f"  printed {c['name']}: {'*'.join(m['factors'])} coefficient "
                    f"{m['printed_coefficient']} (split gives {m['derived_coefficient']})"
                )
    for note in report.get("notes", []):
        lines.append(f"  note: {note}")
    if "error" in report:
        lines.append(f"  error: {report['error']}")
    if "output" in report:
        lines.append(f"  trajectory written to {report['output']}")
    lines.append(f"verdict: {report['verdict']} (seed {report['seed']})")
    return "\n".join(lines)


_COMMANDS = {
    "check-complex": cmd_check_complex,
    "check-real": cmd_check_real,
    "decompose": cmd_decompose,
    "symmetry": cmd_symmetry,
    "classify": cmd_classify,
    "transform": cmd_transform,
    "verify-solution": cmd_verify_solution,
    "integrate": cmd_integrate,
}


def run(argv=None) -> tuple:
    """Parse ``argv`` and execute; returns ``(exit_code, report or None)``."""
    args = build_parser().parse_args(argv)
    if args.command == "examples":
        report = cmd_examples(args, _config(args))
    else:
        problem = load_problem(args.problem)
        cfg = _config(args, problem)
        report = _COMMANDS[args.command](args, problem, cfg)
    return _EXIT[report["verdict"]], report, args


def main(argv=None) -> int:
    try:
        code, report, args = run(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"rcodelin: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ProblemError, ParseError, EvaluationError, transform.InvalidConstant, ValueError, KeyError, TypeError) as exc:
        print(f"rcodelin: invalid input: {exc}", file=sys.stderr)
        return EXIT_DATA
    csv_text = report.pop("_csv", None)
    try:
        if csv_text is not None:
            sys.stdout.write(csv_text)
        elif (args.format or "text") == "json":
            print(json.dumps(report, indent=2))
        else:
            print(render_text(report))
        sys.stdout.flush()
    except BrokenPipeError:
        # downstream closed early (e.g. ``| head``); keep the verdict
        sys.stdout = None
    return code


if __name__ == "__main__":
    sys.exit(main())
