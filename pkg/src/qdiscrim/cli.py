"""``qdiscrim`` command line.

Every subcommand builds one report with fixed fields (``command``,
``inputs``, ``results``, ``tolerances``, ``version``).  ``--json`` prints it
as JSON; otherwise a flat ``key  value`` listing goes to stdout.  Errors go
to stderr and select the exit code:

    0  success
    1  invalid input (bad matrix, priors, dimensions, arguments)
    2  a certificate, consistency check or sweep relation failed
    3  unreadable or malformed file
    4  instance outside the exactly solvable classes

Default tolerances can be overridden with ``QDISCRIM_TOL``, e.g.
``QDISCRIM_TOL="tol_psd=1e-9,tol_rank=1e-12"``.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import all_bounds
from .compare import KINDS, SweepConfig, format_ranking, rank_bounds, run_sweep
from .ensemble import StructuredEnsemble
from .errors import (
    CertificateFailed,
    InternalInconsistency,
    NoConvergence,
    NotCommuting,
    ParseError,
    ValidationError,
)
from .exact import certify_optimal, solve_exact, solve_structured, success_probability
from .golden import run_checks
from .io import dumps, format_real, load_ensemble, load_povm, matrix_to_doc, povm_to_doc
from .linalg import DEFAULT_TOL, Tolerances

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_CHECK_FAILED = 2
EXIT_IO = 3
EXIT_UNSUPPORTED = 4

TOL_ENV = "QDISCRIM_TOL"


class UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which is reserved for failed checks here.
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def tolerances_from_env(environ=os.environ) -> Tolerances:
    overrides_text = environ.get(TOL_ENV, "").strip()
    if not overrides_text:
        return DEFAULT_TOL
    overrides = {}
    for item in overrides_text.split(","):
        name, sep, value = item.partition("=")
        if not sep:
            raise ValidationError(f"{TOL_ENV}: expected name=value, got {item!r}")
        try:
            overrides[name.strip()] = float(value)
        except ValueError:
            raise ValidationError(f"{TOL_ENV}: {name.strip()} is not a number: {value!r}") from None
    return DEFAULT_TOL.replace(**overrides)


def _digest(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _parse_reals(text: str, what: str) -> np.ndarray:
    try:
        return np.array([float(Fraction(tok.strip())) for tok in text.split(",")])
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"{what}: expected comma-separated numbers or fractions, got {text!r}") from None


def _certificate_doc(cert) -> dict:
    return {
        "verdict": cert.verdict,
        "min_margin": cert.min_margin,
        "hermiticity_defect": cert.hermiticity_defect,
        "margins": list(cert.margins),
    }


def cmd_bounds(args, tol) -> tuple[dict, dict, int]:
    e = load_ensemble(args.ensemble, tol)
    report = all_bounds(e, tol)
    results = {
        "m": e.m,
        "dim": e.dim,
        "effective_dim": report.effective_dim,
        "bounds": {name.upper(): v for name, v in report.values().items()},
    }
    if report.helstrom is not None:
        results["helstrom"] = report.helstrom
    results["ranking"] = format_ranking(rank_bounds(report))
    results["best"] = report.best()
    results["l4_argmin"] = report.l4_argmin
    results["l4_terms"] = list(report.l4_terms)
    return {"ensemble": _digest(args.ensemble)}, results, EXIT_OK


def cmd_exact(args, tol):
    e = load_ensemble(args.ensemble, tol)
    result = solve_exact(e, tol)
    results = {
        "method": result.method,
        "qe": result.qe,
        "certificate": _certificate_doc(result.certificate),
        "povm": povm_to_doc(result.optimal_povm),
    }
    return {"ensemble": _digest(args.ensemble)}, results, EXIT_OK


def cmd_certify(args, tol):
    e = load_ensemble(args.ensemble, tol)
    povm = load_povm(args.povm, tol)
    cert = certify_optimal(e, povm, tol)
    results = {
        **_certificate_doc(cert),
        "error_probability": 1.0 - success_probability(e, povm),
        "r_matrix": matrix_to_doc(cert.r_matrix),
    }
    inputs = {"ensemble": _digest(args.ensemble), "povm": _digest(args.povm)}
    return inputs, results, EXIT_OK if cert.passed else EXIT_CHECK_FAILED


def cmd_structured(args, tol):
    alphas = _parse_reals(args.alphas, "--alphas")
    if args.priors == "uniform":
        priors = np.full(alphas.size, 1.0 / alphas.size)
    else:
        priors = _parse_reals(args.priors, "--priors")
    sol = solve_structured(StructuredEnsemble(alphas, priors, tol), tol)
    results = {
        "alphas": list(alphas),
        "priors": list(priors),
        "qe": sol.qe,
        "qu": sol.qu,
        "ratio": sol.ratio,
        "degenerate_ratio": sol.degenerate_ratio,
        "twice_qe_holds": sol.twice_qe_holds,
        "certificate": _certificate_doc(sol.certificate),
        "ambiguous_povm": povm_to_doc(sol.ambiguous_povm),
        "unambiguous_povm": povm_to_doc(sol.unambiguous_povm),
    }
    code = EXIT_OK
    if args.ratio_threshold is not None:
        exceeds = bool(sol.ratio > args.ratio_threshold)
        results["ratio_threshold"] = args.ratio_threshold
        results["ratio_exceeds_threshold"] = exceeds
        if not exceeds:
            code = EXIT_CHECK_FAILED
    return {}, results, code


def cmd_compare(args, tol):
    cfg = SweepConfig(
        seed=args.seed,
        trials=args.trials,
        m=args.m,
        dim=args.dim,
        kind=args.kind,
        tol=tol,
        max_records=args.records,
    )
    summary = run_sweep(cfg, workers=args.workers)
    results = summary.to_doc()
    results["distinct_winners"] = summary.distinct_winners()
    return {}, results, EXIT_OK if summary.passed else EXIT_CHECK_FAILED


def cmd_paper_examples(args, tol):
    checks = run_checks()
    rows = [
        {
            "name": c.name,
            "expected": c.expected,
            "got": c.got,
            "tolerance": c.tolerance,
            "passed": c.passed,
        }
        for c in checks
    ]
    failed = [c.name for c in checks if not c.passed]
    results = {"total": len(checks), "passed": len(checks) - len(failed), "failed": failed, "checks": rows}
    return {}, results, EXIT_OK if not failed else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the report as JSON")

    parser = _Parser(prog="qdiscrim", description="Bounds and exact solutions for minimum-error state discrimination.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bounds", parents=[common], help="evaluate the seven lower bounds")
    p.add_argument("ensemble", help="ensemble JSON file")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("exact", parents=[common], help="exact error probability (two states or commuting)")
    p.add_argument("ensemble")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("certify", parents=[common], help="test a POVM for optimality")
    p.add_argument("ensemble")
    p.add_argument("povm", help="POVM JSON file")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("structured", parents=[common], help="closed-form solution of the structured family")
    p.add_argument("--alphas", required=True, help="comma-separated values in [0, 1]; fractions like 1/3 allowed")
    p.add_argument("--priors", default="uniform", help="'uniform' or comma-separated priors")
    p.add_argument("--ratio-threshold", type=float, default=None, help="fail (exit 2) unless QU/QE exceeds this")
    p.set_defaults(func=cmd_structured)

    p = sub.add_parser("compare", parents=[common], help="randomised sweep ranking the bounds and checking relations")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--m", type=int, default=3, help="number of states")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--kind", choices=KINDS, default="general")
    p.add_argument("--records", type=int, default=0, help="include the first N per-trial records")
    p.add_argument("--workers", type=int, default=1, help="worker processes; does not change the output")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("paper-examples", parents=[common], help="replay the worked examples against closed forms")
    p.set_defaults(func=cmd_paper_examples)
    return parser


# Flags that affect speed only and are left out of the echoed command.
_NOT_ECHOED = {"func", "json", "workers", "command"}


def _echo(args) -> dict:
    return {"name": args.command, "args": {k: v for k, v in vars(args).items() if k not in _NOT_ECHOED}}


def _human_lines(value, prefix: str = ""):
    if isinstance(value, dict):
        for k, v in value.items():
            yield from _human_lines(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(value, list) and value and all(isinstance(v, dict) for v in value):
        for i, v in enumerate(value):
            yield from _human_lines(v, f"{prefix}[{i}]")
    else:
        if isinstance(value, float):
            text = format_real(value)
        elif isinstance(value, (list, str)) or value is None or isinstance(value, bool):
            text = dumps(value, indent=None)
        else:
            text = str(value)
        yield f"{prefix}  {text}"


def _print_human(report: dict, out) -> None:
    results = report["results"]
    if report["command"]["name"] == "paper-examples":
        for row in results["checks"]:
            status = "PASS" if row["passed"] else "FAIL"
            got = format_real(row["got"]) if isinstance(row["got"], float) else row["got"]
            exp = format_real(row["expected"]) if isinstance(row["expected"], float) else row["expected"]
            print(f"{status}  {row['name']}  expected={exp}  got={got}", file=out)
        print(f"{results['passed']}/{results['total']} passed", file=out)
        return
    for line in _human_lines(results):
        print(line, file=out)


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        tol = tolerances_from_env()
        inputs, results, code = args.func(args, tol)
    except ParseError as exc:
        print(f"parse error: {exc}", file=stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"I/O error: {exc}", file=stderr)
        return EXIT_IO
    except NotCommuting as exc:
        print(f"unsupported instance: {exc}", file=stderr)
        return EXIT_UNSUPPORTED
    except ValidationError as exc:
        print(f"invalid input: {exc}", file=stderr)
        return EXIT_INVALID
    except (CertificateFailed, InternalInconsistency, NoConvergence) as exc:
        print(f"check failed: {exc}", file=stderr)
        return EXIT_CHECK_FAILED

    report = {
        "command": _echo(args),
        "inputs": inputs,
        "results": results,
        "tolerances": tol.as_dict(),
        "version": __version__,
    }
    if args.json:
        print(dumps(report), file=stdout)
    else:
        _print_human(report, stdout)
    if code == EXIT_CHECK_FAILED:
        print(f"{args.command}: check failed", file=stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
