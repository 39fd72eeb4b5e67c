"""Command-line front end: check / synth / verify over JSON problem files.

Exit codes: 0 success, 1 problem inadmissible or verification failed,
2 I/O or schema error, 3 internal numerical failure. Every run ends with a
single status line starting with ``OK`` or ``FAIL``.
"""

import argparse
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    DimensionMismatch,
    EigsurgError,
    Inadmissible,
    NotControllable,
    ProblemInvalid,
    SchemaError,
)
from .model import (
    SurgicalProblem,
    check_controllability,
    compute_input_directions,
    parse_problem,
    validate_structure,
)
from .numerics import Tolerances, as_real_matrix
from .synthesis import synthesize
from .verify import VerificationReport, verify_closed_loop

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_IO = 2
EXIT_NUMERICAL = 3


@dataclass
class CliConfig:
    """Parsed command line: one command plus its paths, seed, and tolerances."""

    command: str
    problem_path: str
    gain_path: str | None = None
    report_path: str | None = None
    seed: int = 0
    rank_rel: float | None = None
    residual_abs: float | None = None
    match_abs: float | None = None
    format: str = "json"


def emit_gain(F, path) -> None:
    """Write a gain file; decimal text round-trips every entry bit-exactly."""
    doc = gain_document(F)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def gain_document(F) -> dict:
    Fm = as_real_matrix(F, "F")
    return {"F": [[float(x) for x in row] for row in Fm]}


def parse_gain(path) -> np.ndarray:
    """Read a gain file back into a real matrix."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise SchemaError(f"gain file: invalid JSON: {err.msg}") from err
    if not isinstance(doc, dict) or "F" not in doc:
        raise SchemaError("gain file: expected an object with key 'F'")
    rows = doc["F"]
    if (
        not isinstance(rows, list)
        or not rows
        or not all(
            isinstance(r, list) and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in r)
            for r in rows
        )
        or len({len(r) for r in rows}) != 1
    ):
        raise SchemaError("gain file: 'F' must be a rectangular array of numbers")
    try:
        return as_real_matrix(rows, "F")
    except ValueError as err:
        raise SchemaError(f"gain file: {err}") from err


def _c2(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def report_document(report: VerificationReport, seed: int | None) -> dict:
    return {
        "passed": report.passed,
        "eigenvalue_pairs": [
            {"target": _c2(tgt), "achieved": _c2(ach), "distance": dist}
            for tgt, ach, dist in report.eigenvalue_pairs
        ],
        "max_pair_distance": report.max_pair_distance,
        "target_residuals": list(report.target_residuals),
        "f1_annihilation": report.f1_annihilation,
        "cond_V0": report.cond_V0,
        "gain_norm": report.gain_norm,
        "seed": seed,
        "version": __version__,
    }


def _report_text(report: VerificationReport) -> str:
    lines = ["eigenvalue pairing (target -> achieved, distance):"]
    for tgt, ach, dist in report.eigenvalue_pairs:
        lines.append(f"  {tgt.real:+.6g}{tgt.imag:+.6g}j -> {ach.real:+.6g}{ach.imag:+.6g}j  ({dist:.3e})")
    lines.append(f"max pair distance: {report.max_pair_distance:.3e}")
    if report.target_residuals:
        lines.append("target residuals: " + ", ".join(f"{x:.3e}" for x in report.target_residuals))
    if report.f1_annihilation is not None:
        lines.append(f"F1 annihilation: {report.f1_annihilation:.3e}")
    if report.cond_V0 is not None:
        lines.append(f"cond(V0): {report.cond_V0:.6g}")
    lines.append(f"gain norm: {report.gain_norm:.6g}")
    return "\n".join(lines)


def _tolerances(config: CliConfig) -> Tolerances:
    tol = Tolerances()
    overrides = {
        key: value
        for key, value in (
            ("rank_rel", config.rank_rel),
            ("residual_abs", config.residual_abs),
            ("match_abs", config.match_abs),
        )
        if value is not None
    }
    return replace(tol, **overrides) if overrides else tol


def _run_check(problem: SurgicalProblem) -> int:
    violations = validate_structure(problem)
    for v in violations:
        print(f"violation {v}")
    controllable = check_controllability(problem.system, problem.tolerances)
    if not controllable:
        print("pair (A, B) is not controllable")
    feasible = True
    if not violations and controllable:
        try:
            compute_input_directions(problem)
        except Inadmissible as err:
            feasible = False
            print(str(err))
    ok = not violations and controllable and feasible
    print("OK check: problem admissible" if ok else "FAIL check: problem inadmissible")
    return EXIT_OK if ok else EXIT_FAIL


def _run_synth(problem: SurgicalProblem, config: CliConfig) -> int:
    result = synthesize(problem, config.seed)
    gain_json = json.dumps(gain_document(result.F), indent=2)
    if config.gain_path:
        Path(config.gain_path).write_text(gain_json + "\n")
    else:
        print(gain_json)
    if config.report_path:
        doc = report_document(result.report, config.seed)
        Path(config.report_path).write_text(json.dumps(doc, indent=2) + "\n")
    if config.format == "text":
        print(_report_text(result.report))
    if result.report.passed:
        print(f"OK synth: verified, max pair distance {result.report.max_pair_distance:.3e}")
        return EXIT_OK
    print(f"FAIL synth: verification failed, max pair distance {result.report.max_pair_distance:.3e}")
    return EXIT_FAIL


def _run_verify(problem: SurgicalProblem, config: CliConfig) -> int:
    F = parse_gain(config.gain_path)
    report = verify_closed_loop(problem.system, F, problem)
    if config.report_path:
        doc = report_document(report, None)
        Path(config.report_path).write_text(json.dumps(doc, indent=2) + "\n")
    if config.format == "text":
        print(_report_text(report))
    if report.passed:
        print(f"OK verify: max pair distance {report.max_pair_distance:.3e}")
        return EXIT_OK
    print(f"FAIL verify: max pair distance {report.max_pair_distance:.3e}")
    return EXIT_FAIL


def run(config: CliConfig) -> int:
    """Execute one command and return the process exit code."""
    try:
        tol = _tolerances(config)
    except ValueError as err:
        print(f"FAIL {config.command}: {err}")
        return EXIT_IO
    try:
        text = Path(config.problem_path).read_text()
    except OSError as err:
        print(f"FAIL {config.command}: cannot read problem file: {err}")
        return EXIT_IO
    try:
        problem = parse_problem(text, tol)
        if config.command == "check":
            return _run_check(problem)
        if config.command == "synth":
            return _run_synth(problem, config)
        return _run_verify(problem, config)
    except (SchemaError, DimensionMismatch) as err:
        print(f"FAIL {config.command}: {err}")
        return EXIT_IO
    except OSError as err:
        print(f"FAIL {config.command}: {err}")
        return EXIT_IO
    except ProblemInvalid as err:
        for v in err.violations:
            print(f"violation {v}")
        print(f"FAIL {config.command}: problem is structurally invalid")
        return EXIT_FAIL
    except (Inadmissible, NotControllable) as err:
        print(f"FAIL {config.command}: {err}")
        return EXIT_FAIL
    except EigsurgError as err:
        stage = f" [{err.stage}]" if err.stage else ""
        print(f"FAIL {config.command}: numerical failure{stage}: {err}")
        return EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eigsurg",
        description="Assign a subset of closed-loop eigenvalues with fully specified "
        "(generalized) eigenvectors and place the remaining spectrum at will.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("problem", help="problem JSON file")
        sp.add_argument("--tol-rank", type=float, default=None, metavar="X",
                        help="relative singular-value cutoff for rank decisions")
        sp.add_argument("--tol-residual", type=float, default=None, metavar="X",
                        help="absolute residual bound (norm-scaled where noted)")
        sp.add_argument("--tol-match", type=float, default=None, metavar="X",
                        help="eigenvalue pairing distance bound")

    sp = sub.add_parser("check", help="validate structure, controllability, and admissibility")
    add_common(sp)

    sp = sub.add_parser("synth", help="synthesize the feedback gain and verify it")
    add_common(sp)
    sp.add_argument("-o", "--output", default=None, metavar="GAIN",
                    help="gain file path (default: print to stdout)")
    sp.add_argument("--report", default=None, metavar="REPORT", help="report file path")
    sp.add_argument("--seed", type=int, default=0,
                    help="seed for the randomized selection retry path (default 0)")
    sp.add_argument("--format", choices=("json", "text"), default="json",
                    help="stdout report rendering (default json)")

    sp = sub.add_parser("verify", help="verify an existing gain against a problem")
    add_common(sp)
    sp.add_argument("--gain", required=True, metavar="GAIN", help="gain file to verify")
    sp.add_argument("--report", default=None, metavar="REPORT", help="report file path")
    sp.add_argument("--format", choices=("json", "text"), default="json",
                    help="stdout report rendering (default json)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = CliConfig(
        command=args.command,
        problem_path=args.problem,
        gain_path=getattr(args, "output", None) or getattr(args, "gain", None),
        report_path=getattr(args, "report", None),
        seed=getattr(args, "seed", 0),
        rank_rel=args.tol_rank,
        residual_abs=args.tol_residual,
        match_abs=args.tol_match,
        format=getattr(args, "format", "json"),
    )
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
