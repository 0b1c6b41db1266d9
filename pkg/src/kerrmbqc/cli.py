"""Command-line runner: ``kerrmbqc {teleport,cnot,run,verify,regen-golden}``.

Exit codes: 0 success, 1 a verification row failed, 2 usage or input errors.
Reports go to stdout, diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import golden, protocols
from .errors import KerrSimError
from .fock import DEFAULT_TOL
from .report import dumps
from .script import execute, load_program, parse_complex

TOL_ENV = "KERR_SIM_TOL"


class UsageError(Exception):
    pass


def _complex_arg(text: str) -> complex:
    z = parse_complex(text.strip())
    if z is None:
        try:
            z = complex(text.replace(" ", ""))
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None
    return z


def _qubit_arg(text: str):
    """``0``, ``1`` or ``alpha,beta``."""
    if text in ("0", "1"):
        return int(text)
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 0, 1 or ALPHA,BETA, got {text!r}")
    return tuple(_complex_arg(p) for p in parts)


def _seed_arg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("seed must be an unsigned integer")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--format", choices=("json", "text"), default="json", help="report format (default json)")
    p.add_argument("--tol", type=float, default=None,
                   help=f"pass tolerance on 1 - overlap (default ${TOL_ENV} or {DEFAULT_TOL})")
    return p


def _policy_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--enumerate", dest="policy", action="store_const", const="enumerate",
                   help="visit every measurement branch (default)")
    g.add_argument("--sample", dest="policy", action="store_const", const="sample",
                   help="draw branches with PCG64 seeded by --seed")
    p.add_argument("--seed", type=_seed_arg, default=None)
    p.add_argument("--shots", type=_positive_int, default=1, help="sampled runs (with --sample)")
    p.add_argument("--states", action="store_true", help="include corrected optical states in the report")
    p.set_defaults(policy="enumerate")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="kerrmbqc", description="Kerr-gate measurement-based optical simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("teleport", parents=[common], help="run an n-qubit teleportation chain")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--alpha", type=_complex_arg, default=complex(1))
    p.add_argument("--beta", type=_complex_arg, default=complex(0))
    _policy_flags(p)

    p = sub.add_parser("cnot", parents=[common], help="run the four-qubit CNOT")
    p.add_argument("--i1", type=_qubit_arg, default=0, help="target input: 0, 1 or ALPHA,BETA")
    p.add_argument("--i4", type=_qubit_arg, default=0, help="control input: 0, 1 or ALPHA,BETA")
    p.add_argument("--correction", choices=protocols.CORRECTION_MODES, default="derived")
    _policy_flags(p)

    p = sub.add_parser("run", parents=[common], help="execute a .qc circuit file")
    p.add_argument("file")
    _policy_flags(p)

    p = sub.add_parser("verify", parents=[common], help="check tables, CNOT logic, teleport suite, golden files")
    p.add_argument("--golden-dir", default=str(golden.GOLDEN_DIR))
    p.add_argument("--samples", type=_positive_int, default=100, help="random inputs per chain length")

    p = sub.add_parser("regen-golden", parents=[common], help="rewrite golden files from the oracle")
    p.add_argument("--out", default=str(golden.GOLDEN_DIR))
    return parser


def resolve_tol(arg: Optional[float]) -> float:
    if arg is not None:
        tol = arg
    elif os.environ.get(TOL_ENV):
        try:
            tol = float(os.environ[TOL_ENV])
        except ValueError:
            raise UsageError(f"{TOL_ENV}={os.environ[TOL_ENV]!r} is not a number") from None
    else:
        tol = DEFAULT_TOL
    if not tol > 0:
        raise UsageError(f"tolerance must be positive, got {tol}")
    return tol


def resolve_policy(args) -> protocols.BranchPolicy:
    if args.policy == "sample":
        if args.seed is None:
            raise UsageError("--sample requires --seed")
        return protocols.BranchPolicy.sample(args.seed, args.shots)
    if args.seed is not None or args.shots != 1:
        raise UsageError("--seed/--shots only apply with --sample")
    return protocols.ENUMERATE


def _row_line(row: dict) -> str:
    status = {True: "PASS", False: "FAIL", None: "-"}[row["pass"]]
    inp = row["input"]
    if isinstance(inp, list) and inp and isinstance(inp[0], dict):
        inp = " ".join(f"({f['alpha'][0]}{f['alpha'][1]:+}i, {f['beta'][0]}{f['beta'][1]:+}i)" for f in inp)
    outcome = "".join(map(str, row["outcome"])) or "-"
    return f"[{status}] input={inp} outcome={outcome} p={row['probability']} overlap={row['overlap']}"


def _rows_text(rows: list[dict]) -> str:
    lines = [_row_line(r) for r in rows]
    failed = sum(r["pass"] is False for r in rows)
    lines.append(f"{len(rows)} row(s), {failed} failed")
    return "\n".join(lines) + "\n"


def _emit_rows(rows: list[dict], fmt: str) -> int:
    sys.stdout.write(dumps(rows) if fmt == "json" else _rows_text(rows))
    return 1 if any(r["pass"] is False for r in rows) else 0


def cmd_teleport(args, tol):
    policy = resolve_policy(args)
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    results = protocols.run_teleportation(args.alpha, args.beta, args.n, policy)
    return _emit_rows(protocols.results_to_rows(results, tol, args.states), args.format)


def cmd_cnot(args, tol):
    policy = resolve_policy(args)
    results = protocols.run_cnot(args.i1, args.i4, policy, args.correction)
    return _emit_rows(protocols.results_to_rows(results, tol, args.states), args.format)


def cmd_run(args, tol):
    policy = resolve_policy(args)
    try:
        program = load_program(args.file)
    except OSError as exc:
        raise UsageError(f"{args.file}: {exc.strerror or exc}") from None
    report = execute(program, policy)
    return _emit_rows(report.rows(tol, args.states), args.format)


def verify_report(tol: float, golden_dir, samples: int = 100) -> dict:
    try:
        cases = golden.load_cnot_cases(Path(golden_dir) / golden.CNOT_FILE)
    except KerrSimError as exc:
        cases, golden_error = None, str(exc)
    else:
        golden_error = None
    tables = protocols.verify_tables(tol=tol, golden_cases=cases)
    logic = []
    for i1, i4 in protocols.COMPUTATIONAL_INPUTS:
        logic += protocols.results_to_rows(protocols.run_cnot(i1, i4), tol)
    suite = protocols.teleport_fidelity_suite(samples=samples, tol=tol)
    stale = golden.stale_files(golden_dir)
    golden_ok = golden_error is None and not stale
    ok = (all(r["pass"] for r in tables) and all(r["pass"] for r in logic)
          and all(r["pass"] for r in suite) and golden_ok)
    return {
        "tables": tables,
        "cnot_logic": logic,
        "teleport": suite,
        "golden": {"dir": str(golden_dir), "stale": stale, "error": golden_error, "pass": golden_ok},
        "pass": ok,
    }


def _verify_text(rep: dict) -> str:
    def mark(ok):
        return "PASS" if ok else "FAIL"
    lines = []
    for r in rep["tables"]:
        lines.append(f"[{mark(r['pass'])}] table input={r['input']} outcome={r['outcome']} overlap={r['overlap']}")
    for r in rep["cnot_logic"]:
        lines.append(f"[{mark(r['pass'])}] cnot-logic outcome={r['outcome']} overlap={r['overlap']}")
    for r in rep["teleport"]:
        lines.append(f"[{mark(r['pass'])}] teleport n={r['n']} samples={r['samples']} "
                     f"branches={r['branches']} min_fidelity={r['min_fidelity']}")
    g = rep["golden"]
    detail = g["error"] or (("stale: " + ", ".join(g["stale"])) if g["stale"] else "up to date")
    lines.append(f"[{mark(g['pass'])}] golden files {detail}")
    lines.append(f"verify: {mark(rep['pass'])}")
    return "\n".join(lines) + "\n"


def cmd_verify(args, tol):
    rep = verify_report(tol, args.golden_dir, args.samples)
    sys.stdout.write(dumps(rep) if args.format == "json" else _verify_text(rep))
    return 0 if rep["pass"] else 1


def cmd_regen(args, tol):
    paths = golden.write_golden(args.out)
    names = [str(p) for p in paths]
    sys.stdout.write(dumps({"written": names}) if args.format == "json" else "".join(n + "\n" for n in names))
    return 0


COMMANDS = {"teleport": cmd_teleport, "cnot": cmd_cnot, "run": cmd_run, "verify": cmd_verify,
            "regen-golden": cmd_regen}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        tol = resolve_tol(args.tol)
        return COMMANDS[args.command](args, tol)
    except UsageError as exc:
        print(f"kerrmbqc: error: {exc}", file=sys.stderr)
        return 2
    except (KerrSimError, ValueError) as exc:
        print(f"kerrmbqc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
