"""
Command-line entry point and subcommand dispatch.

Exit codes: 0 success, 1 failed verification, 2 invalid input (parse
errors carry line and column), 3 size guard exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from typing import List, Optional

from . import __version__
from .errors import GuardError, InvalidInput, TiqcaError

logger = logging.getLogger("tiqca")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2
EXIT_GUARD = 3


def _check_deps() -> list:
    missing = []
    try:
        import numpy  # noqa: F401
    except ImportError:
        missing.append("numpy")
    try:
        import scipy  # noqa: F401
    except ImportError:
        missing.append("scipy")
    return missing


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tiqca",
        description="Translation-invariant QCA simulator and pointer-tape circuit compiler.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=(
            "examples:\n"
            "  %(prog)s --boundary open run --input 0023000 --macro STEP_RIGHT\n"
            "  %(prog)s run --product 0=0.8,5=0.6 --m 8 --program prog.txt\n"
            "  %(prog)s compile bell.circ -o bell.pulses\n"
            "  %(prog)s ensemble --m 2000 --eps 0.05 --n 2 --trials 20 --seed 7\n"
            "  %(prog)s verify protocols\n"
            "  %(prog)s scaling --n 2 3 4 10 --csv scaling.csv\n"
        ),
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--mode", type=int, choices=(5, 6), default=6, help="Levels per site")
    p.add_argument("--boundary", choices=("periodic", "open"), default="periodic",
                   help="Lattice boundary (default periodic)")
    p.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Apply a pulse program to a state")
    source = run.add_mutually_exclusive_group(required=True)
    source.add_argument("--input", help="Basis string, site 0 leftmost")
    source.add_argument("--product", help="Site state as level=amplitude pairs, e.g. 0=0.8,5=0.6")
    run.add_argument("--m", type=int, help="Site count for --product")
    prog = run.add_mutually_exclusive_group()
    prog.add_argument("--program", help="Pulse program file")
    prog.add_argument("--macro", help="Macro name, e.g. STEP_RIGHT")
    run.add_argument("--top", type=int, default=20, help="Support entries listed (default 20)")
    run.add_argument("-o", "--output", help="Report path (default stdout)")

    comp = sub.add_parser("compile", help="Compile a circuit file to a pulse program")
    comp.add_argument("circuit", help="Circuit file")
    comp.add_argument("--global-phase", action="store_true",
                      help="Keep single-qubit global phases as controlled-phase pulses")
    comp.add_argument("-o", "--output", help="Program path (default stdout)")

    ens = sub.add_parser("ensemble", help="Monte Carlo over wall configurations (periodic only)")
    ens.add_argument("--m", type=int, required=True, help="Lattice size")
    ens.add_argument("--eps", type=float, required=True, help="Wall probability")
    ens.add_argument("--n", type=int, required=True, help="Logical qubits per computer")
    ens.add_argument("--trials", type=int, default=10, help="Trials (default 10)")
    ens.add_argument("--seed", type=int, default=0, help="Master seed (default 0)")
    ens.add_argument("--circuit", help="Circuit file (default: empty circuit on n qubits)")
    ens.add_argument("--pulse-cap", type=int, default=16,
                     help="Longest short partition simulated pulse by pulse (default 16)")
    ens.add_argument("--crosscheck", type=int, default=4,
                     help="Working lengths cross-checked at pulse level (default 4)")
    ens.add_argument("-o", "--output", help="Report path (default stdout)")

    ver = sub.add_parser("verify", help="Run a verification suite")
    ver.add_argument("suite", choices=("oracle", "protocols", "pure-mixed", "scaling",
                                       "conservation", "locality", "compiler"))
    ver.add_argument("--quick", action="store_true", help="Reduced sizes")
    ver.add_argument("--seed", type=int, default=0, help="Seed for random cases")

    sca = sub.add_parser("scaling", help="Working fraction for epsilon = 1/n^2")
    sca.add_argument("--n", type=int, nargs="+", default=[2, 3, 4, 5, 10, 20, 50, 100, 1000],
                     help="Qubit counts (each >= 2)")
    sca.add_argument("--csv", help="Write the table as CSV to this path")
    return p


# ── Output ────────────────────────────────────────────────────────────────

def _write_output(path: Optional[str], text: str) -> None:
    """Write *text* to *path* atomically, or to stdout."""
    if not path or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tiqca-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_text(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from exc


# ── Commands ──────────────────────────────────────────────────────────────

def cmd_run(args: argparse.Namespace) -> int:
    from .formats import parse_program, parse_site_amplitudes
    from .lattice import (
        LatticeConfig, SchemeMode, format_basis, level_populations, make_basis_state,
        make_product_state, parse_basis,
    )
    from .macros import macro_program, pointer_census
    from .pulses import PulseProgram, apply_program

    mode = SchemeMode.from_levels(args.mode)
    if args.input is not None:
        s = parse_basis(args.input, mode)
        config = LatticeConfig(len(s), args.boundary, mode)
        state = make_basis_state(config, s)
    else:
        if args.m is None:
            raise InvalidInput("--product needs --m")
        config = LatticeConfig(args.m, args.boundary, mode)
        state = make_product_state(config, parse_site_amplitudes(args.product, mode))

    if args.program:
        program = parse_program(_read_text(args.program), mode, os.path.basename(args.program))
    elif args.macro:
        program = macro_program(args.macro, mode)
    else:
        program = PulseProgram((), mode, "empty")
    if args.top < 0:
        raise InvalidInput("--top must be non-negative")

    logger.info("Running %s (%d pulses) on %d sites", program.name, len(program), config.m)
    final = apply_program(state, program)
    pops = level_populations(final)
    support = []
    for s, amp in final.ranked()[:args.top]:
        census = pointer_census(s, mode, config.periodic)
        support.append({
            "basis": format_basis(s),
            "re": amp.real,
            "im": amp.imag,
            "probability": abs(amp) ** 2,
            "census": {"right": census.right, "left": census.left,
                       "inactive": census.inactive, "walls": list(census.walls)},
        })
    report = {
        "m": config.m,
        "boundary": config.boundary.value,
        "levels": mode.levels,
        "program": program.name,
        "pulses": len(program),
        "support_size": len(final),
        "support": support,
        "populations": [float(x) for x in pops],
        "norm_drift": final.norm_drift(),
    }
    _write_output(args.output, json.dumps(report, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_compile(args: argparse.Namespace) -> int:
    from .compiler import CompilerOptions, compile_circuit
    from .formats import format_program, parse_circuit
    from .lattice import SchemeMode

    mode = SchemeMode.from_levels(args.mode)
    circuit = parse_circuit(_read_text(args.circuit))
    compiled = compile_circuit(circuit, mode, CompilerOptions(global_phase=args.global_phase))
    header = [
        f"tiqca {__version__} compiled program",
        f"qubits {circuit.n}",
        f"L_min {compiled.min_partition}",
        f"levels {mode.levels}",
        f"final_gap {compiled.final_gap}",
    ]
    labels = [(seg.start, f"{seg.label} -> gap {seg.gap}") for seg in compiled.segments]
    _write_output(args.output, format_program(compiled.program, header, labels))
    return EXIT_OK


def cmd_ensemble(args: argparse.Namespace) -> int:
    from .compiler import LogicalCircuit
    from .ensemble import EnsembleParams, run_ensemble
    from .errors import InvalidParams
    from .formats import parse_circuit
    from .lattice import SchemeMode

    if args.boundary != "periodic":
        raise InvalidParams("ensemble supports the periodic boundary only")
    params = EnsembleParams(
        m=args.m, epsilon=args.eps, n=args.n, trials=args.trials, master_seed=args.seed,
        mode=SchemeMode.from_levels(args.mode), pulse_cap=args.pulse_cap,
        crosscheck=args.crosscheck,
    )
    circuit = parse_circuit(_read_text(args.circuit)) if args.circuit else LogicalCircuit(args.n)
    report = run_ensemble(params, circuit)
    _write_output(args.output, report.to_json())
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    from .verify import run_suite

    results = run_suite(args.suite, quick=args.quick, seed=args.seed)
    for result in results:
        print(result.line())
    failed = sum(not r.passed for r in results)
    print(f"{args.suite}: {len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_FAILED


def cmd_scaling(args: argparse.Namespace) -> int:
    from .ensemble import scaling_csv, scaling_table

    rows = scaling_table(args.n)
    if args.csv:
        _write_output(args.csv, scaling_csv(rows))
    print(f"{'n':>6s}  {'epsilon':>12s}  {'ratio':>10s}  {'working density':>16s}")
    for row in rows:
        print(f"{row.n:6d}  {row.epsilon:12.6g}  {row.ratio:10.6f}  {row.working_density:16.6g}")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "compile": cmd_compile,
    "ensemble": cmd_ensemble,
    "verify": cmd_verify,
    "scaling": cmd_scaling,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)

    level = logging.DEBUG if args.verbose else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%H:%M:%S",
        stream=sys.stderr,
    )

    missing = _check_deps()
    if missing:
        print(f"ERROR: Missing packages: {', '.join(missing)}\n"
              f"Install: pip install {' '.join(missing)}", file=sys.stderr)
        return EXIT_FAILED

    logger.debug("tiqca v%s: %s", __version__, args.command)
    try:
        return COMMANDS[args.command](args)
    except InvalidInput as exc:
        print(f"ERROR: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except GuardError as exc:
        print(f"ERROR: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except TiqcaError as exc:
        print(f"ERROR: {exc}", file=sys.stderr)
        return EXIT_FAILED
