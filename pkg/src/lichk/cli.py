"""``lichk`` command-line driver.

Exit codes: 0 proven, 1 falsified, 2 bound reached, 3 timeout,
4 usage/parse/elaboration error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .elaborate import ElaborationError
from .engine.check import BoundReached, EngineTimeout, Falsified, ProvenInductive, Trace, replay
from .engine.cnf import CnfFormula, DimacsError
from .engine.sat import SolverTimeout, sat_solve
from .engine.unroll import UnrollLimitError, tseitin_unroll
from .lang import DiagnosticError, format_design
from .netlist import NetlistError
from .pipeline import CheckConfig, build_model, default_seed, load_design, run_engine
from .traceio import TraceFormatError, inputs_from_rows, read_tsv, write_tsv, write_vcd
from .wrappers import WrapperError

EXIT = {"proven": 0, "falsified": 1, "bound_reached": 2, "timeout": 3, "error": 4}
REPORT_SCHEMA = "lichk-report/1"

_FRONTEND_ERRORS = (DiagnosticError, ElaborationError, WrapperError, NetlistError, OSError,
                    UnicodeDecodeError, ValueError)


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=["invalid-input", "deadlock"], default="deadlock",
                   help="which check to build (default: deadlock)")
    p.add_argument("--nb-stall-cycles", type=int, default=8, metavar="N",
                   help="idle cycles before a non-blocking module counts as stalled (default 8)")
    p.add_argument("--nb-stall-mode", choices=["rdy", "handshake"], default="rdy",
                   help="what resets the non-blocking stall counter (default: any ready)")
    p.add_argument("--env-valid", choices=["constrained", "free"], default="constrained",
                   help="deadlock check: hold external input valids at 1, or leave them free")
    p.add_argument("--strict-input-ready", action="store_true",
                   help="invalid-input check: also compare the two copies' input ready signals")


def _config(args) -> CheckConfig:
    return CheckConfig(check=args.model, engine=getattr(args, "engine", "bmc"), bound=args.bound,
                       nb_stall_cycles=args.nb_stall_cycles, nb_stall_mode=args.nb_stall_mode,
                       env_valid=args.env_valid, strict_input_ready=args.strict_input_ready,
                       timeout=getattr(args, "timeout", None), seed=default_seed())


def _err(msg: str) -> int:
    print(f"lichk: error: {msg}", file=sys.stderr)
    return EXIT["error"]


def _describe(exc: Exception) -> str:
    if isinstance(exc, FileNotFoundError):
        return f"cannot read {exc.filename}: no such file"
    return str(exc)


# -- check ----------------------------------------------------------------------

def run_check(design: str, cfg: CheckConfig, report_path: str | None = None, trace_path: str | None = None,
              trace_all: bool = False, quiet: bool = False) -> tuple[int, dict]:
    """Run one check; returns (exit code, report dict)."""
    t0 = time.perf_counter()
    report = {
        "schema": REPORT_SCHEMA, "tool": "lichk", "version": __version__, "design_path": design,
        "design": None, "check": cfg.check, "engine": cfg.engine,
        "config": {**cfg.model_options(), "engine": cfg.engine, "bound": cfg.bound, "timeout": cfg.timeout,
                   "seed": cfg.seed},
        "verdict": "error", "depth": None, "k": None, "bound": None, "frames_explored": 0,
        "trace_path": None, "vcd_path": None, "bads_hit": [], "message": None,
    }
    explored = [-1]

    def progress(t):
        explored[0] = max(explored[0], t)

    try:
        ast = load_design(design)
        report["design"] = ast.name or Path(design).stem
        model = build_model(ast, cfg)
        verdict = run_engine(model, cfg, progress)
    except (EngineTimeout, SolverTimeout) as exc:
        report["verdict"] = "timeout"
        report["frames_explored"] = explored[0] + 1
        report["message"] = str(exc)
    except UnrollLimitError as exc:
        report["message"] = str(exc)
    except _FRONTEND_ERRORS as exc:
        report["message"] = _describe(exc)
        if not quiet:
            print(f"lichk: error: {report['message']}", file=sys.stderr)
    else:
        report["verdict"] = verdict.name
        if isinstance(verdict, Falsified):
            report["depth"] = verdict.depth
            report["frames_explored"] = verdict.depth + 1
            report["bads_hit"] = verdict.trace.bads_hit
            if not replay(model, verdict.trace):
                report["verdict"] = "error"
                report["message"] = "internal soundness error: counterexample does not replay"
            tp = trace_path
            if tp is None:
                base = Path(report_path).with_suffix("") if report_path else Path(f"{Path(design).stem}.{cfg.check}")
                tp = f"{base}.trace.tsv"
            with open(tp, "w", encoding="utf-8") as fh:
                write_tsv(fh, model, verdict.trace, {"design": design, **cfg.model_options()}, trace_all)
            vcd = str(Path(tp).with_suffix(".vcd"))
            with open(vcd, "w", encoding="utf-8") as fh:
                write_vcd(fh, verdict.trace)
            report["trace_path"], report["vcd_path"] = tp, vcd
        elif isinstance(verdict, ProvenInductive):
            report["k"] = verdict.k
            report["frames_explored"] = verdict.k + 1
        elif isinstance(verdict, BoundReached):
            report["bound"] = verdict.bound
            report["frames_explored"] = verdict.bound + 1
    report["wall_time_ms"] = round((time.perf_counter() - t0) * 1000, 3)
    if report_path:
        with open(report_path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, sort_keys=True, indent=2)
            fh.write("\n")
    return EXIT[report["verdict"]], report


def _summary(report: dict) -> str:
    v = report["verdict"]
    extra = ""
    if v == "falsified":
        extra = f" at depth {report['depth']} ({', '.join(report['bads_hit'])})"
    elif v == "proven":
        extra = f" (k={report['k']})"
    elif v == "bound_reached":
        extra = f" (no counterexample up to depth {report['bound']})"
    elif report.get("message"):
        extra = f": {report['message']}"
    return f"{report['design_path']}: {report['check']}: {v}{extra} [{report['wall_time_ms']:.0f} ms]"


def _check_job(job):
    design, cfg, report, trace, trace_all = job
    return run_check(design, cfg, report, trace, trace_all, quiet=True)


_SEVERITY = [EXIT[v] for v in ("proven", "bound_reached", "falsified", "timeout", "error")]


def cmd_check(args) -> int:
    try:
        cfg = _config(args)
    except ValueError as exc:
        return _err(str(exc))
    if len(args.designs) > 1 and (args.report or args.trace):
        return _err("--report/--trace take one design; use --out-dir for several")
    jobs = []
    for d in args.designs:
        rep, tr = args.report, args.trace
        if args.out_dir:
            stem = Path(args.out_dir) / Path(d).stem
            rep, tr = f"{stem}.{cfg.check}.json", f"{stem}.{cfg.check}.trace.tsv"
        jobs.append((d, cfg, rep, tr, args.trace_all))
    if args.out_dir:
        Path(args.out_dir).mkdir(parents=True, exist_ok=True)
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(_check_job, jobs))
    else:
        results = [_check_job(j) for j in jobs]
    worst = 0
    for code, report in results:
        # batch exit: error > timeout > falsified > bound_reached > proven
        if report["verdict"] == "error" and report.get("message"):
            print(f"lichk: error: {report['message']}", file=sys.stderr)
        print(_summary(report))
        if report.get("trace_path"):
            print(f"  trace: {report['trace_path']}  waveform: {report['vcd_path']}")
        worst = max(worst, code, key=_SEVERITY.index)
    return results[0][0] if len(results) == 1 else worst


# -- parse / export / replay / solve -------------------------------------------------------

def cmd_parse(args) -> int:
    from .lang import validate
    try:
        ast = load_design(args.design)
    except _FRONTEND_ERRORS as exc:
        return _err(_describe(exc))
    diags = validate(ast)
    for d in diags:
        print(f"{args.design}:{d}", file=sys.stderr)
    sys.stdout.write(format_design(ast))
    return EXIT["error"] if diags else 0


def cmd_export(args) -> int:
    try:
        cfg = _config(args)
        model = build_model(load_design(args.design), cfg)
        cnf, fmap = tseitin_unroll(model, args.bound, coi=args.coi)
    except (UnrollLimitError, *_FRONTEND_ERRORS) as exc:
        return _err(_describe(exc))
    out = args.output or f"{Path(args.design).stem}.{cfg.check}.k{args.bound}.cnf"
    comments = [f"lichk {__version__}: {args.design} {cfg.check} k={args.bound}"]
    with open(out, "w", encoding="ascii") as fh:
        cnf.write(fh, comments)
    with open(out + ".map", "w", encoding="ascii") as fh:
        fmap.write(fh)
    print(f"wrote {out} ({cnf.num_vars} vars, {len(cnf.clauses)} clauses) and {out}.map")
    return 0


def cmd_replay(args) -> int:
    try:
        text = Path(args.trace).read_text(encoding="utf-8")
        config, signals, rows = read_tsv(text)
        design = args.design or config["design"]
        cfg = CheckConfig(check=config["check"], nb_stall_cycles=config["nb_stall_cycles"],
                          nb_stall_mode=config.get("nb_stall_mode", "rdy"), env_valid=config["env_valid"],
                          strict_input_ready=config["strict_input_ready"])
        model = build_model(load_design(design), cfg)
        inputs = inputs_from_rows(model, rows)
    except (TraceFormatError, KeyError, *_FRONTEND_ERRORS) as exc:
        return _err(_describe(exc))
    ok = replay(model, Trace(signals, {}, rows, inputs))
    if ok:
        print(f"{args.trace}: replay confirms a bad state at frame {len(inputs) - 1}")
        return 0
    print(f"{args.trace}: replay does NOT reach a bad state with the recorded values")
    return 1


def cmd_solve(args) -> int:
    try:
        cnf = CnfFormula.from_dimacs(Path(args.cnf).read_text(encoding="ascii"))
    except (DimacsError, OSError) as exc:
        return _err(_describe(exc))
    deadline = None if args.timeout is None else time.monotonic() + args.timeout
    try:
        model = sat_solve(cnf, seed=default_seed(), deadline=deadline)
    except SolverTimeout:
        print("s UNKNOWN")
        return EXIT["timeout"]
    if model is None:
        print("s UNSATISFIABLE")
        return 20
    print("s SATISFIABLE")
    lits = [str(v if model[v] else -v) for v in range(1, cnf.num_vars + 1)]
    print("v " + " ".join(lits + ["0"]))
    return 10


def cmd_corpus(args) -> int:
    from .corpus import corpus_suite, run_fixture
    suite = [f for f in corpus_suite(args.manifest) if not args.filter or args.filter in f.name]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(run_fixture, suite))
    else:
        results = [run_fixture(f) for f in suite]
    bad = 0
    for r in results:
        fx = r.fixture
        status = "ok" if r.ok else "MISMATCH"
        bad += not r.ok
        print(f"{status:8s} {fx.name:48s} expected={fx.expected:13s} got={r.verdict:13s} "
              f"depth/k={r.depth_or_k!s:4s} {r.seconds:7.2f}s")
    print(f"{len(results) - bad}/{len(results)} fixtures as expected")
    return 0 if bad == 0 else 1


# -- entry point --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lichk", description="Formal checks for latency-insensitive designs.")
    ap.add_argument("--version", action="version", version=f"lichk {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("check", help="run the invalid-input or deadlock check")
    p.add_argument("designs", nargs="+", metavar="design.li")
    _add_model_flags(p)
    p.add_argument("--bound", type=int, default=50, help="max BMC depth or max k (default 50)")
    p.add_argument("--engine", choices=["bmc", "kind"], default="bmc", help="bmc (default) or k-induction")
    p.add_argument("--timeout", type=float, default=None, help="wall-clock limit in seconds")
    p.add_argument("--report", help="write the JSON report here")
    p.add_argument("--trace", help="write the counterexample table here (VCD next to it)")
    p.add_argument("--trace-all", action="store_true", help="dump every named node in the trace")
    p.add_argument("--out-dir", help="batch mode: report and trace per design in this directory")
    p.add_argument("--jobs", type=int, default=1, help="run several designs in parallel")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("parse", help="parse, validate and pretty-print a design")
    p.add_argument("design")
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("export-dimacs", help="write the depth-k unrolling as DIMACS CNF")
    p.add_argument("design")
    _add_model_flags(p)
    p.add_argument("--bound", type=int, default=0, help="unrolling depth k (default 0)")
    p.add_argument("--coi", action="store_true", help="reduce to the cone of influence first")
    p.add_argument("-o", "--output")
    p.set_defaults(fn=cmd_export)

    p = sub.add_parser("replay", help="re-simulate a counterexample table")
    p.add_argument("trace")
    p.add_argument("--design", help="design file (default: the one recorded in the trace)")
    p.set_defaults(fn=cmd_replay)

    p = sub.add_parser("solve", help="solve a DIMACS CNF file (exit 10 SAT / 20 UNSAT)")
    p.add_argument("cnf")
    p.add_argument("--timeout", type=float, default=None)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("corpus", help="run the bundled fixtures against their expected verdicts")
    p.add_argument("--manifest")
    p.add_argument("--filter")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(fn=cmd_corpus)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT["error"] if exc.code else 0
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
