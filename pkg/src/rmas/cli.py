"""Command-line entry point.

Exit codes: 0 success (for `check`: every expectation met), 1
verification mismatch or failed check, 2 usage or input errors.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import rmas

from .automaton import automaton_dict, export_dot
from .checker import bounded_check, lasso_dict, model_check, render_verdict
from .errors import RmasError
from .lang.parser import parse_model, parse_property_file
from .lang.pretty import expr_text
from .protocol import ProtocolState, repl
from .semantics import Engine
from .smv import export_smv, external_verdicts
from .symbolic import compile_system
from .types import typecheck

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise RmasError(f"cannot read {path}: {err.strerror}") from err


def _load_engine(path: str) -> tuple[Engine, object]:
    system = rmas.load_system(_read(path))
    return Engine(system), system


def cmd_parse(args: argparse.Namespace) -> int:
    engine, system = _load_engine(args.model)
    report = engine.lint()
    if args.json:
        out = {
            "agents": {name: {"states": len(a.automaton.states),
                              "edges": len(a.automaton.edges)}
                       for name, a in system.agents.items()},
            "instances": [i.instance_id for i in system.instances],
            "warnings": [{"code": w.code, "agent": w.agent, "message": w.message}
                         for w in report.warnings],
            "infos": [{"code": w.code, "message": w.message}
                      for w in report.infos],
        }
        print(json.dumps(out, indent=2))
    else:
        print(f"ok: {len(system.agents)} agent types, "
              f"{len(system.instances)} instances")
        for w in report.warnings:
            print(f"warning[{w.code}] {w.message}")
        for w in report.infos:
            print(f"info[{w.code}] {w.message}")
    return EXIT_OK


def cmd_automata(args: argparse.Namespace) -> int:
    _, system = _load_engine(args.model)
    outdir = Path(args.out) if args.out else None
    if outdir:
        outdir.mkdir(parents=True, exist_ok=True)
    for name, agent in system.agents.items():
        if args.json:
            text = json.dumps(automaton_dict(agent.automaton), indent=2) + "\n"
            suffix = ".json"
        else:
            text = export_dot(agent.automaton, labels_on=args.full_labels)
            suffix = ".dot"
        if outdir:
            (outdir / f"{name}{suffix}").write_text(text, encoding="utf-8")
            print(f"wrote {outdir / (name + suffix)}")
        else:
            print(text, end="")
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    engine, system = _load_engine(args.model)
    props = parse_property_file(_read(args.props))
    rows = []
    all_expected_met = True
    for prop in props:
        started = time.monotonic()
        if args.bound:
            verdict = bounded_check(system, prop.formula, args.bound,
                                    engine=engine)
        else:
            verdict = model_check(system, prop.formula, budget=args.budget,
                                  engine=engine)
        elapsed = time.monotonic() - started
        expected = None
        if prop.expect is not None:
            if verdict.status == "inconclusive":
                # bounded search found no counterexample within the bound
                expected = prop.expect == "holds"
            else:
                expected = (verdict.status == "holds") == (prop.expect == "holds")
            if not expected:
                all_expected_met = False
        rows.append((prop, verdict, elapsed, expected))

    if args.json:
        out = []
        for prop, verdict, elapsed, expected in rows:
            item = {
                "name": prop.name,
                "formula": expr_text(prop.formula),
                "verdict": verdict.status,
                "visited": verdict.visited,
                "seconds": round(elapsed, 3),
                "expect": prop.expect,
                "expectation_met": expected,
            }
            if verdict.lasso is not None and args.trace:
                item["lasso"] = lasso_dict(engine, verdict.lasso)
            out.append(item)
        print(json.dumps(out, indent=2))
    else:
        for prop, verdict, elapsed, expected in rows:
            mark = "" if expected is None else ("  [as expected]" if expected
                                                else "  [MISMATCH]")
            print(f"{prop.name:28s} {verdict.status:13s} "
                  f"visited={verdict.visited:<8d} {elapsed:6.2f}s{mark}")
            if verdict.lasso is not None and args.trace:
                print(render_verdict(engine, verdict))
    return EXIT_OK if all_expected_met else EXIT_MISMATCH


def cmd_export_smv(args: argparse.Namespace) -> int:
    engine, system = _load_engine(args.model)
    props = parse_property_file(_read(args.props)) if args.props else None
    text = export_smv(system, props)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    if args.run_external and props:
        verdicts = external_verdicts(text)
        if verdicts is None:
            print("external checker not configured "
                  f"(set ${'RMAS_SMV_BIN'}); skipped", file=sys.stderr)
            return EXIT_OK
        agree = True
        for prop, ext in zip(props, verdicts):
            internal = model_check(system, prop.formula, engine=engine)
            ok = (internal.status == "holds") == ext
            agree &= ok
            print(f"{prop.name:28s} internal={internal.status:6s} "
                  f"external={'holds' if ext else 'fails'}"
                  f"{'' if ok else '  [DISAGREE]'}")
        return EXIT_OK if agree else EXIT_MISMATCH
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    state = ProtocolState()
    if args.model:
        state.load(_read(args.model))
    repl(sys.stdin, sys.stdout, state)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve

    state = ProtocolState()
    if args.model:
        state.load(_read(args.model))
    print(f"serving on http://{args.host}:{args.port}/ "
          f"(POST /api/wire; UI {'from ' + args.ui if args.ui else 'not bundled'})")
    serve(args.host, args.port, args.ui, state)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rmas",
        description="Workbench for reconfigurable multi-agent models")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse, typecheck and lint a model")
    p.add_argument("model")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("automata", help="export structure automata")
    p.add_argument("model")
    p.add_argument("-o", "--out", help="output directory (default: stdout)")
    p.add_argument("--json", action="store_true",
                   help="JSON dumps instead of DOT")
    p.add_argument("--full-labels", action="store_true",
                   help="label edges with full command text")
    p.set_defaults(fn=cmd_automata)

    p = sub.add_parser("check", help="model-check a property file")
    p.add_argument("model")
    p.add_argument("--props", required=True)
    p.add_argument("--bound", type=int, default=0,
                   help="bounded search: lassos up to this length")
    p.add_argument("--budget", type=int, default=5_000_000,
                   help="product-state budget for the full check")
    p.add_argument("--trace", action="store_true",
                   help="print counterexample lassos")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("export-smv", help="emit SMV text")
    p.add_argument("model")
    p.add_argument("--props")
    p.add_argument("-o", "--out")
    p.add_argument("--run-external", action="store_true",
                   help="also run the external checker if configured")
    p.set_defaults(fn=cmd_export_smv)

    p = sub.add_parser("simulate",
                       help="wire-protocol REPL on stdin/stdout")
    p.add_argument("model", nargs="?")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("serve", help="HTTP service for the browser UI")
    p.add_argument("model", nargs="?")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8010)
    p.add_argument("--ui", help="directory of built UI assets to serve")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_USAGE if err.code not in (0, None) else 0
    try:
        return args.fn(args)
    except RmasError as err:
        print(f"error[{err.code}]: {err}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
