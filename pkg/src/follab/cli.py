"""Command-line front door for the workbench.

Exit codes are the API and stay stable: 0 success or affirmative
verdict, 1 negative verdict, 2 syntax error, 3 unreadable input,
4 usage or budget error.
"""

from __future__ import annotations

import argparse
import sys

from . import corpus, hilbert, model, tableau
from .syntax import DefinitionError, DefinitionTable, ParseError, parse, parse_defs, render

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_SYNTAX = 2
EXIT_IO = 3
EXIT_USAGE = 4


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return open(path, encoding="utf-8").read()


def _load_formulas(text: str, defs: DefinitionTable | None):
    formulas = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        f = parse(line)
        if defs is not None:
            f = defs.unfold(f)
        formulas.append(f)
    return formulas


def _build_parser() -> _ArgumentParser:
    p = _ArgumentParser(prog="follab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("parse", help="parse a formula and echo it")
    sp.add_argument("file", help="formula file, or - for stdin")
    sp.add_argument("--format", choices=("ascii", "sexpr"), default="ascii")

    sp = sub.add_parser("prove", help="prove a goal by refuting its negation")
    sp.add_argument("file", help="file holding one goal formula")
    sp.add_argument("--budget", type=int, default=500)
    sp.add_argument("--reuse", type=int, default=3)
    sp.add_argument("--tree", choices=("ascii", "dot"))
    sp.add_argument("--defs", help="definitions file (def lines)")

    sp = sub.add_parser("check", help="verify a Hilbert-style proof script")
    sp.add_argument("file")

    sp = sub.add_parser("models", help="brute-force the sentence on finite domains")
    sp.add_argument("file")
    sp.add_argument("--max-size", type=int, default=3)
    sp.add_argument("--dump-first", action="store_true")
    sp.add_argument("--expect", choices=("valid", "unsat", "mixed"))
    sp.add_argument("--allow-large", action="store_true")

    sp = sub.add_parser("corpus", help="run the bundled regression corpus")
    csub = sp.add_subparsers(dest="corpus_command", required=True)
    sp = csub.add_parser("run")
    sp.add_argument("--filter", help="id glob, e.g. fig*")
    sp.add_argument("--report", help="write the deterministic report here")

    return p


def _cmd_parse(args) -> int:
    text = _read_input(args.file)
    formulas = _load_formulas(text, None)
    if len(formulas) != 1:
        raise UsageError("parse expects exactly one formula")
    print(render(formulas[0], args.format))
    return EXIT_OK


def _cmd_prove(args) -> int:
    if args.budget < 1:
        raise UsageError("--budget must be positive")
    if args.reuse < 1:
        raise UsageError("--reuse must be positive")
    budget = tableau.Budget(args.budget, args.reuse)
    defs = parse_defs(_read_input(args.defs)) if args.defs else None
    formulas = _load_formulas(_read_input(args.file), defs)
    if len(formulas) != 1:
        raise UsageError("prove expects exactly one goal formula")
    result = tableau.prove(formulas[0], budget)
    print(f"{result.verdict_word()} after {result.applications} rule applications")
    if args.tree:
        print(tableau.export_tree(result.tree, args.tree), end="")
    return EXIT_OK if result.is_closed else EXIT_NEGATIVE


def _cmd_check(args) -> int:
    script = hilbert.parse_script(_read_input(args.file))
    verdict = script.verdict()
    print(verdict)
    return EXIT_OK if verdict.accepted else EXIT_NEGATIVE


def _cmd_models(args) -> int:
    formulas = _load_formulas(_read_input(args.file), None)
    if len(formulas) != 1:
        raise UsageError("models expects exactly one sentence")
    try:
        report = model.validity_sweep(
            formulas[0], args.max_size, allow_large=args.allow_large
        )
    except model.SizeBudgetError as e:
        raise UsageError(str(e)) from None
    print(report.table(dump_first=args.dump_first), end="")
    if args.expect is None:
        return EXIT_OK
    wanted = {"valid": "valid-up-to", "unsat": "unsat-up-to", "mixed": "mixed"}
    return EXIT_OK if report.verdict == wanted[args.expect] else EXIT_NEGATIVE


def _cmd_corpus(args) -> int:
    try:
        report = corpus.run(args.filter)
    except ValueError as e:
        raise UsageError(str(e)) from None
    print(report.stdout_text(), end="")
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(report.report_text())
    return EXIT_OK if report.all_passed else EXIT_NEGATIVE


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "parse":
            return _cmd_parse(args)
        if args.command == "prove":
            return _cmd_prove(args)
        if args.command == "check":
            return _cmd_check(args)
        if args.command == "models":
            return _cmd_models(args)
        return _cmd_corpus(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except tableau.BudgetError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, DefinitionError, hilbert.ScriptError, model.FreeVariableError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SYNTAX
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


def entry():
    sys.exit(main())
