"""The ``mvg`` command line.

Exit status: 0 for accept / valid / ok, 1 for reject / invalid / warnings,
2 for usage and input errors.
"""
from __future__ import annotations

import argparse
import sys

from .convert import mslig_to_uvgdl, uvgdl_to_mslig
from .derivation import SearchBounds, enumerate_mslig
from .dot import chart_to_dot, tree_to_dot
from .errors import MvgError
from .fileformat import parse_grammar, parse_tree, serialize_grammar
from .grammar import MsligGrammar, UvgdlGrammar
from .normal_forms import is_etf, is_rinf, to_etf, to_rinf
from .recognizer import RecognizerConfig, extract_tree, recognize
from .uvgdl import (VectorAssignment, check_dominance, check_vector_cover, connectivity_lint,
                    enumerate_uvgdl, infer_assignment, tree_problems, walk)


class _Fail(Exception):
    """Input problem reported with exit status 2."""


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def tokenize(text: str, sep: str | None) -> list[str]:
    if sep is None:
        return text.split()
    return [t.strip() for t in text.split(sep) if t.strip()]


def _as_mslig(g) -> MsligGrammar:
    return uvgdl_to_mslig(g) if isinstance(g, UvgdlGrammar) else g


def _join(w, sep):
    if not w:
        return "ε"
    return (f" {sep} " if sep else " ").join(w)


def cmd_parse(args) -> int:
    g = _as_mslig(parse_grammar(_read(args.file)))
    tokens = tokenize(args.input, args.sep)
    r = recognize(g, tokens, RecognizerConfig(cap=args.index_cap))
    if r.accepted:
        print("accept")
    elif r.cap_hit:
        print(f"reject (index cap {r.chart.cap} was reached; a larger cap may accept)")
    else:
        print("reject")
    if args.derivation and r.accepted:
        for step in extract_tree(r.chart):
            print(f"  {step.production}")
    if args.dot:
        _write(args.dot, chart_to_dot(r.chart))
    return 0 if r.accepted else 1


def cmd_normalize(args) -> int:
    g = parse_grammar(_read(args.file))
    if not isinstance(g, MsligGrammar):
        raise _Fail("normalize works on %type mslig grammars")
    out = to_rinf(g) if args.rinf else to_etf(g)
    form = "restricted index normal form" if args.rinf else "extended two form"
    _write(args.output, serialize_grammar(out, [f"{form} of {args.file}"]))
    return 0


def cmd_convert(args) -> int:
    g = parse_grammar(_read(args.file))
    notes = [f"converted from {args.file}"]
    if isinstance(g, UvgdlGrammar):
        out = uvgdl_to_mslig(g)
        for rep in connectivity_lint(g):
            if not rep.connected:
                notes.append(str(rep))
                print(str(rep), file=sys.stderr)
        notes.append("index l_{i,j,k}: link of vector i from production j to production k")
    else:
        if not is_rinf(g):
            g = to_rinf(g)
            notes.append("brought into restricted index normal form first")
        out = mslig_to_uvgdl(g)
    _write(args.output, serialize_grammar(out, notes))
    return 0


def cmd_enumerate(args) -> int:
    g = parse_grammar(_read(args.file))
    b = SearchBounds(args.max_len, args.max_steps, args.max_index)
    e = enumerate_uvgdl(g, b) if isinstance(g, UvgdlGrammar) else enumerate_mslig(g, b)
    for w in sorted(e.strings, key=lambda w: (len(w), w)):
        print(_join(w, args.sep))
    print(f"{len(e.strings)} strings", file=sys.stderr)
    return 0


def cmd_check(args) -> int:
    g = parse_grammar(_read(args.file))
    if not isinstance(g, UvgdlGrammar):
        raise _Fail("check works on %type uvgdl grammars")
    t = parse_tree(_read(args.tree), g)
    problems = tree_problems(g, t)
    if problems:
        for p in problems:
            print(p)
        return 1
    if all(n.instance is not None for _, n in walk(t)):
        a = VectorAssignment.from_tree(t)
    else:
        a = infer_assignment(g, t, reflexive=not args.proper)
        if a is None:
            print("invalid: no grouping into vector instances satisfies the cover and dominance conditions")
            return 1
    cover = check_vector_cover(g, t, a)
    dom = check_dominance(g, t, a, reflexive=not args.proper) if cover else None
    print(f"vector cover: {cover}")
    if dom is not None:
        print(f"dominance: {dom}")
    if args.dot:
        _write(args.dot, tree_to_dot(t, g, a))
    return 0 if cover and dom else 1


def cmd_lint(args) -> int:
    g = parse_grammar(_read(args.file))
    warnings = 0
    if isinstance(g, UvgdlGrammar):
        for rep in connectivity_lint(g):
            print(rep)
            warnings += not rep.connected
        if not g.is_lexicalized:
            print("note: some vector has no terminal symbol")
    else:
        print(f"restricted index normal form: {'yes' if is_rinf(g) else 'no'}")
        print(f"extended two form: {'yes' if is_etf(g) else 'no'}")
    return 1 if warnings else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mvg", description="Multiset-valued linear index grammars and "
                                 "unordered vector grammars with dominance links.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="recognize an input string")
    p.add_argument("file", help="grammar file, or - for stdin")
    p.add_argument("--input", required=True, help="tokens, split on whitespace or --sep")
    p.add_argument("--sep", help="token separator")
    p.add_argument("--index-cap", type=int, help="per-index count bound (default: input length)")
    p.add_argument("--dot", metavar="OUT", help="write the chart as DOT")
    p.add_argument("--derivation", action="store_true", help="print one derivation on accept")
    p.set_defaults(run=cmd_parse)

    p = sub.add_parser("normalize", help="rewrite into a normal form")
    p.add_argument("file")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--rinf", action="store_true", help="restricted index normal form")
    mode.add_argument("--etf", action="store_true", help="extended two form")
    p.add_argument("-o", "--output")
    p.set_defaults(run=cmd_normalize)

    p = sub.add_parser("convert", help="UVG-DL to {}-LIG or back, chosen by %%type")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    p.set_defaults(run=cmd_convert)

    p = sub.add_parser("enumerate", help="list the strings up to a length")
    p.add_argument("file")
    p.add_argument("--max-len", type=int, required=True)
    p.add_argument("--max-steps", type=int, default=1000)
    p.add_argument("--max-index", type=int, default=64)
    p.add_argument("--sep", help="separator printed between tokens")
    p.set_defaults(run=cmd_enumerate)

    p = sub.add_parser("check", help="validate a derivation tree")
    p.add_argument("file")
    p.add_argument("--tree", required=True)
    p.add_argument("--proper", action="store_true", help="read dominance as proper (irreflexive)")
    p.add_argument("--dot", metavar="OUT", help="write the tree as DOT")
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("lint", help="report structural warnings")
    p.add_argument("file")
    p.set_defaults(run=cmd_lint)
    return ap


def run_command(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except (MvgError, _Fail, OSError, ValueError) as exc:
        print(f"mvg: error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
