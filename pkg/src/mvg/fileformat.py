"""Reading and writing grammar files and derivation-tree files.

Grammar files are UTF-8, line oriented, ``#`` starts a comment::

    %type mslig
    %start S
    %indices s_a s_b            # optional; inferred from use when absent
    p1: S -> S[s_a, s_b]
    p2: S -> A 'a' B
    A[s_a] ->                   # empty right-hand side is epsilon

UVG-DL files group productions into vector blocks::

    %type uvgdl
    %start S'
    vector v1 {
      p1: S' -> 'daß' VP
      p2: VP -> NP VP ; dom: p2.2 > p1
    }

Tree files are s-expressions ``(vec:label@id child ...)`` listing only the
nonterminal children; terminal leaves come from the production.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import GrammarSyntaxError, InvalidGrammar
from .grammar import (RESERVED_PREFIX, DominanceLink, MsligGrammar, MsligProduction, Nt,
                      UvgdlGrammar, UvgdlProduction, Vector, validate_mslig, validate_uvgdl)
from .multiset import EMPTY, IndexMultiset

_IDENT = r"(?:@[\w'′/]+|[^\W\d][\w'′/]*)(?:\{[^{}\n]*\})?"
_TOKEN = re.compile(
    rf"""(?P<ws>[ \t\r]+)
       |(?P<comment>\#[^\n]*)
       |(?P<arrow>->|→)
       |(?P<quoted>'(?:[^'\\\n]|\\.)*')
       |(?P<number>\d+)
       |(?P<ident>{_IDENT})
       |(?P<punct>[\[\],:;{{}}.>\n])
    """, re.VERBOSE)

_BARE_TERMINAL = re.compile(rf"^{_IDENT}$")


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise GrammarSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        value = m.group()
        col = pos - line_start + 1
        if kind == "punct" and value == "\n":
            toks.append(_Tok("newline", value, line, col))
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            if kind == "punct":
                kind = value
            toks.append(_Tok(kind, value, line, col))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


def _unquote(s: str) -> str:
    return re.sub(r"\\(.)", r"\1", s[1:-1])


def quote(s: str) -> str:
    return "'" + s.replace("\\", "\\\\").replace("'", "\\'") + "'"


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return GrammarSyntaxError(msg, tok.line, tok.col)

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind, what=None) -> _Tok:
        if self.tok.kind != kind:
            found = self.tok.text.strip() or self.tok.kind
            raise self.error(f"expected {what or kind}, found {found!r}")
        return self.next()

    def skip_newlines(self):
        while self.tok.kind == "newline":
            self.next()

    def at_line_end(self) -> bool:
        return self.tok.kind in ("newline", "eof", ";", "}")

    def multiset(self):
        """Optional ``[a, b, a]`` after a nonterminal."""
        syms = []
        if self.tok.kind != "[":
            return EMPTY, syms
        self.next()
        while self.tok.kind != "]":
            t = self.expect("ident", "index symbol")
            syms.append(t)
            if self.tok.kind == ",":
                self.next()
            elif self.tok.kind != "]":
                raise self.error("expected ',' or ']' in index multiset")
        self.next()
        return IndexMultiset.of(*(t.text for t in syms)), syms


@dataclass
class _Header:
    type: str | None = None
    start: str | None = None
    start_tok: _Tok | None = None
    nonterminals: list | None = None
    terminals: list | None = None
    indices: list | None = None
    generated: bool = False


def parse_grammar(text: str, validate: bool = True):
    """Parse grammar text into an :class:`MsligGrammar` or :class:`UvgdlGrammar`.

    Raises :class:`GrammarSyntaxError` with line/column on malformed input and
    on undeclared symbols, and :class:`InvalidGrammar` for remaining
    well-formedness violations.
    """
    header, body = _split_header(text)
    if header.type not in ("mslig", "uvgdl"):
        raise GrammarSyntaxError("missing or unknown %type directive (expected mslig or uvgdl)", 1, 1)
    if header.start is None:
        raise GrammarSyntaxError("missing %start directive", 1, 1)
    p = _Parser(body)
    if header.type == "mslig":
        g = _parse_mslig_body(p, header)
        report = validate_mslig(g, allow_reserved=header.generated) if validate else []
    else:
        g = _parse_uvgdl_body(p, header)
        report = validate_uvgdl(g, allow_reserved=header.generated) if validate else []
    if report:
        raise InvalidGrammar(report)
    return g


_DIRECTIVE = re.compile(r"^\s*%(\w+)(.*)$")


def _split_header(text: str) -> tuple[_Header, str]:
    # directives are blanked out of the body so that line numbers stay aligned
    h = _Header()
    lines = text.split("\n")
    for n, raw in enumerate(lines, start=1):
        m = _DIRECTIVE.match(raw)
        if not m:
            continue
        name, rest = m.group(1), m.group(2)
        toks = [t for t in _tokenize(rest) if t.kind not in ("eof", "newline")]
        col0 = raw.index("%") + len(name) + 2
        for t in toks:
            t.line, t.col = n, t.col + col0 - 1
        if name == "type":
            if len(toks) != 1:
                raise GrammarSyntaxError("%type takes one argument", n, 1)
            h.type = toks[0].text
        elif name == "start":
            if len(toks) != 1 or toks[0].kind != "ident":
                raise GrammarSyntaxError("%start takes one nonterminal", n, 1)
            h.start, h.start_tok = toks[0].text, toks[0]
        elif name in ("nonterminals", "indices"):
            bad = [t for t in toks if t.kind != "ident"]
            if bad:
                raise GrammarSyntaxError(f"bad symbol {bad[0].text!r} in %{name}", n, bad[0].col)
            setattr(h, name, [t.text for t in toks])
        elif name == "terminals":
            syms = []
            for t in toks:
                if t.kind == "quoted":
                    syms.append(_unquote(t.text))
                else:
                    raise GrammarSyntaxError(f"terminals must be quoted, found {t.text!r}", n, t.col)
            h.terminals = syms
        elif name == "generated":
            h.generated = True
        else:
            raise GrammarSyntaxError(f"unknown directive %{name}", n, 1)
        lines[n - 1] = ""
    return h, "\n".join(lines)


class _Symbols:
    """Collects declared/used symbols and reports undeclared uses with location."""

    def __init__(self, header: _Header, with_indices: bool):
        self.declared = {
            "nonterminal": set(header.nonterminals) if header.nonterminals is not None else None,
            "terminal": set(header.terminals) if header.terminals is not None else None,
            "index": set(header.indices) if header.indices is not None else None,
        }
        self.used = {"nonterminal": set(), "terminal": set(), "index": set()}
        self.with_indices = with_indices

    def use(self, kind, name, tok):
        declared = self.declared[kind]
        if declared is not None and name not in declared:
            raise GrammarSyntaxError(f"undeclared {kind} {name!r}", tok.line, tok.col)
        self.used[kind].add(name)

    def alphabet(self, kind):
        d = self.declared[kind]
        return frozenset(d if d is not None else self.used[kind])


def _parse_rule(p: _Parser, syms: _Symbols, with_indices: bool):
    """``[label:] LHS[ms] -> item ...`` up to end of line / ';' / '}'."""
    first = p.expect("ident", "production")
    label = None
    if p.tok.kind == ":":
        p.next()
        label = first.text
        lhs_tok = p.expect("ident", "left-hand side nonterminal")
    else:
        lhs_tok = first
    syms.use("nonterminal", lhs_tok.text, lhs_tok)
    lhs_ms = EMPTY
    if with_indices:
        lhs_ms, ix_toks = p.multiset()
        for t in ix_toks:
            syms.use("index", t.text, t)
    p.expect("arrow", "'->'")
    rhs = []
    while not p.at_line_end():
        t = p.next()
        if t.kind == "quoted":
            term = _unquote(t.text)
            syms.use("terminal", term, t)
            rhs.append(term)
        elif t.kind == "ident":
            syms.use("nonterminal", t.text, t)
            ms = EMPTY
            if with_indices:
                ms, ix_toks = p.multiset()
                for it in ix_toks:
                    syms.use("index", it.text, it)
            elif p.tok.kind == "[":
                raise p.error("index multisets are not allowed in a UVG-DL grammar")
            rhs.append(Nt(t.text, ms))
        elif t.kind == "[":
            raise p.error("index multiset must follow a nonterminal", t)
        else:
            raise p.error(f"unexpected {t.text!r} in right-hand side", t)
    return label, lhs_tok.text, lhs_ms, tuple(rhs)


def _check_start(header: _Header, syms: _Symbols):
    syms.use("nonterminal", header.start, header.start_tok)


def _parse_mslig_body(p: _Parser, header: _Header) -> MsligGrammar:
    syms = _Symbols(header, with_indices=True)
    _check_start(header, syms)
    prods = []
    while True:
        p.skip_newlines()
        if p.tok.kind == "eof":
            break
        label, lhs, lhs_ms, rhs = _parse_rule(p, syms, with_indices=True)
        prods.append(MsligProduction(lhs, lhs_ms, rhs, label))
        if p.tok.kind == ";":
            p.next()
        elif p.tok.kind not in ("newline", "eof"):
            raise p.error("expected end of production")
    return MsligGrammar(syms.alphabet("nonterminal"), syms.alphabet("terminal"),
                        syms.alphabet("index"), tuple(prods), header.start)


def _parse_uvgdl_body(p: _Parser, header: _Header) -> UvgdlGrammar:
    if header.indices:
        raise GrammarSyntaxError("%indices is not allowed in a UVG-DL grammar", 1, 1)
    syms = _Symbols(header, with_indices=False)
    _check_start(header, syms)
    vectors = []
    while True:
        p.skip_newlines()
        if p.tok.kind == "eof":
            break
        kw = p.expect("ident", "'vector'")
        if kw.text != "vector":
            raise p.error(f"expected 'vector', found {kw.text!r}", kw)
        name = p.expect("ident", "vector name").text
        p.skip_newlines()
        p.expect("{", "'{'")
        prods, links = [], []
        while True:
            while p.tok.kind in ("newline", ";"):
                p.next()
            if p.tok.kind == "}":
                p.next()
                break
            if p.tok.kind == "eof":
                raise p.error(f"unterminated vector block {name!r}")
            if p.tok.kind == "ident" and p.tok.text == "dom" and p.toks[p.i + 1].kind == ":":
                p.next()
                p.next()
                links.extend(_parse_links(p))
                continue
            label, lhs, _, rhs = _parse_rule(p, syms, with_indices=False)
            if label is None:
                raise p.error("UVG-DL productions need a label ('p1: A -> ...')")
            prods.append(UvgdlProduction(label, lhs, rhs))
        vectors.append(Vector(name, tuple(prods), tuple(links)))
    return UvgdlGrammar(syms.alphabet("nonterminal"), syms.alphabet("terminal"),
                        tuple(vectors), header.start)


def _parse_links(p: _Parser) -> list[DominanceLink]:
    links = []
    while True:
        src = p.expect("ident", "source label")
        # 'p1.2' may lex as ident 'p1' '.' number
        p.expect(".", "'.'")
        pos = p.expect("number", "right-hand side position")
        p.expect(">", "'>'")
        tgt = p.expect("ident", "target label")
        links.append(DominanceLink(src.text, int(pos.text), tgt.text))
        if p.tok.kind == ",":
            p.next()
            continue
        if not p.at_line_end():
            raise p.error("expected end of dominance declaration")
        return links


# -- serialization -------------------------------------------------------------

def _ident_ok(name: str) -> bool:
    return bool(_BARE_TERMINAL.match(name))


def _fmt_ms(ms: IndexMultiset) -> str:
    return "[" + ", ".join(ms.elements()) + "]" if ms else ""


def _fmt_item(x) -> str:
    if isinstance(x, Nt):
        return x.name + _fmt_ms(x.indices)
    return quote(x)


def _has_reserved(names) -> bool:
    return any(n.startswith(RESERVED_PREFIX) for n in names)


def serialize_grammar(g, comments: list[str] | None = None) -> str:
    """Canonical text for ``g``: sorted declarations, productions in order."""
    out = [f"# {c}" if c else "#" for c in (comments or [])]
    if isinstance(g, MsligGrammar):
        out.append("%type mslig")
    elif isinstance(g, UvgdlGrammar):
        out.append("%type uvgdl")
    else:
        raise TypeError(f"not a grammar: {type(g).__name__}")
    out.append(f"%start {g.start}")
    reserved = _has_reserved(g.nonterminals) or (isinstance(g, MsligGrammar) and _has_reserved(g.indices))
    if reserved:
        out.append("%generated")
    out.append("%nonterminals " + " ".join(sorted(g.nonterminals)))
    out.append("%terminals " + " ".join(quote(t) for t in sorted(g.terminals)))
    if isinstance(g, MsligGrammar):
        out.append("%indices " + " ".join(sorted(g.indices)))
        out.append("")
        for p in g.productions:
            head = f"{p.label}: " if p.label else ""
            rhs = " ".join(_fmt_item(x) for x in p.rhs)
            out.append(f"{head}{p.lhs}{_fmt_ms(p.lhs_indices)} -> {rhs}".rstrip())
    else:
        for v in g.vectors:
            out.append("")
            if v.origin:
                out.append(f"# from {v.origin}")
            out.append(f"vector {v.name} {{")
            for p in v.productions:
                rhs = " ".join(_fmt_item(x) for x in p.rhs)
                out.append(f"  {p.label}: {p.lhs} -> {rhs}".rstrip())
            for link in v.links:
                out.append(f"  dom: {link.source}.{link.position} > {link.target}")
            out.append("}")
    return "\n".join(out) + "\n"


# -- derivation tree files ---------------------------------------------------------

@dataclass(frozen=True)
class TreeNode:
    vector: str
    label: str
    instance: int | None
    children: tuple  # TreeNode or terminal str, one per RHS symbol

    @property
    def key(self):
        return (self.vector, self.label)


_TREE_TOKEN = re.compile(r"\s+|(?P<open>\()|(?P<close>\))|(?P<head>[^\s()]+)")


def parse_tree(text: str, g: UvgdlGrammar) -> TreeNode:
    """Parse ``(vec:label@id child ...)`` against ``g``, filling in terminal leaves."""
    text = re.sub(r"#[^\n]*", "", text)
    toks = []
    line, line_start = 1, 0
    for m in _TREE_TOKEN.finditer(text):
        chunk = m.group()
        if m.lastgroup is None:
            nl = chunk.count("\n")
            if nl:
                line += nl
                line_start = m.start() + chunk.rindex("\n") + 1
            continue
        toks.append((m.lastgroup, chunk, line, m.start() - line_start + 1))
    pos = 0

    def err(msg, t=None):
        t = t or (toks[pos] if pos < len(toks) else ("eof", "", line, 1))
        return GrammarSyntaxError(msg, t[2], t[3])

    def node():
        nonlocal pos
        if pos >= len(toks) or toks[pos][0] != "open":
            raise err("expected '('")
        pos += 1
        if pos >= len(toks) or toks[pos][0] != "head":
            raise err("expected 'vector:label'")
        head_tok = toks[pos]
        pos += 1
        m = re.fullmatch(r"([^:@]+):([^:@]+)(?:@(\d+))?", head_tok[1])
        if not m:
            raise err(f"malformed node head {head_tok[1]!r} (want vector:label[@id])", head_tok)
        vec, label, inst = m.group(1), m.group(2), m.group(3)
        if vec not in g.by_name or label not in g.vector(vec).by_label:
            raise err(f"unknown production {vec}:{label}", head_tok)
        prod = g.vector(vec).production(label)
        kids = []
        while pos < len(toks) and toks[pos][0] == "open":
            kids.append((toks[pos], node()))
        if pos >= len(toks) or toks[pos][0] != "close":
            raise err("expected ')'")
        pos += 1
        nts = prod.nts
        if len(kids) != len(nts):
            raise err(f"{vec}:{label} has {len(nts)} nonterminal children, tree gives {len(kids)}", head_tok)
        it = iter(kids)
        children = []
        for x in prod.rhs:
            if isinstance(x, Nt):
                ktok, kid = next(it)
                kprod = g.vector(kid.vector).production(kid.label)
                if kprod.lhs != x.name:
                    raise err(f"child {kid.vector}:{kid.label} rewrites {kprod.lhs}, expected {x.name}", ktok)
                children.append(kid)
            else:
                children.append(x)
        return TreeNode(vec, label, int(inst) if inst else None, tuple(children))

    root = node()
    if pos != len(toks):
        raise err("trailing input after tree")
    return root


def serialize_tree(t: TreeNode) -> str:
    head = f"{t.vector}:{t.label}" + (f"@{t.instance}" if t.instance is not None else "")
    kids = [serialize_tree(c) for c in t.children if isinstance(c, TreeNode)]
    return "(" + " ".join([head] + kids) + ")"
