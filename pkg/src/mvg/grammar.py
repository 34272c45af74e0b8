"""Data model and well-formedness checks for {}-LIG and UVG-DL grammars.

Right-hand sides are flat tuples mixing terminals (plain ``str``) and
nonterminal occurrences (:class:`Nt`).  In a {}-LIG every occurrence carries
an index multiset; in a UVG-DL the multisets are always empty.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Union

from .multiset import EMPTY, IndexMultiset

RESERVED_PREFIX = "@"


@dataclass(frozen=True, order=True)
class Nt:
    name: str
    indices: IndexMultiset = EMPTY

    def __str__(self):
        return self.name + (str(self.indices) if self.indices else "")


Item = Union[str, Nt]


def is_nt(item) -> bool:
    return isinstance(item, Nt)


def terminals_of(items: Iterable[Item]) -> tuple[str, ...]:
    return tuple(x for x in items if not isinstance(x, Nt))


def nonterminals_of(items: Iterable[Item]) -> tuple[Nt, ...]:
    return tuple(x for x in items if isinstance(x, Nt))


@dataclass(frozen=True)
class MsligProduction:
    lhs: str
    lhs_indices: IndexMultiset
    rhs: tuple[Item, ...]
    label: str | None = None
    origin: str | None = field(default=None, compare=False)

    @property
    def nts(self) -> tuple[Nt, ...]:
        return nonterminals_of(self.rhs)

    @property
    def arity(self) -> int:
        return len(self.nts)

    @property
    def is_epsilon(self) -> bool:
        return not self.rhs

    @property
    def pushed(self) -> int:
        """Total number of index symbols added to the right-hand side."""
        return sum(len(nt.indices) for nt in self.nts)

    def __str__(self):
        lhs = self.lhs + (str(self.lhs_indices) if self.lhs_indices else "")
        rhs = " ".join(str(x) if isinstance(x, Nt) else repr(x) for x in self.rhs) or "ε"
        head = f"{self.label}: " if self.label else ""
        return f"{head}{lhs} -> {rhs}"


@dataclass(frozen=True)
class MsligGrammar:
    nonterminals: frozenset[str]
    terminals: frozenset[str]
    indices: frozenset[str]
    productions: tuple[MsligProduction, ...]
    start: str

    def __post_init__(self):
        for name in ("nonterminals", "terminals", "indices"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        object.__setattr__(self, "productions", tuple(self.productions))

    @cached_property
    def by_lhs(self) -> dict[str, tuple[MsligProduction, ...]]:
        table: dict[str, list[MsligProduction]] = {}
        for p in self.productions:
            table.setdefault(p.lhs, []).append(p)
        return {k: tuple(v) for k, v in table.items()}

    def productions_for(self, lhs: str) -> tuple[MsligProduction, ...]:
        return self.by_lhs.get(lhs, ())

    @property
    def index_order(self) -> tuple[str, ...]:
        return tuple(sorted(self.indices))

    def replace(self, **changes) -> MsligGrammar:
        fields = dict(nonterminals=self.nonterminals, terminals=self.terminals,
                      indices=self.indices, productions=self.productions, start=self.start)
        fields.update(changes)
        return MsligGrammar(**fields)


@dataclass(frozen=True)
class UvgdlProduction:
    label: str
    lhs: str
    rhs: tuple[Item, ...]

    @property
    def nts(self) -> tuple[Nt, ...]:
        return nonterminals_of(self.rhs)

    def __str__(self):
        rhs = " ".join(x.name if isinstance(x, Nt) else repr(x) for x in self.rhs) or "ε"
        return f"{self.label}: {self.lhs} -> {rhs}"


@dataclass(frozen=True)
class DominanceLink:
    """The ``position``-th RHS symbol (1-based) of ``source`` must dominate
    the node rewritten by ``target``."""
    source: str
    position: int
    target: str

    def __str__(self):
        return f"{self.source}.{self.position} > {self.target}"


@dataclass(frozen=True)
class Vector:
    name: str
    productions: tuple[UvgdlProduction, ...]
    links: tuple[DominanceLink, ...] = ()
    origin: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "productions", tuple(self.productions))
        object.__setattr__(self, "links", tuple(self.links))

    @cached_property
    def by_label(self) -> dict[str, UvgdlProduction]:
        return {p.label: p for p in self.productions}

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(p.label for p in self.productions)

    def production(self, label: str) -> UvgdlProduction:
        return self.by_label[label]

    @property
    def is_lexicalized(self) -> bool:
        return any(terminals_of(p.rhs) for p in self.productions)


@dataclass(frozen=True)
class UvgdlGrammar:
    nonterminals: frozenset[str]
    terminals: frozenset[str]
    vectors: tuple[Vector, ...]
    start: str

    def __post_init__(self):
        object.__setattr__(self, "nonterminals", frozenset(self.nonterminals))
        object.__setattr__(self, "terminals", frozenset(self.terminals))
        object.__setattr__(self, "vectors", tuple(self.vectors))

    @cached_property
    def by_name(self) -> dict[str, Vector]:
        return {v.name: v for v in self.vectors}

    def vector(self, name: str) -> Vector:
        return self.by_name[name]

    @property
    def is_lexicalized(self) -> bool:
        return all(v.is_lexicalized for v in self.vectors)


# -- validation ---------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    location: str
    message: str

    def __str__(self):
        return f"{self.location}: {self.message}"


def _check_alphabets(named: dict[str, frozenset[str]], start: str, nonterminals, report, allow_reserved):
    names = list(named)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            for sym in sorted(named[a] & named[b]):
                report.append(Violation("alphabets", f"symbol {sym!r} is declared as both {a} and {b}"))
    if start not in nonterminals:
        report.append(Violation("start", f"start symbol {start!r} is not a nonterminal"))
    if not allow_reserved:
        for kind, syms in named.items():
            for sym in sorted(syms):
                if sym.startswith(RESERVED_PREFIX):
                    report.append(Violation("alphabets", f"{kind} {sym!r} uses the reserved prefix {RESERVED_PREFIX!r}"))


def _prod_name(p, i):
    return f"production {i + 1}" + (f" ({p.label})" if getattr(p, "label", None) else "")


def validate_mslig(g: MsligGrammar, allow_reserved: bool = False) -> list[Violation]:
    """List every well-formedness violation of ``g``; empty means valid.

    Names beginning with ``@`` are reserved for generated nonterminals and
    rejected unless ``allow_reserved`` is set.
    """
    report: list[Violation] = []
    _check_alphabets({"nonterminal": g.nonterminals, "terminal": g.terminals, "index": g.indices},
                     g.start, g.nonterminals, report, allow_reserved)

    def check_ms(ms, where):
        for sym in ms.symbols():
            if sym not in g.indices:
                report.append(Violation(where, f"undeclared index {sym!r}"))

    for i, p in enumerate(g.productions):
        where = _prod_name(p, i)
        if p.lhs not in g.nonterminals:
            report.append(Violation(where, f"left-hand side {p.lhs!r} is not a declared nonterminal"))
        check_ms(p.lhs_indices, where)
        for item in p.rhs:
            if isinstance(item, Nt):
                if item.name not in g.nonterminals:
                    report.append(Violation(where, f"undeclared nonterminal {item.name!r}"))
                check_ms(item.indices, where)
            elif item not in g.terminals:
                report.append(Violation(where, f"undeclared terminal {item!r}"))
    return report


def validate_uvgdl(g: UvgdlGrammar, allow_reserved: bool = False) -> list[Violation]:
    report: list[Violation] = []
    _check_alphabets({"nonterminal": g.nonterminals, "terminal": g.terminals},
                     g.start, g.nonterminals, report, allow_reserved)
    seen_vectors = set()
    labels_elsewhere: dict[str, str] = {}
    for v in g.vectors:
        if v.name in seen_vectors:
            report.append(Violation(f"vector {v.name}", "duplicate vector name"))
        seen_vectors.add(v.name)
        for p in v.productions:
            labels_elsewhere.setdefault(p.label, v.name)

    for v in g.vectors:
        labels = set()
        for p in v.productions:
            where = f"vector {v.name}, {p.label}"
            if p.label in labels:
                report.append(Violation(where, "duplicate production label"))
            labels.add(p.label)
            if p.lhs not in g.nonterminals:
                report.append(Violation(where, f"left-hand side {p.lhs!r} is not a declared nonterminal"))
            for item in p.rhs:
                if isinstance(item, Nt):
                    if item.name not in g.nonterminals:
                        report.append(Violation(where, f"undeclared nonterminal {item.name!r}"))
                    if item.indices:
                        report.append(Violation(where, "UVG-DL symbols carry no index multisets"))
                elif item not in g.terminals:
                    report.append(Violation(where, f"undeclared terminal {item!r}"))
        for link in v.links:
            where = f"vector {v.name}, dom {link}"
            src = v.by_label.get(link.source)
            if src is None:
                other = labels_elsewhere.get(link.source)
                hint = f" (it belongs to vector {other})" if other else ""
                report.append(Violation(where, f"source {link.source!r} is not a production of this vector{hint}"))
            elif not 1 <= link.position <= len(src.rhs):
                report.append(Violation(where, f"position {link.position} is outside the right-hand side of {src.label}"))
            elif not isinstance(src.rhs[link.position - 1], Nt):
                report.append(Violation(where, f"position {link.position} of {src.label} is a terminal"))
            if link.target not in v.by_label:
                other = labels_elsewhere.get(link.target)
                hint = f" (it belongs to vector {other})" if other else ""
                report.append(Violation(where, f"target {link.target!r} is not a production of this vector{hint}"))
    return report
