"""Chart recognizer for {}-LIGs.

The grammar is brought into extended two form first.  A chart entry
``<A, counts>`` in cell ``(i, j)`` says that ``A`` carrying the index multiset
``counts`` derives tokens ``i+1 .. j``.  Counts are dense tuples over the
sorted index alphabet and never exceed the configured cap.
"""
from __future__ import annotations

import time
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

from .derivation import StepApplication, apply_step
from .errors import BudgetExceeded, UnknownToken
from .grammar import MsligGrammar, MsligProduction, Nt
from .multiset import IndexMultiset
from .normal_forms import etf_shape, to_etf

Counts = tuple[int, ...]


@dataclass(frozen=True, order=True)
class ChartItem:
    nonterminal: str
    counts: Counts

    def multiset(self, order: Sequence[str]) -> IndexMultiset:
        return IndexMultiset({f: n for f, n in zip(order, self.counts) if n})

    def render(self, order: Sequence[str]) -> str:
        return f"<{self.nonterminal}, {self.multiset(order)}>"


@dataclass(frozen=True)
class RecognizerConfig:
    cap: int | None = None                # per-symbol count bound; None means the input length
    max_combinations: int | None = None
    time_limit: float | None = None       # seconds

    def __post_init__(self):
        if self.cap is not None and self.cap < 1:
            raise ValueError("cap must be at least 1")


@dataclass
class _Rule:
    prod: MsligProduction
    lhs: str
    top: Counts                    # LHS multiset
    kids: tuple[tuple[str, Counts], ...]


def _dense(ms: IndexMultiset, order) -> Counts:
    return tuple(ms[f] for f in order)


def _compile(g: MsligGrammar):
    order = tuple(sorted(g.indices))
    rules = defaultdict(list)
    for p in g.productions:
        shape = etf_shape(p)
        kids = tuple((x.name, _dense(x.indices, order)) for x in p.nts)
        rules[shape].append(_Rule(p, p.lhs, _dense(p.lhs_indices, order), kids))
    return order, rules


def _rewrite(u: Counts, s_child: Counts, s_top: Counts, acc: Counts | None = None) -> Counts | None:
    """``(u - s_child) + s_top (+ acc)`` or None when ``s_child`` is not in ``u``."""
    out = []
    for k, (a, b) in enumerate(zip(u, s_child)):
        if a < b:
            return None
        out.append(a - b + s_top[k] + (acc[k] if acc is not None else 0))
    return tuple(out)


def combine_binary(left: ChartItem, right: ChartItem, prod: MsligProduction,
                   cap: int, order: Sequence[str]) -> ChartItem | None:
    """The parent item for a binary production ``A s -> B1 s1 B2 s2``, or None
    if a child lacks its required indices or a count would exceed ``cap``."""
    b1, b2 = prod.nts
    if (left.nonterminal, right.nonterminal) != (b1.name, b2.name):
        return None
    v = _rewrite(right.counts, _dense(b2.indices, order), _dense(prod.lhs_indices, order))
    if v is None:
        return None
    out = _rewrite(left.counts, _dense(b1.indices, order), v)
    if out is None or max(out, default=0) > cap:
        return None
    return ChartItem(prod.lhs, out)


@dataclass
class Chart:
    tokens: tuple[str, ...]
    grammar: MsligGrammar          # the extended-two-form grammar actually used
    order: tuple[str, ...]
    cap: int
    cells: dict = field(default_factory=dict)   # (i, j) -> {ChartItem: back-pointer}
    cap_hit: bool = False
    combinations: int = 0

    @property
    def n(self) -> int:
        return len(self.tokens)

    @property
    def goal(self) -> ChartItem:
        return ChartItem(self.grammar.start, (0,) * len(self.order))

    @property
    def accepted(self) -> bool:
        return self.goal in self.cells.get((0, self.n), {})

    def items(self, i: int, j: int) -> list[ChartItem]:
        return sorted(self.cells.get((i, j), {}))


@dataclass
class Recognition:
    accepted: bool
    chart: Chart

    @property
    def cap_hit(self) -> bool:
        return self.chart.cap_hit

    def __bool__(self):
        return self.accepted


class _Closure:
    """State shared by all cell computations of one run."""

    def __init__(self, chart: Chart, rules, cfg: RecognizerConfig):
        self.chart = chart
        self.rules = rules
        self.unary = defaultdict(list)
        for r in rules["unary"]:
            self.unary[r.kids[0][0]].append(r)
        self.left_of = defaultdict(list)
        self.right_of = defaultdict(list)
        for r in rules["binary"]:
            self.left_of[r.kids[0][0]].append(r)
            self.right_of[r.kids[1][0]].append(r)
        self.cfg = cfg
        self.deadline = time.monotonic() + cfg.time_limit if cfg.time_limit else None

    def tick(self):
        c = self.chart
        c.combinations += 1
        if self.cfg.max_combinations is not None and c.combinations > self.cfg.max_combinations:
            raise BudgetExceeded(f"more than {self.cfg.max_combinations} item combinations")
        if c.combinations % 4096 == 0:
            self.check_time()

    def check_time(self):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise BudgetExceeded(f"time limit of {self.cfg.time_limit}s exceeded")

    def binary(self, r: _Rule, u: Counts, v: Counts) -> Counts | None:
        self.tick()
        (_, s1), (_, s2) = r.kids
        w = _rewrite(v, s2, r.top)
        if w is None:
            return None
        out = _rewrite(u, s1, w)
        if out is None:
            return None
        if max(out, default=0) > self.chart.cap:
            self.chart.cap_hit = True
            return None
        return out

    def unary_step(self, r: _Rule, u: Counts) -> Counts | None:
        self.tick()
        out = _rewrite(u, r.kids[0][1], r.top)
        if out is None:
            return None
        if max(out, default=0) > self.chart.cap:
            self.chart.cap_hit = True
            return None
        return out


def _by_nt(cell: dict) -> dict[str, list[ChartItem]]:
    out = defaultdict(list)
    for x in cell:
        out[x.nonterminal].append(x)
    return out


def cell_closure(chart: Chart, i: int, j: int, state: _Closure) -> dict:
    """Fill cell ``(i, j)`` assuming every strictly shorter span is complete.

    Seeds come from terminal rules (one-token spans), epsilon rules (empty
    spans) and binary rules split at ``i < k < j``; then unary rules and
    binary rules with one empty-span child are applied until nothing new
    appears.
    """
    cell: dict = {}
    chart.cells[(i, j)] = cell
    agenda = []
    zero = (0,) * len(chart.order)

    def add(item, bp):
        if item not in cell:
            cell[item] = bp
            agenda.append(item)

    if i == j:
        for r in state.rules["terminal"]:
            if not r.prod.rhs:
                add(ChartItem(r.lhs, zero), ("eps", r.prod))
    elif j == i + 1:
        for r in state.rules["terminal"]:
            if r.prod.rhs == (chart.tokens[i],):
                add(ChartItem(r.lhs, zero), ("term", r.prod))
    for k in range(i + 1, j):
        left = _by_nt(chart.cells[(i, k)])
        right = _by_nt(chart.cells[(k, j)])
        for r in state.rules["binary"]:
            (b1, _), (b2, _) = r.kids
            for x in left.get(b1, ()):
                for y in right.get(b2, ()):
                    out = state.binary(r, x.counts, y.counts)
                    if out is not None:
                        add(ChartItem(r.lhs, out), ("binary", r.prod, k, x, y))

    empty_left = chart.cells[(i, i)] if i != j else None
    empty_right = chart.cells[(j, j)] if i != j else None
    while agenda:
        x = agenda.pop()
        for r in state.unary[x.nonterminal]:
            out = state.unary_step(r, x.counts)
            if out is not None:
                add(ChartItem(r.lhs, out), ("unary", r.prod, x))
        # x as the left child, right child spanning nothing at j
        partners = empty_right if empty_right is not None else cell
        for r in state.left_of[x.nonterminal]:
            b2 = r.kids[1][0]
            for y in [y for y in partners if y.nonterminal == b2]:
                out = state.binary(r, x.counts, y.counts)
                if out is not None:
                    add(ChartItem(r.lhs, out), ("binary", r.prod, j, x, y))
        partners = empty_left if empty_left is not None else cell
        for r in state.right_of[x.nonterminal]:
            b1 = r.kids[0][0]
            for y in [y for y in partners if y.nonterminal == b1]:
                out = state.binary(r, y.counts, x.counts)
                if out is not None:
                    add(ChartItem(r.lhs, out), ("binary", r.prod, i, y, x))
    return cell


def recognize(g: MsligGrammar, tokens: Sequence[str], cfg: RecognizerConfig | None = None) -> Recognition:
    """Decide whether ``tokens`` is derivable from ``g``'s start symbol.

    Sound in all cases; complete for derivations in which no chart entry needs
    more than ``cap`` copies of one index.  ``Recognition.cap_hit`` reports
    whether the cap ever cut an entry, so a rejection with no cap hit is
    final.
    """
    cfg = cfg or RecognizerConfig()
    tokens = tuple(tokens)
    for pos, t in enumerate(tokens, start=1):
        if t not in g.terminals:
            raise UnknownToken(t, pos)
    etf = to_etf(g)
    order, rules = _compile(etf)
    cap = cfg.cap if cfg.cap is not None else max(1, len(tokens))
    chart = Chart(tokens, etf, order, cap)
    state = _Closure(chart, rules, cfg)
    n = len(tokens)
    for span in range(n + 1):
        for i in range(n - span + 1):
            state.check_time()
            cell_closure(chart, i, i + span, state)
    return Recognition(chart.accepted, chart)


def extract_tree(chart: Chart) -> list[StepApplication] | None:
    """A leftmost derivation of the input over ``chart.grammar``, following one
    back-pointer per entry; None if the input was rejected."""
    if not chart.accepted:
        return None
    order = chart.order
    form: tuple = (Nt(chart.grammar.start),)
    steps = []
    stack = [((0, chart.n), chart.goal)]
    while stack:
        (i, j), item = stack.pop()
        bp = chart.cells[(i, j)][item]
        kind, prod = bp[0], bp[1]
        if kind in ("eps", "term"):
            dist = ()
            kids = []
        elif kind == "unary":
            child = bp[2]
            dist = (child.multiset(order) - prod.nts[0].indices,)
            kids = [((i, j), child)]
        else:
            k, x, y = bp[2], bp[3], bp[4]
            b1, b2 = prod.nts
            dist = (x.multiset(order) - b1.indices, y.multiset(order) - b2.indices)
            kids = [((i, k), x), ((k, j), y)]
        pos = next(p for p, s in enumerate(form) if isinstance(s, Nt))
        step = StepApplication(form, pos, prod, dist)
        steps.append(step)
        form = apply_step(step)
        stack.extend(reversed(kids))
    assert form == chart.tokens, "chart back-pointers do not rebuild the input"
    return steps
