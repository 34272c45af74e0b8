"""One-step rewriting for {}-LIGs and a bounded exhaustive string enumerator.

The enumerator is deliberately naive: breadth-first search over leftmost
sentential forms, using :func:`apply_step` for every rewrite.  It is the
reference against which the normal forms, the converters and the chart
recognizer are checked, so it shares no code with any of them.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable

from .errors import BadDistribution, EmptyDistributionTarget, InvalidDerivation, LhsMismatch, MvgError
from .grammar import Item, MsligGrammar, MsligProduction, Nt
from .multiset import EMPTY, IndexMultiset, distributions, msub, msum

SententialForm = tuple  # of Item


@dataclass(frozen=True)
class StepApplication:
    form: SententialForm
    position: int
    production: MsligProduction
    distribution: tuple[IndexMultiset, ...]


@dataclass(frozen=True)
class DerivationMetrics:
    indices_added: int
    epsilon_steps: int
    yield_length: int


@dataclass(frozen=True)
class SearchBounds:
    max_yield: int
    max_steps: int = 1000
    max_total_indices: int = 64

    def __post_init__(self):
        if min(self.max_yield, self.max_steps, self.max_total_indices) < 0:
            raise ValueError("search bounds must be nonnegative")


def start_form(g: MsligGrammar) -> SententialForm:
    return (Nt(g.start),)


def is_terminal_form(form: SententialForm) -> bool:
    return not any(isinstance(x, Nt) for x in form)


def total_indices(form: SententialForm) -> int:
    return sum(len(x.indices) for x in form if isinstance(x, Nt))


def apply_step(s: StepApplication) -> SententialForm:
    """Rewrite ``s.form[s.position]`` with ``s.production``.

    The item must be ``(A, t)`` with ``A`` the production's left-hand side and
    the production's own multiset contained in ``t``; the shares in
    ``s.distribution`` must add up to what is left of ``t``.
    """
    p = s.production
    try:
        item = s.form[s.position]
    except IndexError:
        raise LhsMismatch(f"position {s.position} is outside the sentential form") from None
    if not isinstance(item, Nt) or item.name != p.lhs:
        raise LhsMismatch(f"item {item} at position {s.position} does not match left-hand side {p.lhs}")
    rest = msub(item.indices, p.lhs_indices)
    nts = p.nts
    if not nts and rest:
        raise EmptyDistributionTarget(f"{p} leaves {rest} with nowhere to go")
    if len(s.distribution) != len(nts):
        raise BadDistribution(f"{len(s.distribution)} shares for {len(nts)} nonterminals")
    total = EMPTY
    for share in s.distribution:
        total = msum(total, share)
    if total != rest:
        raise BadDistribution(f"shares add up to {total}, expected {rest}")
    out = list(s.form[:s.position])
    shares = iter(s.distribution)
    for x in p.rhs:
        if isinstance(x, Nt):
            out.append(Nt(x.name, msum(next(shares), x.indices)))
        else:
            out.append(x)
    out.extend(s.form[s.position + 1:])
    return tuple(out)


# -- static grammar facts used for pruning -------------------------------------

class _GrammarFacts:
    """Per-grammar tables: minimum yields, which indices each nonterminal can
    ever pop, and a per-index lower bound on terminals spent popping it."""

    def __init__(self, g: MsligGrammar):
        self.g = g
        inf = math.inf
        miny = {a: inf for a in g.nonterminals}
        changed = True
        while changed:
            changed = False
            for p in g.productions:
                y = sum(miny[x.name] if isinstance(x, Nt) else 1 for x in p.rhs)
                if y < miny[p.lhs]:
                    miny[p.lhs] = y
                    changed = True
        self.min_yield = miny

        cons = {a: set() for a in g.nonterminals}
        changed = True
        while changed:
            changed = False
            for p in g.productions:
                new = set(p.lhs_indices.symbols())
                for x in p.nts:
                    new |= cons[x.name]
                if not new <= cons[p.lhs]:
                    cons[p.lhs] |= new
                    changed = True
        self.consumable = {a: frozenset(s) for a, s in cons.items()}

        # Charge every terminal to its nearest ancestor that pops something.
        # quiet[A]: fewest terminals below A charged to the pop above it,
        # i.e. emitted before the descent reaches another popping production.
        quiet = {a: inf for a in g.nonterminals}
        changed = True
        while changed:
            changed = False
            for p in g.productions:
                y = 0 if p.lhs_indices else sum(quiet[x.name] if isinstance(x, Nt) else 1 for x in p.rhs)
                if y < quiet[p.lhs]:
                    quiet[p.lhs] = y
                    changed = True
        cost = {f: inf for f in g.indices}
        for p in g.productions:
            if not p.lhs_indices:
                continue
            owned = sum(quiet[x.name] if isinstance(x, Nt) else 1 for x in p.rhs)
            # the charged terminals are shared by everything the production pops
            for f in p.lhs_indices.symbols():
                cost[f] = min(cost[f], Fraction(owned, len(p.lhs_indices)))
        self.pop_cost = cost

    def live(self, nt: Nt) -> bool:
        cons = self.consumable[nt.name]
        return all(f in cons for f in nt.indices.symbols())

    def yield_lower_bound(self, form: SententialForm) -> float:
        terminals = 0
        nts_bound = 0
        pops = 0
        for x in form:
            if isinstance(x, Nt):
                nts_bound += self.min_yield[x.name]
                for f, n in x.indices.items():
                    pops += n * self.pop_cost[f]
            else:
                terminals += 1
        return terminals + max(nts_bound, pops)


@lru_cache(maxsize=None)
def _facts(g: MsligGrammar) -> _GrammarFacts:
    return _GrammarFacts(g)


def _weak_compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _weak_compositions(total - first, parts - 1):
            yield (first,) + rest


def _live_distributions(rest: IndexMultiset, nts: tuple[Nt, ...], facts: _GrammarFacts):
    # like multiset.distributions, but never hands an index to a nonterminal
    # that can never pop it
    n = len(nts)
    per_symbol = []
    for f, k in rest.items():
        eligible = [i for i, x in enumerate(nts) if f in facts.consumable[x.name]]
        if not eligible:
            return
        per_symbol.append([(f, eligible, comp) for comp in _weak_compositions(k, len(eligible))])
    for choice in product(*per_symbol):
        shares = [[] for _ in range(n)]
        for f, eligible, comp in choice:
            for i, c in zip(eligible, comp):
                if c:
                    shares[i].append((f, c))
        yield tuple(IndexMultiset(s) for s in shares)


def _rewrite_sites(form: SententialForm, leftmost: bool) -> list[int]:
    sites = [i for i, x in enumerate(form) if isinstance(x, Nt)]
    return sites[:1] if leftmost else sites


def _steps_from(form, g, facts, leftmost, live_only):
    for pos in _rewrite_sites(form, leftmost):
        item = form[pos]
        for p in g.productions_for(item.name):
            if not p.lhs_indices <= item.indices:
                continue
            rest = msub(item.indices, p.lhs_indices)
            nts = p.nts
            if not nts:
                if rest:
                    continue
                shares = [()]
            elif live_only:
                if not all(facts.live(x) for x in nts):
                    continue
                shares = _live_distributions(rest, nts, facts)
            else:
                shares = distributions(rest, len(nts))
            for dist in shares:
                yield StepApplication(form, pos, p, dist)


def successors(form: SententialForm, g: MsligGrammar, b: SearchBounds,
               leftmost: bool = True) -> set[SententialForm]:
    """All one-step rewrites of ``form`` inside the bounds ``b``.

    Only the leftmost nonterminal is rewritten unless ``leftmost`` is false.
    Forms whose index total exceeds ``b.max_total_indices`` or whose yield
    cannot stay within ``b.max_yield`` are dropped.
    """
    facts = _facts(g)
    out = set()
    for step in _steps_from(form, g, facts, leftmost, live_only=False):
        new = apply_step(step)
        if total_indices(new) > b.max_total_indices:
            continue
        if facts.yield_lower_bound(new) > b.max_yield:
            continue
        out.add(new)
    return out


@dataclass
class EnumerationStats:
    forms_expanded: int = 0
    pruned: Counter = field(default_factory=Counter)
    levels: int = 0

    @property
    def exact(self) -> bool:
        """True when no search path was cut by the step or index bound, so the
        result equals the whole language up to the yield bound."""
        return not (self.pruned["steps"] or self.pruned["indices"])


@dataclass
class Enumeration:
    strings: frozenset[tuple[str, ...]]
    stats: EnumerationStats
    _parents: dict = field(repr=False, default_factory=dict)

    def witness(self, w: Iterable[str]) -> list[StepApplication]:
        """A derivation of ``w`` as a list of steps (first one found)."""
        w = tuple(w)
        if w not in self.strings:
            raise KeyError(w)
        steps = []
        form = w
        while self._parents.get(form) is not None:
            step = self._parents[form]
            steps.append(step)
            form = step.form
        steps.reverse()
        return steps

    def __contains__(self, w):
        return tuple(w) in self.strings

    def __len__(self):
        return len(self.strings)


def enumerate_forms(g: MsligGrammar, b: SearchBounds, leftmost: bool = True) -> Enumeration:
    """Every terminal string of length ``<= b.max_yield`` derivable within ``b``,
    by brute-force search over whole sentential forms.

    Search is breadth first, so each form is first met at its minimal depth and
    the recorded witnesses are shortest derivations.  Sentential forms holding
    an index that the receiving nonterminal can never pop are discarded; they
    cannot lead to a terminal string.
    """
    facts = _facts(g)
    stats = EnumerationStats()
    root = start_form(g)
    parents: dict = {root: None}
    strings = set()
    frontier = [root]
    if facts.yield_lower_bound(root) > b.max_yield:
        frontier = []
    depth = 0
    while frontier:
        if depth >= b.max_steps:
            stats.pruned["steps"] += len(frontier)
            break
        depth += 1
        nxt = []
        for form in frontier:
            stats.forms_expanded += 1
            for step in _steps_from(form, g, facts, leftmost, live_only=True):
                new = apply_step(step)
                if new in parents:
                    continue
                if total_indices(new) > b.max_total_indices:
                    stats.pruned["indices"] += 1
                    continue
                if facts.yield_lower_bound(new) > b.max_yield:
                    stats.pruned["yield"] += 1
                    continue
                parents[new] = step
                if is_terminal_form(new):
                    strings.add(new)
                else:
                    nxt.append(new)
        frontier = nxt
    stats.levels = depth
    return Enumeration(frozenset(strings), stats, parents)


class _ItemLanguages:
    """Memoized languages of single items ``(A, t)`` under a length budget.

    Once a production has distributed its indices, the new sibling items
    rewrite independently, so the strings of a sentential form are the
    concatenations of its items' strings.  Recursion through unit or epsilon
    cycles is resolved by repeating the computation until nothing changes.
    """

    def __init__(self, g: MsligGrammar, b: SearchBounds, stats: EnumerationStats):
        self.g = g
        self.b = b
        self.facts = _facts(g)
        self.stats = stats
        self.table: dict = {}
        self.back: dict = {}
        self.round_done: set = set()
        self.on_stack: set = set()
        self.cycle = False
        self.changed = False

    def lower_bound(self, nt: Nt) -> float:
        f = self.facts
        pops = sum(n * f.pop_cost[s] for s, n in nt.indices.items())
        return max(f.min_yield[nt.name], pops)

    def run(self, root: Nt, budget: int):
        while True:
            self.round_done = set()
            self.cycle = self.changed = False
            self.lang(root, budget)
            self.stats.levels += 1
            if not (self.cycle and self.changed):
                return self.table.get((root, budget), {})

    def lang(self, nt: Nt, budget: int) -> dict:
        key = (nt, budget)
        if key in self.round_done:
            return self.table[key]
        if key in self.on_stack:
            self.cycle = True
            return self.table.get(key, {})
        self.on_stack.add(key)
        self.stats.forms_expanded += 1
        found = self.table.setdefault(key, {})
        backs = self.back.setdefault(key, {})
        for p in self.g.productions_for(nt.name):
            if not p.lhs_indices <= nt.indices:
                continue
            rest = msub(nt.indices, p.lhs_indices)
            nts = p.nts
            if not nts:
                if not rest and len(p.rhs) <= budget and p.rhs not in found:
                    found[p.rhs] = None
                    backs[p.rhs] = (p, (), ())
                    self.changed = True
                continue
            if not all(self.facts.live(x) for x in nts):
                continue
            n_terms = len(p.rhs) - len(nts)
            for dist in _live_distributions(rest, nts, self.facts):
                kids = [Nt(x.name, msum(d, x.indices)) for x, d in zip(nts, dist)]
                # the yield bound goes first: only cuts it misses make the result inexact
                lbs = [self.lower_bound(k) for k in kids]
                spare = budget - n_terms - sum(lbs)
                if spare < 0:
                    self.stats.pruned["yield"] += 1
                    continue
                if sum(len(k.indices) for k in kids) > self.b.max_total_indices:
                    self.stats.pruned["indices"] += 1
                    continue
                langs = []
                for k, lb in zip(kids, lbs):
                    langs.append(self.lang(k, int(lb + spare)))
                    if not langs[-1]:
                        break
                else:
                    self._combine(p, dist, kids, langs, budget, found, backs)
        self.on_stack.discard(key)
        self.round_done.add(key)
        return found

    def _combine(self, p, dist, kids, langs, budget, found, backs):
        # concatenate terminals and child strings in right-hand-side order
        partial = [((), ())]
        it = iter(langs)
        for x in p.rhs:
            if isinstance(x, Nt):
                lang = next(it)
                partial = [(w + v, chosen + (v,)) for w, chosen in partial for v in lang
                           if len(w) + len(v) <= budget]
            else:
                partial = [(w + (x,), chosen) for w, chosen in partial if len(w) < budget]
        for w, chosen in partial:
            if w not in found:
                found[w] = None
                backs[w] = (p, dist, tuple(zip(kids, chosen)))
                self.changed = True

    def tree(self, nt: Nt, w: tuple):
        """Back-pointer tree for ``w`` under item ``nt`` (any stored budget)."""
        for (k, budget), strings in self.back.items():
            if k == nt and w in strings:
                return self._tree(nt, budget, w)
        raise KeyError((nt, w))

    def _tree(self, nt, budget, w):
        p, dist, kids = self.back[(nt, budget)][w]
        subtrees = []
        for k, v in kids:
            sub_budget = next(b for (kk, b), ss in self.back.items() if kk == k and v in ss)
            subtrees.append(self._tree(k, sub_budget, v))
        return (p, dist, subtrees)


@dataclass
class ItemEnumeration(Enumeration):
    _langs: _ItemLanguages | None = field(repr=False, default=None)
    _root: Nt | None = None

    def witness(self, w: Iterable[str]) -> list[StepApplication]:
        w = tuple(w)
        if w not in self.strings:
            raise KeyError(w)
        tree = self._langs.tree(self._root, w)
        steps = []
        form: SententialForm = (self._root,)
        stack = [tree]
        # preorder over the derivation tree is exactly a leftmost derivation
        while stack:
            p, dist, subtrees = stack.pop()
            pos = next(i for i, x in enumerate(form) if isinstance(x, Nt))
            step = StepApplication(form, pos, p, dist)
            steps.append(step)
            form = apply_step(step)
            stack.extend(reversed(subtrees))
        assert form == w
        return steps


def enumerate_mslig(g: MsligGrammar, b: SearchBounds) -> Enumeration:
    """Every terminal string of length ``<= b.max_yield`` derivable from the
    start symbol with no sentential form holding more than
    ``b.max_total_indices`` indices on one rewritten item.

    Strings are built per item and memoized; :func:`enumerate_forms` is the
    plain search over whole sentential forms and agrees with this function
    wherever both finish.  ``b.max_steps`` is not needed here (cycles are
    resolved by fixpoint iteration) and is ignored.
    """
    stats = EnumerationStats()
    root = Nt(g.start)
    langs = _ItemLanguages(g, b, stats)
    strings = frozenset()
    if langs.lower_bound(root) <= b.max_yield:
        strings = frozenset(langs.run(root, b.max_yield))
    return ItemEnumeration(strings, stats, {}, langs, root)


def derivation_metrics(steps: list[StepApplication]) -> DerivationMetrics:
    """Index additions, epsilon steps and yield length of a complete derivation.

    The steps are replayed; a step whose form is not the result of the
    previous one, or a derivation that does not start from a single
    index-free nonterminal and end in a terminal string, is rejected.
    """
    if not steps:
        raise InvalidDerivation("empty derivation")
    first = steps[0].form
    if len(first) != 1 or not isinstance(first[0], Nt) or first[0].indices:
        raise InvalidDerivation("derivation must start from a single nonterminal with no indices")
    added = eps = 0
    form = first
    for i, s in enumerate(steps):
        if s.form != form:
            raise InvalidDerivation(f"step {i + 1} does not continue from the previous form")
        try:
            form = apply_step(s)
        except MvgError as e:
            raise InvalidDerivation(f"step {i + 1}: {e}") from e
        added += s.production.pushed
        eps += s.production.is_epsilon
    if not is_terminal_form(form):
        raise InvalidDerivation("derivation does not end in a terminal string")
    return DerivationMetrics(added, eps, len(form))


def check_linear_restriction(m: DerivationMetrics, c_idx: Fraction | int = 1,
                             c_eps: Fraction | int = 1) -> bool:
    return m.indices_added <= c_idx * m.yield_length and m.epsilon_steps <= c_eps * m.yield_length
