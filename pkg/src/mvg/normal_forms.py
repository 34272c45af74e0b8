"""Restricted index normal form (RINF) and extended two form (ETF).

Both transformations are local: each production that is not already in the
target shape is replaced by a small group of productions over fresh
nonterminals private to it.  Fresh names start with ``@``, followed by the
ordinal of the source production and a role tag, e.g. ``@3/pop1``.
"""
from __future__ import annotations

from .grammar import RESERVED_PREFIX, MsligGrammar, MsligProduction, Nt
from .multiset import EMPTY, IndexMultiset


def rinf_type(p: MsligProduction) -> int | None:
    """1, 2 or 3 for ``A -> alpha``, ``A -> B[f]`` and ``A[f] -> B``; else None."""
    nts = p.nts
    if not p.lhs_indices and all(not x.indices for x in nts):
        return 1
    if len(p.rhs) == 1 and len(nts) == 1:
        (b,) = nts
        if not p.lhs_indices and len(b.indices) == 1:
            return 2
        if len(p.lhs_indices) == 1 and not b.indices:
            return 3
    return None


def is_rinf(g: MsligGrammar) -> bool:
    return all(rinf_type(p) is not None for p in g.productions)


def etf_shape(p: MsligProduction) -> str | None:
    nts = p.nts
    if len(p.rhs) == 2 and len(nts) == 2:
        return "binary"
    if len(p.rhs) == 1 and len(nts) == 1:
        return "unary"
    if not p.lhs_indices and len(p.rhs) <= 1 and not nts:
        return "terminal"
    return None


def is_etf(g: MsligGrammar) -> bool:
    return all(etf_shape(p) is not None for p in g.productions)


class _Fresh:
    """Fresh nonterminal names that never collide with the grammar's own."""

    def __init__(self, taken):
        self.taken = set(taken)
        self.made = []

    def __call__(self, ordinal: int, role: str) -> str:
        name = f"{RESERVED_PREFIX}{ordinal}/{role}"
        while name in self.taken:
            name += "'"
        self.taken.add(name)
        self.made.append(name)
        return name


def _chain(start: str, end: str, ops, fresh, ordinal, tag, origin):
    """Productions carrying ``start`` to ``end`` one index at a time.

    ``ops`` is a list of ``('pop' | 'push', f)``; pops become ``X[f] -> Y``
    and pushes ``X -> Y[f]``.
    """
    out = []
    cur = start
    for step, (kind, f) in enumerate(ops, start=1):
        nxt = end if step == len(ops) else fresh(ordinal, f"{tag}{step}")
        one = IndexMultiset.of(f)
        if kind == "pop":
            out.append(MsligProduction(cur, one, (Nt(nxt),), origin=origin))
        else:
            out.append(MsligProduction(cur, EMPTY, (Nt(nxt, one),), origin=origin))
        cur = nxt
    return out


def _rinf_group(p: MsligProduction, ordinal: int, fresh: _Fresh) -> list[MsligProduction]:
    origin = p.label or f"production {ordinal}"
    pops = [("pop", f) for f in p.lhs_indices.elements()]
    nts = p.nts
    # a unit production threads pops and pushes through a single chain
    if len(p.rhs) == 1 and len(nts) == 1:
        b = nts[0]
        ops = pops + [("push", f) for f in b.indices.elements()]
        return _chain(p.lhs, b.name, ops, fresh, ordinal, "step", origin)

    out = []
    head = p.lhs
    if pops:
        head = fresh(ordinal, "core")
        out.extend(_chain(p.lhs, head, pops, fresh, ordinal, "pop", origin))
    core_rhs = []
    pushes = []
    lexical = []
    for pos, x in enumerate(p.rhs, start=1):
        if isinstance(x, Nt) and x.indices:
            q = fresh(ordinal, f"arg{pos}")
            core_rhs.append(Nt(q))
            pushes.append((q, x))
        elif isinstance(x, Nt):
            core_rhs.append(Nt(x.name))
        else:
            # terminals move to pre-terminals, so the core is a pure skeleton
            q = fresh(ordinal, f"term{pos}")
            core_rhs.append(Nt(q))
            lexical.append(MsligProduction(q, EMPTY, (x,), origin=origin))
    out.append(MsligProduction(head, EMPTY, tuple(core_rhs), origin=origin))
    for pos, (q, x) in enumerate(pushes, start=1):
        ops = [("push", f) for f in x.indices.elements()]
        out.extend(_chain(q, x.name, ops, fresh, ordinal, f"{q.rsplit('/', 1)[1]}push", origin))
    return out + lexical


def to_rinf(g: MsligGrammar) -> MsligGrammar:
    """An equivalent grammar in which every production is index free, pushes
    exactly one index or pops exactly one index.

    Productions already in one of the three shapes are kept as they are.
    Index elements are popped and pushed in sorted order, so the result is
    deterministic.
    """
    fresh = _Fresh(g.nonterminals)
    prods = []
    for n, p in enumerate(g.productions, start=1):
        if rinf_type(p) is not None:
            prods.append(p)
        else:
            prods.extend(_rinf_group(p, n, fresh))
    return g.replace(nonterminals=g.nonterminals | set(fresh.made), productions=tuple(prods))


def _etf_group(p: MsligProduction, ordinal: int, fresh: _Fresh) -> list[MsligProduction]:
    origin = p.label or f"production {ordinal}"
    if not p.rhs:
        # A[s] -> eps with s nonempty: pop s into a nonterminal that must end empty
        z = fresh(ordinal, "eps")
        return [MsligProduction(p.lhs, p.lhs_indices, (Nt(z),), origin=origin),
                MsligProduction(z, EMPTY, (), origin=origin)]
    out = []
    items = []
    for pos, x in enumerate(p.rhs, start=1):
        if isinstance(x, Nt):
            items.append(x)
        else:
            t = fresh(ordinal, f"term{pos}")
            out.append(MsligProduction(t, EMPTY, (x,), origin=origin))
            items.append(Nt(t))
    if len(items) <= 2:
        return [MsligProduction(p.lhs, p.lhs_indices, tuple(items), origin=origin)] + out
    # right-binarize; spine nodes take no indices of their own
    spine = [fresh(ordinal, f"bin{k}") for k in range(1, len(items) - 1)]
    chain = [MsligProduction(p.lhs, p.lhs_indices, (items[0], Nt(spine[0])), origin=origin)]
    for k, x in enumerate(spine):
        right = Nt(spine[k + 1]) if k + 1 < len(spine) else items[-1]
        chain.append(MsligProduction(x, EMPTY, (items[k + 1], right), origin=origin))
    return chain + out


def to_etf(g: MsligGrammar) -> MsligGrammar:
    """An equivalent grammar whose productions are binary, unary, or
    ``A -> a`` / ``A -> eps`` without indices.  The index alphabet is kept."""
    fresh = _Fresh(g.nonterminals)
    prods = []
    for n, p in enumerate(g.productions, start=1):
        if etf_shape(p) is not None:
            prods.append(p)
        else:
            prods.extend(_etf_group(p, n, fresh))
    return g.replace(nonterminals=g.nonterminals | set(fresh.made), productions=tuple(prods))
