"""Conversions between UVG-DL and {}-LIG.

UVG-DL to {}-LIG: one index symbol per dominance link.  A production pops
the links that point at it and pushes, onto each right-hand nonterminal, the
links that leave from that occurrence.

{}-LIG (restricted index normal form) to UVG-DL: index-free productions
become singleton vectors; every push ``A -> B[f]`` is paired with every pop
``C[f] -> D`` into a two-production vector whose link makes ``B`` dominate
the ``C`` node.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .errors import NotRinf
from .grammar import (DominanceLink, MsligGrammar, MsligProduction, Nt, UvgdlGrammar,
                      UvgdlProduction, Vector)
from .multiset import EMPTY, IndexMultiset
from .normal_forms import rinf_type


@dataclass(frozen=True)
class LinkSymbol:
    vector: int
    source: int
    target: int
    occurrence: int | None = None

    def __str__(self):
        parts = [self.vector, self.source, self.target]
        if self.occurrence is not None:
            parts.append(self.occurrence)
        return "l_{" + ",".join(map(str, parts)) + "}"


def link_symbols(g: UvgdlGrammar) -> dict[tuple[str, DominanceLink], LinkSymbol]:
    """Map each ``(vector name, link)`` to its index symbol.

    Links sharing source and target production but leaving from different
    right-hand positions get an extra occurrence number.
    """
    table = {}
    for i, v in enumerate(g.vectors, start=1):
        ordinal = {p.label: j for j, p in enumerate(v.productions, start=1)}
        links = list(dict.fromkeys(v.links))
        pair_count = Counter((l.source, l.target) for l in links)
        seen = Counter()
        for link in links:
            pair = (link.source, link.target)
            occ = None
            if pair_count[pair] > 1:
                seen[pair] += 1
                occ = seen[pair]
            table[(v.name, link)] = LinkSymbol(i, ordinal[link.source], ordinal[link.target], occ)
    return table


def uvgdl_to_mslig(g: UvgdlGrammar) -> MsligGrammar:
    symbols = link_symbols(g)
    prods = []
    for v in g.vectors:
        active = {p.label: Counter() for p in v.productions}
        pushes: dict[tuple[str, int], list[str]] = {}
        for link in dict.fromkeys(v.links):
            sym = str(symbols[(v.name, link)])
            active[link.target][sym] += 1
            pushes.setdefault((link.source, link.position), []).append(sym)
        for p in v.productions:
            rhs = []
            for pos, x in enumerate(p.rhs, start=1):
                if isinstance(x, Nt):
                    rhs.append(Nt(x.name, IndexMultiset.of(*pushes.get((p.label, pos), ()))))
                else:
                    rhs.append(x)
            prods.append(MsligProduction(p.lhs, IndexMultiset(active[p.label]), tuple(rhs),
                                         label=f"{v.name}/{p.label}", origin=f"vector {v.name}, {p.label}"))
    indices = frozenset(str(s) for s in symbols.values())
    return MsligGrammar(g.nonterminals, g.terminals, indices, tuple(prods), g.start)


def _plain(items):
    return tuple(Nt(x.name) if isinstance(x, Nt) else x for x in items)


def mslig_to_uvgdl(g: MsligGrammar) -> UvgdlGrammar:
    """Build the UVG-DL for a grammar in restricted index normal form.

    Raises :class:`NotRinf` if some production has none of the three shapes;
    run :func:`mvg.normal_forms.to_rinf` first.
    """
    kinds = []
    for n, p in enumerate(g.productions, start=1):
        t = rinf_type(p)
        if t is None:
            raise NotRinf(f"production {n} ({p}) is not in restricted index normal form")
        kinds.append(t)

    def name_of(n, p):
        return p.label or f"production {n}"

    pops: dict[str, list[tuple[int, MsligProduction]]] = {}
    for n, (p, t) in enumerate(zip(g.productions, kinds), start=1):
        if t == 3:
            (f,) = p.lhs_indices.symbols()
            pops.setdefault(f, []).append((n, p))

    vectors = []
    for n, (p, t) in enumerate(zip(g.productions, kinds), start=1):
        if t == 1:
            vectors.append(Vector(f"v{len(vectors) + 1}",
                                  (UvgdlProduction("p1", p.lhs, _plain(p.rhs)),),
                                  (), origin=name_of(n, p)))
        elif t == 2:
            (b,) = p.rhs
            (f,) = b.indices.symbols()
            for m, q in pops.get(f, []):
                push = UvgdlProduction("p1", p.lhs, (Nt(b.name),))
                pop = UvgdlProduction("p2", q.lhs, _plain(q.rhs))
                vectors.append(Vector(f"v{len(vectors) + 1}", (push, pop),
                                      (DominanceLink("p1", 1, "p2"),),
                                      origin=f"{name_of(n, p)} + {name_of(m, q)} on {f}"))
    return UvgdlGrammar(g.nonterminals, g.terminals, tuple(vectors), g.start)
