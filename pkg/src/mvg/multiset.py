"""Finite multisets of index symbols.

An :class:`IndexMultiset` is an immutable bag stored as a sorted tuple of
``(symbol, count)`` pairs with every count positive, so that an explicit zero
and an absent symbol are indistinguishable and equal multisets hash equally.
"""
from __future__ import annotations

from collections import Counter
from itertools import product
from typing import Iterable, Iterator, Mapping

from .errors import EmptyDistributionTarget, NotSubMultiset


class IndexMultiset:
    __slots__ = ("_items", "_hash")

    def __init__(self, counts: Mapping[str, int] | Iterable[tuple[str, int]] = ()):
        if isinstance(counts, Mapping):
            counts = counts.items()
        acc: dict[str, int] = {}
        for sym, n in counts:
            if n < 0:
                raise ValueError(f"negative count {n} for index {sym!r}")
            if n:
                acc[sym] = acc.get(sym, 0) + n
        self._items = tuple(sorted(acc.items()))
        self._hash = hash(self._items)

    @classmethod
    def of(cls, *symbols: str) -> IndexMultiset:
        """Build from a list of elements with repetition: ``of('f', 'f', 'g')``."""
        return cls(Counter(symbols))

    def __getitem__(self, sym: str) -> int:
        for s, n in self._items:
            if s == sym:
                return n
        return 0

    count = __getitem__

    def items(self) -> tuple[tuple[str, int], ...]:
        return self._items

    def symbols(self) -> tuple[str, ...]:
        return tuple(s for s, _ in self._items)

    def elements(self) -> Iterator[str]:
        """Each element repeated by its count, in sorted order."""
        for s, n in self._items:
            for _ in range(n):
                yield s

    def __len__(self) -> int:
        return sum(n for _, n in self._items)

    def __bool__(self) -> bool:
        return bool(self._items)

    def __eq__(self, other):
        if isinstance(other, IndexMultiset):
            return self._items == other._items
        return NotImplemented

    def __hash__(self):
        return self._hash

    def __lt__(self, other: IndexMultiset) -> bool:
        # total order, only for canonical sorting
        return self._items < other._items

    def __le__(self, other: IndexMultiset) -> bool:
        return self.issubset(other)

    def issubset(self, other: IndexMultiset) -> bool:
        return all(other[s] >= n for s, n in self._items)

    def __add__(self, other: IndexMultiset) -> IndexMultiset:
        return msum(self, other)

    def __sub__(self, other: IndexMultiset) -> IndexMultiset:
        return msub(self, other)

    def __repr__(self):
        return f"IndexMultiset({dict(self._items)!r})"

    def __str__(self):
        return "{" + ", ".join(self.elements()) + "}"


EMPTY = IndexMultiset()


def msum(a: IndexMultiset, b: IndexMultiset) -> IndexMultiset:
    if not b:
        return a
    if not a:
        return b
    return IndexMultiset(list(a.items()) + list(b.items()))


def msub(a: IndexMultiset, b: IndexMultiset) -> IndexMultiset:
    """``a - b``; raises :class:`NotSubMultiset` unless ``b <= a``."""
    if not b:
        return a
    counts = dict(a.items())
    for sym, n in b.items():
        have = counts.get(sym, 0)
        if have < n:
            raise NotSubMultiset(f"{b} is not contained in {a} (index {sym!r}: {n} > {have})")
        counts[sym] = have - n
    return IndexMultiset(counts)


def _compositions(total: int, parts: int) -> list[tuple[int, ...]]:
    # weak compositions of total into `parts` ordered nonnegative summands
    if parts == 1:
        return [(total,)]
    out = []
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            out.append((first,) + rest)
    return out


def distributions(m: IndexMultiset, n: int) -> list[tuple[IndexMultiset, ...]]:
    """All ways of sharing ``m`` out among ``n`` ordered recipients.

    The result has ``prod_k C(m_k + n - 1, n - 1)`` entries and no duplicates.
    With ``n == 0`` the only admissible case is an empty ``m``.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        if m:
            raise EmptyDistributionTarget(f"cannot distribute {m} among zero nonterminals")
        return [()]
    per_symbol = [[(sym, c) for c in _compositions(k, n)] for sym, k in m.items()]
    result = []
    for choice in product(*per_symbol):
        shares = [[] for _ in range(n)]
        for sym, comp in choice:
            for i, c in enumerate(comp):
                if c:
                    shares[i].append((sym, c))
        result.append(tuple(IndexMultiset(s) for s in shares))
    return result
