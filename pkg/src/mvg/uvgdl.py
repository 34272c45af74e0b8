"""Derivation trees of UVG-DL: vector cover, dominance links, and a bounded
enumerator for the language.

A node is addressed by its path from the root, a tuple of 1-based RHS
positions; the root is ``()``.
"""
from __future__ import annotations

import heapq
import itertools
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterator, Mapping

from .derivation import SearchBounds
from .fileformat import TreeNode
from .grammar import DominanceLink, Nt, UvgdlGrammar, Vector, terminals_of
from .multiset import IndexMultiset

Path = tuple[int, ...]
InstanceKey = tuple[str, int]


def fmt_path(path: Path) -> str:
    return "root" + "".join(f".{k}" for k in path)


def walk(t: TreeNode, path: Path = ()) -> Iterator[tuple[Path, TreeNode]]:
    """Preorder over the nonterminal nodes of ``t``."""
    yield path, t
    for k, c in enumerate(t.children, start=1):
        if isinstance(c, TreeNode):
            yield from walk(c, path + (k,))


def node_at(t: TreeNode, path: Path) -> TreeNode:
    for k in path:
        t = t.children[k - 1]
    return t


def yield_of(t: TreeNode) -> tuple[str, ...]:
    out = []
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, TreeNode):
            stack.extend(reversed(x.children))
        else:
            out.append(x)
    return tuple(out)


def tree_problems(g: UvgdlGrammar, t: TreeNode, root: bool = True) -> list[str]:
    """Structural defects of ``t`` against ``g``; empty when the tree is well formed."""
    problems = []
    if root:
        v = g.by_name.get(t.vector)
        if v is not None and t.label in v.by_label and v.production(t.label).lhs != g.start:
            problems.append(f"root rewrites {v.production(t.label).lhs}, not the start symbol {g.start}")
    for path, node in walk(t):
        v = g.by_name.get(node.vector)
        if v is None or node.label not in v.by_label:
            problems.append(f"{fmt_path(path)}: unknown production {node.vector}:{node.label}")
            continue
        p = v.production(node.label)
        if len(node.children) != len(p.rhs):
            problems.append(f"{fmt_path(path)}: {len(node.children)} children for {len(p.rhs)} RHS symbols")
            continue
        for k, (x, c) in enumerate(zip(p.rhs, node.children), start=1):
            if isinstance(x, Nt):
                if not isinstance(c, TreeNode):
                    problems.append(f"{fmt_path(path + (k,))}: expected a {x.name} node")
                else:
                    cv = g.by_name.get(c.vector)
                    if cv is not None and c.label in cv.by_label and cv.production(c.label).lhs != x.name:
                        problems.append(f"{fmt_path(path + (k,))}: {c.vector}:{c.label} does not rewrite {x.name}")
            elif c != x:
                problems.append(f"{fmt_path(path + (k,))}: expected terminal {x!r}")
    return problems


# -- assignments and verdicts --------------------------------------------------

@dataclass(frozen=True)
class VectorAssignment:
    """Which vector instance each node belongs to."""
    instances: Mapping[Path, InstanceKey]

    @classmethod
    def from_tree(cls, t: TreeNode) -> "VectorAssignment":
        """The assignment spelled out by the tree's ``@id`` annotations.

        Nodes without an id get a fresh instance of their own.
        """
        used = [n.instance for _, n in walk(t) if n.instance is not None]
        fresh = itertools.count(max(used, default=0) + 1)
        return cls({path: (n.vector, n.instance if n.instance is not None else next(fresh))
                    for path, n in walk(t)})

    def groups(self) -> dict[InstanceKey, list[Path]]:
        out = defaultdict(list)
        for path, key in sorted(self.instances.items()):
            out[key].append(path)
        return dict(out)

    def apply(self, t: TreeNode, path: Path = ()) -> TreeNode:
        """A copy of ``t`` carrying this assignment's instance ids."""
        kids = tuple(self.apply(c, path + (k,)) if isinstance(c, TreeNode) else c
                     for k, c in enumerate(t.children, start=1))
        return TreeNode(t.vector, t.label, self.instances[path][1], kids)


@dataclass(frozen=True)
class InstanceDefect:
    instance: InstanceKey
    missing: tuple[str, ...]
    duplicate: tuple[str, ...]

    def __str__(self):
        v, i = self.instance
        parts = []
        if self.missing:
            parts.append("missing " + ", ".join(self.missing))
        if self.duplicate:
            parts.append("duplicate " + ", ".join(self.duplicate))
        return f"instance {v}@{i}: " + "; ".join(parts)


@dataclass(frozen=True)
class LinkViolation:
    instance: InstanceKey
    link: DominanceLink
    source_path: Path  # the child node that should dominate
    target_path: Path

    def __str__(self):
        v, i = self.instance
        return (f"instance {v}@{i}, link {self.link}: {fmt_path(self.source_path)} "
                f"does not dominate {fmt_path(self.target_path)}")


@dataclass(frozen=True)
class Verdict:
    problems: tuple = ()

    @property
    def valid(self) -> bool:
        return not self.problems

    def __bool__(self):
        return self.valid

    def __str__(self):
        return "valid" if self.valid else "; ".join(map(str, self.problems))


def check_vector_cover(g: UvgdlGrammar, t: TreeNode, a: VectorAssignment) -> Verdict:
    """Valid iff every instance uses each production of its vector exactly once."""
    used = defaultdict(Counter)
    for path, node in walk(t):
        used[a.instances[path]][node.label] += 1
    defects = []
    for key in sorted(used):
        v = g.vector(key[0])
        have = used[key]
        missing = tuple(l for l in v.labels if not have[l])
        dup = tuple(sorted(l for l, n in have.items() if n > 1))
        if missing or dup:
            defects.append(InstanceDefect(key, missing, dup))
    return Verdict(tuple(defects))


def dominates(upper: Path, lower: Path, reflexive: bool = True) -> bool:
    if lower[:len(upper)] != upper:
        return False
    return reflexive or lower != upper


def check_dominance(g: UvgdlGrammar, t: TreeNode, a: VectorAssignment,
                    reflexive: bool = True) -> Verdict:
    """Valid iff every link ``p.k > q`` of every instance has the k-th child of
    the instance's ``p`` node dominating its ``q`` node.

    Assumes a valid vector cover; dominance is reflexive unless told otherwise.
    """
    bad = []
    for key, paths in sorted(a.groups().items()):
        where = {node_at(t, p).label: p for p in paths}
        for link in g.vector(key[0]).links:
            src = where[link.source] + (link.position,)
            tgt = where[link.target]
            if not dominates(src, tgt, reflexive):
                bad.append(LinkViolation(key, link, src, tgt))
    return Verdict(tuple(bad))


def link_id(vector: str, link: DominanceLink) -> str:
    return f"{vector}:{link}"


def pending_obligations(g: UvgdlGrammar, t: TreeNode, a: VectorAssignment,
                        at: Path = ()) -> IndexMultiset:
    """Links whose target lies in the subtree at ``at`` while their source
    production sits outside it: requirements the context still has to meet."""
    inside = {p for p, _ in walk(node_at(t, at), at)}
    out = Counter()
    for key, paths in a.groups().items():
        where = {node_at(t, p).label: p for p in paths}
        for link in g.vector(key[0]).links:
            if where.get(link.target) in inside and where.get(link.source) not in inside:
                out[link_id(key[0], link)] += 1
    return IndexMultiset(out)


# -- inferring an assignment --------------------------------------------------

def _link_order(v: Vector) -> list[str]:
    """Labels ordered so that linked productions are placed next to each other,
    most constrained first."""
    degree = Counter()
    adj = defaultdict(set)
    for l in v.links:
        degree[l.source] += 1
        degree[l.target] += 1
        adj[l.source].add(l.target)
        adj[l.target].add(l.source)
    order = []
    for seed in sorted(v.labels, key=lambda x: (-degree[x], v.labels.index(x))):
        if seed in order:
            continue
        queue = [seed]
        while queue:
            x = queue.pop(0)
            if x in order:
                continue
            order.append(x)
            queue.extend(sorted(adj[x] - set(order), key=lambda y: (-degree[y], v.labels.index(y))))
    return order


def _group_vector(v: Vector, nodes: dict[str, list[Path]], reflexive: bool):
    """Partition the nodes of one vector into complete instances whose links
    hold, or return None."""
    counts = {len(nodes.get(l, ())) for l in v.labels}
    if len(counts) != 1:
        return None
    order = _link_order(v)
    checks = defaultdict(list)  # label -> links decidable once it is placed
    for link in v.links:
        later = max(order.index(link.source), order.index(link.target))
        checks[order[later]].append(link)
    free = {l: list(nodes.get(l, ())) for l in v.labels}
    groups = []

    def ok(inst, label):
        for link in checks[label]:
            if not dominates(inst[link.source] + (link.position,), inst[link.target], reflexive):
                return False
        return True

    def place(inst, depth):
        if depth == len(order):
            groups.append(dict(inst))
            if all(not free[l] for l in v.labels):
                return True
            if fill():
                return True
            groups.pop()
            return False
        label = order[depth]
        # the first label of every instance takes the earliest free node, which
        # breaks the symmetry between interchangeable instances
        options = free[label][:1] if depth == 0 else list(free[label])
        for p in options:
            inst[label] = p
            free[label].remove(p)
            if ok(inst, label) and place(inst, depth + 1):
                return True
            free[label].append(p)
            free[label].sort()
            del inst[label]
        return False

    def fill():
        return place({}, 0)

    if counts == {0}:
        return []
    return groups if fill() else None


def infer_assignment(g: UvgdlGrammar, t: TreeNode, reflexive: bool = True) -> VectorAssignment | None:
    """An assignment of nodes to instances under which both the cover and the
    dominance checks pass, or None if the tree admits none.

    Vectors are independent, so each is solved on its own, most linked first.
    """
    by_vector = defaultdict(lambda: defaultdict(list))
    for path, node in walk(t):
        by_vector[node.vector][node.label].append(path)
    mapping = {}
    for name in sorted(by_vector, key=lambda n: (-len(g.vector(n).links), n)):
        v = g.vector(name)
        if any(l not in v.by_label for l in by_vector[name]):
            return None
        groups = _group_vector(v, by_vector[name], reflexive)
        if groups is None:
            return None
        for i, inst in enumerate(sorted(groups, key=lambda d: min(d.values())), start=1):
            for path in inst.values():
                mapping[path] = (name, i)
    return VectorAssignment(mapping)


# -- lint ------------------------------------------------------------------------

@dataclass(frozen=True)
class ConnectivityReport:
    vector: str
    components: tuple[tuple[str, ...], ...]

    @property
    def connected(self) -> bool:
        return len(self.components) <= 1

    def __str__(self):
        if self.connected:
            return f"vector {self.vector}: connected"
        comps = " | ".join(" ".join(c) for c in self.components)
        return f"warning: vector {self.vector} is not link-connected ({comps})"


def connectivity_lint(g: UvgdlGrammar) -> list[ConnectivityReport]:
    """One report per vector; a vector whose productions do not form one
    component under its links can be used partially after conversion."""
    out = []
    for v in g.vectors:
        parent = {l: l for l in v.labels}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for link in v.links:
            parent[find(link.source)] = find(link.target)
        comps = defaultdict(list)
        for l in v.labels:
            comps[find(l)].append(l)
        out.append(ConnectivityReport(v.name, tuple(tuple(c) for c in comps.values())))
    return out


# -- bounded enumeration -------------------------------------------------------

Part = tuple[str, int]  # (vector name, bit set of the labels used so far)


@dataclass
class UvgdlStats:
    items: int = 0
    combinations: int = 0
    pruned: Counter = field(default_factory=Counter)

    @property
    def exact(self) -> bool:
        return not self.pruned["steps"]


@dataclass
class UvgdlEnumeration:
    strings: frozenset
    stats: UvgdlStats
    _witness: Mapping = field(repr=False, default_factory=dict)

    def witness(self, w) -> TreeNode:
        """A smallest tree for ``w`` with instance ids filled in."""
        return self._witness[tuple(w)]()

    def __contains__(self, w):
        return tuple(w) in self.strings

    def __len__(self):
        return len(self.strings)


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low
        mask ^= low


@dataclass
class _Prod:
    vector: str
    label: str
    lhs: str
    rhs: tuple
    bit: int
    slots: list        # (nonterminal, RHS position, required label bit or 0)
    needs: list        # (RHS position, target bit) for every outgoing link
    terminals: int


class _Rules:
    """Per-production facts the enumerator looks up constantly."""

    def __init__(self, g: UvgdlGrammar):
        self.g = g
        self.bit = {(v.name, l): 1 << i for v in g.vectors for i, l in enumerate(v.labels)}
        self.full = {v.name: (1 << len(v.labels)) - 1 for v in g.vectors}
        self.prods = []
        for v in g.vectors:
            for p in v.productions:
                needs = [(k.position, self.bit[(v.name, k.target)]) for k in v.links if k.source == p.label]
                slots = []
                for pos, x in enumerate(p.rhs, start=1):
                    if isinstance(x, Nt):
                        req = [t for q, t in needs if q == pos]
                        slots.append((x.name, pos, req[0] if req else 0))
                self.prods.append(_Prod(v.name, p.label, p.lhs, p.rhs, self.bit[(v.name, p.label)],
                                        slots, needs, len(terminals_of(p.rhs))))
        self.by_bit = {(q.vector, q.bit): q for q in self.prods}

        inf = float("inf")
        miny = {a: inf for a in g.nonterminals}
        changed = True
        while changed:
            changed = False
            for p in self.prods:
                y = sum(miny[x.name] if isinstance(x, Nt) else 1 for x in p.rhs)
                if y < miny[p.lhs]:
                    miny[p.lhs] = y
                    changed = True
        self.min_yield = miny
        # fewest terminals any complete tree must place outside a node of each kind
        outside = {a: inf for a in g.nonterminals}
        outside[g.start] = 0
        changed = True
        while changed:
            changed = False
            for p in self.prods:
                if outside[p.lhs] == inf:
                    continue
                total = sum(miny[x.name] if isinstance(x, Nt) else 1 for x in p.rhs)
                for x, _, _ in p.slots:
                    o = outside[p.lhs] + total - miny[x]
                    if o < outside[x]:
                        outside[x] = o
                        changed = True
        self.outside = outside

        reach = {a: {a} for a in g.nonterminals}
        changed = True
        while changed:
            changed = False
            for p in self.prods:
                for x, _, _ in p.slots:
                    if not reach[x] <= reach[p.lhs]:
                        reach[p.lhs] |= reach[x]
                        changed = True
        self.reach = {a: frozenset(r) for a, r in reach.items()}
        self.connected = {r.vector for r in connectivity_lint(g) if r.connected}
        self._owed = {}

    def missing_cost(self, nt: str, sig) -> tuple[int, int]:
        """Terminals and nodes still owed, outside an ``nt`` subtree, by the
        pending parts of ``sig``.

        Each missing production counts its own terminals, plus the smallest
        yield of any child that can contain neither this subtree nor another
        missing production, so that no terminal is counted twice.
        """
        key = (nt, sig)
        if key in self._owed:
            return self._owed[key]
        missing = []
        for name, masks in itertools.groupby(sig, key=lambda part: part[0]):
            masks = [m for _, m in masks]
            # parts of a connected vector never merge, so each is one instance;
            # unlinked parts may share one, which only bounds the count below
            used = Counter(bit for m in masks for bit in _bits(m))
            instances = len(masks) if name in self.connected else max(used.values())
            missing.extend(self.by_bit[(name, bit)] for bit in _bits(self.full[name])
                           for _ in range(instances - used[bit]))
        danger = {nt} | {q.lhs for q in missing}
        toks = 0
        for q in missing:
            toks += q.terminals
            for x, _, _ in q.slots:
                if not (self.reach[x] & danger):
                    toks += self.min_yield[x]
        self._owed[key] = out = (toks, len(missing))
        return out


def _join(rules: _Rules, p: _Prod, child_sigs) -> list[tuple]:
    """Signatures after placing ``p`` over children with ``child_sigs``.

    The node's part absorbs, for each of its links ``p.k > b``, one part of
    child ``k`` holding ``b``; nothing else is merged here.  Leftover parts
    are grouped into instances at the root.
    """
    pool = [(k, part) for k, sig in child_sigs for part in sig]
    if not p.needs:
        rest = [part for _, part in pool]
        if p.bit != rules.full[p.vector]:
            rest.append((p.vector, p.bit))
        return [tuple(sorted(rest))]
    choices = []
    for k, target in p.needs:
        cands = [i for i, (kk, (n, m)) in enumerate(pool) if kk == k and n == p.vector and m & target]
        if not cands:
            return []
        choices.append(cands)
    out = set()
    for pick in itertools.product(*choices):
        taken = set(pick)
        mask = p.bit
        for i in taken:
            m = pool[i][1][1]
            if mask & m:
                break
            mask |= m
        else:
            rest = [pool[i][1] for i in range(len(pool)) if i not in taken]
            if mask != rules.full[p.vector]:
                rest.append((p.vector, mask))
            out.add(tuple(sorted(rest)))
    return sorted(out)


def _covers(rules: _Rules, sig) -> bool:
    """Can the leftover parts be grouped into complete instances?"""
    by_vector = defaultdict(list)
    for name, mask in sig:
        by_vector[name].append(mask)
    return all(_exact_cover(rules.full[n], tuple(sorted(ps))) for n, ps in by_vector.items())


def _exact_cover(full: int, parts: tuple) -> bool:
    if not parts:
        return True
    first, rest = parts[0], list(parts[1:])

    def grow(have, i, remaining):
        if have == full:
            return _exact_cover(full, tuple(remaining))
        for j in range(i, len(remaining)):
            m = remaining[j]
            if not (have & m):
                if grow(have | m, j, remaining[:j] + remaining[j + 1:]):
                    return True
        return False

    return grow(first, 0, rest)


def enumerate_uvgdl(g: UvgdlGrammar, b: SearchBounds, reflexive: bool = True) -> UvgdlEnumeration:
    """Yields of valid derivation trees with at most ``b.max_yield`` terminals
    and ``b.max_steps`` nodes.

    Trees are built bottom up, smallest first.  Two subtrees are
    interchangeable when they share root nonterminal, yield, and the multiset
    of vector instances they leave unfinished (recorded as label sets), so one
    smallest tree is kept for each.  Every returned witness is checked again
    with :func:`infer_assignment`.  Only reflexive dominance is built in; with
    ``reflexive=False`` this falls back to :func:`enumerate_uvgdl_naive`.
    """
    if not reflexive:
        return enumerate_uvgdl_naive(g, b, reflexive=False)
    rules = _Rules(g)
    stats = UvgdlStats()
    best: dict = {}     # key -> node count
    back: dict = {}     # key -> (production, child keys)
    # (nonterminal, required label bit or 0) -> yield length -> finished keys
    done: dict = defaultdict(lambda: defaultdict(list))
    finished = set()
    heap = []
    tick = itertools.count()

    def offer(key, nodes, how):
        nt, w, sig = key
        if nodes > b.max_steps:
            stats.pruned["steps"] += 1
            return
        toks, owed = rules.missing_cost(nt, sig)
        # both bounds describe terminals outside the subtree, so they do not add up
        if len(w) + max(toks, rules.outside[nt]) > b.max_yield:
            stats.pruned["yield"] += 1
            return
        if nodes + owed > b.max_steps:
            stats.pruned["steps"] += 1
            return
        if key in best and best[key] <= nodes:
            return
        best[key] = nodes
        back[key] = how
        heapq.heappush(heap, (nodes, next(tick), key))

    def build(p, kids):
        stats.combinations += 1
        w = []
        it = iter(kids)
        child_sigs = []
        for k, x in enumerate(p.rhs, start=1):
            if isinstance(x, Nt):
                kid = next(it)
                w.extend(kid[1])
                if kid[2]:
                    child_sigs.append((k, kid[2]))
            else:
                w.append(x)
        nodes = 1 + sum(best[kid] for kid in kids)
        w = tuple(w)
        for sig in _join(rules, p, child_sigs):
            offer((p.lhs, w, sig), nodes, (p, kids))

    by_child = defaultdict(list)
    for p in rules.prods:
        if not p.slots:
            build(p, ())
        for i, slot in enumerate(p.slots):
            by_child[slot[0]].append((p, i))

    while heap:
        nodes, _, key = heapq.heappop(heap)
        if best[key] != nodes or key in finished:
            continue
        finished.add(key)
        stats.items += 1
        nt, w, sig = key
        tags = {(name, bit) for name, mask in sig for bit in _bits(mask)}
        done[(nt, 0)][len(w)].append(key)
        for name, bit in tags:
            done[(nt, (name, bit))][len(w)].append(key)
        for p, i in by_child[nt]:
            req = p.slots[i][2]
            if req and (p.vector, req) not in tags:
                continue
            room = b.max_yield - rules.outside[p.lhs] - p.terminals - len(w)
            if room < 0:
                continue
            others = [(x, (p.vector, r) if r else 0) for j, (x, _, r) in enumerate(p.slots) if j != i]
            for combo in _fill(others, room, done, rules.min_yield):
                build(p, combo[:i] + (key,) + combo[i:])

    strings = {}
    for key in finished:
        nt, w, sig = key
        if nt == g.start and _covers(rules, sig):
            if w not in strings or best[key] < best[strings[w]]:
                strings[w] = key

    def make(key):
        def tree():
            t = _rebuild(back, key)
            a = infer_assignment(g, t, reflexive)
            assert a is not None, f"enumerator produced an invalid tree for {key[1]}"
            return a.apply(t)
        return tree

    return UvgdlEnumeration(frozenset(strings), stats, {w: make(k) for w, k in strings.items()})


def _fill(slots, room, done, min_yield):
    """Tuples of finished items for ``slots`` whose yields fit together in
    ``room`` terminals."""
    if not slots:
        yield ()
        return
    head, tail = slots[0], slots[1:]
    tail_min = sum(min_yield[n] for n, _ in tail)
    table = done.get(head, {})
    for length in sorted(table):
        if length + tail_min > room:
            break
        for key in list(table[length]):
            for rest in _fill(tail, room - length, done, min_yield):
                yield (key,) + rest


def _rebuild(back, key) -> TreeNode:
    p, kids = back[key]
    it = iter(kids)
    children = tuple(_rebuild(back, next(it)) if isinstance(x, Nt) else x for x in p.rhs)
    return TreeNode(p.vector, p.label, None, children)


# -- the plain definition, for cross-checking -----------------------------------

def enumerate_trees(g: UvgdlGrammar, b: SearchBounds, nt: str | None = None) -> Iterator[TreeNode]:
    """Every tree over the union of all vectors' productions rooted in ``nt``
    with at most ``b.max_yield`` terminals and ``b.max_steps`` nodes.

    Trees carry no instance ids.  The count grows very fast; meant for small
    bounds only.
    """
    rules = _Rules(g)
    by_lhs = defaultdict(list)
    for p in rules.prods:
        by_lhs[p.lhs].append(p)

    def grow(a, toks, nodes):
        # yields (tree, terminals used, nodes used)
        if nodes < 1 or rules.min_yield[a] > toks:
            return
        for p in by_lhs[a]:
            if p.terminals > toks:
                continue
            slots = [x for x, _, _ in p.slots]
            for kids, t_used, n_used in seq(slots, toks - p.terminals, nodes - 1):
                it = iter(kids)
                children = tuple(next(it) if isinstance(x, Nt) else x for x in p.rhs)
                yield TreeNode(p.vector, p.label, None, children), t_used + p.terminals, n_used + 1

    def seq(slots, toks, nodes):
        if not slots:
            yield (), 0, 0
            return
        rest_min = sum(rules.min_yield[s] for s in slots[1:])
        for t, t1, n1 in grow(slots[0], toks - rest_min, nodes - (len(slots) - 1)):
            for more, t2, n2 in seq(slots[1:], toks - t1, nodes - n1):
                yield (t,) + more, t1 + t2, n1 + n2

    for t, _, _ in grow(nt or g.start, b.max_yield, b.max_steps):
        yield t


def enumerate_uvgdl_naive(g: UvgdlGrammar, b: SearchBounds, reflexive: bool = True) -> UvgdlEnumeration:
    """The definition read literally: enumerate every tree within bounds and
    keep those for which :func:`infer_assignment` finds a valid grouping."""
    stats = UvgdlStats()
    found = {}
    for t in enumerate_trees(g, b):
        stats.items += 1
        w = yield_of(t)
        if w in found:
            continue
        a = infer_assignment(g, t, reflexive)
        if a is not None:
            found[w] = a.apply(t)
    return UvgdlEnumeration(frozenset(found), stats, {w: (lambda t=t: t) for w, t in found.items()})
