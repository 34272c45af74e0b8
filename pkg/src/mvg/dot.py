"""Graphviz DOT export for derivation trees and recognizer charts."""
from __future__ import annotations

from .fileformat import TreeNode
from .grammar import UvgdlGrammar
from .recognizer import Chart
from .uvgdl import VectorAssignment, infer_assignment, node_at, walk


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def tree_to_dot(t: TreeNode, g: UvgdlGrammar, a: VectorAssignment | None = None) -> str:
    """Tree edges solid, one dashed edge per dominance link of every instance.

    Without an assignment the tree's own instance ids are used when every node
    has one; otherwise one is inferred.  Node names follow preorder.
    """
    if a is None:
        if all(n.instance is not None for _, n in walk(t)):
            a = VectorAssignment.from_tree(t)
        else:
            a = infer_assignment(g, t)
    names = {}
    lines = ["digraph derivation {", "  node [shape=box];"]
    leaf = 0
    edges = []
    for path, node in walk(t):
        name = f"n{len(names)}"
        names[path] = name
        lhs = g.vector(node.vector).production(node.label).lhs
        inst = f"@{a.instances[path][1]}" if a is not None else ""
        lines.append(f"  {name} [label={_q(f'{lhs}  {node.vector}:{node.label}{inst}')}];")
        for k, c in enumerate(node.children, start=1):
            if not isinstance(c, TreeNode):
                lines.append(f"  t{leaf} [label={_q(c)}, shape=plaintext];")
                edges.append(f"  {name} -> t{leaf};")
                leaf += 1
    for path, name in names.items():
        if path:
            edges.append(f"  {names[path[:-1]]} -> {name};")
    if a is not None:
        for (vec, i), paths in sorted(a.groups().items()):
            where = {node_at(t, p).label: p for p in paths}
            for link in g.vector(vec).links:
                src = where[link.source] + (link.position,)
                tgt = where[link.target]
                edges.append(f"  {names[src]} -> {names[tgt]} [style=dashed, constraint=false, "
                             f"label={_q(f'{vec}@{i} {link}')}];")
    return "\n".join(lines + sorted(edges, key=_edge_key) + ["}"]) + "\n"


def _edge_key(e: str):
    return ("dashed" in e, e)


def chart_to_dot(chart: Chart) -> str:
    """One cluster per cell ``(i, j)``, ``0 <= i <= j <= n``, listing its items."""
    lines = ["digraph chart {", "  node [shape=plaintext];"]
    for i in range(chart.n + 1):
        for j in range(i, chart.n + 1):
            words = " ".join(chart.tokens[i:j]) or "ε"
            lines.append(f"  subgraph cluster_{i}_{j} {{")
            lines.append(f"    label={_q(f't[{i},{j}]: {words}')};")
            items = chart.items(i, j)
            if not items:
                lines.append(f"    c{i}_{j}_empty [label=\"∅\"];")
            for m, item in enumerate(items):
                lines.append(f"    c{i}_{j}_{m} [label={_q(item.render(chart.order))}];")
            lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot(obj, g: UvgdlGrammar | None = None) -> str:
    if isinstance(obj, Chart):
        return chart_to_dot(obj)
    if g is None:
        raise TypeError("exporting a tree needs its grammar")
    return tree_to_dot(obj, g)
