"""Graphviz DOT export: one graph node per tree node, one edge per branch."""

from __future__ import annotations

from treedrive.dsl.ast import Decision, Leaf, Node, PolicyTree
from treedrive.dsl.fmt import format_expr


def _esc(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")


def export_graph(tree: PolicyTree) -> str:
    lines = [
        f'digraph "{_esc(tree.name)}" {{',
        '    node [fontname="Helvetica"];',
        '    edge [fontname="Helvetica", fontsize=10];',
    ]
    counter = 0

    def visit(node: Node) -> str:
        nonlocal counter
        ident = f"n{counter}"
        counter += 1
        if isinstance(node, Leaf):
            lines.append(f'    {ident} [label="{node.action.name}", shape=box, style=rounded];')
            return ident
        assert isinstance(node, Decision)
        lines.append(f'    {ident} [label="?", shape=diamond];')
        for arm in node.arms:
            child = visit(arm.child)
            label = _esc(format_expr(arm.condition))
            lines.append(f'    {ident} -> {child} [label="{label}"];')
        child = visit(node.else_child)
        lines.append(f'    {ident} -> {child} [label="else"];')
        return ident

    visit(tree.root)
    lines.append("}")
    return "\n".join(lines) + "\n"
