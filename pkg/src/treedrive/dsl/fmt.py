"""Canonical pretty-printer. ``parse(format_tree(t)) == t`` for every parseable tree."""

from __future__ import annotations

import math

from treedrive.dsl.ast import (
    BinOp,
    BoolOp,
    Call,
    Compare,
    Decision,
    Expr,
    Inf,
    Leaf,
    Neg,
    Node,
    Not,
    Num,
    PolicyTree,
    Var,
)

INDENT = "    "

_OR, _AND, _NOT, _CMP, _ADD, _MUL, _UNARY, _ATOM = range(1, 9)
_BINARY_PREC = {"or": _OR, "and": _AND, "+": _ADD, "-": _ADD, "*": _MUL, "/": _MUL}


def _num(value: float) -> str:
    if not math.isfinite(value):
        raise ValueError(f"cannot format non-finite literal {value!r}; use INF")
    return repr(float(value))


def _expr(e: Expr) -> tuple[str, int]:
    if isinstance(e, Num):
        return _num(e.value), _ATOM if e.value >= 0 else _UNARY
    if isinstance(e, Inf):
        return "INF", _ATOM
    if isinstance(e, Var):
        return e.name, _ATOM
    if isinstance(e, Call):
        return f"{e.func}({', '.join(format_expr(a) for a in e.args)})", _ATOM
    if isinstance(e, Neg):
        return "-" + _wrap(e.operand, _UNARY), _UNARY
    if isinstance(e, Not):
        return "not " + _wrap(e.operand, _NOT), _NOT
    if isinstance(e, Compare):
        # non-associative: both sides must bind tighter
        return f"{_wrap(e.left, _CMP + 1)} {e.op} {_wrap(e.right, _CMP + 1)}", _CMP
    if isinstance(e, (BinOp, BoolOp)):
        p = _BINARY_PREC[e.op]
        # left-associative: an equal-precedence right operand needs parens
        return f"{_wrap(e.left, p)} {e.op} {_wrap(e.right, p + 1)}", p
    raise TypeError(f"not an expression node: {e!r}")


def _wrap(e: Expr, min_prec: int) -> str:
    text, prec = _expr(e)
    return text if prec >= min_prec else f"({text})"


def format_expr(e: Expr) -> str:
    return _expr(e)[0]


def _quote(name: str) -> str:
    body = name.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{body}"'


def _node(node: Node, depth: int, out: list[str]) -> None:
    pad = INDENT * depth
    if isinstance(node, Leaf):
        out.append(pad + node.action.name)
        return
    for k, arm in enumerate(node.arms):
        head = "if" if k == 0 else "} elif"
        out.append(f"{pad}{head} {format_expr(arm.condition)} {{")
        _node(arm.child, depth + 1, out)
    out.append(pad + "} else {")
    _node(node.else_child, depth + 1, out)
    out.append(pad + "}")


def format_tree(tree: PolicyTree) -> str:
    out = [f"policy {_quote(tree.name)} {{"]
    _node(tree.root, 1, out)
    out.append("}")
    return "\n".join(out) + "\n"
