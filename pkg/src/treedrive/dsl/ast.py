"""Immutable syntax tree for decision-tree policies.

Source positions are carried for diagnostics but excluded from equality, so a
parsed tree compares equal to the same tree built by hand.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from treedrive.actions import Action

Pos = Union[tuple[int, int], None]


def _pos() -> Pos:
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Num:
    value: float
    pos: Pos = _pos()


@dataclass(frozen=True)
class Inf:
    pos: Pos = _pos()


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Neg:
    operand: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class Not:
    operand: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class BinOp:
    """Arithmetic: ``+ - * /``."""

    op: str
    left: Expr
    right: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class Compare:
    """``< <= > >= == !=``; non-associative in the grammar."""

    op: str
    left: Expr
    right: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class BoolOp:
    """``and`` / ``or`` with short-circuit semantics."""

    op: str
    left: Expr
    right: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple[Expr, ...]
    pos: Pos = _pos()


Expr = Union[Num, Inf, Var, Neg, Not, BinOp, Compare, BoolOp, Call]


@dataclass(frozen=True)
class Leaf:
    action: Action
    pos: Pos = _pos()


@dataclass(frozen=True)
class Arm:
    condition: Expr
    child: Node
    pos: Pos = _pos()


@dataclass(frozen=True)
class Decision:
    """Ordered ``if``/``elif`` arms plus a mandatory ``else``; first true arm wins."""

    arms: tuple[Arm, ...]
    else_child: Node
    pos: Pos = _pos()


Node = Union[Leaf, Decision]


@dataclass(frozen=True)
class PolicyTree:
    name: str
    root: Node
    # compiled decision function, filled lazily by the evaluator
    _compiled: object = field(default=None, compare=False, repr=False, hash=False)


def iter_nodes(node: Node):
    """Yield every node in pre-order (arms in source order, else last)."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        if isinstance(n, Decision):
            stack.append(n.else_child)
            stack.extend(arm.child for arm in reversed(n.arms))


def leaves(tree: PolicyTree) -> list[Action]:
    return [n.action for n in iter_nodes(tree.root) if isinstance(n, Leaf)]
