"""Policy evaluation.

Validated trees are compiled once into a plain Python function (nested
``if``/``elif``/``else`` over local feature reads) and cached on the tree.
Only identifiers from the fixed feature namespace and float literals reach the
generated source, so compiling is safe. Trees too deep for the Python compiler
fall back to :func:`interpret`.
"""

from __future__ import annotations

from typing import Callable

from treedrive.actions import Action
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
from treedrive.dsl.namespace import INF, FeatureView, safe_div
from treedrive.dsl.validate import PolicyError, validate

DecisionFn = Callable[[FeatureView], Action]

_CMP = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


def _value(e: Expr, fv: FeatureView):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Inf):
        return INF
    if isinstance(e, Var):
        return getattr(fv, e.name)
    if isinstance(e, Neg):
        return -_value(e.operand, fv)
    if isinstance(e, Not):
        return not _value(e.operand, fv)
    if isinstance(e, BoolOp):
        left = _value(e.left, fv)
        if e.op == "and":
            return left and _value(e.right, fv)
        return left or _value(e.right, fv)
    if isinstance(e, Compare):
        return _CMP[e.op](_value(e.left, fv), _value(e.right, fv))
    if isinstance(e, BinOp):
        a, b = _value(e.left, fv), _value(e.right, fv)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        return safe_div(a, b)
    if isinstance(e, Call):
        args = [_value(a, fv) for a in e.args]
        return {"min": min, "max": max, "abs": abs}[e.func](*args)
    raise TypeError(f"not an expression node: {e!r}")


def interpret(tree: PolicyTree, fv: FeatureView) -> Action:
    """Walk the tree directly. Slower than the compiled path; same semantics."""
    node: Node = tree.root
    while isinstance(node, Decision):
        for arm in node.arms:
            if _value(arm.condition, fv):
                node = arm.child
                break
        else:
            node = node.else_child
    return node.action


class _Codegen:
    def __init__(self):
        self.lines: list[str] = []
        self.features: set[str] = set()

    def expr(self, e: Expr) -> str:
        if isinstance(e, Num):
            return repr(float(e.value))
        if isinstance(e, Inf):
            return repr(INF)
        if isinstance(e, Var):
            self.features.add(e.name)
            return "f_" + e.name
        if isinstance(e, Neg):
            return f"(-{self.expr(e.operand)})"
        if isinstance(e, Not):
            return f"(not {self.expr(e.operand)})"
        if isinstance(e, (BoolOp, Compare)):
            return f"({self.expr(e.left)} {e.op} {self.expr(e.right)})"
        if isinstance(e, BinOp):
            if e.op == "/":
                return f"_div({self.expr(e.left)}, {self.expr(e.right)})"
            return f"({self.expr(e.left)} {e.op} {self.expr(e.right)})"
        if isinstance(e, Call):
            return f"_{e.func}({', '.join(self.expr(a) for a in e.args)})"
        raise TypeError(f"not an expression node: {e!r}")

    def node(self, n: Node, depth: int) -> None:
        pad = "    " * depth
        if isinstance(n, Leaf):
            self.lines.append(f"{pad}return _{n.action.name}")
            return
        for k, arm in enumerate(n.arms):
            kw = "if" if k == 0 else "elif"
            self.lines.append(f"{pad}{kw} {self.expr(arm.condition)}:")
            self.node(arm.child, depth + 1)
        self.lines.append(f"{pad}else:")
        self.node(n.else_child, depth + 1)


def _codegen(tree: PolicyTree) -> DecisionFn:
    gen = _Codegen()
    gen.node(tree.root, 1)
    # Read every used feature up front: one attribute load each.
    header = [f"    f_{name} = fv.{name}" for name in sorted(gen.features)]
    source = "def _decide(fv):\n" + "\n".join(header + gen.lines) + "\n"
    env = {f"_{a.name}": a for a in Action}
    env.update(_div=safe_div, _min=min, _max=max, _abs=abs)
    code = compile(source, f"<policy {tree.name!r}>", "exec")
    exec(code, env)
    fn = env["_decide"]
    fn.__source__ = source
    return fn


def compile_tree(tree: PolicyTree) -> DecisionFn:
    """Return the cached decision function for ``tree``, compiling it on first use.

    Raises :class:`PolicyError` if the tree does not validate.
    """
    fn = tree._compiled
    if fn is not None:
        return fn
    report = validate(tree)
    if not report.ok:
        raise PolicyError(report)
    try:
        fn = _codegen(tree)
    except (RecursionError, SyntaxError, MemoryError):
        fn = lambda fv, _t=tree: interpret(_t, fv)  # noqa: E731
    object.__setattr__(tree, "_compiled", fn)
    return fn


def evaluate(tree: PolicyTree, fv: FeatureView) -> Action:
    """Pick the action of the first arm whose condition holds, in source order."""
    fn = tree._compiled
    if fn is None:
        fn = compile_tree(tree)
    return fn(fv)
