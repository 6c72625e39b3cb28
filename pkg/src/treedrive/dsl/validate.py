"""Static checks: unknown identifiers, type errors, totality, unreachable arms.

Units are tracked loosely for style warnings only. A literal has no unit and
anything scaled by a literal loses its unit, so ``lead_gap < ego_speed * 2``
passes quietly while ``lead_gap < ego_speed`` is flagged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from treedrive.dsl.ast import (
    Arm,
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
from treedrive.dsl.namespace import (
    BOOL,
    FEATURES,
    FUNCTIONS,
    INF,
    LANES,
    METERS,
    MPS,
    NUM,
    SECONDS,
    safe_div,
)
from treedrive.dsl.fmt import format_expr

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Issue:
    severity: str
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.location}: {self.message}"


@dataclass
class ValidationReport:
    issues: list[Issue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(i.severity == ERROR for i in self.issues)

    @property
    def errors(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == ERROR]

    @property
    def warnings(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == WARNING]

    def render(self) -> str:
        return "\n".join(str(i) for i in self.issues)


class PolicyError(ValueError):
    """Raised when an invalid tree is about to be executed."""

    def __init__(self, report: ValidationReport):
        super().__init__("invalid policy:\n" + report.render())
        self.report = report


_UNKNOWN = object()  # type of an expression that already produced an error


def _where(path: str, e) -> str:
    pos = getattr(e, "pos", None)
    return f"{path} (line {pos[0]}, col {pos[1]})" if pos else path


class _Checker:
    def __init__(self):
        self.issues: list[Issue] = []

    def add(self, severity: str, path: str, node, msg: str) -> None:
        self.issues.append(Issue(severity, _where(path, node), msg))

    def expr(self, e: Expr, path: str) -> tuple[object, str | None]:
        """Return (type, unit); type is NUM, BOOL or _UNKNOWN."""
        if isinstance(e, Num):
            return NUM, None
        if isinstance(e, Inf):
            return NUM, None
        if isinstance(e, Var):
            if e.name not in FEATURES:
                self.add(ERROR, path, e, f"unknown feature {e.name!r}")
                return _UNKNOWN, None
            t, u = FEATURES[e.name]
            return t, _BASE_UNITS.get(u)
        if isinstance(e, Neg):
            t, u = self.expr(e.operand, path)
            self.want(NUM, t, path, e, "operand of unary '-'")
            return NUM, u
        if isinstance(e, Not):
            t, _ = self.expr(e.operand, path)
            self.want(BOOL, t, path, e, "operand of 'not'")
            return BOOL, None
        if isinstance(e, BoolOp):
            for side in (e.left, e.right):
                t, _ = self.expr(side, path)
                self.want(BOOL, t, path, side, f"operand of '{e.op}'")
            return BOOL, None
        if isinstance(e, BinOp):
            lt, lu = self.expr(e.left, path)
            rt, ru = self.expr(e.right, path)
            self.want(NUM, lt, path, e.left, f"left operand of '{e.op}'")
            self.want(NUM, rt, path, e.right, f"right operand of '{e.op}'")
            if e.op in "+-":
                return NUM, self.unify(lu, ru, path, e)
            if lu is None or ru is None:
                return NUM, None
            return NUM, _combine(lu, ru, 1 if e.op == "*" else -1)
        if isinstance(e, Compare):
            lt, lu = self.expr(e.left, path)
            rt, ru = self.expr(e.right, path)
            if e.op in ("==", "!=") and BOOL in (lt, rt):
                if _UNKNOWN not in (lt, rt) and lt != rt:
                    self.add(ERROR, path, e, f"'{e.op}' compares bool with number")
                return BOOL, None
            self.want(NUM, lt, path, e.left, f"left operand of '{e.op}'")
            self.want(NUM, rt, path, e.right, f"right operand of '{e.op}'")
            self.unify(lu, ru, path, e)
            return BOOL, None
        if isinstance(e, Call):
            if e.func not in FUNCTIONS:
                self.add(ERROR, path, e, f"unknown function {e.func!r}")
                for a in e.args:
                    self.expr(a, path)
                return _UNKNOWN, None
            lo, hi = FUNCTIONS[e.func]
            if len(e.args) < lo or (hi is not None and len(e.args) > hi):
                want = str(lo) if lo == hi else f"at least {lo}"
                self.add(ERROR, path, e, f"{e.func}() takes {want} argument(s), got {len(e.args)}")
            unit = _UNKNOWN
            for k, a in enumerate(e.args):
                t, u = self.expr(a, path)
                self.want(NUM, t, path, a, f"argument {k + 1} of {e.func}()")
                unit = u if unit is _UNKNOWN else self.unify(unit, u, path, e)
            return NUM, None if unit is _UNKNOWN else unit
        raise TypeError(f"not an expression node: {e!r}")

    def want(self, expected, got, path, node, what) -> None:
        if got is _UNKNOWN or got == expected:
            return
        self.add(ERROR, path, node, f"{what} must be {_NAMES[expected]}, got {_NAMES[got]}")

    def unify(self, a, b, path, node):
        if a is None:
            return b
        if b is None or a == b:
            return a
        self.add(WARNING, path, node,
                 f"mixes units {_show(a)} and {_show(b)} in '{format_expr(node)}'")
        return None

    def node(self, n: Node, path: str) -> None:
        if isinstance(n, Leaf):
            return
        if not isinstance(n, Decision):
            self.add(ERROR, path, n, f"expected a decision or leaf, got {type(n).__name__}")
            return
        if not n.arms:
            self.add(ERROR, path, n, "decision has no conditional arms")
        if n.else_child is None:
            self.add(ERROR, path, n, "decision has no else branch")
        dead_from = None
        for k, arm in enumerate(n.arms):
            apath = f"{path}.arms[{k}]"
            if not isinstance(arm, Arm):
                self.add(ERROR, apath, n, "malformed arm")
                continue
            t, _ = self.expr(arm.condition, apath + ".condition")
            self.want(BOOL, t, apath + ".condition", arm.condition, "arm condition")
            if dead_from is not None:
                self.add(WARNING, apath, arm,
                         f"unreachable arm: arms[{dead_from}] is always true")
            elif t == BOOL:
                const = constant_value(arm.condition)
                if const is False:
                    self.add(WARNING, apath, arm, "unreachable arm: condition is always false")
                elif const is True:
                    dead_from = k
            self.node(arm.child, apath + ".child")
        if dead_from is not None:
            self.add(WARNING, path + ".else", n,
                     f"unreachable else: arms[{dead_from}] is always true")
        if n.else_child is not None:
            self.node(n.else_child, path + ".else")


_NAMES = {NUM: "a number", BOOL: "a boolean", _UNKNOWN: "unknown"}

# unit -> sorted tuple of (base, exponent)
_BASE_UNITS = {
    METERS: (("m", 1),),
    SECONDS: (("s", 1),),
    MPS: (("m", 1), ("s", -1)),
    LANES: (("lane", 1),),
}


def _combine(a, b, sign: int):
    exps = dict(a)
    for base, k in b:
        exps[base] = exps.get(base, 0) + sign * k
    return tuple(sorted((base, k) for base, k in exps.items() if k))


def _show(unit) -> str:
    if not unit:
        return "1"
    return "*".join(base if k == 1 else f"{base}^{k}" for base, k in unit)


def constant_value(e: Expr):
    """Fold an expression that reads no features; return None if it is not constant."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Inf):
        return INF
    if isinstance(e, Var):
        return None
    if isinstance(e, (Neg, Not)):
        v = constant_value(e.operand)
        if v is None:
            return None
        return -v if isinstance(e, Neg) else not v
    if isinstance(e, (BinOp, Compare, BoolOp)):
        a, b = constant_value(e.left), constant_value(e.right)
        if isinstance(e, BoolOp):
            # a known-deciding side settles it even if the other is not constant
            if e.op == "and" and (a is False or b is False):
                return False
            if e.op == "or" and (a is True or b is True):
                return True
        if a is None or b is None:
            return None
        return _apply(e.op, a, b)
    if isinstance(e, Call):
        vals = [constant_value(a) for a in e.args]
        if any(v is None for v in vals) or e.func not in FUNCTIONS:
            return None
        try:
            return {"min": min, "max": max, "abs": abs}[e.func](*vals)
        except TypeError:
            return None
    return None


def _apply(op: str, a, b):
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return safe_div(a, b)
    if op == "and":
        return a and b
    if op == "or":
        return a or b
    return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b, "==": a == b, "!=": a != b}[op]


def validate(tree: PolicyTree) -> ValidationReport:
    checker = _Checker()
    checker.node(tree.root, "root")
    return ValidationReport(checker.issues)
