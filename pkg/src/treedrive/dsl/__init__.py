"""The decision-tree policy language: parse, validate, evaluate, measure, print."""

from treedrive.dsl.ast import PolicyTree
from treedrive.dsl.dot import export_graph
from treedrive.dsl.evaluate import compile_tree, evaluate, interpret
from treedrive.dsl.fmt import format_expr, format_tree
from treedrive.dsl.metrics import TreeMetrics, metrics
from treedrive.dsl.namespace import FEATURES, INF, FeatureView
from treedrive.dsl.parser import ParseError, parse
from treedrive.dsl.validate import Issue, PolicyError, ValidationReport, validate


def load_policy(path) -> PolicyTree:
    """Read, parse and validate a ``.dtp`` file; raise on any error."""
    with open(path, encoding="utf-8") as fh:
        tree = parse(fh.read())
    report = validate(tree)
    if not report.ok:
        raise PolicyError(report)
    return tree


__all__ = [
    "FEATURES",
    "INF",
    "FeatureView",
    "Issue",
    "ParseError",
    "PolicyError",
    "PolicyTree",
    "TreeMetrics",
    "ValidationReport",
    "compile_tree",
    "evaluate",
    "export_graph",
    "format_expr",
    "format_tree",
    "interpret",
    "load_policy",
    "metrics",
    "parse",
    "validate",
]
