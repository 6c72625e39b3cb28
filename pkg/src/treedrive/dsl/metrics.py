"""Structural statistics of a policy tree.

Counting convention: every decision node and every leaf is a node; every
parent-to-child edge (one per arm plus the else) is a branch; depth is the
number of nodes on the longest root-to-leaf path.
"""

from __future__ import annotations

from dataclasses import dataclass

from treedrive.dsl.ast import Decision, PolicyTree


@dataclass(frozen=True)
class TreeMetrics:
    node_count: int
    branch_count: int
    depth: int
    leaf_count: int
    decision_count: int


def metrics(tree: PolicyTree) -> TreeMetrics:
    nodes = branches = leaves = decisions = 0
    depth = 0
    stack = [(tree.root, 1)]
    while stack:
        node, d = stack.pop()
        nodes += 1
        if isinstance(node, Decision):
            decisions += 1
            children = [arm.child for arm in node.arms] + [node.else_child]
            branches += len(children)
            stack.extend((c, d + 1) for c in children)
        else:
            leaves += 1
            depth = max(depth, d)
    return TreeMetrics(nodes, branches, depth, leaves, decisions)
