"""Structured agent outputs and the parsers that extract them from model replies.

Replies carry their payload in fenced, tagged blocks::

    ```tactic
    name: Keep Lane
    priority: 3
    usage: the lane ahead is free
    execution:
    1. hold the current speed level
    ```

Prose outside the blocks is ignored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from treedrive.scene import CollisionReport, DrivingTarget

_BLOCK = re.compile(r"```[ \t]*([A-Za-z_][\w-]*)[^\n]*\n(.*?)```", re.DOTALL)
_FAULT = re.compile(r"^[ \t>*]*FAULT[ \t*]*:[ \t*]*([A-Za-z]+)", re.MULTILINE | re.IGNORECASE)
FAULTS = ("planner", "coder", "both")


class AgentFormatError(ValueError):
    """A model reply that still did not match the required format after all retries."""

    module = "agent"

    def __init__(self, message: str, attempts: int = 0, transcript=None):
        super().__init__(message)
        self.attempts = attempts
        self.transcript = transcript


class PlannerFormatError(AgentFormatError):
    module = "planner"


class CoderFormatError(AgentFormatError):
    module = "coder"


class SummarizerFormatError(AgentFormatError):
    module = "summarizer"


class ReplyFormatError(ValueError):
    """One malformed reply; the message is fed back to the model on re-ask."""


def fenced_blocks(text: str) -> list[tuple[str, str]]:
    return [(m.group(1).lower(), m.group(2)) for m in _BLOCK.finditer(text)]


@dataclass(frozen=True)
class Tactic:
    name: str
    usage_conditions: str
    priority: int
    execution: tuple[str, ...]

    def render(self) -> str:
        steps = "\n".join(f"{k}. {s}" for k, s in enumerate(self.execution, start=1))
        return (f"```tactic\nname: {self.name}\npriority: {self.priority}\n"
                f"usage: {self.usage_conditions}\nexecution:\n{steps}\n```")


@dataclass(frozen=True)
class TacticSet:
    tactics: tuple[Tactic, ...]
    driving_target: DrivingTarget
    revision: int = 1

    def ordered(self) -> list[Tactic]:
        """Tactics by precedence: lower priority number first, ties by name."""
        return sorted(self.tactics, key=lambda t: (t.priority, t.name))

    def render(self) -> str:
        return "\n\n".join(t.render() for t in self.ordered())


@dataclass(frozen=True)
class Critique:
    fault: str
    advice_planner: str = ""
    advice_coder: str = ""
    evidence: CollisionReport | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.fault not in FAULTS:
            raise ValueError(f"fault must be one of {FAULTS}, got {self.fault!r}")
        if self.fault in ("planner", "both") and not self.advice_planner.strip():
            raise ValueError(f"fault={self.fault} requires planner advice")
        if self.fault in ("coder", "both") and not self.advice_coder.strip():
            raise ValueError(f"fault={self.fault} requires coder advice")

    @property
    def blames_planner(self) -> bool:
        return self.fault in ("planner", "both")

    @property
    def blames_coder(self) -> bool:
        return self.fault in ("coder", "both")


_FIELD = re.compile(r"^\s*([A-Za-z_ ]+?)\s*:\s*(.*)$")
_STEP = re.compile(r"^\s*(?:\d+[.)]|[-*])\s*(.+)$")
_FIELD_ALIASES = {
    "name": "name",
    "priority": "priority",
    "usage": "usage",
    "usage conditions": "usage",
    "usage_conditions": "usage",
    "execution": "execution",
    "steps": "execution",
}


def _parse_tactic(body: str, index: int) -> Tactic:
    values: dict[str, str] = {}
    steps: list[str] = []
    current = None
    for line in body.splitlines():
        if not line.strip():
            continue
        m = _FIELD.match(line)
        key = _FIELD_ALIASES.get(m.group(1).strip().lower()) if m else None
        if key is not None and not (current == "execution" and _STEP.match(line)):
            current = key
            if key == "execution":
                if m.group(2).strip():
                    steps.append(m.group(2).strip())
            else:
                values[key] = m.group(2).strip()
            continue
        if current == "execution":
            sm = _STEP.match(line)
            steps.append(sm.group(1).strip() if sm else line.strip())
        elif current == "usage":
            values["usage"] += " " + line.strip()
        else:
            raise ReplyFormatError(f"tactic block {index}: cannot read line {line.strip()!r}")
    for key in ("name", "priority", "usage"):
        if not values.get(key):
            raise ReplyFormatError(f"tactic block {index}: missing '{key}:' field")
    try:
        priority = int(values["priority"])
    except ValueError:
        raise ReplyFormatError(
            f"tactic block {index}: priority must be an integer, got {values['priority']!r}"
        ) from None
    if not steps:
        raise ReplyFormatError(f"tactic block {index}: 'execution:' needs at least one step")
    return Tactic(values["name"], values["usage"], priority, tuple(steps))


def parse_tactics(reply: str, target: DrivingTarget, revision: int) -> TacticSet:
    blocks = [body for tag, body in fenced_blocks(reply) if tag == "tactic"]
    if not blocks:
        raise ReplyFormatError("no ```tactic blocks found in the reply")
    tactics = [_parse_tactic(body, k) for k, body in enumerate(blocks, start=1)]
    seen: set[str] = set()
    for t in tactics:
        if t.name.lower() in seen:
            raise ReplyFormatError(f"duplicate tactic name {t.name!r}; tactic names must be unique")
        seen.add(t.name.lower())
    return TacticSet(tuple(tactics), target, revision)


def extract_policy_source(reply: str) -> str:
    blocks = [body for tag, body in fenced_blocks(reply) if tag in ("policy", "dtp")]
    if not blocks:
        raise ReplyFormatError("no ```policy block found in the reply")
    if len(blocks) > 1:
        raise ReplyFormatError("reply contains more than one ```policy block; send exactly one")
    return blocks[0]


def parse_critique(reply: str, report: CollisionReport | None = None) -> Critique:
    faults = _FAULT.findall(reply)
    if not faults:
        raise ReplyFormatError("missing 'FAULT: planner|coder|both' line")
    fault = faults[-1].lower()
    if fault not in FAULTS:
        raise ReplyFormatError(f"FAULT must be planner, coder or both, got {fault!r}")
    advice = {tag: body.strip() for tag, body in fenced_blocks(reply)
              if tag in ("advice_planner", "advice_coder")}
    try:
        return Critique(fault, advice.get("advice_planner", ""), advice.get("advice_coder", ""),
                        evidence=report)
    except ValueError as exc:
        raise ReplyFormatError(
            f"{exc}; put it in a ```{('advice_planner' if 'planner' in str(exc) else 'advice_coder')}"
            " block") from None
