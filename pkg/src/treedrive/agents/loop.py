"""Planner -> Coder -> validation -> Summarizer closed loop."""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, replace
from string import Template
from typing import Callable, Sequence

from treedrive.agents.client import ChatClient, Message
from treedrive.agents.models import (
    AgentFormatError,
    CoderFormatError,
    Critique,
    PlannerFormatError,
    ReplyFormatError,
    SummarizerFormatError,
    TacticSet,
    extract_policy_source,
    parse_critique,
    parse_tactics,
)
from treedrive.dsl import FEATURES, ParseError, PolicyTree, metrics, parse, validate
from treedrive.dsl.namespace import FEATURE_DOCS
from treedrive.harness.evaluation import SeedRecord, run_seed
from treedrive.scene import (
    DEFAULT_REPORT_STEPS,
    CollisionReport,
    DrivingTarget,
    RuleSet,
    render_collision_report,
    render_scenario,
)
from treedrive.sim.config import ConfigError, ScenarioConfig
from treedrive.templating import load_sections

logger = logging.getLogger(__name__)

DEFAULT_VALIDATION_SEED_BASE = 100


def _prompt(name: str, **values) -> str:
    return Template(load_sections("treedrive.agents", "prompts.txt")[name]).substitute(values)


def _feature_table() -> str:
    rows = []
    for name, (kind, unit) in FEATURES.items():
        suffix = f" [{unit}]" if unit and unit != "lane" else ""
        rows.append(f"  {name} ({'boolean' if kind == 'bool' else 'number'}){suffix}: "
                    f"{FEATURE_DOCS[name]}")
    return "\n".join(rows)


@dataclass(frozen=True)
class TrainConfig:
    max_iterations: int = 10
    validation_episodes: int = 5
    validation_seeds: tuple[int, ...] = ()
    parse_retry_limit: int = 3
    report_steps: int = DEFAULT_REPORT_STEPS

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ConfigError("max_iterations", "must be >= 1")
        if self.validation_episodes < 1:
            raise ConfigError("validation_episodes", "must be >= 1")
        if self.parse_retry_limit < 1:
            raise ConfigError("parse_retry_limit", "must be >= 1")
        if self.report_steps < 1:
            raise ConfigError("report_steps", "must be >= 1")

    def seeds(self) -> list[int]:
        if self.validation_seeds:
            return list(self.validation_seeds)
        return [DEFAULT_VALIDATION_SEED_BASE + k for k in range(self.validation_episodes)]

    @classmethod
    def from_mapping(cls, values) -> "TrainConfig":
        kwargs = {}
        for key in ("max_iterations", "validation_episodes", "parse_retry_limit", "report_steps"):
            if key in values:
                try:
                    kwargs[key] = int(values[key])
                except ValueError:
                    raise ConfigError(key, f"cannot read {values[key]!r} as int") from None
        if values.get("validation_seeds"):
            try:
                seeds = tuple(int(s) for s in str(values["validation_seeds"]).split(","))
            except ValueError:
                raise ConfigError("validation_seeds", "expected comma-separated integers") from None
            kwargs["validation_seeds"] = seeds
            kwargs.setdefault("validation_episodes", len(seeds))
        return cls(**kwargs)


@dataclass(frozen=True)
class TranscriptEntry:
    role: str
    iteration: int
    module: str
    text: str


class Transcript:
    def __init__(self):
        self.entries: list[TranscriptEntry] = []

    def add(self, role: str, iteration: int, module: str, text: str) -> None:
        self.entries.append(TranscriptEntry(role, iteration, module, text))

    def lines(self) -> list[str]:
        return [json.dumps(asdict(e), ensure_ascii=False) for e in self.entries]

    def digest(self) -> str:
        return hashlib.sha256("\n".join(self.lines()).encode()).hexdigest()

    def prompts(self, module: str, iteration: int | None = None) -> list[str]:
        """User-side texts sent to ``module`` (optionally within one iteration)."""
        return [e.text for e in self.entries
                if e.module == module and e.role == "user"
                and (iteration is None or e.iteration == iteration)]


@dataclass(frozen=True)
class CoderOutput:
    tree: PolicyTree
    source: str
    retry_count: int


class Agents:
    """The three prompt-driven agents sharing one chat client and transcript."""

    def __init__(self, client: ChatClient, parse_retry_limit: int = 3,
                 transcript: Transcript | None = None):
        self.client = client
        self.parse_retry_limit = parse_retry_limit
        self.transcript = transcript if transcript is not None else Transcript()
        self.iteration = 0
        self.calls: dict[str, int] = {"planner": 0, "coder": 0, "summarizer": 0}

    def _converse(self, module: str, system: str, user: str, parse_reply: Callable[[str], object],
                  retry_section: str, error_cls: type[AgentFormatError]):
        """Ask, parse, and re-ask with the error until the reply parses or attempts run out.

        Returns (parsed value, number of re-asks).
        """
        self.calls[module] += 1
        messages = [Message("system", system), Message("user", user)]
        self.transcript.add("system", self.iteration, module, system)
        self.transcript.add("user", self.iteration, module, user)
        error = None
        for attempt in range(self.parse_retry_limit):
            reply = self.client.send(messages)
            self.transcript.add("assistant", self.iteration, module, reply)
            try:
                return parse_reply(reply), attempt
            except ReplyFormatError as exc:
                error = str(exc)
                logger.info("%s reply rejected (attempt %d): %s", module, attempt + 1,
                            error.splitlines()[0])
                retry = _prompt(retry_section, error=error)
                messages += [Message("assistant", reply), Message("user", retry)]
                self.transcript.add("user", self.iteration, module, retry)
        raise error_cls(f"{module} reply still malformed after {self.parse_retry_limit} "
                        f"attempts: {error}", self.parse_retry_limit, self.transcript)

    def plan(self, scenario_text: str, target: DrivingTarget,
             prior: tuple[TacticSet, Critique] | None = None) -> TacticSet:
        if not scenario_text.strip():
            raise ValueError("scenario text is empty")
        user = _prompt("planner.user", scenario=scenario_text)
        revision = 1
        if prior is not None:
            tactics, critique = prior
            revision = tactics.revision + 1
            advice = critique.advice_planner if critique.blames_planner else ""
            user += _prompt("planner.prior", revision=tactics.revision, tactics=tactics.render(),
                            advice=advice or "(none)")
        result, _ = self._converse(
            "planner", _prompt("planner.system"), user,
            lambda reply: parse_tactics(reply, target, revision),
            "planner.retry", PlannerFormatError)
        return result

    def code(self, tactics: TacticSet, scenario_text: str,
             prior: tuple[str, Critique | None] | None = None) -> CoderOutput:
        user = _prompt("coder.user", scenario=scenario_text, revision=tactics.revision,
                       tactics=tactics.render())
        if prior is not None:
            source, critique = prior
            user += _prompt("coder.prior", source=source.strip())
            if critique is not None and critique.blames_coder:
                user += _prompt("coder.advice", advice=critique.advice_coder)

        def parse_reply(reply: str):
            source = extract_policy_source(reply)
            try:
                tree = parse(source)
            except ParseError as exc:
                raise ReplyFormatError(exc.render("policy")) from None
            report = validate(tree)
            if not report.ok:
                raise ReplyFormatError("validation failed:\n" + report.render())
            return tree, source

        (tree, source), retries = self._converse(
            "coder", _prompt("coder.system", features=_feature_table()), user, parse_reply,
            "coder.retry", CoderFormatError)
        return CoderOutput(tree, source, retries)

    def summarize(self, report: CollisionReport, tactics: TacticSet,
                  policy_source: str) -> Critique:
        user = _prompt("summarizer.user", report=report.narrative, revision=tactics.revision,
                       tactics=tactics.render(), source=policy_source.strip())
        result, _ = self._converse(
            "summarizer", _prompt("summarizer.system"), user,
            lambda reply: parse_critique(reply, report),
            "summarizer.retry", SummarizerFormatError)
        return result


@dataclass(frozen=True)
class IterationSummary:
    iteration: int
    revision: int
    node_count: int
    per_seed_times: tuple[float, ...]
    collided_seeds: tuple[int, ...]
    mean_survival: float
    coder_retries: int
    fault: str | None = None


@dataclass
class TrainResult:
    policy: PolicyTree
    policy_source: str
    tactics: TacticSet
    converged: bool
    iterations_used: int
    iterations: list[IterationSummary]
    transcript: Transcript = field(repr=False)
    calls: dict[str, int] = field(default_factory=dict)

    def transcript_hash(self) -> str:
        return self.transcript.digest()


def _validate_policy(tree: PolicyTree, scenario: ScenarioConfig,
                     seeds: Sequence[int]) -> list[tuple[SeedRecord, object]]:
    return [run_seed(tree, replace(scenario, seed=s), label="validation") for s in seeds]


def train(config: TrainConfig, scenario: ScenarioConfig, rules: RuleSet, target: DrivingTarget,
          client: ChatClient) -> TrainResult:
    """Iterate plan -> code -> validate -> summarize until every validation episode
    reaches the time cap collision-free, or the iteration budget runs out.

    On a budget stop the best policy seen is returned: highest mean survival
    time, then fewest nodes. Format errors propagate with ``.transcript`` set.
    """
    scenario_text = render_scenario(scenario, rules, target, training=True)
    agents = Agents(client, config.parse_retry_limit)
    seeds = config.seeds()
    history: list[IterationSummary] = []
    best = None  # (key, tree, source, tactics)
    tactics = critique = None
    source = None
    converged = False

    for it in range(1, config.max_iterations + 1):
        agents.iteration = it
        if tactics is None:
            tactics = agents.plan(scenario_text, target)
        elif critique.blames_planner:
            tactics = agents.plan(scenario_text, target, prior=(tactics, critique))
        out = agents.code(tactics, scenario_text,
                          prior=None if source is None else (source, critique))
        source = out.source
        runs = _validate_policy(out.tree, scenario, seeds)
        times = tuple(rec.survival_time for rec, _ in runs)
        collided = tuple(rec.seed for rec, _ in runs if rec.collided)
        mean_time = sum(times) / len(times)
        node_count = metrics(out.tree).node_count
        key = (mean_time, -node_count)
        if best is None or key > best[0]:
            best = (key, out.tree, out.source, tactics)
        summary = IterationSummary(it, tactics.revision, node_count, times, collided, mean_time,
                                   out.retry_count)
        logger.info("iteration %d: mean survival %.2fs, %d/%d collided", it, mean_time,
                    len(collided), len(seeds))
        if not collided and all(t >= scenario.max_episode_time for t in times):
            history.append(summary)
            converged = True
            best = (key, out.tree, out.source, tactics)
            break
        if it == config.max_iterations:
            history.append(summary)
            break
        episode = next(ep for rec, ep in runs if rec.collided)
        report = render_collision_report(episode.trajectory, config.report_steps)
        critique = agents.summarize(report, tactics, source)
        history.append(replace(summary, fault=critique.fault))

    _, tree, final_source, final_tactics = best
    return TrainResult(tree, final_source, final_tactics, converged, len(history), history,
                       agents.transcript, dict(agents.calls))
