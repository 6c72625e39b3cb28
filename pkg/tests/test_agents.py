from pathlib import Path

import pytest

from conftest import FIXTURES
from treedrive.actions import Action
from treedrive.agents import (
    CoderFormatError,
    Critique,
    PlannerFormatError,
    ReplayChatClient,
    ReplayExhausted,
    SummarizerFormatError,
    TrainConfig,
    train,
)
from treedrive.agents.models import ReplyFormatError, parse_critique, parse_tactics
from treedrive.dsl import format_tree, load_policy, parse
from treedrive.dsl.ast import leaves
from treedrive.scene import DrivingTarget, RuleSet
from treedrive.sim import ScenarioConfig, read_flat_config

HAPPY = FIXTURES / "happy_path"
REPLIES = {p.stem: p.read_text() for p in HAPPY.glob("*.txt") if p.name != "script.txt"}
PLANNER_ADVICE = "prefer braking early"
CODER_ADVICE = "Check left_follow_gap"

SUM_CODER = """The tactics are fine but the tree never checks the gap behind in the left lane.
FAULT: coder
```advice_coder
Guard LANE_LEFT with left_follow_gap > 25 and brake when the lead is within 40 m.
```
"""
SUM_BOTH = """FAULT: both
```advice_planner
Add a tactic for dense traffic that prefers braking over lane changes.
```
```advice_coder
Guard every lane change with both gaps in the target lane.
```
"""
BROKEN_SYNTAX = """```policy
policy "broken" {
    if lead_gap < 20 {
        SLOWER
    }
}
```"""
BROKEN_FEATURE = """```policy
policy "broken" { if lead_distance < 20 { SLOWER } else { IDLE } }
```"""
DUPLICATE_TACTICS = """```tactic
name: Brake
priority: 1
usage: close lead
execution:
1. slow down
```
```tactic
name: brake
priority: 2
usage: closer lead
execution:
1. slow down more
```"""


def scenario():
    return ScenarioConfig.from_mapping(read_flat_config(HAPPY / "scenario.cfg"))


def run(script, extra=None, **cfg):
    replies = {**REPLIES, **(extra or {})}
    client = ReplayChatClient(replies, script)
    config = TrainConfig(**{"max_iterations": 5, **cfg})
    result = train(config, scenario(), RuleSet(), DrivingTarget("conservative"), client)
    return result, client


HAPPY_SCRIPT = ["plan_v1", "code_v1", "sum_rearend", "plan_v2", "code_v2"]


def test_fixture_script_file_matches():
    assert ReplayChatClient.from_dir(HAPPY).script == HAPPY_SCRIPT


def test_fixture_policies_behave_as_authored():
    # code_v2 is the shipped conservative tree under another name
    from treedrive.agents.models import extract_policy_source
    v2 = parse(extract_policy_source(REPLIES["code_v2"]))
    shipped = load_policy(Path(__file__).parents[1] / "src/treedrive/policies/conservative.dtp")
    assert v2.root == shipped.root
    v1 = parse(extract_policy_source(REPLIES["code_v1"]))
    assert Action.SLOWER in leaves(v1) and Action.LANE_LEFT in leaves(v1)


def test_happy_path_converges_in_two_iterations():
    result, client = run(HAPPY_SCRIPT)
    assert result.converged and result.iterations_used == 2
    assert result.calls == {"planner": 2, "coder": 2, "summarizer": 1}
    assert client.served == HAPPY_SCRIPT
    assert result.policy.name == "safe_following"
    assert result.tactics.revision == 2
    it1, it2 = result.iterations
    assert it1.collided_seeds and it1.fault == "planner"
    assert not it2.collided_seeds and all(t == 30.0 for t in it2.per_seed_times)
    tactic_names = [t.name for t in result.tactics.tactics]
    assert "Active Lane Change Operation" in tactic_names


def test_happy_path_advice_routing():
    result, _ = run(HAPPY_SCRIPT)
    tr = result.transcript
    assert all(PLANNER_ADVICE not in p for p in tr.prompts("planner", 1))
    assert any(PLANNER_ADVICE in p for p in tr.prompts("planner", 2))
    # fault=planner: coder advice is not forwarded, but the previous tree is
    assert all(CODER_ADVICE not in p for p in tr.prompts("coder"))
    assert any('policy "overtake_first"' in p for p in tr.prompts("coder", 2))
    # the summarizer saw the collision report
    assert "Collision report" in tr.prompts("summarizer", 1)[0]


def test_happy_path_is_deterministic():
    a, _ = run(HAPPY_SCRIPT)
    b, _ = run(HAPPY_SCRIPT)
    assert a.transcript_hash() == b.transcript_hash()
    assert format_tree(a.policy) == format_tree(b.policy)


def test_coder_fault_skips_replanning():
    result, client = run(["plan_v1", "code_v1", "sum_coder", "code_v2"], {"sum_coder": SUM_CODER})
    assert result.converged and result.calls == {"planner": 1, "coder": 2, "summarizer": 1}
    assert result.tactics.revision == 1
    assert any("Guard LANE_LEFT" in p for p in result.transcript.prompts("coder", 2))


def test_both_fault_routes_both():
    result, _ = run(["plan_v1", "code_v1", "sum_both", "plan_v2", "code_v2"],
                    {"sum_both": SUM_BOTH})
    tr = result.transcript
    assert result.converged
    assert any("dense traffic" in p for p in tr.prompts("planner", 2))
    assert any("Guard every lane change" in p for p in tr.prompts("coder", 2))


def test_convergence_on_first_iteration_never_summarizes():
    result, _ = run(["plan_v2", "code_v2"])
    assert result.converged and result.iterations_used == 1
    assert result.calls["summarizer"] == 0


def test_budget_stop_returns_best_so_far():
    result, client = run(["plan_v1", "code_v1"], max_iterations=1)
    assert not result.converged and result.iterations_used == 1
    assert result.policy.name == "overtake_first"
    assert result.calls["summarizer"] == 0  # no critique after the final iteration


def test_budget_stop_prefers_higher_mean_then_fewer_nodes():
    worse = '```policy\npolicy "floor_it" { FASTER }\n```'
    result, _ = run(["plan_v1", "code_v1", "sum_coder", "worse"],
                    {"sum_coder": SUM_CODER, "worse": worse}, max_iterations=2)
    means = [s.mean_survival for s in result.iterations]
    assert not result.converged
    assert means[0] > means[1]
    assert result.policy.name == "overtake_first"


def test_coder_retry_on_parse_then_success():
    result, _ = run(["plan_v2", "broken", "code_v2"], {"broken": BROKEN_SYNTAX})
    assert result.converged and result.iterations[0].coder_retries == 1
    retry = result.transcript.prompts("coder", 1)[-1]
    assert "missing 'else'" in retry and "^" in retry


def test_coder_retry_on_validation_error():
    result, _ = run(["plan_v2", "broken", "code_v2"], {"broken": BROKEN_FEATURE})
    assert result.converged
    assert "lead_distance" in result.transcript.prompts("coder", 1)[-1]


def test_coder_gives_up_after_retry_limit():
    with pytest.raises(CoderFormatError) as info:
        run(["plan_v2", "broken", "broken", "broken"], {"broken": BROKEN_SYNTAX})
    err = info.value
    assert err.attempts == 3 and err.module == "coder"
    assert len([e for e in err.transcript.entries if e.module == "coder"
                and e.role == "assistant"]) == 3


def test_retry_limit_is_total_attempts():
    with pytest.raises(CoderFormatError):
        run(["plan_v2", "broken", "code_v2"], {"broken": BROKEN_SYNTAX}, parse_retry_limit=1)


def test_planner_duplicate_names_are_reasked():
    result, _ = run(["dup", "plan_v2", "code_v2"], {"dup": DUPLICATE_TACTICS})
    assert result.converged
    assert "duplicate tactic name" in result.transcript.prompts("planner", 1)[-1]
    with pytest.raises(PlannerFormatError):
        run(["dup", "dup", "dup"], {"dup": DUPLICATE_TACTICS})


def test_summarizer_missing_advice_is_reasked():
    bad = "FAULT: coder\n```advice_coder\n\n```"
    result, _ = run(["plan_v1", "code_v1", "bad", "sum_coder", "code_v2"],
                    {"bad": bad, "sum_coder": SUM_CODER})
    assert result.converged
    assert "requires coder advice" in result.transcript.prompts("summarizer", 1)[-1]
    with pytest.raises(SummarizerFormatError):
        run(["plan_v1", "code_v1", "bad", "bad", "bad"], {"bad": bad})


def test_replay_exhaustion_is_reported():
    with pytest.raises(ReplayExhausted):
        run(["plan_v1", "code_v1"])


# -- reply parsers ---------------------------------------------------------

def test_parse_tactics_fields_and_order():
    ts = parse_tactics(REPLIES["plan_v1"], DrivingTarget(), 1)
    assert [t.priority for t in ts.ordered()] == [1, 2, 3]
    lane = ts.ordered()[0]
    assert lane.name == "Active Lane Change Operation"
    assert len(lane.execution) == 3 and lane.usage_conditions.startswith("the car ahead")
    again = parse_tactics(ts.render(), DrivingTarget(), 1)
    assert again.tactics == tuple(ts.ordered())


@pytest.mark.parametrize("reply,fragment", [
    ("no blocks here", "no ```tactic"),
    ("```tactic\nname: a\nusage: u\nexecution:\n1. x\n```", "missing 'priority:'"),
    ("```tactic\nname: a\npriority: high\nusage: u\nexecution:\n1. x\n```", "integer"),
    ("```tactic\nname: a\npriority: 1\nusage: u\n```", "at least one step"),
])
def test_parse_tactics_errors(reply, fragment):
    with pytest.raises(ReplyFormatError) as info:
        parse_tactics(reply, DrivingTarget(), 1)
    assert fragment in str(info.value)


def test_parse_critique():
    c = parse_critique(REPLIES["sum_rearend"])
    assert c.fault == "planner" and c.blames_planner and not c.blames_coder
    assert PLANNER_ADVICE in c.advice_planner and CODER_ADVICE in c.advice_coder
    assert parse_critique("**FAULT:** Both\n```advice_planner\na\n```\n```advice_coder\nb\n```"
                          ).fault == "both"
    with pytest.raises(ReplyFormatError):
        parse_critique("no verdict")
    with pytest.raises(ReplyFormatError):
        parse_critique("FAULT: nobody")
    with pytest.raises(ValueError):
        Critique("planner")


def test_train_config_from_mapping():
    cfg = TrainConfig.from_mapping(read_flat_config(HAPPY / "scenario.cfg"))
    assert cfg.max_iterations == 5 and cfg.seeds() == [100, 101, 102, 103, 104]
    assert TrainConfig.from_mapping({"validation_seeds": "7,8"}).seeds() == [7, 8]
    with pytest.raises(ValueError):
        TrainConfig(max_iterations=0)
