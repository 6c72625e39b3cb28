"""Command-line interface.

Exit codes: 0 success, 1 policy/validation failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

from treedrive.dsl import (
    ParseError,
    PolicyError,
    export_graph,
    format_tree,
    parse,
    validate,
)
from treedrive.harness import (
    ExperimentGrid,
    evaluate,
    grid_report,
    summary_table,
    tree_report,
    write_records,
)
from treedrive.sim import (
    ConfigError,
    ScenarioConfig,
    TrajectoryRecorder,
    new_world,
    read_flat_config,
    run_episode,
)

EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 1, 2

logger = logging.getLogger("treedrive")


class _Invalid(Exception):
    """A policy that fails to parse or validate; message already rendered."""


def _read_policy(path: str, *, strict: bool = True):
    try:
        source = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("policy", str(exc)) from None
    try:
        tree = parse(source)
    except ParseError as exc:
        raise _Invalid(exc.render(path)) from None
    report = validate(tree)
    if strict and not report.ok:
        raise _Invalid(f"{path}: invalid policy\n{report.render()}")
    return tree, source, report


def _scenario(args) -> ScenarioConfig:
    values: dict = {}
    if getattr(args, "config", None):
        values.update(read_flat_config(args.config))
    base = ScenarioConfig.from_mapping(values)
    overrides = {
        "lane_count": args.lanes,
        "density": args.density,
        "road_length": args.road_length,
        "max_episode_time": args.max_time,
        "substeps_per_decision": args.substeps,
    }
    return replace(base, **{k: v for k, v in overrides.items() if v is not None})


def _seeds(args) -> list[int]:
    if args.seed_list:
        try:
            return [int(s) for s in args.seed_list.split(",")]
        except ValueError:
            raise ConfigError("seed-list", "expected comma-separated integers") from None
    if args.seeds < 1:
        raise ConfigError("seeds", "must be >= 1")
    return list(range(args.seeds))


def _run_dir(args, payload: dict) -> Path:
    digest = hashlib.sha256(json.dumps(payload, sort_keys=True, default=str).encode()).hexdigest()
    path = Path(args.out_dir) / f"{time.strftime('%Y%m%d-%H%M%S')}-{digest[:8]}"
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_parse(args) -> int:
    tree, _, _ = _read_policy(args.policy, strict=False)
    sys.stdout.write(format_tree(tree))
    return EXIT_OK


def cmd_check(args) -> int:
    tree, _, report = _read_policy(args.policy, strict=False)
    if report.issues:
        print(report.render())
    if not report.ok:
        print(f"{args.policy}: {len(report.errors)} error(s)")
        return EXIT_INVALID
    print(f"{args.policy}: ok ({len(report.warnings)} warning(s))")
    return EXIT_OK


def cmd_metrics(args) -> int:
    rows = []
    for path in args.policies:
        tree, _, _ = _read_policy(path, strict=False)
        rows.append((Path(path).stem, tree))
    sys.stdout.write(tree_report(rows))
    return EXIT_OK


def cmd_export_dot(args) -> int:
    tree, _, _ = _read_policy(args.policy, strict=False)
    dot = export_graph(tree)
    if args.output:
        Path(args.output).write_text(dot, encoding="utf-8")
    else:
        sys.stdout.write(dot)
    return EXIT_OK


def cmd_eval(args) -> int:
    tree, source, _ = _read_policy(args.policy)
    scenario = _scenario(args)
    seeds = _seeds(args)
    summary = evaluate(tree, scenario, seeds, label=Path(args.policy).stem)
    run = _run_dir(args, {"cmd": "eval", "scenario": scenario.to_mapping(), "seeds": seeds,
                          "policy": source})
    write_records(summary.records, run / "records.jsonl")
    sys.stdout.write(summary_table([(Path(args.policy).stem, summary)]))
    print(f"per-seed times: {', '.join(f'{t:g}' for t in summary.per_seed_times)}")
    print(f"mean latency {summary.mean_decision_latency:.3e} s/command, "
          f"p99 {summary.p99_decision_latency:.3e}")
    print(f"records written to {run / 'records.jsonl'}")
    return EXIT_OK


def cmd_grid(args) -> int:
    tree, source, _ = _read_policy(args.policy)
    seeds = _seeds(args)
    base = ScenarioConfig.from_mapping(read_flat_config(args.config)) if args.config \
        else ScenarioConfig()
    run = _run_dir(args, {"cmd": "grid", "base": base.to_mapping(), "seeds": seeds,
                          "policy": source})
    table, _ = grid_report(tree, ExperimentGrid(), seeds, base, run / "records.jsonl")
    (run / "table.txt").write_text(table, encoding="utf-8")
    sys.stdout.write(table)
    print(f"records written to {run / 'records.jsonl'}")
    return EXIT_OK


def cmd_replay(args) -> int:
    tree, source, _ = _read_policy(args.policy)
    scenario = replace(_scenario(args), seed=args.seed)
    recorder = TrajectoryRecorder()
    ep = run_episode(new_world(scenario), tree, recorder)
    if args.output:
        out = Path(args.output)
    else:
        out = _run_dir(args, {"cmd": "replay", "scenario": scenario.to_mapping(),
                              "policy": source}) / "trajectory.jsonl"
    recorder.write(out)
    status = f"collided with vehicle {ep.collided_with}" if ep.collided else "no collision"
    print(f"seed {args.seed}: survived {ep.survival_time:g} s, {status}")
    print(f"trajectory hash {ep.trajectory_hash}")
    print(f"trajectory written to {out}")
    return EXIT_OK


def cmd_train(args) -> int:
    from treedrive.agents import (
        AgentFormatError,
        ChatError,
        HTTPChatClient,
        RecordingChatClient,
        ReplayChatClient,
        TrainConfig,
        train,
    )
    from treedrive.scene import DrivingTarget, RuleSet

    values = read_flat_config(args.config) if args.config else {}
    scenario = _scenario(args)
    train_cfg = TrainConfig.from_mapping(values)
    style = args.style or values.get("style", "conservative")
    target = DrivingTarget(style, values.get("target_description", ""))
    rules = RuleSet()
    if values.get("rules_file"):
        lines = Path(values["rules_file"]).read_text(encoding="utf-8").splitlines()
        rules = RuleSet(tuple(ln.strip() for ln in lines if ln.strip()))

    try:
        if args.replay:
            client = ReplayChatClient.from_dir(args.replay)
        else:
            client = HTTPChatClient.from_env(values)
    except ChatError as exc:
        raise ConfigError("backend", str(exc)) from None
    if args.record:
        client = RecordingChatClient(client, args.record)

    run = _run_dir(args, {"cmd": "train", "config": values, "scenario": scenario.to_mapping(),
                          "style": style, "replay": args.replay})
    try:
        result = train(train_cfg, scenario, rules, target, client)
    except AgentFormatError as exc:
        if exc.transcript is not None:
            (run / "transcript.jsonl").write_text("\n".join(exc.transcript.lines()) + "\n",
                                                  encoding="utf-8")
        print(f"training aborted: {exc}", file=sys.stderr)
        print(f"transcript written to {run / 'transcript.jsonl'}", file=sys.stderr)
        return EXIT_INVALID
    except ChatError as exc:
        print(f"training aborted: {exc}", file=sys.stderr)
        return EXIT_INVALID

    (run / "policy.dtp").write_text(format_tree(result.policy), encoding="utf-8")
    (run / "transcript.jsonl").write_text("\n".join(result.transcript.lines()) + "\n",
                                          encoding="utf-8")
    with open(run / "iterations.jsonl", "w", encoding="utf-8") as fh:
        for s in result.iterations:
            fh.write(json.dumps(s.__dict__) + "\n")
    sys.stdout.write(tree_report([(f"{style}-{scenario.density:g}", result.policy)]))
    print(f"converged: {result.converged} after {result.iterations_used} iteration(s)")
    print(f"artifacts written to {run}")
    return EXIT_OK


def _add_scenario_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("scenario")
    g.add_argument("--config", help="flat key = value config file")
    g.add_argument("--lanes", type=int, help="number of lanes")
    g.add_argument("--density", type=float, help="traffic density")
    g.add_argument("--road-length", type=float, help="spawn window length in m")
    g.add_argument("--max-time", type=float, help="episode cap in s")
    g.add_argument("--substeps", type=int, help="integration sub-steps per decision")


def _add_seed_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seeds", type=int, default=20, help="evaluate seeds 0..N-1 (default 20)")
    p.add_argument("--seed-list", help="explicit comma-separated seeds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treedrive", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a policy and print it in canonical form")
    p.add_argument("policy")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("check", help="parse and validate a policy")
    p.add_argument("policy")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("metrics", help="node, branch and depth counts for policies")
    p.add_argument("policies", nargs="+")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("export-dot", help="write the policy tree as Graphviz DOT")
    p.add_argument("policy")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_export_dot)

    p = sub.add_parser("eval", help="evaluate a policy over seeds on one scenario")
    p.add_argument("policy")
    _add_scenario_args(p)
    _add_seed_args(p)
    p.add_argument("--out-dir", default="runs")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("grid", help="evaluate on the Normal/Hard/Extreme grid")
    p.add_argument("policy")
    p.add_argument("--config", help="base scenario config file")
    _add_seed_args(p)
    p.add_argument("--out-dir", default="runs")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("replay", help="re-run one seed and dump its trajectory")
    p.add_argument("policy")
    p.add_argument("--seed", type=int, required=True)
    _add_scenario_args(p)
    p.add_argument("-o", "--output", help="trajectory file (default: inside a new run dir)")
    p.add_argument("--out-dir", default="runs")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("train", help="run the plan/code/summarize loop")
    _add_scenario_args(p)
    p.add_argument("--style", choices=("conservative", "aggressive"))
    backend = p.add_mutually_exclusive_group()
    backend.add_argument("--replay", metavar="DIR", help="serve replies from a fixture directory")
    backend.add_argument("--record", metavar="DIR", help="save live replies as fixtures")
    p.add_argument("--out-dir", default="runs")
    p.set_defaults(func=cmd_train)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except _Invalid as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except PolicyError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
