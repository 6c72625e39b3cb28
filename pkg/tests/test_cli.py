import json

import pytest

from conftest import FIXTURES
from treedrive.agents.client import ENV_ENDPOINT, ENV_MODEL
from treedrive.cli import main

BROKEN = 'policy "b" {\n    if lead_gap < 20 {\n        SLOWER\n    }\n}\n'


@pytest.fixture
def broken(tmp_path):
    p = tmp_path / "broken.dtp"
    p.write_text(BROKEN)
    return p


def run_dirs(root):
    return sorted(p for p in root.iterdir() if p.is_dir())


def test_check(capsys, broken, conservative_path):
    assert main(["check", str(broken)]) == 1
    err = capsys.readouterr().err
    assert "missing 'else'" in err and "^" in err
    assert main(["check", str(conservative_path)]) == 0


def test_check_semantic_error(tmp_path, capsys):
    p = tmp_path / "bad.dtp"
    p.write_text('policy "b" { if nope < 1 { IDLE } else { IDLE } }')
    assert main(["check", str(p)]) == 1
    assert "unknown feature 'nope'" in capsys.readouterr().out


def test_parse_prints_canonical_form(tmp_path, capsys):
    p = tmp_path / "p.dtp"
    p.write_text('policy "p" {if lead_gap<20{SLOWER}else{IDLE}}')
    assert main(["parse", str(p)]) == 0
    out = capsys.readouterr().out
    assert out.startswith('policy "p" {\n    if lead_gap < 20.0 {')
    p.write_text(out)
    assert main(["parse", str(p)]) == 0
    assert capsys.readouterr().out == out


def test_usage_errors(capsys, tmp_path):
    assert main([]) == 2
    assert main(["eval", "--bogus"]) == 2
    assert "usage:" in capsys.readouterr().err
    assert main(["check", str(tmp_path / "missing.dtp")]) == 2
    assert main(["--help"]) == 0


def test_eval(tmp_path, capsys, conservative_path):
    argv = ["eval", str(conservative_path), "--lanes", "4", "--density", "2.0", "--seeds", "3",
            "--out-dir", str(tmp_path)]
    assert main(argv) == 0
    out = capsys.readouterr().out
    assert "Average Driving Time" in out
    (run,) = run_dirs(tmp_path)
    lines = (run / "records.jsonl").read_text().splitlines()
    assert len(lines) == 3
    rec = json.loads(lines[0])
    assert list(rec) == ["label", "lane_count", "density", "seed", "survival_time", "collided",
                         "collided_with", "decisions", "trajectory_hash", "latencies_ns"]
    assert rec["lane_count"] == 4 and rec["density"] == 2.0


def test_eval_rejects_bad_input(tmp_path, broken, conservative_path):
    assert main(["eval", str(broken), "--out-dir", str(tmp_path)]) == 1
    assert main(["eval", str(conservative_path), "--lanes", "1", "--out-dir", str(tmp_path)]) == 2
    assert main(["eval", str(conservative_path), "--seeds", "0", "--out-dir", str(tmp_path)]) == 2
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("density = lots\n")
    assert main(["eval", str(conservative_path), "--config", str(cfg),
                 "--out-dir", str(tmp_path)]) == 2


def test_replay_is_deterministic(tmp_path, capsys, conservative_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for out in (a, b):
        assert main(["replay", str(conservative_path), "--seed", "7", "-o", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes() and a.stat().st_size > 0
    first = json.loads(a.read_text().splitlines()[0])
    assert first["id"] == 0 and "action" in first


def test_metrics_and_dot(tmp_path, capsys, conservative_path, aggressive_path):
    assert main(["metrics", str(conservative_path), str(aggressive_path)]) == 0
    out = capsys.readouterr().out
    assert "conservative" in out and "aggressive" in out
    dot = tmp_path / "t.dot"
    assert main(["export-dot", str(conservative_path), "-o", str(dot)]) == 0
    assert dot.read_text().startswith('digraph "conservative"')


def test_grid(tmp_path, capsys, conservative_path):
    assert main(["grid", str(conservative_path), "--seeds", "1", "--out-dir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "Normal" in out and "Extreme" in out
    (run,) = run_dirs(tmp_path)
    assert len((run / "records.jsonl").read_text().splitlines()) == 3


def test_train_with_replay(tmp_path, capsys):
    fx = FIXTURES / "happy_path"
    argv = ["train", "--config", str(fx / "scenario.cfg"), "--replay", str(fx),
            "--out-dir", str(tmp_path)]
    assert main(argv) == 0
    assert "converged: True after 2 iteration(s)" in capsys.readouterr().out
    (run,) = run_dirs(tmp_path)
    assert (run / "policy.dtp").read_text().startswith('policy "safe_following"')
    assert len((run / "iterations.jsonl").read_text().splitlines()) == 2
    assert main(["check", str(run / "policy.dtp")]) == 0


def test_train_format_failure_exits_1(tmp_path, capsys):
    fx = tmp_path / "fx"
    fx.mkdir()
    (fx / "junk.txt").write_text("no tactics here")
    (fx / "script.txt").write_text("junk\njunk\njunk\n")
    assert main(["train", "--replay", str(fx), "--out-dir", str(tmp_path / "runs")]) == 1
    assert "training aborted" in capsys.readouterr().err


def test_train_without_backend_is_usage_error(tmp_path, monkeypatch):
    monkeypatch.delenv(ENV_ENDPOINT, raising=False)
    monkeypatch.delenv(ENV_MODEL, raising=False)
    assert main(["train", "--out-dir", str(tmp_path)]) == 2
