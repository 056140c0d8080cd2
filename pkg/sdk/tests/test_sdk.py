"""SDK conformance: serve loop over the wire, runner entry, source checks."""

from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from arena_sdk import BaseAgent, source_check
from arena_sdk.runner import load_agent_class

EXAMPLES = Path(__file__).resolve().parents[1] / "src" / "arena_sdk" / "examples"
RANDOM_AGENT = EXAMPLES / "random_agent.py"


def runner_cmd(source: Path) -> list[str]:
    return [sys.executable, "-m", "arena_sdk.runner", str(source)]


def drive(source: Path, messages: list[dict], timeout: float = 10.0):
    """Feed protocol lines to a runner process; return (reply lines, rc, stderr)."""
    payload = "".join(json.dumps(m) + "\n" for m in messages)
    proc = subprocess.run(runner_cmd(source), input=payload, capture_output=True,
                          text=True, timeout=timeout)
    return proc.stdout, proc.returncode, proc.stderr


HELLO = {"type": "hello", "protocol": 1, "game": "tictactoe", "seat": 0, "config": {}}


def act(step: int, mask: list[bool], observation=None) -> dict:
    return {"type": "act", "match": "m1", "step": step,
            "observation": observation or {"cells": [0] * 9, "to_act": 0},
            "action_mask": mask, "deadline_ms": 5000}


def test_handshake_and_actions_are_exact_json_lines():
    stdout, rc, _ = drive(RANDOM_AGENT, [
        HELLO,
        act(0, [False, True, False]),
        act(1, [True] * 9),
        {"type": "result", "scores": [1.0, -1.0]},
        {"type": "bye"},
    ])
    assert rc == 0
    lines = stdout.split("\n")
    assert lines[-1] == ""  # every reply ends with exactly one newline
    replies = [json.loads(line) for line in lines[:-1]]
    assert replies[0] == {"type": "ready", "name": "RandomAgent"}
    assert replies[1] == {"type": "action", "step": 0, "action": 1}  # forced choice
    assert replies[2]["type"] == "action" and replies[2]["step"] == 2 - 1
    assert 0 <= replies[2]["action"] < 9
    assert len(replies) == 3  # result and bye produce no output


def test_empty_mask_returns_sentinel():
    stdout, rc, _ = drive(RANDOM_AGENT, [HELLO, act(0, [False, False]), {"type": "bye"}])
    assert rc == 0
    reply = json.loads(stdout.splitlines()[1])
    assert reply == {"type": "action", "step": 0, "action": -1}


def test_rehandshake_mid_stream():
    hello2 = dict(HELLO, seat=1)
    stdout, rc, _ = drive(RANDOM_AGENT, [HELLO, hello2, act(0, [True, True]),
                                         {"type": "bye"}])
    assert rc == 0
    replies = [json.loads(line) for line in stdout.splitlines()]
    assert [r["type"] for r in replies] == ["ready", "ready", "action"]


def test_exception_in_select_action_exits_nonzero(tmp_path):
    source = tmp_path / "exploder.py"
    source.write_text(
        "from arena_sdk import BaseAgent\n\n"
        "class Exploder(BaseAgent):\n"
        "    def select_action(self, observation, action_mask):\n"
        "        raise RuntimeError('scripted failure')\n"
    )
    stdout, rc, stderr = drive(source, [HELLO, act(0, [True]), {"type": "bye"}])
    assert rc == 1
    assert "scripted failure" in stderr
    assert json.loads(stdout.splitlines()[0])["type"] == "ready"


def test_runner_rejects_sources_without_agent(tmp_path):
    source = tmp_path / "empty.py"
    source.write_text("x = 1\n")
    _, rc, stderr = drive(source, [HELLO])
    assert rc == 1
    assert "BaseAgent" in stderr


def test_runner_picks_last_agent_class(tmp_path):
    source = tmp_path / "two.py"
    source.write_text(
        "from arena_sdk import BaseAgent\n\n"
        "class First(BaseAgent):\n"
        "    def select_action(self, observation, action_mask):\n"
        "        return 0\n\n"
        "class Second(BaseAgent):\n"
        "    def select_action(self, observation, action_mask):\n"
        "        return 1\n"
    )
    assert load_agent_class(str(source)).__name__ == "Second"


def test_garbage_input_is_ignored(tmp_path):
    payload = "not json at all\n" + json.dumps(HELLO) + "\n" + json.dumps({"type": "bye"}) + "\n"
    proc = subprocess.run(runner_cmd(RANDOM_AGENT), input=payload,
                          capture_output=True, text=True, timeout=10)
    assert proc.returncode == 0
    assert json.loads(proc.stdout.splitlines()[0])["type"] == "ready"


def test_non_integer_action_is_a_crash(tmp_path):
    source = tmp_path / "floaty.py"
    source.write_text(
        "from arena_sdk import BaseAgent\n\n"
        "class Floaty(BaseAgent):\n"
        "    def select_action(self, observation, action_mask):\n"
        "        return 1.5\n"
    )
    _, rc, stderr = drive(source, [HELLO, act(0, [True, True]), {"type": "bye"}])
    assert rc == 1
    assert "select_action raised" in stderr


# -- source_check -------------------------------------------------------------

GOOD = """\
from arena_sdk import BaseAgent

class Mine(BaseAgent):
    def __init__(self, name: str):
        super().__init__(name)

    def select_action(self, observation, action_mask):
        return next((i for i, b in enumerate(action_mask) if b), None)
"""


def kinds(report):
    return {f.kind for f in report.findings}


def test_source_check_good():
    report = source_check(GOOD)
    assert report.ok and not report.findings


def test_source_check_syntax_error_line_number():
    report = source_check("x = 1\ndef broken(:\n")
    assert not report.ok
    finding = report.findings[0]
    assert finding.kind == "parse-error"
    assert finding.line == 2


def test_source_check_missing_select_action():
    report = source_check(GOOD.replace("select_action", "choose"))
    assert not report.ok
    assert "missing-select-action" in kinds(report)


def test_source_check_bad_signatures():
    report = source_check(GOOD.replace("(self, observation, action_mask)", "(self)"))
    assert "bad-select-action-signature" in kinds(report)
    report = source_check(GOOD.replace("def __init__(self, name: str):",
                                       "def __init__(self):"))
    assert "bad-constructor" in kinds(report)


def test_source_check_denylisted_imports():
    assert "denylisted-import" in kinds(source_check("import socket\n" + GOOD))
    assert "denylisted-import" in kinds(source_check(
        GOOD + "\nfrom subprocess import run\n"))
    custom = source_check("import numpy\n" + GOOD, denylist=frozenset({"numpy"}))
    assert "denylisted-import" in kinds(custom)


def test_source_check_no_agent_class():
    report = source_check("x = 1\n")
    assert "no-agent-class" in kinds(report)


def test_source_check_inherited_constructor_ok():
    source = (
        "from arena_sdk import BaseAgent\n\n"
        "class Slim(BaseAgent):\n"
        "    def select_action(self, observation, action_mask):\n"
        "        return None\n"
    )
    assert source_check(source).ok


def test_source_check_one_conforming_class_suffices():
    extra = GOOD + (
        "\nclass Helper(BaseAgent):\n"
        "    def select_action(self):\n"  # malformed, but Mine conforms
        "        return None\n"
    )
    assert source_check(extra).ok
