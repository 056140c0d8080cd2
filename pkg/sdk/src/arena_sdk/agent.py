"""BaseAgent contract and the single-threaded serve loop.

Wire protocol (one JSON object per line, every reply flushed immediately):
  harness -> agent: {"type":"hello","protocol":1,"game":...,"seat":...,"config":{...}}
  agent -> harness: {"type":"ready","name":...}
  harness -> agent: {"type":"act","match":...,"step":...,"observation":...,
                     "action_mask":[...],"deadline_ms":...}
  agent -> harness: {"type":"action","step":...,"action":...}
  harness -> agent: {"type":"result","scores":[...]}, then {"type":"bye"}.

select_action returning None is encoded as action -1 (the no-action
sentinel for all-false masks). An exception inside select_action writes a
diagnostic to stderr and exits nonzero so the harness records a crash.
"""

from __future__ import annotations

import json
import operator
import sys
import traceback
from abc import ABC, abstractmethod
from typing import Any, List, Optional

NO_ACTION = -1


class BaseAgent(ABC):
    """Minimal interface every agent implements."""

    def __init__(self, name: str):
        self.name = name

    @abstractmethod
    def select_action(self, observation: Any, action_mask: List[bool]) -> Optional[int]:
        """Pick a legal action index, or None when no mask bit is true."""

    def on_hello(self, game: str, seat: int, config: dict) -> None:
        """Called on every (re-)handshake; override to reset per-match state."""

    def on_result(self, scores: List[float]) -> None:
        """Called with the final scores after each match; override freely."""


def _emit(message: dict) -> None:
    sys.stdout.write(json.dumps(message) + "\n")
    sys.stdout.flush()


def serve(agent: BaseAgent) -> None:
    """Answer protocol messages until stdin closes or a bye arrives."""
    for raw in sys.stdin:
        line = raw.strip()
        if not line:
            continue
        try:
            message = json.loads(line)
        except json.JSONDecodeError:
            continue  # tolerate garbage on the way in; never emit any
        if not isinstance(message, dict):
            continue
        kind = message.get("type")
        if kind == "hello":
            agent.on_hello(message.get("game", ""), message.get("seat", 0),
                           message.get("config", {}))
            _emit({"type": "ready", "name": agent.name})
        elif kind == "act":
            step = message.get("step")
            try:
                action = agent.select_action(message.get("observation"),
                                             message.get("action_mask", []))
                encoded = NO_ACTION if action is None else operator.index(action)
            except Exception:
                sys.stderr.write("select_action raised:\n" + traceback.format_exc())
                sys.stderr.flush()
                sys.exit(1)
            _emit({"type": "action", "step": step, "action": encoded})
        elif kind == "result":
            agent.on_result(message.get("scores", []))
        elif kind == "bye":
            return
