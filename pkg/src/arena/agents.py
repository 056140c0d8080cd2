"""Agent handles: in-process baselines and sandboxed subprocess agents.

A handle answers one decision request at a time. Builtin agents run trusted
reference policies in-process (recorded latency 0.0, no deadline enforcement);
subprocess agents speak newline-delimited JSON over stdin/stdout with a wall
clock deadline per decision, a memory cap, a scrubbed environment, and a
private scratch directory. Agent failures never raise out of the decision
path: they come back as DecisionOutcome failures for the runner to convert
into forfeits.

Wire protocol, one JSON object per line:
  harness -> agent: {"type":"hello","protocol":1,"game":...,"seat":...,"config":{...}}
  agent -> harness: {"type":"ready","name":...}
  harness -> agent: {"type":"act","match":...,"step":...,"observation":...,
                     "action_mask":[...],"deadline_ms":...}
  agent -> harness: {"type":"action","step":...,"action":...}
  harness -> agent: {"type":"result","scores":[...]}, {"type":"bye"} at shutdown.
Any other line, wrong step echo, or non-integer action is a protocol error.
Action -1 is the "no action" sentinel for all-false masks. stderr is captured
to a per-agent log file.
"""

from __future__ import annotations

import json
import os
import queue
import random
import subprocess
import sys
import tempfile
import threading
import time
from dataclasses import dataclass
from typing import Any, Sequence

from arena.engine import (
    ActionMask,
    ConfigurationError,
    GameDescriptor,
    Observation,
    ResourceLimits,
    UsageError,
)
from arena.games.board import SNAKE_DIRS, TTT_LINES, _ttt_minimax, reversi_flips
from arena.games.puzzle import MAZE_DIRS, hanoi_optimal, slide_2048, solve_sudoku

PROTOCOL_VERSION = 1
NO_ACTION_SENTINEL = -1


@dataclass(frozen=True)
class DecisionOutcome:
    """One decision: an action, the no-action sentinel (both None), or a failure."""

    action: int | None
    failure: str | None  # timeout | crash | protocol_error | illegal_action
    latency_seconds: float

    def __post_init__(self) -> None:
        if self.action is not None and self.failure is not None:
            raise UsageError("decision cannot carry both an action and a failure")


def _ok(action: int | None, latency: float) -> DecisionOutcome:
    return DecisionOutcome(action=action, failure=None, latency_seconds=latency)


def _fail(reason: str, latency: float) -> DecisionOutcome:
    return DecisionOutcome(action=None, failure=reason, latency_seconds=latency)


class AgentSpawnError(Exception):
    """Process could not be started or did not complete the handshake."""


class AgentHandle:
    """Base decision source; one request in flight at a time."""

    kind = "builtin"

    def __init__(self, agent_id: str):
        self.agent_id = agent_id
        self.consecutive_failures = 0
        self.withdrawn = False
        self.withdrawal_cause = ""
        self._lock = threading.Lock()

    def begin_match(self, match_id: str, seat: int, descriptor: GameDescriptor) -> None:
        raise NotImplementedError

    def request_action(
        self, observation: Observation, mask: ActionMask, deadline_seconds: float
    ) -> DecisionOutcome:
        raise NotImplementedError

    def finish_match(self, scores: Sequence[float]) -> None:
        pass

    def close(self) -> None:
        pass

    def withdraw(self, cause: str = "crash") -> None:
        self.withdrawn = True
        self.withdrawal_cause = self.withdrawal_cause or cause

    def _track(self, outcome: DecisionOutcome) -> DecisionOutcome:
        if outcome.failure is None:
            self.consecutive_failures = 0
        else:
            self.consecutive_failures += 1
        return outcome


def request_action(
    handle: AgentHandle, observation: Observation, mask: ActionMask, deadline_seconds: float
) -> DecisionOutcome:
    """Ask a handle for a decision; failures are data, never exceptions."""
    return handle.request_action(observation, mask, deadline_seconds)


# ---------------------------------------------------------------------------
# Builtin agents
# ---------------------------------------------------------------------------


class Policy:
    """In-process decision rule over observation payloads."""

    def begin(self, seat: int, descriptor: GameDescriptor, match_id: str = "") -> None:
        pass

    def select(self, payload: dict[str, Any], mask: tuple[bool, ...]) -> int | None:
        raise NotImplementedError


class BuiltinAgent(AgentHandle):
    kind = "builtin"

    def __init__(self, agent_id: str, policy: Policy):
        super().__init__(agent_id)
        self.policy = policy

    def begin_match(self, match_id: str, seat: int, descriptor: GameDescriptor) -> None:
        with self._lock:
            self.policy.begin(seat, descriptor, match_id)

    def request_action(self, observation, mask, deadline_seconds) -> DecisionOutcome:
        if self.withdrawn:
            raise UsageError(f"{self.agent_id} was withdrawn and answers no further requests")
        with self._lock:
            try:
                action = self.policy.select(observation.payload, mask.bits)
            except Exception:
                return self._track(_fail("crash", 0.0))
            return self._track(_ok(action, 0.0))


class RandomPolicy(Policy):
    def __init__(self, seed: int):
        self.seed = seed
        self.rng = random.Random(seed)

    def begin(self, seat, descriptor, match_id=""):
        # Per-match stream: decisions depend only on (seed, match), never on
        # the order matches execute in, so parallel runs stay reproducible.
        self.rng = random.Random(f"{self.seed}:{match_id}:{seat}")

    def select(self, payload, mask):
        legal = [i for i, b in enumerate(mask) if b]
        if not legal:
            return None
        return self.rng.choice(legal)


def builtin_random(seed: int, agent_id: str = "") -> AgentHandle:
    """Uniform choice among legal actions from a private seeded RNG."""
    return BuiltinAgent(agent_id or f"random-{seed}", RandomPolicy(seed))


class TttGreedyPolicy(Policy):
    """Win if possible, block an immediate loss, otherwise play at random."""

    def __init__(self, seed: int):
        self.seed = seed
        self.rng = random.Random(seed)
        self.seat = 0

    def begin(self, seat, descriptor, match_id=""):
        self.seat = seat
        self.rng = random.Random(f"{self.seed}:{match_id}:{seat}")

    def select(self, payload, mask):
        legal = [i for i, b in enumerate(mask) if b]
        if not legal:
            return None
        cells = payload["cells"]
        me, opp = self.seat + 1, 2 - self.seat
        for mark in (me, opp):  # winning move first, then block
            for move in legal:
                trial = list(cells)
                trial[move] = mark
                if any(trial[a] == trial[b] == trial[c] == mark for a, b, c in TTT_LINES):
                    return move
        return self.rng.choice(legal)


def builtin_greedy(game_id: str, seed: int = 0, agent_id: str = "") -> AgentHandle:
    if game_id != "tictactoe":
        raise ConfigurationError(f"no greedy baseline for {game_id!r}")
    return BuiltinAgent(agent_id or f"greedy-{game_id}", TttGreedyPolicy(seed))


class TttMinimaxPolicy(Policy):
    def begin(self, seat, descriptor, match_id=""):
        self.seat = seat

    def select(self, payload, mask):
        legal = [i for i, b in enumerate(mask) if b]
        if not legal:
            return None
        cells = tuple(payload["cells"])
        best_move, best_value = legal[0], -2
        for move in legal:
            child = cells[:move] + (self.seat + 1,) + cells[move + 1:]
            value = -_ttt_minimax(child, 1 - self.seat)
            if value > best_value:
                best_move, best_value = move, value
        return best_move


class Connect4AlphaBetaPolicy(Policy):
    """Depth-6 negamax with window scoring and center-first move ordering."""

    DEPTH = 6
    ORDER = (3, 2, 4, 1, 5, 0, 6)
    _WINDOWS: list[tuple[int, ...]] | None = None

    def begin(self, seat, descriptor, match_id=""):
        self.seat = seat

    @classmethod
    def windows(cls) -> list[tuple[int, ...]]:
        if cls._WINDOWS is None:
            wins = []
            for r in range(6):
                for c in range(7):
                    for dr, dc in ((0, 1), (1, 0), (1, 1), (1, -1)):
                        rr, cc = r + 3 * dr, c + 3 * dc
                        if 0 <= rr < 6 and 0 <= cc < 7:
                            wins.append(tuple((r + k * dr) * 7 + (c + k * dc) for k in range(4)))
            cls._WINDOWS = wins
        return cls._WINDOWS

    def _evaluate(self, cells: list[int], me: int) -> float:
        opp = 3 - me
        score = 0.0
        for w in self.windows():
            marks = [cells[i] for i in w]
            mine, theirs = marks.count(me), marks.count(opp)
            if theirs == 0 and mine:
                score += (0, 1, 8, 64)[mine]
            elif mine == 0 and theirs:
                score -= (0, 1, 8, 64)[theirs]
        score += sum(3 for r in range(6) if cells[r * 7 + 3] == me)
        return score

    def _drop(self, cells: list[int], col: int, mark: int) -> int | None:
        for r in range(5, -1, -1):
            if cells[r * 7 + col] == 0:
                cells[r * 7 + col] = mark
                return r
        return None

    def _wins_at(self, cells: list[int], r: int, c: int, mark: int) -> bool:
        for dr, dc in ((0, 1), (1, 0), (1, 1), (1, -1)):
            count = 1
            for sign in (1, -1):
                rr, cc = r + dr * sign, c + dc * sign
                while 0 <= rr < 6 and 0 <= cc < 7 and cells[rr * 7 + cc] == mark:
                    count += 1
                    rr += dr * sign
                    cc += dc * sign
            if count >= 4:
                return True
        return False

    def _search(self, cells: list[int], mark: int, depth: int, alpha: float, beta: float) -> float:
        legal = [c for c in self.ORDER if cells[c] == 0]
        if not legal:
            return 0.0
        if depth == 0:
            return self._evaluate(cells, mark)
        for col in legal:
            row = self._drop(cells, col, mark)
            assert row is not None
            if self._wins_at(cells, row, col, mark):
                cells[row * 7 + col] = 0
                return 100_000.0 + depth
            value = -self._search(cells, 3 - mark, depth - 1, -beta, -alpha)
            cells[row * 7 + col] = 0
            if value >= beta:
                return value
            alpha = max(alpha, value)
        return alpha

    def select(self, payload, mask):
        legal = [c for c in self.ORDER if mask[c]]
        if not legal:
            return None
        cells = list(payload["cells"])
        me = self.seat + 1
        best_move, best_value = legal[0], -float("inf")
        for col in legal:
            row = self._drop(cells, col, me)
            assert row is not None
            if self._wins_at(cells, row, col, me):
                cells[row * 7 + col] = 0
                return col
            value = -self._search(cells, 3 - me, self.DEPTH - 1, -float("inf"), float("inf"))
            cells[row * 7 + col] = 0
            if value > best_value:
                best_move, best_value = col, value
        return best_move


class ReversiMobilityPolicy(Policy):
    CORNERS = (0, 7, 56, 63)

    def begin(self, seat, descriptor, match_id=""):
        self.seat = seat

    def _mobility(self, cells: tuple[int, ...], seat: int) -> int:
        return sum(1 for i in range(64) if cells[i] == 0 and reversi_flips(cells, seat, i))

    def select(self, payload, mask):
        legal = [i for i, b in enumerate(mask) if b]
        if not legal:
            return None
        if legal == [64]:
            return 64
        cells = tuple(payload["cells"])
        best_move, best_value = None, -float("inf")
        for move in legal:
            if move == 64:
                continue
            flips = reversi_flips(cells, self.seat, move)
            after = list(cells)
            after[move] = self.seat + 1
            for i in flips:
                after[i] = self.seat + 1
            after_t = tuple(after)
            value = self._mobility(after_t, self.seat) - self._mobility(after_t, 1 - self.seat)
            if move in self.CORNERS:
                value += 100
            if value > best_value:
                best_move, best_value = move, value
        return best_move


class SnakeGreedyPolicy(Policy):
    """Avoid walls and bodies; among safe moves head toward the food."""

    def begin(self, seat, descriptor, match_id=""):
        self.seat = seat

    def select(self, payload, mask):
        legal = [i for i, b in enumerate(mask) if b]
        if not legal:
            return None
        n = payload["grid"]
        me = payload["snakes"][self.seat]["body"]
        head = tuple(me[0])
        occupied = {tuple(p) for s in payload["snakes"] for p in s["body"]}
        food = tuple(payload["food"])
        scored = []
        for a in legal:
            dr, dc = SNAKE_DIRS[a]
            target = (head[0] + dr, head[1] + dc)
            safe = 0 <= target[0] < n and 0 <= target[1] < n and target not in occupied
            dist = abs(target[0] - food[0]) + abs(target[1] - food[1])
            scored.append((not safe, dist, a))
        scored.sort()
        return scored[0][2]


class HoldemCallAnyPolicy(Policy):
    def select(self, payload, mask):
        for action in (1, 3, 0):
            if mask[action]:
                return action
        legal = [i for i, b in enumerate(mask) if b]
        return legal[0] if legal else None


class SudokuBacktrackPolicy(Policy):
    """Solve the visible grid once, then replay the solution cell by cell."""

    def begin(self, seat, descriptor, match_id=""):
        self._solutions: dict[tuple[int, ...], list[int] | None] = {}

    def select(self, payload, mask):
        grid = tuple(payload["grid"])
        if grid not in self._solutions:
            solution, count = solve_sudoku(list(grid))
            self._solutions = {grid: solution if count >= 1 else None}
        solution = self._solutions[grid]
        if solution is None:
            legal = [i for i, b in enumerate(mask) if b]
            return legal[0] if legal else None
        for cell in range(81):
            if grid[cell] == 0:
                r, c = divmod(cell, 9)
                action = r * 81 + c * 9 + (solution[cell] - 1)
                if mask[action]:
                    return action
        return None


class Greedy2048Policy(Policy):
    def select(self, payload, mask):
        legal = [i for i, b in enumerate(mask) if b]
        if not legal:
            return None
        board = tuple(payload["board"])
        gains = [(slide_2048(board, a)[1], -a) for a in legal]
        best = max(zip(gains, legal))
        return best[1]


class HanoiOptimalPolicy(Policy):
    def begin(self, seat, descriptor, match_id=""):
        self.moves: list[int] | None = None
        self.cursor = 0

    def select(self, payload, mask):
        if not any(mask):
            return None
        n = payload["n"]
        pegs = payload["pegs"]
        if self.moves is None:
            if pegs[0] == list(range(n, 0, -1)) and not pegs[1] and not pegs[2]:
                self.moves = hanoi_optimal(n)
                self.cursor = 0
            else:  # not at the canonical start; fall back to first legal
                return next(i for i, b in enumerate(mask) if b)
        if self.cursor >= len(self.moves):
            return next(i for i, b in enumerate(mask) if b)
        move = self.moves[self.cursor]
        self.cursor += 1
        return move


class MazeBfsPolicy(Policy):
    def select(self, payload, mask):
        legal = [i for i, b in enumerate(mask) if b]
        if not legal:
            return None
        if "grid" not in payload:  # partial visibility: no global plan
            return legal[0]
        w, h = payload["w"], payload["h"]
        grid = payload["grid"]
        pos, goal = tuple(payload["pos"]), tuple(payload["exit"])
        if pos == goal:
            return legal[0]
        from collections import deque

        parent: dict[tuple[int, int], tuple[tuple[int, int], int]] = {}
        seen = {pos}
        frontier = deque([pos])
        while frontier:
            cur = frontier.popleft()
            if cur == goal:
                break
            for a, (dr, dc) in enumerate(MAZE_DIRS):
                nxt = (cur[0] + dr, cur[1] + dc)
                if (0 <= nxt[0] < h and 0 <= nxt[1] < w and grid[nxt[0] * w + nxt[1]]
                        and nxt not in seen):
                    seen.add(nxt)
                    parent[nxt] = (cur, a)
                    frontier.append(nxt)
        if goal not in parent:
            return legal[0]
        node, action = goal, -1
        while node != pos:
            node, action = parent[node]
        return action


_REFERENCE_POLICIES = {
    "tictactoe": TttMinimaxPolicy,
    "connect4": Connect4AlphaBetaPolicy,
    "reversi": ReversiMobilityPolicy,
    "snake": SnakeGreedyPolicy,
    "holdem": HoldemCallAnyPolicy,
    "sudoku": SudokuBacktrackPolicy,
    "2048": Greedy2048Policy,
    "hanoi": HanoiOptimalPolicy,
    "maze": MazeBfsPolicy,
}


def builtin_reference(game_id: str, agent_id: str = "") -> AgentHandle:
    """Deterministic oracle-strength (or at least sane) baseline per game."""
    try:
        policy_cls = _REFERENCE_POLICIES[game_id]
    except KeyError:
        raise ConfigurationError(f"no reference baseline for {game_id!r}") from None
    return BuiltinAgent(agent_id or f"reference-{game_id}", policy_cls())


# ---------------------------------------------------------------------------
# Subprocess agents
# ---------------------------------------------------------------------------


def _scrubbed_env(scratch_dir: str) -> dict[str, str]:
    """Minimal child environment: no inherited credentials or config."""
    return {
        "PATH": os.environ.get("PATH", "/usr/local/bin:/usr/bin:/bin"),
        "HOME": scratch_dir,
        "TMPDIR": scratch_dir,
        "LANG": "C.UTF-8",
        "PYTHONUNBUFFERED": "1",
    }


class SubprocessAgent(AgentHandle):
    kind = "subprocess"

    def __init__(
        self,
        agent_id: str,
        command: Sequence[str],
        limits: ResourceLimits,
        game_id: str = "",
        config: dict[str, Any] | None = None,
        scratch_root: str | None = None,
    ):
        super().__init__(agent_id)
        self.command = list(command)
        self.limits = limits
        # Neutral, unpredictable directory name: confinement relies on other
        # agents being unable to guess it (OS-level sandboxing is pluggable).
        self.scratch_dir = tempfile.mkdtemp(dir=scratch_root)
        os.chmod(self.scratch_dir, 0o700)
        self.stderr_path = os.path.join(self.scratch_dir, "stderr.log")
        self._stderr_file = open(self.stderr_path, "ab")
        self._lines: queue.Queue[tuple[float, str] | None] = queue.Queue()
        self._step = 0
        self._match_id = ""
        self._dead: str | None = None
        self.name = ""

        preexec = None
        if sys.platform.startswith("linux"):
            mem = limits.memory_bytes

            def preexec():  # runs in the child before exec
                import resource

                resource.setrlimit(resource.RLIMIT_AS, (mem, mem))

        try:
            self.proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=self._stderr_file,
                cwd=self.scratch_dir,
                env=_scrubbed_env(self.scratch_dir),
                text=True,
                bufsize=1,
                preexec_fn=preexec,
            )
        except OSError as exc:
            self._stderr_file.close()
            raise AgentSpawnError(f"could not start {self.command}: {exc}") from exc
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        failure = self._handshake(game_id, config or {}, seat=0)
        if failure is not None:
            self.close()
            raise AgentSpawnError(f"handshake failed for {agent_id}: {failure}")

    # -- plumbing ----------------------------------------------------------

    def _read_loop(self) -> None:
        try:
            for line in self.proc.stdout:  # type: ignore[union-attr]
                self._lines.put((time.perf_counter(), line))
        except ValueError:  # stream closed mid-read
            pass
        self._lines.put(None)

    def _send(self, message: dict[str, Any]) -> bool:
        try:
            assert self.proc.stdin is not None
            self.proc.stdin.write(json.dumps(message) + "\n")
            self.proc.stdin.flush()
            return True
        except (OSError, ValueError, AssertionError):
            return False

    def _next_line(self, timeout: float) -> tuple[float, str] | None | str:
        """A (time, line) pair, None on EOF, or "timeout"."""
        try:
            item = self._lines.get(timeout=max(0.0, timeout))
        except queue.Empty:
            return "timeout"
        return item

    def _handshake(self, game_id: str, config: dict[str, Any], seat: int) -> str | None:
        """Send hello and await ready; returns a failure reason or None."""
        hello = {
            "type": "hello", "protocol": PROTOCOL_VERSION,
            "game": game_id, "seat": seat, "config": config,
        }
        if not self._send(hello):
            return "crash"
        deadline = time.perf_counter() + self.limits.handshake_timeout_seconds
        while True:
            item = self._next_line(deadline - time.perf_counter())
            if item == "timeout":
                return "timeout"
            if item is None:
                return "crash"
            _, line = item
            line = line.strip()
            if not line:
                continue
            try:
                msg = json.loads(line)
            except json.JSONDecodeError:
                return "protocol_error"
            if not isinstance(msg, dict) or msg.get("type") != "ready":
                if isinstance(msg, dict) and msg.get("type") == "action":
                    continue  # stale reply from a previous match
                return "protocol_error"
            if not isinstance(msg.get("name"), str):
                return "protocol_error"
            self.name = msg["name"]
            return None

    # -- handle surface ------------------------------------------------------

    def begin_match(self, match_id: str, seat: int, descriptor: GameDescriptor) -> None:
        with self._lock:
            self._match_id = match_id
            self._step = 0
            self._dead = None
            if self.proc.poll() is not None:
                self._dead = "crash"
                return
            failure = self._handshake(descriptor.game_id, dict(descriptor.config), seat)
            if failure is not None:
                self._dead = failure  # timeout | crash | protocol_error

    def request_action(self, observation, mask, deadline_seconds) -> DecisionOutcome:
        if self.withdrawn:
            raise UsageError(f"{self.agent_id} was withdrawn and answers no further requests")
        with self._lock:
            if self._dead is not None:
                return self._track(_fail(self._dead, 0.0))
            if self.proc.poll() is not None:
                self._dead = "crash"
                return self._track(_fail("crash", 0.0))
            step = self._step
            self._step += 1
            sent_at = time.perf_counter()
            message = {
                "type": "act", "match": self._match_id, "step": step,
                "observation": observation.payload, "action_mask": list(mask.bits),
                "deadline_ms": int(deadline_seconds * 1000),
            }
            if not self._send(message):
                self._dead = "crash"
                return self._track(_fail("crash", 0.0))
            deadline_at = sent_at + deadline_seconds
            while True:
                item = self._next_line(deadline_at - time.perf_counter())
                if item == "timeout":
                    return self._track(_fail("timeout", deadline_seconds))
                if item is None:
                    self._dead = "crash"
                    return self._track(_fail("crash", time.perf_counter() - sent_at))
                received_at, line = item
                if received_at > deadline_at:  # arrived late; discard
                    return self._track(_fail("timeout", deadline_seconds))
                latency = received_at - sent_at
                line = line.strip()
                if not line:
                    continue
                try:
                    msg = json.loads(line)
                except json.JSONDecodeError:
                    return self._track(_fail("protocol_error", latency))
                if not isinstance(msg, dict) or msg.get("type") != "action":
                    return self._track(_fail("protocol_error", latency))
                reply_step = msg.get("step")
                if isinstance(reply_step, int) and reply_step < step:
                    continue  # stale reply that outlived its deadline
                if reply_step != step:
                    return self._track(_fail("protocol_error", latency))
                action = msg.get("action")
                if not isinstance(action, int) or isinstance(action, bool):
                    return self._track(_fail("protocol_error", latency))
                if action == NO_ACTION_SENTINEL:
                    return self._track(_ok(None, latency))
                if not 0 <= action < len(mask.bits):
                    return self._track(_fail("protocol_error", latency))
                return self._track(_ok(action, latency))

    def finish_match(self, scores: Sequence[float]) -> None:
        with self._lock:
            if self.proc.poll() is None:
                self._send({"type": "result", "scores": [float(s) for s in scores]})

    def close(self) -> None:
        with self._lock:
            if self.proc.poll() is None:
                self._send({"type": "bye"})
                try:
                    self.proc.wait(timeout=2.0)
                except subprocess.TimeoutExpired:
                    self.proc.kill()
                    self.proc.wait()
            try:
                if self.proc.stdin:
                    self.proc.stdin.close()
                if self.proc.stdout:
                    self.proc.stdout.close()
            except OSError:
                pass
            self._stderr_file.close()

    def stderr_tail(self, max_bytes: int = 4096) -> str:
        self._stderr_file.flush()
        try:
            with open(self.stderr_path, "rb") as fh:
                fh.seek(0, os.SEEK_END)
                size = fh.tell()
                fh.seek(max(0, size - max_bytes))
                return fh.read().decode("utf-8", errors="replace")
        except OSError:
            return ""


def spawn(
    command: Sequence[str],
    limits: ResourceLimits,
    *,
    agent_id: str = "",
    game_id: str = "",
    config: dict[str, Any] | None = None,
    scratch_root: str | None = None,
) -> SubprocessAgent:
    """Start a child agent process and complete the hello/ready handshake.

    Raises AgentSpawnError on start or handshake failure (the validator
    records that as a structure-layer failure).
    """
    if not command:
        raise UsageError("spawn needs a non-empty command line")
    name = agent_id or os.path.basename(command[0])
    return SubprocessAgent(
        name, command, limits, game_id=game_id, config=config, scratch_root=scratch_root,
    )
