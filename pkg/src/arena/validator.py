"""Hierarchical agent validation and the bounded generate-and-repair loop.

Candidates are validated layer by layer: structure (process liveness and
protocol compliance), function (basic legal decision making), logic
(multi-step interaction and game-specific scenarios), robustness (terminal
states, empty masks, response time). A structure failure gates everything
after it: later cases are reported as not-run failures. The overall verdict
is PASS only when every case passed.

Failed candidates loop back to their coder with the error set, the failing
case ids, and the captured stderr tail; at most three repairs are attempted
before rejection.
"""

from __future__ import annotations

import logging
import re
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Protocol, Sequence

import requests

from arena.agents import AgentHandle, AgentSpawnError
from arena.engine import GameDescriptor, ResourceLimits

log = logging.getLogger("arena.validator")

LAYERS = ("structure", "function", "logic", "robustness")
MAX_REPAIRS = 3
STDERR_TAIL_BYTES = 4096


@dataclass(frozen=True)
class TestCase:
    """One deterministic scripted interaction.

    `procedure` drives the handle and returns (passed, detail). It must be a
    pure function of the handle's behaviour and the case's frozen seeds.
    """

    id: str
    layer: str
    game_id: str
    procedure: Callable[[AgentHandle], tuple[bool, str]]
    time_budget: float = 10.0

    def __post_init__(self) -> None:
        if self.layer not in LAYERS:
            raise ValueError(f"unknown layer {self.layer!r}")


@dataclass(frozen=True)
class CaseResult:
    case_id: str
    layer: str
    status: str  # "pass" | "fail" | "not_run"
    detail: str = ""


@dataclass
class TestReport:
    cases: list[CaseResult]
    layer_pass_rates: dict[str, float]
    overall: str  # "PASS" | "FAIL"
    errors: list[CaseResult]  # the error set E: every non-passing case
    elapsed: float

    @property
    def passed(self) -> bool:
        return self.overall == "PASS"


@dataclass
class PromptBundle:
    sections: dict[str, str]
    rendered: str


@dataclass
class CandidateAgent:
    candidate_id: str
    game_id: str
    coder_name: str
    source_text: str
    command: list[str]
    iteration: int = 0
    history: list[tuple[TestReport, str]] = field(default_factory=list)
    deployed: bool = False
    final_report: TestReport | None = None
    rejection_cause: str = ""

    def __post_init__(self) -> None:
        if self.iteration > MAX_REPAIRS:
            raise ValueError(f"iteration {self.iteration} exceeds the repair bound")


# ---------------------------------------------------------------------------
# Prompt construction
# ---------------------------------------------------------------------------

_ACTION_DOCS: dict[str, Callable[[GameDescriptor], str]] = {}


def _action_doc(game_id: str):
    def register(fn: Callable[[GameDescriptor], str]):
        _ACTION_DOCS[game_id] = fn
        return fn

    return register


@_action_doc("tictactoe")
def _ttt_actions(d: GameDescriptor) -> str:
    rows = [f"  action {i} -> cell (row {i // 3}, col {i % 3})" for i in range(9)]
    return "Actions 0..8 place your mark on the row-major cell:\n" + "\n".join(rows)


@_action_doc("connect4")
def _c4_actions(d: GameDescriptor) -> str:
    return "Actions 0..6 drop a piece into that column (row 0 is the top of the board)."


@_action_doc("reversi")
def _reversi_actions(d: GameDescriptor) -> str:
    return ("Actions 0..63 place a disc on the row-major square (must flip at least one "
            "opposing disc); action 64 passes and is legal only when no placement flips.")


@_action_doc("snake")
def _snake_actions(d: GameDescriptor) -> str:
    return "Actions: 0=up, 1=right, 2=down, 3=left. Both snakes move simultaneously each tick."


@_action_doc("sudoku")
def _sudoku_actions(d: GameDescriptor) -> str:
    return ("Action = row*81 + col*9 + (digit-1), i.e. a flat index over "
            "(row, col, digit); only consistent placements are legal.")


@_action_doc("2048")
def _2048_actions(d: GameDescriptor) -> str:
    return ("Actions: 0=up, 1=right, 2=down, 3=left. A direction is legal only if the "
            "slide changes the board; a random tile (2 with p=0.9, 4 with p=0.1) spawns "
            "after every effective move.")


@_action_doc("hanoi")
def _hanoi_actions(d: GameDescriptor) -> str:
    return ("Actions are ordered peg pairs: 0=(0->1), 1=(0->2), 2=(1->0), 3=(1->2), "
            "4=(2->0), 5=(2->1); move all disks to peg 2.")


@_action_doc("maze")
def _maze_actions(d: GameDescriptor) -> str:
    return "Actions: 0=up, 1=right, 2=down, 3=left; reach the exit cell."


@_action_doc("holdem")
def _holdem_actions(d: GameDescriptor) -> str:
    return ("Actions: 0=fold, 1=check/call, 2=raise, 3=all-in (legal only when your "
            "stack cannot complete a full call). Cards are integers 0..51 = 13*suit + rank, "
            "rank 0=2 ... 12=A; suits 0..3.")


WIRE_PROTOCOL_DOC = """\
Your program communicates over stdin/stdout, one JSON object per line:
  harness -> agent: {"type":"hello","protocol":1,"game":"<game_id>","seat":<int>,"config":{...}}
  agent -> harness: {"type":"ready","name":"<string>"}
  harness -> agent: {"type":"act","match":"<id>","step":<int>,"observation":<payload>,"action_mask":[<bool>...],"deadline_ms":<int>}
  agent -> harness: {"type":"action","step":<int>,"action":<int>}
  harness -> agent: {"type":"result","scores":[<real>...]} after each match and {"type":"bye"} at shutdown.
Echo the step number exactly. Reply with action -1 when the mask has no true
bit. Flush stdout after every line. Write diagnostics to stderr only."""

SDK_CONTRACT_DOC = """\
If the runner SDK is available, implement instead a class inheriting BaseAgent:
    class MyAgent(BaseAgent):
        def __init__(self, name: str): ...
        def select_action(self, observation, action_mask) -> int | None: ...
select_action receives the observation payload and a boolean mask over the
fixed action space; return a legal action index, or None when no bit is true.
The SDK handles the wire protocol for you."""


def build_prompt(descriptor: GameDescriptor) -> PromptBundle:
    """Deterministic four-section prompt for one game environment."""
    schema_lines = "\n".join(
        f"  {key}: {desc}" for key, desc in sorted(descriptor.observation_schema.items())
    )
    config_lines = "\n".join(
        f"  {key} = {descriptor.config[key]!r}"
        for key in sorted(descriptor.config)
        if key != "grid"
    )
    action_doc = _ACTION_DOCS[descriptor.game_id](descriptor)

    task_framing = (
        f"Write a complete, competitive game-playing agent for {descriptor.game_id}. "
        "The agent must always answer with a legal action before the per-decision "
        "deadline; beyond correctness, it is ranked by match results against other "
        "agents, so play to win."
    )
    environment_spec = (
        f"Game: {descriptor.game_id}\n"
        f"Seats: {descriptor.seats}\n"
        f"Action space size: {descriptor.action_space}\n"
        f"Information: {descriptor.info_kind}\n"
        f"{action_doc}\n"
        "Observation payload fields:\n"
        f"{schema_lines}\n"
        "Game parameters:\n"
        f"{config_lines}\n"
        "The action mask is a boolean list of length "
        f"{descriptor.action_space}; mask[i] is true exactly when action i is legal. "
        "Selecting a masked-false action forfeits the match."
    )
    structure_constraints = WIRE_PROTOCOL_DOC + "\n\n" + SDK_CONTRACT_DOC
    strategic_guidance = (
        "Prefer simple, fast decision rules over deep searches that risk the deadline. "
        "Handle terminal observations and empty masks gracefully (reply -1, never crash). "
        "Keep per-decision state inside your agent object; processes live for many "
        "matches. Document non-obvious logic."
    )
    sections = {
        "task_framing": task_framing,
        "environment_spec": environment_spec,
        "structure_constraints": structure_constraints,
        "strategic_guidance": strategic_guidance,
    }
    rendered = "\n\n".join(
        f"## {title}\n{body}"
        for title, body in (
            ("Task", task_framing),
            ("Environment", environment_spec),
            ("Required structure", structure_constraints),
            ("Guidance", strategic_guidance),
        )
    )
    return PromptBundle(sections=sections, rendered=rendered)


# ---------------------------------------------------------------------------
# Suite execution
# ---------------------------------------------------------------------------


def run_test_suite(handle: AgentHandle, suite: Sequence[TestCase]) -> TestReport:
    """Execute layers in order with structure-failure gating."""
    if not suite:
        raise ValueError("test suite is empty")
    started = time.perf_counter()
    results: list[CaseResult] = []
    gate_failed = False
    for layer in LAYERS:
        for case in [c for c in suite if c.layer == layer]:
            if gate_failed:
                results.append(CaseResult(case.id, case.layer, "not_run",
                                          "skipped: structure layer failed"))
                continue
            try:
                passed, detail = case.procedure(handle)
            except Exception as exc:  # case harness fault, not agent behaviour
                passed, detail = False, f"case harness error: {exc!r}"
            results.append(CaseResult(case.id, case.layer, "pass" if passed else "fail", detail))
        if layer == "structure" and any(r.status == "fail" for r in results):
            gate_failed = True
    return _build_report(results, time.perf_counter() - started)


def _build_report(results: list[CaseResult], elapsed: float) -> TestReport:
    rates: dict[str, float] = {}
    for layer in LAYERS:
        layer_results = [r for r in results if r.layer == layer]
        if layer_results:
            rates[layer] = sum(1 for r in layer_results if r.status == "pass") / len(layer_results)
    errors = [r for r in results if r.status != "pass"]
    overall = "PASS" if not errors else "FAIL"
    return TestReport(cases=results, layer_pass_rates=rates, overall=overall,
                      errors=errors, elapsed=elapsed)


def spawn_failure_report(suite: Sequence[TestCase], reason: str) -> TestReport:
    """Report for a candidate whose process never completed the handshake."""
    results = [CaseResult("spawn_handshake", "structure", "fail", reason)]
    results.extend(
        CaseResult(case.id, case.layer, "not_run", "skipped: structure layer failed")
        for case in suite
    )
    return _build_report(results, 0.0)


# ---------------------------------------------------------------------------
# Coders
# ---------------------------------------------------------------------------


class CoderError(Exception):
    """Coder transport or response-format failure after bounded retries."""


class CoderInterface(Protocol):
    name: str

    def generate(self, prompt: PromptBundle) -> str: ...

    def repair(self, source_text: str, errors: Sequence[CaseResult],
               prompt: PromptBundle, stderr_tail: str) -> str: ...


class StaticCoder:
    """Scripted coder for tests and offline runs: replays sources from disk."""

    def __init__(self, name: str, sources: Sequence[str], from_files: bool = True):
        if not sources:
            raise ValueError("StaticCoder needs at least one source")
        self.name = name
        self._texts = []
        for src in sources:
            if from_files:
                with open(src, "r", encoding="utf-8") as fh:
                    self._texts.append(fh.read())
            else:
                self._texts.append(src)
        self._cursor = 0

    def generate(self, prompt: PromptBundle) -> str:
        self._cursor = 0
        return self._texts[0]

    def repair(self, source_text, errors, prompt, stderr_tail) -> str:
        self._cursor = min(self._cursor + 1, len(self._texts) - 1)
        return self._texts[self._cursor]


_FENCE_RE = re.compile(r"```[^\n]*\n(.*?)\n?```", re.DOTALL)


def extract_code_block(text: str) -> str:
    """First fenced code block of a chat completion."""
    match = _FENCE_RE.search(text)
    if match is None:
        raise CoderError("completion contained no fenced code block")
    return match.group(1)


def render_repair_request(prompt: PromptBundle, errors: Sequence[CaseResult],
                          stderr_tail: str) -> str:
    """Original prompt, the failing case ids, a bulleted error set, stderr tail."""
    failing_ids = ", ".join(e.case_id for e in errors)
    bullets = "\n".join(f"- [{e.case_id}] ({e.layer}) {e.status}: {e.detail}" for e in errors)
    tail = stderr_tail[-STDERR_TAIL_BYTES:] if stderr_tail else "(empty)"
    return (
        f"{prompt.rendered}\n\n"
        "## Test results\n"
        f"Your previous agent failed these cases: {failing_ids}\n"
        f"{bullets}\n\n"
        "## Captured stderr (tail)\n"
        f"{tail}\n\n"
        "Return the complete corrected program in a single fenced code block."
    )


class GatewayCoder:
    """HTTP chat-completion client against a configurable gateway endpoint."""

    def __init__(self, name: str, endpoint: str, model: str, api_key: str = "",
                 timeout: float = 120.0, max_retries: int = 3, backoff: float = 1.0):
        self.name = name
        self.endpoint = endpoint
        self.model = model
        self.api_key = api_key
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff

    def _post(self, messages: list[dict[str, str]]) -> str:
        body = {"model": self.model, "messages": messages}
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        log.info("gateway request model=%s endpoint=%s body=%s",
                 self.model, self.endpoint, _redact(body))
        last_error: Exception | None = None
        for attempt in range(self.max_retries):
            try:
                resp = requests.post(self.endpoint, json=body, headers=headers,
                                     timeout=self.timeout)
                resp.raise_for_status()
                doc = resp.json()
                log.info("gateway response status=%s body=%s", resp.status_code, doc)
                content = doc["choices"][0]["message"]["content"]
                return extract_code_block(content)
            except (requests.RequestException, KeyError, IndexError, ValueError) as exc:
                last_error = exc
                log.warning("gateway attempt %d failed: %r", attempt + 1, exc)
                if attempt + 1 < self.max_retries:
                    time.sleep(self.backoff * (2 ** attempt))
        raise CoderError(f"gateway failed after {self.max_retries} attempts: {last_error!r}")

    def generate(self, prompt: PromptBundle) -> str:
        return self._post([{"role": "user", "content": prompt.rendered}])

    def repair(self, source_text, errors, prompt, stderr_tail) -> str:
        request = render_repair_request(prompt, errors, stderr_tail)
        messages = [
            {"role": "user", "content": prompt.rendered},
            {"role": "assistant", "content": f"```python\n{source_text}\n```"},
            {"role": "user", "content": request},
        ]
        return self._post(messages)


def _redact(body: dict[str, Any]) -> dict[str, Any]:
    return body  # the key travels in headers, which are never logged


def coder_generate(coder: CoderInterface, prompt: PromptBundle) -> str:
    return coder.generate(prompt)


def coder_repair(coder: CoderInterface, source_text: str, errors: Sequence[CaseResult],
                 prompt: PromptBundle, stderr_tail: str = "") -> str:
    return coder.repair(source_text, errors, prompt, stderr_tail)


# ---------------------------------------------------------------------------
# Generate-and-repair loop
# ---------------------------------------------------------------------------

Launcher = Callable[[str], list[str]]


def generate_and_repair(
    coder: CoderInterface,
    descriptor: GameDescriptor,
    *,
    suite: Sequence[TestCase] | None = None,
    limits: ResourceLimits = ResourceLimits(),
    launcher: Launcher | None = None,
    max_iters: int = MAX_REPAIRS,
    candidate_id: str = "",
    scratch_root: str | None = None,
) -> CandidateAgent:
    """Generate, test, and repair a candidate; at most `max_iters` repairs.

    The returned candidate is either deployed (final report PASS) or rejected
    with its last report and cause. Coder transport failures reject the
    candidate rather than raising.
    """
    import os
    import sys
    import tempfile

    from arena.agents import spawn
    from arena.validator_suites import build_suite

    if max_iters > MAX_REPAIRS:
        raise ValueError(f"max_iters may not exceed {MAX_REPAIRS}")
    suite = list(suite if suite is not None else build_suite(descriptor))
    prompt = build_prompt(descriptor)
    candidate_id = candidate_id or f"{coder.name}-{descriptor.game_id}"
    # absolute: the launched process runs from its own scratch directory
    workdir = os.path.abspath(tempfile.mkdtemp(prefix="candidate-", dir=scratch_root))

    try:
        source = coder.generate(prompt)
    except CoderError as exc:
        return CandidateAgent(candidate_id, descriptor.game_id, coder.name, "",
                              [], rejection_cause=f"generate failed: {exc}")

    candidate = CandidateAgent(candidate_id, descriptor.game_id, coder.name, source, [])
    for iteration in range(max_iters + 1):
        candidate.iteration = iteration
        source_path = os.path.join(workdir, f"agent_iter{iteration}.py")
        with open(source_path, "w", encoding="utf-8") as fh:
            fh.write(candidate.source_text)
        candidate.command = (launcher or (lambda p: [sys.executable, p]))(source_path)

        stderr_tail = ""
        try:
            handle = spawn(candidate.command, limits, agent_id=candidate_id,
                           game_id=descriptor.game_id, config=dict(descriptor.config),
                           scratch_root=scratch_root)
        except AgentSpawnError as exc:
            report = spawn_failure_report(suite, str(exc))
        else:
            try:
                report = run_test_suite(handle, suite)
                stderr_tail = handle.stderr_tail(STDERR_TAIL_BYTES)
            finally:
                handle.close()

        candidate.final_report = report
        if report.passed:
            candidate.deployed = True
            return candidate
        if iteration == max_iters:
            candidate.rejection_cause = "failed validation after all repairs"
            return candidate
        request = render_repair_request(prompt, report.errors, stderr_tail)
        try:
            candidate.source_text = coder.repair(candidate.source_text, report.errors,
                                                 prompt, stderr_tail)
        except CoderError as exc:
            candidate.rejection_cause = f"repair failed: {exc}"
            return candidate
        candidate.history.append((report, request))
    raise AssertionError("unreachable: loop always returns")


def pass_at_1(candidates: Sequence[CandidateAgent]) -> float:
    """Fraction of candidates whose iteration-0 report passed."""
    if not candidates:
        return 0.0
    first_pass = sum(1 for c in candidates if c.deployed and c.iteration == 0)
    return first_pass / len(candidates)


def repair_rate(candidates: Sequence[CandidateAgent]) -> float | None:
    """Among iteration-0 failures, the fraction eventually deployed."""
    failed_first = [c for c in candidates if not (c.deployed and c.iteration == 0)]
    if not failed_first:
        return None
    return sum(1 for c in failed_first if c.deployed) / len(failed_first)
