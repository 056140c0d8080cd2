"""Environment abstraction and deterministic match execution.

Every game exposes the same minimal surface: reset to an initial state,
observe a seat's view, compute the legal-action mask, and apply an action.
The match runner drives that loop against agent handles, enforcing per-move
deadlines and translating agent failures (timeout, illegal action, crash,
protocol violation) into forfeit outcomes recorded on the transcript.

Replaying a transcript's (seed, actions) through the same rules engine
reproduces the final scores bit-exactly; `replay` checks exactly that.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Protocol, Sequence

FORFEIT_CAUSES = ("timeout", "illegal_action", "crash", "protocol_error")

#: Sentinel action meaning "no action available" (all-false mask).
NO_ACTION = -1


class ConfigurationError(Exception):
    """Unknown game id or invalid game parameters."""


class UsageError(Exception):
    """Caller violated an operation precondition."""


class RuleViolation(Exception):
    """An action was applied that the rules forbid in the current state."""

    def __init__(self, seat: int, action: int, message: str = ""):
        self.seat = seat
        self.action = action
        super().__init__(message or f"illegal action {action} by seat {seat}")


@dataclass(frozen=True)
class GameDescriptor:
    """Pluggable environment definition shared by all nine games."""

    game_id: str
    seats: int
    action_space: int
    observation_schema: dict[str, Any]
    info_kind: str  # "perfect" | "imperfect" | "perfect+random"
    config: dict[str, Any] = field(default_factory=dict)

    @property
    def step_cap(self) -> int:
        return int(self.config["step_cap"])


@dataclass
class GameState:
    """Wrapper around an opaque per-game board payload.

    States are treated as immutable: `apply` returns a fresh state and never
    mutates its input, which keeps replay and parallel matches safe.
    """

    game_id: str
    step_index: int
    to_act: int
    terminal: bool
    scores: tuple[float, ...] | None
    rng_state: Any
    board: Any

    def advanced(self, **changes: Any) -> "GameState":
        changes.setdefault("step_index", self.step_index + 1)
        return replace(self, **changes)


@dataclass(frozen=True)
class Observation:
    seat: int
    payload: dict[str, Any]
    to_act: int


@dataclass(frozen=True)
class ActionMask:
    bits: tuple[bool, ...]

    def any(self) -> bool:
        return any(self.bits)

    def legal_actions(self) -> list[int]:
        return [i for i, b in enumerate(self.bits) if b]


@dataclass(frozen=True)
class ResourceLimits:
    move_timeout_seconds: float = 45.0
    memory_bytes: int = 1 << 30
    handshake_timeout_seconds: float = 10.0


@dataclass(frozen=True)
class StepRecord:
    seat: int
    action: int  # NO_ACTION when the decision produced no usable action
    latency_seconds: float
    error_flag: bool


@dataclass(frozen=True)
class Outcome:
    kind: str  # "winner" | "draw" | "forfeit"
    winner: int | None = None
    forfeit_seat: int | None = None
    cause: str | None = None

    def __post_init__(self) -> None:
        if self.kind == "forfeit" and self.cause not in FORFEIT_CAUSES:
            raise UsageError(f"forfeit cause must be one of {FORFEIT_CAUSES}")


@dataclass
class MatchRecord:
    match_id: str
    game_id: str
    agent_ids: tuple[str, ...]
    seed: int
    steps: list[StepRecord]
    outcome: Outcome
    scores: tuple[float, ...]
    wall_time: float
    withdrawn: bool = False  # auto-loss record emitted after withdrawal


class DecisionLike(Protocol):
    """Structural view of agents.DecisionOutcome (avoids a circular import)."""

    action: int | None
    failure: str | None
    latency_seconds: float


class AgentLike(Protocol):
    agent_id: str

    def begin_match(self, match_id: str, seat: int, descriptor: GameDescriptor) -> None: ...

    def request_action(
        self, observation: Observation, mask: ActionMask, deadline_seconds: float
    ) -> DecisionLike: ...

    def finish_match(self, scores: Sequence[float]) -> None: ...


class RulesEngine:
    """Per-game rules. Subclasses are stateless; all data lives in GameState."""

    def initial(self, descriptor: GameDescriptor, seed: int) -> GameState:
        raise NotImplementedError

    def observe_payload(self, descriptor: GameDescriptor, state: GameState, seat: int) -> dict[str, Any]:
        raise NotImplementedError

    def mask_bits(self, descriptor: GameDescriptor, state: GameState, seat: int) -> tuple[bool, ...]:
        raise NotImplementedError

    def apply(self, descriptor: GameDescriptor, state: GameState, seat: int, action: int) -> GameState:
        raise NotImplementedError

    def stuck(self, descriptor: GameDescriptor, state: GameState) -> GameState:
        """All-false mask before natural termination: end the episode.

        Single-player games fail with their current score; two-player games
        (which should never reach this) end in a draw.
        """
        if descriptor.seats == 1:
            return state.advanced(terminal=True, scores=(self.current_score(descriptor, state),), step_index=state.step_index)
        return state.advanced(terminal=True, scores=(0.0,) * descriptor.seats, step_index=state.step_index)

    def cap_terminate(self, descriptor: GameDescriptor, state: GameState) -> GameState:
        """Step cap exceeded: draw for two-player games, failure for puzzles."""
        if descriptor.seats == 1:
            return state.advanced(terminal=True, scores=(self.current_score(descriptor, state),), step_index=state.step_index)
        return state.advanced(terminal=True, scores=(0.0,) * descriptor.seats, step_index=state.step_index)

    def forfeit_scores(self, descriptor: GameDescriptor, state: GameState, offender: int) -> tuple[float, ...]:
        """Scores charged when `offender` forfeits mid-match."""
        if descriptor.seats == 1:
            return (self.current_score(descriptor, state),)
        return tuple(-1.0 if s == offender else 1.0 for s in range(descriptor.seats))

    def current_score(self, descriptor: GameDescriptor, state: GameState) -> float:
        """Single-player running score used for stuck/cap/forfeit endings."""
        return 0.0

    def success(self, descriptor: GameDescriptor, state: GameState) -> bool:
        """Single-player: whether the terminal state solved the task."""
        return False


_REGISTRY: dict[str, RulesEngine] = {}


def register_game(game_id: str, rules: RulesEngine) -> None:
    _REGISTRY[game_id] = rules


def rules_for(descriptor: GameDescriptor) -> RulesEngine:
    try:
        return _REGISTRY[descriptor.game_id]
    except KeyError:
        raise ConfigurationError(f"unknown game_id: {descriptor.game_id!r}") from None


def registered_games() -> list[str]:
    return sorted(_REGISTRY)


def reset(descriptor: GameDescriptor, seed: int) -> GameState:
    """Initial state; identical (descriptor, seed) yields identical state."""
    return rules_for(descriptor).initial(descriptor, seed)


def observe(state: GameState, descriptor: GameDescriptor, seat: int) -> Observation:
    if not 0 <= seat < descriptor.seats:
        raise UsageError(f"seat {seat} out of range for {descriptor.seats}-seat game")
    payload = rules_for(descriptor).observe_payload(descriptor, state, seat)
    return Observation(seat=seat, payload=payload, to_act=state.to_act)


def legal_mask(state: GameState, descriptor: GameDescriptor, seat: int) -> ActionMask:
    if state.terminal:
        return ActionMask(bits=(False,) * descriptor.action_space)
    bits = rules_for(descriptor).mask_bits(descriptor, state, seat)
    if len(bits) != descriptor.action_space:
        raise ConfigurationError(
            f"{descriptor.game_id}: mask length {len(bits)} != action_space {descriptor.action_space}"
        )
    return ActionMask(bits=bits)


def apply(state: GameState, descriptor: GameDescriptor, seat: int, action: int) -> GameState:
    if state.terminal:
        raise RuleViolation(seat, action, "apply called on terminal state")
    return rules_for(descriptor).apply(descriptor, state, seat, action)


DecisionFn = Callable[[int, Observation, ActionMask], "DecisionLike"]


@dataclass(frozen=True)
class _ScriptedDecision:
    action: int | None
    failure: str | None
    latency_seconds: float = 0.0


def _drive(
    descriptor: GameDescriptor,
    seed: int,
    decide: DecisionFn,
) -> tuple[GameState, list[StepRecord], Outcome]:
    """Shared control loop for live matches and transcript replay."""
    rules = rules_for(descriptor)
    state = reset(descriptor, seed)
    steps: list[StepRecord] = []
    cap = descriptor.step_cap

    while True:
        if state.terminal:
            return state, steps, _natural_outcome(descriptor, rules, state)
        if state.step_index >= cap:
            state = rules.cap_terminate(descriptor, state)
            return state, steps, _natural_outcome(descriptor, rules, state)
        seat = state.to_act
        obs = observe(state, descriptor, seat)
        mask = legal_mask(state, descriptor, seat)
        if not mask.any():
            state = rules.stuck(descriptor, state)
            return state, steps, _natural_outcome(descriptor, rules, state)

        decision = decide(seat, obs, mask)
        if decision.failure is not None:
            steps.append(StepRecord(seat, NO_ACTION, decision.latency_seconds, True))
            scores = rules.forfeit_scores(descriptor, state, seat)
            outcome = Outcome(kind="forfeit", forfeit_seat=seat, cause=decision.failure)
            state = state.advanced(terminal=True, scores=scores, step_index=state.step_index)
            return state, steps, outcome
        action = decision.action
        if action is None or not (0 <= action < descriptor.action_space) or not mask.bits[action]:
            recorded = NO_ACTION if action is None else action
            steps.append(StepRecord(seat, recorded, decision.latency_seconds, True))
            scores = rules.forfeit_scores(descriptor, state, seat)
            outcome = Outcome(kind="forfeit", forfeit_seat=seat, cause="illegal_action")
            state = state.advanced(terminal=True, scores=scores, step_index=state.step_index)
            return state, steps, outcome
        state = rules.apply(descriptor, state, seat, action)
        steps.append(StepRecord(seat, action, decision.latency_seconds, False))


def _natural_outcome(descriptor: GameDescriptor, rules: RulesEngine, state: GameState) -> Outcome:
    scores = state.scores
    assert scores is not None, "terminal state must carry scores"
    if descriptor.seats == 1:
        if rules.success(descriptor, state):
            return Outcome(kind="winner", winner=0)
        return Outcome(kind="draw")
    best = max(scores)
    winners = [s for s, v in enumerate(scores) if v == best]
    if len(winners) == 1:
        return Outcome(kind="winner", winner=winners[0])
    return Outcome(kind="draw")


def run_match(
    descriptor: GameDescriptor,
    agents: Sequence[AgentLike],
    limits: ResourceLimits,
    seed: int,
    match_id: str = "",
    record_latency: bool = True,
) -> MatchRecord:
    """Drive one full match; agent failures become forfeit outcomes, never exceptions.

    With `record_latency` false, step latencies and wall time are recorded as
    0.0 so transcripts of deterministic agents are byte-reproducible.
    """
    if len(agents) != descriptor.seats:
        raise UsageError(f"{descriptor.game_id} needs {descriptor.seats} agents, got {len(agents)}")
    if limits.move_timeout_seconds <= 0:
        raise UsageError("move_timeout_seconds must be positive")
    match_id = match_id or f"{descriptor.game_id}-{seed:016x}"
    for seat, handle in enumerate(agents):
        handle.begin_match(match_id, seat, descriptor)

    start = time.perf_counter()
    wall_cap = limits.move_timeout_seconds * descriptor.step_cap

    def decide(seat: int, obs: Observation, mask: ActionMask) -> DecisionLike:
        if time.perf_counter() - start > wall_cap:
            return _ScriptedDecision(None, "timeout")  # per-match wall cap
        outcome = agents[seat].request_action(obs, mask, limits.move_timeout_seconds)
        if not record_latency:
            return _ScriptedDecision(outcome.action, outcome.failure, 0.0)
        return outcome

    state, steps, outcome = _drive(descriptor, seed, decide)
    wall = (time.perf_counter() - start) if record_latency else 0.0
    assert state.scores is not None
    record = MatchRecord(
        match_id=match_id,
        game_id=descriptor.game_id,
        agent_ids=tuple(a.agent_id for a in agents),
        seed=seed,
        steps=steps,
        outcome=outcome,
        scores=state.scores,
        wall_time=wall,
    )
    for handle in agents:
        handle.finish_match(record.scores)
    return record


def replay(descriptor: GameDescriptor, record: MatchRecord) -> tuple[tuple[float, ...], GameState]:
    """Re-simulate a transcript; returns the reproduced scores and final state."""
    script = iter(record.steps)

    def decide(seat: int, obs: Observation, mask: ActionMask) -> DecisionLike:
        try:
            step = next(script)
        except StopIteration:
            raise UsageError("transcript ended before the match did") from None
        if step.seat != seat:
            raise UsageError(f"transcript seat {step.seat} != engine seat {seat}")
        if step.error_flag:
            cause = record.outcome.cause or "crash"
            return _ScriptedDecision(None, cause)
        return _ScriptedDecision(step.action, None)

    state, _, outcome = _drive(descriptor, record.seed, decide)
    assert state.scores is not None
    if outcome != record.outcome:
        raise UsageError(f"replay outcome {outcome} != recorded {record.outcome}")
    return state.scores, state
