"""Per-game validation suites: two or more deterministic cases per layer.

Cases present real reachable states (scripted action prefixes, crafted
instances, or seeded random playouts) and judge only the agent's reply:
legality, forced choices, the no-action sentinel on terminal states, and
response time. Every game ships the terminal/empty-mask robustness pair;
hold'em additionally ships the all-in scenario in its logic layer.
"""

from __future__ import annotations

import random
from functools import lru_cache
from typing import Callable, Sequence

from arena.agents import AgentHandle
from arena.engine import (
    GameDescriptor,
    GameState,
    apply,
    legal_mask,
    observe,
    reset,
    rules_for,
)
from arena.validator import TestCase

#: Fills columns 0..5 without a four-in-a-row; only column 6 stays legal.
C4_SIX_COLUMNS = (4, 5, 1, 0, 1, 3, 1, 3, 4, 3, 2, 1, 1, 2, 3, 4, 4, 3, 1, 4,
                  3, 4, 2, 5, 0, 0, 0, 0, 0, 2, 5, 5, 5, 5, 2, 2)

#: Random self-play prefix (seed 2) reaching a position where seat 0 must pass.
REVERSI_PASS_PREFIX = (19, 18, 17, 20, 21, 34, 45, 14, 33, 42, 29, 32, 7, 37, 43,
                       52, 51, 44, 59, 26, 50, 49, 56, 41, 24, 61, 30, 25, 60, 16,
                       48, 38, 62, 10, 31, 22, 8, 23, 2, 3, 11, 4, 5, 53, 40, 47,
                       12, 57, 54, 58, 39, 46, 15, 55, 63, 6, 9, 13)

#: Fills eight cells without a line; X (seat 0) is forced to play cell 8.
TTT_EIGHT_FILLED = (0, 2, 1, 3, 5, 4, 6, 7)

MAZE_FORCED_SEED = 0     # 9x9 maze whose start cell has a single open neighbour
MAZE_FORCED_ACTION = 2


def state_after(descriptor: GameDescriptor, actions: Sequence[int], seed: int = 0) -> GameState:
    state = reset(descriptor, seed)
    for action in actions:
        state = apply(state, descriptor, state.to_act, action)
    return state


def random_terminal_state(descriptor: GameDescriptor, seed: int) -> GameState:
    """Seeded random playout driven to termination (stuck and cap included)."""
    rules = rules_for(descriptor)
    state = reset(descriptor, seed)
    rng = random.Random(seed)
    while not state.terminal:
        if state.step_index >= descriptor.step_cap:
            return rules.cap_terminate(descriptor, state)
        legal = legal_mask(state, descriptor, state.to_act).legal_actions()
        if not legal:
            return rules.stuck(descriptor, state)
        state = apply(state, descriptor, state.to_act, rng.choice(legal))
    return state


def _reply(handle: AgentHandle, descriptor: GameDescriptor, state: GameState,
           seat: int, budget: float):
    obs = observe(state, descriptor, seat)
    mask = legal_mask(state, descriptor, seat)
    return mask, handle.request_action(obs, mask, budget)


def _legal_action_case(case_id: str, layer: str, descriptor: GameDescriptor,
                       make_state: Callable[[], GameState], seat: int = 0,
                       forced: int | None = None, budget: float = 10.0) -> TestCase:
    def procedure(handle: AgentHandle):
        state = make_state()
        handle.begin_match(f"case:{case_id}", seat, descriptor)
        mask, out = _reply(handle, descriptor, state, seat, budget)
        if out.failure is not None:
            return False, f"agent failure: {out.failure}"
        if out.action is None:
            return False, "no action returned although legal moves exist"
        if not mask.bits[out.action]:
            return False, f"action {out.action} is masked false"
        if forced is not None and out.action != forced:
            return False, f"only action {forced} is legal, got {out.action}"
        return True, f"played {out.action}"

    return TestCase(id=case_id, layer=layer, game_id=descriptor.game_id,
                    procedure=procedure, time_budget=budget)


def _integer_reply_case(case_id: str, descriptor: GameDescriptor, budget: float = 10.0) -> TestCase:
    def procedure(handle: AgentHandle):
        state = reset(descriptor, 0)
        handle.begin_match(f"case:{case_id}", 0, descriptor)
        mask, out = _reply(handle, descriptor, state, 0, budget)
        if out.failure is not None:
            return False, f"agent failure: {out.failure}"
        if out.action is None or not isinstance(out.action, int):
            return False, "reply did not carry an integer action"
        if not 0 <= out.action < descriptor.action_space:
            return False, f"action {out.action} outside 0..{descriptor.action_space - 1}"
        return True, f"integer action {out.action}"

    return TestCase(id=case_id, layer="structure", game_id=descriptor.game_id,
                    procedure=procedure, time_budget=budget)


def _responds_case(case_id: str, descriptor: GameDescriptor, budget: float = 10.0) -> TestCase:
    def procedure(handle: AgentHandle):
        state = reset(descriptor, 0)
        handle.begin_match(f"case:{case_id}", 0, descriptor)
        _, out = _reply(handle, descriptor, state, 0, budget)
        if out.failure is not None:
            return False, f"agent failure: {out.failure}"
        return True, "responded"

    return TestCase(id=case_id, layer="structure", game_id=descriptor.game_id,
                    procedure=procedure, time_budget=budget)


def _sentinel_case(case_id: str, descriptor: GameDescriptor,
                   make_state: Callable[[], GameState], budget: float = 10.0) -> TestCase:
    def procedure(handle: AgentHandle):
        state = make_state()
        if not state.terminal:
            return False, "case setup error: state not terminal"
        handle.begin_match(f"case:{case_id}", 0, descriptor)
        mask, out = _reply(handle, descriptor, state, 0, budget)
        if mask.any():
            return False, "case setup error: terminal mask not all-false"
        if out.failure is not None:
            return False, f"agent failure on empty mask: {out.failure}"
        if out.action is not None:
            return False, f"expected the no-action sentinel, got {out.action}"
        return True, "sentinel on empty mask"

    return TestCase(id=case_id, layer="robustness", game_id=descriptor.game_id,
                    procedure=procedure, time_budget=budget)


def _response_time_case(case_id: str, descriptor: GameDescriptor, budget: float = 5.0) -> TestCase:
    def procedure(handle: AgentHandle):
        state = reset(descriptor, 1)
        handle.begin_match(f"case:{case_id}", 0, descriptor)
        _, out = _reply(handle, descriptor, state, 0, budget)
        if out.failure == "timeout":
            return False, f"no reply within {budget}s"
        if out.failure is not None:
            return False, f"agent failure: {out.failure}"
        return True, f"replied in {out.latency_seconds:.3f}s"

    return TestCase(id=case_id, layer="robustness", game_id=descriptor.game_id,
                    procedure=procedure, time_budget=budget)


def _interaction_case(case_id: str, descriptor: GameDescriptor, seed: int,
                      decisions: int = 6, budget: float = 10.0) -> TestCase:
    """Multi-step segment: the candidate plays seat 0 against seeded random
    opponents; every candidate action must be legal."""

    def procedure(handle: AgentHandle):
        from arena.agents import builtin_random

        state = reset(descriptor, seed)
        handle.begin_match(f"case:{case_id}", 0, descriptor)
        opponents = {
            s: builtin_random(1000 + s) for s in range(1, descriptor.seats)
        }
        for opp_seat, opp in opponents.items():
            opp.begin_match(f"case:{case_id}", opp_seat, descriptor)
        made = 0
        while made < decisions and not state.terminal:
            seat = state.to_act
            mask = legal_mask(state, descriptor, seat)
            if not mask.any():
                break
            if seat == 0:
                _, out = _reply(handle, descriptor, state, 0, budget)
                if out.failure is not None:
                    return False, f"agent failure at decision {made}: {out.failure}"
                if out.action is None or not mask.bits[out.action]:
                    return False, f"illegal action {out.action} at decision {made}"
                action = out.action
                made += 1
            else:
                action = opponents[seat].request_action(
                    observe(state, descriptor, seat), mask, budget).action
            state = apply(state, descriptor, seat, action)
        if made == 0:
            return False, "no decisions reached seat 0"
        return True, f"{made} legal decisions"

    return TestCase(id=case_id, layer="logic", game_id=descriptor.game_id,
                    procedure=procedure, time_budget=budget)


# ---------------------------------------------------------------------------
# Crafted per-game states
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _sudoku_near_complete(empties: int) -> GameDescriptor:
    from arena.games.puzzle import PuzzleInstance, generate_sudoku, make_sudoku, solve_sudoku

    inst = generate_sudoku(11, clues=30)
    solution, _ = solve_sudoku(inst.payload["grid"])
    grid = list(solution)
    for cell in (40, 13, 66)[:empties]:
        grid[cell] = 0
    return make_sudoku(PuzzleInstance("sudoku", 11, {"grid": grid}))


@lru_cache(maxsize=None)
def _maze_forced_descriptor() -> GameDescriptor:
    from arena.games.puzzle import generate_maze, make_maze

    return make_maze(generate_maze(9, 9, seed=MAZE_FORCED_SEED))


def _board_2048_two_legal() -> GameState:
    from arena.games.puzzle import Board2048, make_2048

    crafted = (0, 2, 4, 8,
               8, 4, 2, 16,
               2, 8, 4, 2,
               16, 2, 8, 4)  # only up (0) and left (3) change the board
    d = make_2048()
    state = reset(d, 0)
    return state.advanced(board=Board2048(crafted, 0), step_index=0)


@lru_cache(maxsize=None)
def _holdem_allin_descriptor() -> GameDescriptor:
    from arena.games.cards import make_holdem

    return make_holdem(seats=2, starting_stack=8, small_bet=4, num_hands=1)


def _holdem_allin_state() -> GameState:
    # blinds 2/4 off stacks of 8; the button min-raises and the big blind now
    # faces to_call == stack: mask becomes {fold, call, all-in}
    d = _holdem_allin_descriptor()
    state = state_after(d, [2], seed=3)
    bits = legal_mask(state, d, state.to_act).bits
    assert bits == (True, True, False, True), f"all-in setup drifted: {bits}"
    assert state.to_act == 1
    return state


# ---------------------------------------------------------------------------
# Suite assembly
# ---------------------------------------------------------------------------


def build_suite(descriptor: GameDescriptor) -> list[TestCase]:
    """At least two deterministic cases per layer for the given game."""
    g = descriptor.game_id
    cases: list[TestCase] = [
        _responds_case(f"{g}-structure-responds", descriptor),
        _integer_reply_case(f"{g}-structure-integer-reply", descriptor),
        _legal_action_case(f"{g}-function-initial-legal", "function", descriptor,
                           lambda: reset(descriptor, 0)),
    ]

    if g == "tictactoe":
        cases += [
            _legal_action_case(f"{g}-function-forced-choice", "function", descriptor,
                               lambda: state_after(descriptor, TTT_EIGHT_FILLED), forced=8),
            _interaction_case(f"{g}-logic-interaction", descriptor, seed=3, decisions=3),
            _legal_action_case(f"{g}-logic-near-terminal", "logic", descriptor,
                               lambda: state_after(descriptor, (4, 0, 8, 2))),
        ]
    elif g == "connect4":
        cases += [
            _legal_action_case(f"{g}-function-forced-choice", "function", descriptor,
                               lambda: state_after(descriptor, C4_SIX_COLUMNS), forced=6),
            _interaction_case(f"{g}-logic-interaction", descriptor, seed=3),
            _legal_action_case(f"{g}-logic-midgame", "logic", descriptor,
                               lambda: state_after(descriptor, C4_SIX_COLUMNS[:12])),
        ]
    elif g == "reversi":
        cases += [
            _legal_action_case(f"{g}-function-midgame", "function", descriptor,
                               lambda: state_after(descriptor, REVERSI_PASS_PREFIX[:8])),
            _interaction_case(f"{g}-logic-interaction", descriptor, seed=3),
            _legal_action_case(f"{g}-logic-forced-pass", "logic", descriptor,
                               lambda: state_after(descriptor, REVERSI_PASS_PREFIX),
                               forced=64),
        ]
    elif g == "snake":
        cases += [
            _legal_action_case(f"{g}-function-midgame", "function", descriptor,
                               lambda: state_after(descriptor, (1, 3, 1, 3))),
            _interaction_case(f"{g}-logic-interaction", descriptor, seed=3),
            _legal_action_case(f"{g}-logic-near-wall", "logic", descriptor,
                               lambda: state_after(descriptor, (0, 2, 1, 1))),
        ]
    elif g == "sudoku":
        forced_d = _sudoku_near_complete(1)
        forced_action = legal_mask(reset(forced_d, 0), forced_d, 0).legal_actions()[0]
        scenario_d = _sudoku_near_complete(3)
        cases += [
            _legal_action_case(f"{g}-function-forced-choice", "function", forced_d,
                               lambda: reset(forced_d, 0), forced=forced_action),
            _interaction_case(f"{g}-logic-interaction", descriptor, seed=0, decisions=4),
            _legal_action_case(f"{g}-logic-near-complete", "logic", scenario_d,
                               lambda: reset(scenario_d, 0)),
        ]
    elif g == "2048":
        cases += [
            _legal_action_case(f"{g}-function-two-legal", "function", descriptor,
                               _board_2048_two_legal),
            _interaction_case(f"{g}-logic-interaction", descriptor, seed=5),
            _legal_action_case(f"{g}-logic-constrained", "logic", descriptor,
                               _board_2048_two_legal),
        ]
    elif g == "hanoi":
        from arena.games.puzzle import hanoi_optimal

        n = descriptor.config["n"]
        prefix = tuple(hanoi_optimal(n)[:3])
        cases += [
            _legal_action_case(f"{g}-function-midgame", "function", descriptor,
                               lambda: state_after(descriptor, prefix)),
            _interaction_case(f"{g}-logic-interaction", descriptor, seed=0),
            _legal_action_case(f"{g}-logic-deeper", "logic", descriptor,
                               lambda: state_after(descriptor, tuple(hanoi_optimal(n)[:5]))),
        ]
    elif g == "maze":
        forced_d = _maze_forced_descriptor()
        cases += [
            _legal_action_case(f"{g}-function-forced-choice", "function", forced_d,
                               lambda: reset(forced_d, 0), forced=MAZE_FORCED_ACTION),
            _interaction_case(f"{g}-logic-interaction", descriptor, seed=0),
            _legal_action_case(f"{g}-logic-midway", "logic", forced_d,
                               lambda: state_after(forced_d, (MAZE_FORCED_ACTION,))),
        ]
    elif g == "holdem":
        allin_d = _holdem_allin_descriptor()
        cases += [
            _legal_action_case(f"{g}-function-first-decision", "function", descriptor,
                               lambda: reset(descriptor, 4)),
            _interaction_case(f"{g}-logic-interaction", descriptor, seed=6),
            _legal_action_case(f"{g}-logic-all-in-situation", "logic", allin_d,
                               _holdem_allin_state, seat=1),
        ]
    else:
        raise ValueError(f"no suite for game {g!r}")

    terminal_d = descriptor
    if g == "holdem":
        from arena.games.cards import make_holdem

        terminal_d = make_holdem(seats=descriptor.seats,
                                 starting_stack=descriptor.config["starting_stack"],
                                 small_bet=descriptor.config["small_bet"], num_hands=2)
    cases += [
        _sentinel_case(f"{g}-robustness-empty-mask", terminal_d,
                       lambda: random_terminal_state(terminal_d, 21)),
        _sentinel_case(f"{g}-robustness-terminal-state", terminal_d,
                       lambda: random_terminal_state(terminal_d, 22)),
        _response_time_case(f"{g}-robustness-response-time", descriptor),
    ]
    return cases
