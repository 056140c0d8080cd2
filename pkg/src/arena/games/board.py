"""Rules engines for the two-player board and spatial games.

Tic-Tac-Toe, Connect Four, Reversi, and two-player Snake. Board encodings
are absolute: 0 = empty, 1 = seat 0, 2 = seat 1. Seat 0 always moves first.
`minimax_value` is the exact full-tree oracle for Tic-Tac-Toe used to
calibrate reference agents and acceptance tests.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache


from arena.engine import (
    ConfigurationError,
    GameDescriptor,
    GameState,
    RulesEngine,
    register_game,
)

# ---------------------------------------------------------------------------
# Tic-Tac-Toe
# ---------------------------------------------------------------------------

TTT_LINES = (
    (0, 1, 2), (3, 4, 5), (6, 7, 8),
    (0, 3, 6), (1, 4, 7), (2, 5, 8),
    (0, 4, 8), (2, 4, 6),
)


def ttt_winner(cells: tuple[int, ...]) -> int:
    """0 = no winner yet, 1/2 = winning mark."""
    for a, b, c in TTT_LINES:
        if cells[a] != 0 and cells[a] == cells[b] == cells[c]:
            return cells[a]
    return 0


class TicTacToe(RulesEngine):
    def initial(self, descriptor: GameDescriptor, seed: int) -> GameState:
        return GameState(
            game_id=descriptor.game_id, step_index=0, to_act=0, terminal=False,
            scores=None, rng_state=None, board=(0,) * 9,
        )

    def observe_payload(self, descriptor, state, seat):
        return {"cells": list(state.board), "to_act": state.to_act}

    def mask_bits(self, descriptor, state, seat):
        return tuple(c == 0 for c in state.board)

    def apply(self, descriptor, state, seat, action):
        from arena.engine import RuleViolation

        if state.board[action] != 0:
            raise RuleViolation(seat, action, "cell occupied")
        cells = list(state.board)
        cells[action] = seat + 1
        cells = tuple(cells)
        winner = ttt_winner(cells)
        if winner:
            scores = (1.0, -1.0) if winner == 1 else (-1.0, 1.0)
            return state.advanced(board=cells, terminal=True, scores=scores, to_act=1 - seat)
        if all(c != 0 for c in cells):
            return state.advanced(board=cells, terminal=True, scores=(0.0, 0.0), to_act=1 - seat)
        return state.advanced(board=cells, to_act=1 - seat)


@lru_cache(maxsize=None)
def _ttt_minimax(cells: tuple[int, ...], to_act: int) -> int:
    winner = ttt_winner(cells)
    if winner:
        return 1 if winner == to_act + 1 else -1
    if all(c != 0 for c in cells):
        return 0
    best = -2
    for i in range(9):
        if cells[i] == 0:
            child = cells[:i] + (to_act + 1,) + cells[i + 1:]
            best = max(best, -_ttt_minimax(child, 1 - to_act))
            if best == 1:
                break
    return best


def minimax_value(state: GameState, game: str = "tictactoe") -> int:
    """Exact game-theoretic value in {-1, 0, +1} for the seat to act."""
    if game != "tictactoe":
        raise ConfigurationError(f"minimax oracle only covers tictactoe, not {game!r}")
    return _ttt_minimax(tuple(state.board), state.to_act)


def make_tictactoe() -> GameDescriptor:
    return GameDescriptor(
        game_id="tictactoe", seats=2, action_space=9,
        observation_schema={
            "cells": "length-9 row-major list, 0 empty / 1 seat0 / 2 seat1",
            "to_act": "seat index to move",
        },
        info_kind="perfect",
        config={"step_cap": 9},
    )


# ---------------------------------------------------------------------------
# Connect Four
# ---------------------------------------------------------------------------

C4_ROWS, C4_COLS = 6, 7


def _c4_landing_row(cells: tuple[int, ...], col: int) -> int | None:
    """Lowest empty row in a column (row 0 is the top); None when full."""
    for r in range(C4_ROWS - 1, -1, -1):
        if cells[r * C4_COLS + col] == 0:
            return r
    return None


def _c4_wins(cells: tuple[int, ...], r: int, c: int, mark: int) -> bool:
    for dr, dc in ((0, 1), (1, 0), (1, 1), (1, -1)):
        count = 1
        for sign in (1, -1):
            rr, cc = r + dr * sign, c + dc * sign
            while 0 <= rr < C4_ROWS and 0 <= cc < C4_COLS and cells[rr * C4_COLS + cc] == mark:
                count += 1
                rr += dr * sign
                cc += dc * sign
        if count >= 4:
            return True
    return False


class ConnectFour(RulesEngine):
    def initial(self, descriptor, seed):
        return GameState(
            game_id=descriptor.game_id, step_index=0, to_act=0, terminal=False,
            scores=None, rng_state=None, board=(0,) * 42,
        )

    def observe_payload(self, descriptor, state, seat):
        return {"cells": list(state.board), "rows": C4_ROWS, "cols": C4_COLS, "to_act": state.to_act}

    def mask_bits(self, descriptor, state, seat):
        return tuple(state.board[col] == 0 for col in range(C4_COLS))

    def apply(self, descriptor, state, seat, action):
        from arena.engine import RuleViolation

        row = _c4_landing_row(state.board, action)
        if row is None:
            raise RuleViolation(seat, action, "column full")
        cells = list(state.board)
        cells[row * C4_COLS + action] = seat + 1
        cells = tuple(cells)
        if _c4_wins(cells, row, action, seat + 1):
            scores = (1.0, -1.0) if seat == 0 else (-1.0, 1.0)
            return state.advanced(board=cells, terminal=True, scores=scores, to_act=1 - seat)
        if all(c != 0 for c in cells):
            return state.advanced(board=cells, terminal=True, scores=(0.0, 0.0), to_act=1 - seat)
        return state.advanced(board=cells, to_act=1 - seat)


def make_connect4() -> GameDescriptor:
    return GameDescriptor(
        game_id="connect4", seats=2, action_space=7,
        observation_schema={
            "cells": "length-42 row-major list (6 rows x 7 cols, row 0 on top)",
            "to_act": "seat index to move; action = column to drop into",
        },
        info_kind="perfect",
        config={"step_cap": 42},
    )


# ---------------------------------------------------------------------------
# Reversi
# ---------------------------------------------------------------------------

REVERSI_PASS = 64
_DIRS8 = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


@dataclass(frozen=True)
class ReversiBoard:
    cells: tuple[int, ...]
    pass_count: int


def reversi_flips(cells: tuple[int, ...], seat: int, idx: int) -> list[int]:
    """Indices flipped by `seat` playing at `idx`; empty list = illegal placement."""
    if cells[idx] != 0:
        return []
    me, opp = seat + 1, 2 - seat
    r0, c0 = divmod(idx, 8)
    flips: list[int] = []
    for dr, dc in _DIRS8:
        run: list[int] = []
        r, c = r0 + dr, c0 + dc
        while 0 <= r < 8 and 0 <= c < 8 and cells[r * 8 + c] == opp:
            run.append(r * 8 + c)
            r += dr
            c += dc
        if run and 0 <= r < 8 and 0 <= c < 8 and cells[r * 8 + c] == me:
            flips.extend(run)
    return flips


def reversi_has_move(cells: tuple[int, ...], seat: int) -> bool:
    return any(reversi_flips(cells, seat, i) for i in range(64) if cells[i] == 0)


def _reversi_final(cells: tuple[int, ...]) -> tuple[float, float]:
    black = sum(1 for c in cells if c == 1)
    white = sum(1 for c in cells if c == 2)
    if black > white:
        return (1.0, -1.0)
    if white > black:
        return (-1.0, 1.0)
    return (0.0, 0.0)


class Reversi(RulesEngine):
    def initial(self, descriptor, seed):
        cells = [0] * 64
        cells[3 * 8 + 3] = 2  # d4 white
        cells[4 * 8 + 4] = 2  # e5 white
        cells[3 * 8 + 4] = 1  # e4 black
        cells[4 * 8 + 3] = 1  # d5 black
        return GameState(
            game_id=descriptor.game_id, step_index=0, to_act=0, terminal=False,
            scores=None, rng_state=None, board=ReversiBoard(tuple(cells), 0),
        )

    def observe_payload(self, descriptor, state, seat):
        return {
            "cells": list(state.board.cells),
            "pass_count": state.board.pass_count,
            "to_act": state.to_act,
        }

    def mask_bits(self, descriptor, state, seat):
        cells = state.board.cells
        bits = [bool(reversi_flips(cells, seat, i)) for i in range(64)]
        bits.append(not any(bits))  # pass legal only when no flipping move exists
        return tuple(bits)

    def apply(self, descriptor, state, seat, action):
        from arena.engine import RuleViolation

        board: ReversiBoard = state.board
        if action == REVERSI_PASS:
            if reversi_has_move(board.cells, seat):
                raise RuleViolation(seat, action, "pass while a flipping move exists")
            new_board = ReversiBoard(board.cells, board.pass_count + 1)
            if new_board.pass_count >= 2:
                scores = _reversi_final(new_board.cells)
                return state.advanced(board=new_board, terminal=True, scores=scores, to_act=1 - seat)
            return state.advanced(board=new_board, to_act=1 - seat)
        flips = reversi_flips(board.cells, seat, action)
        if not flips:
            raise RuleViolation(seat, action, "placement flips nothing")
        cells = list(board.cells)
        cells[action] = seat + 1
        for i in flips:
            cells[i] = seat + 1
        new_board = ReversiBoard(tuple(cells), 0)
        if all(c != 0 for c in new_board.cells):
            scores = _reversi_final(new_board.cells)
            return state.advanced(board=new_board, terminal=True, scores=scores, to_act=1 - seat)
        return state.advanced(board=new_board, to_act=1 - seat)


def make_reversi() -> GameDescriptor:
    return GameDescriptor(
        game_id="reversi", seats=2, action_space=65,
        observation_schema={
            "cells": "length-64 row-major list, 0 empty / 1 seat0 (black) / 2 seat1 (white)",
            "pass_count": "consecutive passes so far",
            "to_act": "seat index to move; action 0..63 places, 64 passes",
        },
        info_kind="perfect",
        config={"step_cap": 130},
    )


# ---------------------------------------------------------------------------
# Two-player Snake
# ---------------------------------------------------------------------------

SNAKE_DIRS = ((-1, 0), (0, 1), (1, 0), (0, -1))  # U, R, D, L


@dataclass(frozen=True)
class SnakeBoard:
    n: int
    bodies: tuple[tuple[tuple[int, int], ...], tuple[tuple[int, int], ...]]
    food: tuple[int, int]
    pending: tuple[int, int] | None  # (seat, action) buffered until the tick resolves


def _snake_spawn_food(rng: random.Random, n: int, occupied: set[tuple[int, int]]) -> tuple[int, int]:
    empties = [(r, c) for r in range(n) for c in range(n) if (r, c) not in occupied]
    if not empties:  # board saturated; park the food out of reach
        return (-1, -1)
    return empties[rng.randrange(len(empties))]


def _resolve_tick(
    board: SnakeBoard, a0: int, a1: int, rng: random.Random
) -> tuple[SnakeBoard, tuple[bool, bool]]:
    """Apply both actions simultaneously; returns (new board, per-seat dead flags)."""
    n = board.n
    heads = [board.bodies[0][0], board.bodies[1][0]]
    moves = [SNAKE_DIRS[a0], SNAKE_DIRS[a1]]
    new_heads = [(heads[i][0] + moves[i][0], heads[i][1] + moves[i][1]) for i in (0, 1)]
    grows = [new_heads[i] == board.food for i in (0, 1)]
    new_bodies = []
    for i in (0, 1):
        body = (new_heads[i],) + board.bodies[i]
        if not grows[i]:
            body = body[:-1]
        new_bodies.append(body)

    dead = [False, False]
    for i in (0, 1):
        r, c = new_heads[i]
        if not (0 <= r < n and 0 <= c < n):
            dead[i] = True
    # Head-on: same target cell, or heads swapping through each other.
    lengths = [len(board.bodies[0]), len(board.bodies[1])]
    head_on = new_heads[0] == new_heads[1] or (
        new_heads[0] == heads[1] and new_heads[1] == heads[0]
    )
    if head_on:
        if lengths[0] == lengths[1]:
            dead[0] = dead[1] = True
        else:
            dead[lengths.index(min(lengths))] = True
    else:
        occupied_after = set(new_bodies[0][1:]) | set(new_bodies[1][1:])
        for i in (0, 1):
            if new_heads[i] in occupied_after:
                dead[i] = True

    food = board.food
    if any(grows) and not any(dead):
        occ = set(new_bodies[0]) | set(new_bodies[1])
        food = _snake_spawn_food(rng, n, occ)
    return (
        SnakeBoard(n=n, bodies=(new_bodies[0], new_bodies[1]), food=food, pending=None),
        (dead[0], dead[1]),
    )


class Snake(RulesEngine):
    def initial(self, descriptor, seed):
        n = descriptor.config["n"]
        body0 = ((1, 3), (1, 2), (1, 1))
        body1 = ((n - 2, n - 4), (n - 2, n - 3), (n - 2, n - 2))
        rng = random.Random(seed)
        food = _snake_spawn_food(rng, n, set(body0) | set(body1))
        return GameState(
            game_id=descriptor.game_id, step_index=0, to_act=0, terminal=False,
            scores=None, rng_state=rng.getstate(),
            board=SnakeBoard(n=n, bodies=(body0, body1), food=food, pending=None),
        )

    def observe_payload(self, descriptor, state, seat):
        board: SnakeBoard = state.board
        # Prior-tick visibility: the buffered opponent action is never shown.
        return {
            "grid": board.n,
            "you": seat,
            "snakes": [
                {"body": [list(p) for p in board.bodies[i]], "length": len(board.bodies[i])}
                for i in (0, 1)
            ],
            "food": list(board.food),
            "to_act": state.to_act,
        }

    def mask_bits(self, descriptor, state, seat):
        # Every direction is always playable; fatal moves lose rather than reject.
        return (True, True, True, True)

    def apply(self, descriptor, state, seat, action):
        board: SnakeBoard = state.board
        if board.pending is None:
            return state.advanced(board=SnakeBoard(board.n, board.bodies, board.food, (seat, action)), to_act=1 - seat)
        pending_seat, pending_action = board.pending
        actions = {pending_seat: pending_action, seat: action}
        rng = random.Random()
        rng.setstate(state.rng_state)
        new_board, dead = _resolve_tick(board, actions[0], actions[1], rng)
        if any(dead):
            if all(dead):
                scores = (0.0, 0.0)
            else:
                scores = (1.0, -1.0) if dead[1] else (-1.0, 1.0)
            return state.advanced(
                board=new_board, terminal=True, scores=scores, to_act=pending_seat, rng_state=rng.getstate()
            )
        return state.advanced(board=new_board, to_act=pending_seat, rng_state=rng.getstate())

    def cap_terminate(self, descriptor, state):
        board: SnakeBoard = state.board
        l0, l1 = len(board.bodies[0]), len(board.bodies[1])
        if l0 > l1:
            scores = (1.0, -1.0)
        elif l1 > l0:
            scores = (-1.0, 1.0)
        else:
            scores = (0.0, 0.0)
        return state.advanced(terminal=True, scores=scores, step_index=state.step_index)


def make_snake(n: int) -> GameDescriptor:
    if n < 6:
        raise ConfigurationError(f"snake grid must be at least 6x6, got {n}")
    return GameDescriptor(
        game_id="snake", seats=2, action_space=4,
        observation_schema={
            "grid": "board side length",
            "you": "your seat index",
            "snakes": "per-seat body cell lists, head first",
            "food": "food cell [row, col]",
            "to_act": "seat index to move; actions 0=U 1=R 2=D 3=L",
        },
        info_kind="perfect",
        config={"n": n, "step_cap": 4 * n * n},
    )


register_game("tictactoe", TicTacToe())
register_game("connect4", ConnectFour())
register_game("reversi", Reversi())
register_game("snake", Snake())
