"""Single-player environments: Sudoku, 2048, Tower of Hanoi, and Maze.

Each game ships an instance generator (deterministic in its seed) and a
reference solver used both as an oracle in tests and as the backbone of the
builtin baseline agents. Challenge sets are serialized one JSON document per
instance so they can be versioned and replayed identically for every agent.
"""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass
from typing import Any, Iterable

from arena.engine import (
    ConfigurationError,
    GameDescriptor,
    GameState,
    RuleViolation,
    RulesEngine,
    register_game,
)


@dataclass(frozen=True)
class PuzzleInstance:
    game_id: str
    instance_seed: int
    payload: dict[str, Any]

    def to_json(self) -> str:
        return json.dumps(
            {"game_id": self.game_id, "seed": self.instance_seed, "payload": self.payload},
            sort_keys=True,
        )

    @staticmethod
    def from_json(text: str) -> "PuzzleInstance":
        doc = json.loads(text)
        return PuzzleInstance(doc["game_id"], doc["seed"], doc["payload"])


# ---------------------------------------------------------------------------
# Sudoku
# ---------------------------------------------------------------------------

_BOX_OF = tuple((r // 3) * 3 + (c // 3) for r in range(9) for c in range(9))
_CELLS_OF_UNIT: list[list[int]] = []
for r in range(9):
    _CELLS_OF_UNIT.append([r * 9 + c for c in range(9)])
for c in range(9):
    _CELLS_OF_UNIT.append([r * 9 + c for r in range(9)])
for b in range(9):
    _CELLS_OF_UNIT.append([i for i in range(81) if _BOX_OF[i] == b])

_PEERS: list[frozenset[int]] = []
for i in range(81):
    peers: set[int] = set()
    for unit in _CELLS_OF_UNIT:
        if i in unit:
            peers.update(unit)
    peers.discard(i)
    _PEERS.append(frozenset(peers))


def _candidates(grid: list[int], cell: int) -> int:
    """Bitmask of digits 1..9 placeable at `cell` (bit v-1 set = digit v ok)."""
    used = 0
    for p in _PEERS[cell]:
        v = grid[p]
        if v:
            used |= 1 << (v - 1)
    return 0x1FF & ~used


def _consistent(grid: Iterable[int]) -> bool:
    cells = list(grid)
    for unit in _CELLS_OF_UNIT:
        seen = 0
        for i in unit:
            v = cells[i]
            if v:
                bit = 1 << (v - 1)
                if seen & bit:
                    return False
                seen |= bit
    return True


def _count_solutions(grid: list[int], limit: int, rng: random.Random | None = None) -> tuple[int, list[int] | None]:
    """Backtracking count, stopping at `limit`; returns (count, first solution)."""
    first: list[int] | None = None

    def backtrack() -> int:
        best_cell, best_mask, best_n = -1, 0, 10
        for i in range(81):
            if grid[i] == 0:
                mask = _candidates(grid, i)
                n = bin(mask).count("1")
                if n == 0:
                    return 0
                if n < best_n:
                    best_cell, best_mask, best_n = i, mask, n
                    if n == 1:
                        break
        if best_cell == -1:
            nonlocal first
            if first is None:
                first = grid.copy()
            return 1
        digits = [v for v in range(1, 10) if best_mask & (1 << (v - 1))]
        if rng is not None:
            rng.shuffle(digits)
        found = 0
        for v in digits:
            grid[best_cell] = v
            found += backtrack()
            grid[best_cell] = 0
            if found >= limit:
                break
        return found

    return backtrack(), first


def solve_sudoku(grid: Iterable[int]) -> tuple[list[int] | None, int]:
    """Exact backtracking solve; solution count is capped at 2."""
    cells = list(grid)
    if len(cells) != 81:
        raise ConfigurationError(f"sudoku grid must have 81 cells, got {len(cells)}")
    if not _consistent(cells):
        return None, 0
    count, first = _count_solutions(cells, limit=2)
    return first, count


def generate_sudoku(seed: int, clues: int = 30) -> PuzzleInstance:
    """Unique-solution puzzle with exactly `clues` givens, deterministic in seed."""
    if not 24 <= clues <= 40:
        raise ConfigurationError(f"clue count must be in [24, 40], got {clues}")
    rng = random.Random(seed)
    for _ in range(20):  # bounded regeneration attempts
        full = [0] * 81
        count, solved = _count_solutions(full, limit=1, rng=rng)
        assert count == 1 and solved is not None
        grid = solved.copy()
        order = list(range(81))
        rng.shuffle(order)
        removed = 0
        target = 81 - clues
        for cell in order:
            if removed == target:
                break
            saved = grid[cell]
            grid[cell] = 0
            n, _ = _count_solutions(grid.copy(), limit=2)
            if n == 1:
                removed += 1
            else:
                grid[cell] = saved
        if removed == target:
            return PuzzleInstance("sudoku", seed, {"grid": grid, "clues": clues})
    raise ConfigurationError(f"could not reach {clues} clues for seed {seed}")


@dataclass(frozen=True)
class SudokuBoard:
    givens: tuple[int, ...]
    grid: tuple[int, ...]


class Sudoku(RulesEngine):
    def initial(self, descriptor, seed):
        grid = tuple(descriptor.config["grid"])
        return GameState(
            game_id=descriptor.game_id, step_index=0, to_act=0, terminal=False,
            scores=None, rng_state=None, board=SudokuBoard(grid, grid),
        )

    def observe_payload(self, descriptor, state, seat):
        board: SudokuBoard = state.board
        return {"grid": list(board.grid), "givens": list(board.givens), "to_act": 0}

    def mask_bits(self, descriptor, state, seat):
        board: SudokuBoard = state.board
        grid = list(board.grid)
        bits = [False] * 729
        for i in range(81):
            if grid[i] == 0:
                mask = _candidates(grid, i)
                r, c = divmod(i, 9)
                base = r * 81 + c * 9
                for v in range(9):
                    if mask & (1 << v):
                        bits[base + v] = True
        return tuple(bits)

    def apply(self, descriptor, state, seat, action):
        board: SudokuBoard = state.board
        r, rest = divmod(action, 81)
        c, v = divmod(rest, 9)
        cell = r * 9 + c
        grid = list(board.grid)
        if grid[cell] != 0 or not (_candidates(grid, cell) & (1 << v)):
            raise RuleViolation(seat, action, "placement violates row/column/box uniqueness")
        grid[cell] = v + 1
        new_board = SudokuBoard(board.givens, tuple(grid))
        if all(x != 0 for x in grid):
            return state.advanced(board=new_board, terminal=True, scores=(81.0,))
        return state.advanced(board=new_board)

    def current_score(self, descriptor, state):
        return float(sum(1 for x in state.board.grid if x != 0))

    def success(self, descriptor, state):
        return all(x != 0 for x in state.board.grid)


def make_sudoku(instance: PuzzleInstance) -> GameDescriptor:
    return GameDescriptor(
        game_id="sudoku", seats=1, action_space=729,
        observation_schema={
            "grid": "length-81 row-major list, 0 empty / 1..9 digit",
            "givens": "the original puzzle (immutable clues)",
            "to_act": "always 0; action = row*81 + col*9 + (digit-1)",
        },
        info_kind="perfect",
        config={"grid": list(instance.payload["grid"]), "step_cap": 81},
    )


# ---------------------------------------------------------------------------
# 2048
# ---------------------------------------------------------------------------


def _slide_row_left(row: list[int]) -> tuple[list[int], int]:
    """Compress and merge one row leftward; single merge per pair, leftmost first."""
    packed = [v for v in row if v]
    out: list[int] = []
    gained = 0
    i = 0
    while i < len(packed):
        if i + 1 < len(packed) and packed[i] == packed[i + 1]:
            out.append(packed[i] * 2)
            gained += packed[i] * 2
            i += 2
        else:
            out.append(packed[i])
            i += 1
    out.extend([0] * (4 - len(out)))
    return out, gained


def slide_2048(board: tuple[int, ...], action: int) -> tuple[tuple[int, ...], int]:
    """Slide the 4x4 board; actions 0=up 1=right 2=down 3=left."""
    cells = [list(board[r * 4:(r + 1) * 4]) for r in range(4)]
    if action in (0, 2):  # operate on columns
        cells = [list(col) for col in zip(*cells)]
    flip = action in (1, 2)
    gained = 0
    new_rows = []
    for row in cells:
        work = row[::-1] if flip else row
        slid, g = _slide_row_left(work)
        gained += g
        new_rows.append(slid[::-1] if flip else slid)
    if action in (0, 2):
        new_rows = [list(col) for col in zip(*new_rows)]
    return tuple(v for row in new_rows for v in row), gained


def _spawn_tile(board: list[int], rng: random.Random) -> None:
    value = 2 if rng.random() < 0.9 else 4
    empties = [i for i, v in enumerate(board) if v == 0]
    board[empties[rng.randrange(len(empties))]] = value


def _any_move_2048(board: tuple[int, ...]) -> bool:
    return any(slide_2048(board, a)[0] != board for a in range(4))


@dataclass(frozen=True)
class Board2048:
    cells: tuple[int, ...]
    score: int


class Game2048(RulesEngine):
    def initial(self, descriptor, seed):
        rng = random.Random(seed)
        cells = [0] * 16
        _spawn_tile(cells, rng)
        _spawn_tile(cells, rng)
        return GameState(
            game_id=descriptor.game_id, step_index=0, to_act=0, terminal=False,
            scores=None, rng_state=rng.getstate(), board=Board2048(tuple(cells), 0),
        )

    def observe_payload(self, descriptor, state, seat):
        board: Board2048 = state.board
        return {"board": list(board.cells), "score": board.score, "to_act": 0}

    def mask_bits(self, descriptor, state, seat):
        board: Board2048 = state.board
        return tuple(slide_2048(board.cells, a)[0] != board.cells for a in range(4))

    def apply(self, descriptor, state, seat, action):
        board: Board2048 = state.board
        slid, gained = slide_2048(board.cells, action)
        if slid == board.cells:
            raise RuleViolation(seat, action, "slide does not change the board")
        cells = list(slid)
        rng = random.Random()
        rng.setstate(state.rng_state)
        _spawn_tile(cells, rng)
        new_board = Board2048(tuple(cells), board.score + gained)
        if not _any_move_2048(new_board.cells):
            return state.advanced(board=new_board, rng_state=rng.getstate(),
                                  terminal=True, scores=(float(new_board.score),))
        return state.advanced(board=new_board, rng_state=rng.getstate())

    def current_score(self, descriptor, state):
        return float(state.board.score)

    def success(self, descriptor, state):
        return max(state.board.cells) >= 2048


def make_2048(seed: int = 0) -> GameDescriptor:
    return GameDescriptor(
        game_id="2048", seats=1, action_space=4,
        observation_schema={
            "board": "length-16 row-major list of tile values (0 empty)",
            "score": "cumulative merge score",
            "to_act": "always 0; actions 0=up 1=right 2=down 3=left",
        },
        info_kind="perfect+random",
        config={"seed": seed, "step_cap": 10_000},
    )


# ---------------------------------------------------------------------------
# Tower of Hanoi
# ---------------------------------------------------------------------------

HANOI_MOVES = ((0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1))


class Hanoi(RulesEngine):
    def initial(self, descriptor, seed):
        n = descriptor.config["n"]
        pegs = (tuple(range(n, 0, -1)), (), ())  # bottom-to-top disk sizes
        return GameState(
            game_id=descriptor.game_id, step_index=0, to_act=0, terminal=False,
            scores=None, rng_state=None, board=pegs,
        )

    def observe_payload(self, descriptor, state, seat):
        return {
            "pegs": [list(p) for p in state.board],
            "n": descriptor.config["n"],
            "to_act": 0,
        }

    def mask_bits(self, descriptor, state, seat):
        pegs = state.board
        bits = []
        for src, dst in HANOI_MOVES:
            ok = bool(pegs[src]) and (not pegs[dst] or pegs[dst][-1] > pegs[src][-1])
            bits.append(ok)
        return tuple(bits)

    def apply(self, descriptor, state, seat, action):
        pegs = [list(p) for p in state.board]
        src, dst = HANOI_MOVES[action]
        if not pegs[src] or (pegs[dst] and pegs[dst][-1] < pegs[src][-1]):
            raise RuleViolation(seat, action, "cannot place a larger disk on a smaller one")
        pegs[dst].append(pegs[src].pop())
        board = tuple(tuple(p) for p in pegs)
        n = descriptor.config["n"]
        if len(board[2]) == n:
            return state.advanced(board=board, terminal=True, scores=(float(n),))
        return state.advanced(board=board)

    def current_score(self, descriptor, state):
        return float(len(state.board[2]))

    def success(self, descriptor, state):
        return len(state.board[2]) == descriptor.config["n"]


def make_hanoi(n: int) -> GameDescriptor:
    if not 1 <= n <= 12:
        raise ConfigurationError(f"hanoi disk count must be in [1, 12], got {n}")
    return GameDescriptor(
        game_id="hanoi", seats=1, action_space=6,
        observation_schema={
            "pegs": "three bottom-to-top disk-size lists",
            "n": "disk count; goal is all disks on peg 2",
            "to_act": "always 0; actions = ordered peg pairs (0>1,0>2,1>0,1>2,2>0,2>1)",
        },
        info_kind="perfect",
        config={"n": n, "step_cap": 2 ** (n + 2)},
    )


def hanoi_optimal(n: int) -> list[int]:
    """Classic optimal action sequence of length 2**n - 1 (peg 0 to peg 2)."""
    if not 1 <= n <= 12:
        raise ConfigurationError(f"hanoi disk count must be in [1, 12], got {n}")
    moves: list[int] = []
    index = {pair: i for i, pair in enumerate(HANOI_MOVES)}

    def solve(k: int, src: int, dst: int, aux: int) -> None:
        if k == 0:
            return
        solve(k - 1, src, aux, dst)
        moves.append(index[(src, dst)])
        solve(k - 1, aux, dst, src)

    solve(n, 0, 2, 1)
    return moves


# ---------------------------------------------------------------------------
# Maze
# ---------------------------------------------------------------------------

MAZE_DIRS = ((-1, 0), (0, 1), (1, 0), (0, -1))  # U, R, D, L


def generate_maze(w: int, h: int, seed: int, visibility: str | int = "full") -> PuzzleInstance:
    """Perfect maze carved by seeded randomized depth-first search.

    Grid cells hold 1 for passage, 0 for wall; rooms live at odd coordinates.
    Start is the top-left room (1,1), exit the bottom-right room (h-2, w-2).
    `visibility` is "full" or an integer radius for partial observation.
    """
    if w < 5 or h < 5 or w % 2 == 0 or h % 2 == 0:
        raise ConfigurationError(f"maze dimensions must be odd and >= 5, got {w}x{h}")
    rng = random.Random(seed)
    grid = [[0] * w for _ in range(h)]
    start = (1, 1)
    grid[1][1] = 1
    stack = [start]
    visited = {start}
    while stack:
        r, c = stack[-1]
        options = []
        for dr, dc in MAZE_DIRS:
            nr, nc = r + 2 * dr, c + 2 * dc
            if 0 < nr < h and 0 < nc < w and (nr, nc) not in visited:
                options.append((nr, nc, r + dr, c + dc))
        if options:
            nr, nc, wr, wc = options[rng.randrange(len(options))]
            grid[wr][wc] = 1
            grid[nr][nc] = 1
            visited.add((nr, nc))
            stack.append((nr, nc))
        else:
            stack.pop()
    flat = [grid[r][c] for r in range(h) for c in range(w)]
    payload = {
        "w": w, "h": h, "grid": flat,
        "start": [1, 1], "exit": [h - 2, w - 2],
        "visibility": visibility,
    }
    return PuzzleInstance("maze", seed, payload)


def _maze_bfs(grid: tuple[int, ...], w: int, h: int, src: tuple[int, int], dst: tuple[int, int]) -> int:
    """Shortest path length in steps between passage cells; -1 if unreachable."""
    if src == dst:
        return 0
    seen = {src}
    frontier = deque([(src, 0)])
    while frontier:
        (r, c), d = frontier.popleft()
        for dr, dc in MAZE_DIRS:
            nr, nc = r + dr, c + dc
            if 0 <= nr < h and 0 <= nc < w and grid[nr * w + nc] and (nr, nc) not in seen:
                if (nr, nc) == dst:
                    return d + 1
                seen.add((nr, nc))
                frontier.append(((nr, nc), d + 1))
    return -1


def shortest_path(instance: PuzzleInstance) -> int:
    p = instance.payload
    return _maze_bfs(tuple(p["grid"]), p["w"], p["h"], tuple(p["start"]), tuple(p["exit"]))


@dataclass(frozen=True)
class MazeBoard:
    pos: tuple[int, int]


class Maze(RulesEngine):
    def initial(self, descriptor, seed):
        cfg = descriptor.config
        return GameState(
            game_id=descriptor.game_id, step_index=0, to_act=0, terminal=False,
            scores=None, rng_state=None, board=MazeBoard(tuple(cfg["start"])),
        )

    def observe_payload(self, descriptor, state, seat):
        cfg = descriptor.config
        w, h = cfg["w"], cfg["h"]
        grid = cfg["grid"]
        pos = state.board.pos
        visibility = cfg["visibility"]
        payload: dict[str, Any] = {
            "w": w, "h": h,
            "pos": list(pos), "exit": list(cfg["exit"]),
            "visibility": visibility, "to_act": 0,
        }
        if visibility == "full":
            payload["grid"] = list(grid)
        else:
            radius = int(visibility)
            cells = []
            for r in range(pos[0] - radius, pos[0] + radius + 1):
                for c in range(pos[1] - radius, pos[1] + radius + 1):
                    if 0 <= r < h and 0 <= c < w:
                        cells.append([r, c, grid[r * w + c]])
            payload["cells"] = cells
        return payload

    def mask_bits(self, descriptor, state, seat):
        cfg = descriptor.config
        w, h, grid = cfg["w"], cfg["h"], cfg["grid"]
        r, c = state.board.pos
        bits = []
        for dr, dc in MAZE_DIRS:
            nr, nc = r + dr, c + dc
            bits.append(0 <= nr < h and 0 <= nc < w and bool(grid[nr * w + nc]))
        return tuple(bits)

    def apply(self, descriptor, state, seat, action):
        cfg = descriptor.config
        w, h, grid = cfg["w"], cfg["h"], cfg["grid"]
        dr, dc = MAZE_DIRS[action]
        r, c = state.board.pos
        nr, nc = r + dr, c + dc
        if not (0 <= nr < h and 0 <= nc < w) or not grid[nr * w + nc]:
            raise RuleViolation(seat, action, "move into a wall")
        new_board = MazeBoard((nr, nc))
        if (nr, nc) == tuple(cfg["exit"]):
            return state.advanced(board=new_board, terminal=True, scores=(0.0,))
        return state.advanced(board=new_board)

    def current_score(self, descriptor, state):
        cfg = descriptor.config
        dist = _maze_bfs(tuple(cfg["grid"]), cfg["w"], cfg["h"], state.board.pos, tuple(cfg["exit"]))
        return -float(dist)

    def success(self, descriptor, state):
        return state.board.pos == tuple(descriptor.config["exit"])


def make_maze(instance: PuzzleInstance) -> GameDescriptor:
    p = instance.payload
    return GameDescriptor(
        game_id="maze", seats=1, action_space=4,
        observation_schema={
            "grid": "flat h*w list, 1 passage / 0 wall (full visibility only)",
            "cells": "[row, col, passage] triples within the radius (partial only)",
            "pos": "current cell", "exit": "goal cell",
            "to_act": "always 0; actions 0=U 1=R 2=D 3=L",
        },
        info_kind="perfect" if p["visibility"] == "full" else "partial",
        config={
            "w": p["w"], "h": p["h"], "grid": list(p["grid"]),
            "start": list(p["start"]), "exit": list(p["exit"]),
            "visibility": p["visibility"], "step_cap": 4 * p["w"] * p["h"],
        },
    )


# ---------------------------------------------------------------------------
# Challenge sets
# ---------------------------------------------------------------------------

SUDOKU_CLUE_TIERS = (36, 30, 26)
MAZE_SIZE_TIERS = (11, 21, 31)
HANOI_DISK_TIERS = (4, 6, 8)


def default_challenge_set(game_id: str, seed: int, size: int) -> list[PuzzleInstance]:
    """Standardized per-game instance set, deterministic in (seed, size)."""
    rng = random.Random(seed)
    instances: list[PuzzleInstance] = []
    for k in range(size):
        inst_seed = rng.getrandbits(63)
        if game_id == "sudoku":
            clues = SUDOKU_CLUE_TIERS[k % len(SUDOKU_CLUE_TIERS)]
            instances.append(generate_sudoku(inst_seed, clues))
        elif game_id == "maze":
            side = MAZE_SIZE_TIERS[k % len(MAZE_SIZE_TIERS)]
            instances.append(generate_maze(side, side, inst_seed))
        elif game_id == "hanoi":
            n = HANOI_DISK_TIERS[k % len(HANOI_DISK_TIERS)]
            instances.append(PuzzleInstance("hanoi", inst_seed, {"n": n}))
        elif game_id == "2048":
            instances.append(PuzzleInstance("2048", inst_seed, {"seed": inst_seed}))
        else:
            raise ConfigurationError(f"{game_id!r} is not a single-player game")
    return instances


def descriptor_for_instance(instance: PuzzleInstance) -> GameDescriptor:
    if instance.game_id == "sudoku":
        return make_sudoku(instance)
    if instance.game_id == "maze":
        return make_maze(instance)
    if instance.game_id == "hanoi":
        return make_hanoi(instance.payload["n"])
    if instance.game_id == "2048":
        return make_2048(instance.payload.get("seed", instance.instance_seed))
    raise ConfigurationError(f"no descriptor constructor for {instance.game_id!r}")


register_game("sudoku", Sudoku())
register_game("2048", Game2048())
register_game("hanoi", Hanoi())
register_game("maze", Maze())
