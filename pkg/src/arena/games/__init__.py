"""Game registry: importing this package registers all nine environments."""

from arena.games.board import (
    make_connect4,
    make_reversi,
    make_snake,
    make_tictactoe,
    minimax_value,
)
from arena.games.cards import evaluate_hand, make_holdem, rank5, settle_showdown
from arena.games.puzzle import (
    PuzzleInstance,
    default_challenge_set,
    descriptor_for_instance,
    generate_maze,
    generate_sudoku,
    hanoi_optimal,
    make_2048,
    make_hanoi,
    make_maze,
    make_sudoku,
    shortest_path,
    solve_sudoku,
)

GAME_IDS = (
    "sudoku", "2048", "hanoi", "maze",
    "tictactoe", "connect4", "reversi", "snake",
    "holdem",
)

SINGLE_PLAYER = ("sudoku", "2048", "hanoi", "maze")
TWO_PLAYER = ("tictactoe", "connect4", "reversi", "snake")
MULTI_PLAYER = ("holdem",)


def default_descriptor(game_id: str, **overrides):
    """Descriptor with stock parameters; puzzle games get a seed-0 instance."""
    from arena.engine import ConfigurationError

    if game_id == "tictactoe":
        return make_tictactoe()
    if game_id == "connect4":
        return make_connect4()
    if game_id == "reversi":
        return make_reversi()
    if game_id == "snake":
        return make_snake(overrides.get("n", 10))
    if game_id == "holdem":
        return make_holdem(
            seats=overrides.get("seats", 2),
            starting_stack=overrides.get("starting_stack", 200),
            small_bet=overrides.get("small_bet", 2),
            num_hands=overrides.get("num_hands", 50),
        )
    if game_id == "hanoi":
        return make_hanoi(overrides.get("n", 6))
    if game_id == "2048":
        return make_2048(overrides.get("seed", 0))
    if game_id == "sudoku":
        inst = generate_sudoku(overrides.get("seed", 0), overrides.get("clues", 30))
        return make_sudoku(inst)
    if game_id == "maze":
        side = overrides.get("size", 11)
        inst = generate_maze(side, side, overrides.get("seed", 0),
                             overrides.get("visibility", "full"))
        return make_maze(inst)
    raise ConfigurationError(f"unknown game_id: {game_id!r}")
