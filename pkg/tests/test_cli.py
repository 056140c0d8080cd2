"""CLI subcommands, config validation, and pipeline reproducibility."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from arena.cli import main
from arena.config import ConfigError, load_config, parse_config

FIXTURES = Path(__file__).parent / "fixtures"


def write_config(tmp_path: Path, **overrides) -> Path:
    cfg = {
        "seed": 5,
        "rounds": 1,
        "workers": 1,
        "timing_mode": "logical",
        "out_dir": str(tmp_path / "runs"),
        "move_timeout_seconds": 5.0,
        "games": [{"game_id": "tictactoe"}],
        "coders": [
            {"name": "good", "kind": "static", "sources": [str(FIXTURES / "first_legal.py")]},
        ],
        "builtins": ["random", "reference"],
    }
    cfg.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


# -- config parsing ------------------------------------------------------------


def test_parse_config_defaults():
    cfg = parse_config({"games": [{"game_id": "maze"}]})
    assert cfg.rounds == 5
    assert cfg.move_timeout_seconds == 45.0
    assert cfg.rating.mu0 == 25.0
    assert cfg.builtins == ["random", "reference"]


def test_parse_config_rejects_unknown_top_key():
    with pytest.raises(ConfigError, match="tournament_style"):
        parse_config({"games": [{"game_id": "maze"}], "tournament_style": "x"})


def test_parse_config_rejects_unknown_nested_key():
    with pytest.raises(ConfigError, match=r"games\[0\]\.boards"):
        parse_config({"games": [{"game_id": "maze", "boards": 3}]})


def test_parse_config_rejects_unknown_game():
    with pytest.raises(ConfigError, match="checkers"):
        parse_config({"games": [{"game_id": "checkers"}]})


def test_parse_config_rejects_bad_rating_key():
    with pytest.raises(ConfigError, match="rating.kappa"):
        parse_config({"games": [{"game_id": "maze"}], "rating": {"kappa": 1}})


def test_parse_config_requires_static_sources():
    with pytest.raises(ConfigError, match="sources"):
        parse_config({"games": [{"game_id": "maze"}],
                      "coders": [{"name": "s", "kind": "static"}]})


def test_load_config_json(tmp_path):
    path = write_config(tmp_path)
    cfg = load_config(str(path))
    assert cfg.games[0].game_id == "tictactoe"
    assert cfg.timing_mode == "logical"


def test_load_config_toml(tmp_path):
    pytest.importorskip("tomli")
    path = tmp_path / "config.toml"
    path.write_text('seed = 3\n[[games]]\ngame_id = "maze"\n')
    cfg = load_config(str(path))
    assert cfg.seed == 3 and cfg.games[0].game_id == "maze"


# -- run + determinism ------------------------------------------------------------


def test_run_pipeline_writes_artifacts(tmp_path, capsys):
    path = write_config(tmp_path, run_id="artifacts")
    assert main(["run", "--config", str(path)]) == 0
    run_dir = tmp_path / "runs" / "artifacts"
    for name in ("leaderboard.csv", "leaderboard.json", "metrics.json",
                 "metrics.csv", "transcripts.ndjson"):
        assert (run_dir / name).exists(), name
    out = capsys.readouterr().out
    assert "deployed" in out


def test_run_pipeline_deterministic_bytes(tmp_path):
    path_a = write_config(tmp_path, run_id="same")
    assert main(["run", "--config", str(path_a)]) == 0
    first = {
        name: (tmp_path / "runs" / "same" / name).read_bytes()
        for name in ("metrics.json", "transcripts.ndjson", "leaderboard.csv")
    }
    assert main(["run", "--config", str(path_a)]) == 0
    for name, data in first.items():
        assert (tmp_path / "runs" / "same" / name).read_bytes() == data, name


def test_run_rejected_candidate_still_exit_zero(tmp_path):
    broken = tmp_path / "broken.py"
    broken.write_text("def nope(:\n")
    path = write_config(
        tmp_path, run_id="rejects",
        coders=[{"name": "bad", "kind": "static", "sources": [str(broken)]},
                {"name": "good", "kind": "static",
                 "sources": [str(FIXTURES / "first_legal.py")]}],
    )
    assert main(["run", "--config", str(path)]) == 0
    metrics = json.loads((tmp_path / "runs" / "rejects" / "metrics.json").read_text())
    coders = metrics["metrics"]["coders"]
    assert coders["bad"]["deployed"] == 0
    assert coders["bad"]["participation_pct"] == 0.0
    assert coders["good"]["participation_pct"] == 100.0


def test_run_unknown_game_exit_2(tmp_path, capsys):
    path = write_config(tmp_path, games=[{"game_id": "chess"}])
    assert main(["run", "--config", str(path)]) == 2
    assert "chess" in capsys.readouterr().err


def test_run_unknown_key_exit_2(tmp_path, capsys):
    path = write_config(tmp_path, extra_knob=1)
    assert main(["run", "--config", str(path)]) == 2
    assert "extra_knob" in capsys.readouterr().err


def test_timeout_flag_validation(tmp_path, capsys):
    path = write_config(tmp_path)
    assert main(["run", "--config", str(path), "--timeout-seconds", "-1"]) == 2


# -- other subcommands -------------------------------------------------------------


def test_play_prints_record(capsys):
    assert main(["play", "tictactoe", "builtin:reference", "builtin:random",
                 "--seed", "1"]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["game_id"] == "tictactoe"
    assert record["outcome"]["kind"] in ("winner", "draw", "forfeit")


def test_play_single_player(capsys):
    assert main(["play", "hanoi", "builtin:reference", "--seed", "0"]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["outcome"]["kind"] == "winner"
    assert len(record["steps"]) == 63  # 2^6 - 1 with the default six disks


def test_play_bad_spec(capsys):
    assert main(["play", "tictactoe", "wat:huh", "builtin:random"]) == 2


def test_validate_subcommand(tmp_path, capsys):
    path = write_config(tmp_path)
    assert main(["validate", "--config", str(path)]) == 0
    out = capsys.readouterr().out
    assert "PASS good tictactoe" in out


def test_rate_deterministic_over_transcripts(tmp_path, capsys):
    path = write_config(tmp_path, run_id="forrate")
    assert main(["run", "--config", str(path)]) == 0
    capsys.readouterr()
    transcripts = str(tmp_path / "runs" / "forrate" / "transcripts.ndjson")
    assert main(["rate", "--transcripts", transcripts]) == 0
    first = capsys.readouterr().out
    assert main(["rate", "--transcripts", transcripts]) == 0
    second = capsys.readouterr().out
    assert first == second
    payload = json.loads(first)
    assert "tictactoe" in payload


def test_report_formats_consistent(tmp_path, capsys):
    path = write_config(tmp_path, run_id="forreport")
    assert main(["run", "--config", str(path)]) == 0
    run_dir = str(tmp_path / "runs" / "forreport")
    capsys.readouterr()
    assert main(["report", "--run", run_dir, "--format", "json"]) == 0
    as_json = json.loads(capsys.readouterr().out)
    assert main(["report", "--run", run_dir, "--format", "csv"]) == 0
    as_csv = capsys.readouterr().out
    header = as_csv.splitlines()[0].split(",")
    assert header[0] == "agent_id"
    for agent in as_json["average_ranks"]:
        assert agent in as_csv


def test_report_missing_run(capsys):
    assert main(["report", "--run", "/nonexistent", "--format", "json"]) == 2


def test_run_with_relative_out_dir(tmp_path, monkeypatch):
    """Agent subprocesses run from scratch dirs; relative output roots must
    not break candidate source resolution (regression)."""
    monkeypatch.chdir(tmp_path)
    path = write_config(tmp_path, out_dir="rel-runs", run_id="rel")
    assert main(["run", "--config", str(path)]) == 0
    metrics = json.loads((tmp_path / "rel-runs" / "rel" / "metrics.json").read_text())
    assert metrics["metrics"]["coders"]["good"]["participation_pct"] == 100.0


def test_sdk_launcher_pipeline(tmp_path):
    pytest.importorskip("arena_sdk", reason="install the secondary package: pip install -e ./sdk")
    agent_source = tmp_path / "class_agent.py"
    agent_source.write_text(
        "from arena_sdk import BaseAgent\n\n"
        "class FirstLegal(BaseAgent):\n"
        "    def select_action(self, observation, action_mask):\n"
        "        return next((i for i, b in enumerate(action_mask) if b), None)\n"
    )
    path = write_config(
        tmp_path, run_id="sdklaunch", launcher="sdk",
        coders=[{"name": "classy", "kind": "static", "sources": [str(agent_source)]}],
    )
    assert main(["run", "--config", str(path)]) == 0
    metrics = json.loads((tmp_path / "runs" / "sdklaunch" / "metrics.json").read_text())
    assert metrics["metrics"]["coders"]["classy"]["participation_pct"] == 100.0
    assert "classy" in metrics["average_ranks"]


@pytest.mark.slow
def test_full_nine_game_sweep(tmp_path):
    """One round over every environment with builtin baselines only."""
    cfg = {
        "seed": 3,
        "rounds": 1,
        "workers": 2,
        "timing_mode": "logical",
        "out_dir": str(tmp_path / "runs"),
        "run_id": "sweep",
        "move_timeout_seconds": 30.0,
        "games": [
            {"game_id": "tictactoe"},
            {"game_id": "connect4"},
            {"game_id": "reversi"},
            {"game_id": "snake", "params": {"n": 8}},
            {"game_id": "sudoku", "instances": 2},
            {"game_id": "2048", "instances": 2},
            {"game_id": "hanoi", "instances": 2},
            {"game_id": "maze", "instances": 2},
            {"game_id": "holdem",
             "params": {"seats": 3, "num_hands": 10}, "table_size": 3,
             "tables_budget": 3, "schedule_kind": "swiss"},
        ],
        "coders": [],
        "builtins": ["random", "reference"],
    }
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps(cfg))
    assert main(["run", "--config", str(path)]) == 0
    metrics = json.loads((tmp_path / "runs" / "sweep" / "metrics.json").read_text())
    boards = metrics["per_round"][0]["leaderboards"]
    assert set(boards) == {"tictactoe", "connect4", "reversi", "snake", "sudoku",
                           "2048", "hanoi", "maze", "holdem"}
    ranks = metrics["average_ranks"]
    assert "builtin:reference" in ranks and "builtin:random" in ranks
    assert len(ranks["builtin:reference"]) == 10  # nine games + the average
    # the oracle-strength baselines should dominate the random baseline overall
    assert ranks["builtin:reference"]["average"] < ranks["builtin:random"]["average"]
