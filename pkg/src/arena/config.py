"""Run configuration: one JSON (canonical) or TOML document, schema-checked.

Unknown keys are rejected with the full key path so typos fail fast, before
any execution. Gateway API keys never live in config files; they come from
the ARENA_GATEWAY_KEY environment variable.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Any

from arena.rating import RatingParams

GATEWAY_KEY_ENV = "ARENA_GATEWAY_KEY"


class ConfigError(Exception):
    """Invalid configuration; the message names the offending key."""


def _check_keys(doc: dict[str, Any], allowed: set[str], path: str) -> None:
    unknown = set(doc) - allowed
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"unknown configuration key: {path}{key}")


def _require(doc: dict[str, Any], key: str, path: str) -> Any:
    if key not in doc:
        raise ConfigError(f"missing configuration key: {path}{key}")
    return doc[key]


def _typed(value: Any, types, key: str):
    if not isinstance(value, types) or isinstance(value, bool) and bool not in (
        types if isinstance(types, tuple) else (types,)
    ):
        raise ConfigError(f"configuration key {key} has the wrong type")
    return value


@dataclass
class GameConfig:
    game_id: str
    params: dict[str, Any] = field(default_factory=dict)
    draw_probability: float | None = None
    rounds_per_pair: int = 1
    table_size: int = 6
    tables_budget: int = 10
    schedule_kind: str = "random"  # multiplayer only: random | swiss
    instances: int = 5             # single-player challenge-set size

    @staticmethod
    def from_dict(doc: dict[str, Any], path: str) -> "GameConfig":
        _check_keys(doc, {"game_id", "params", "draw_probability", "rounds_per_pair",
                          "table_size", "tables_budget", "schedule_kind", "instances"}, path)
        game_id = _typed(_require(doc, "game_id", path), str, path + "game_id")
        from arena.games import GAME_IDS

        if game_id not in GAME_IDS:
            raise ConfigError(f"unknown game id in {path}game_id: {game_id!r}")
        cfg = GameConfig(game_id=game_id)
        cfg.params = dict(_typed(doc.get("params", {}), dict, path + "params"))
        if "draw_probability" in doc:
            cfg.draw_probability = float(_typed(doc["draw_probability"], (int, float),
                                                path + "draw_probability"))
        cfg.rounds_per_pair = int(_typed(doc.get("rounds_per_pair", 1), int,
                                         path + "rounds_per_pair"))
        cfg.table_size = int(_typed(doc.get("table_size", 6), int, path + "table_size"))
        cfg.tables_budget = int(_typed(doc.get("tables_budget", 10), int,
                                       path + "tables_budget"))
        cfg.schedule_kind = _typed(doc.get("schedule_kind", "random"), str,
                                   path + "schedule_kind")
        if cfg.schedule_kind not in ("random", "swiss"):
            raise ConfigError(f"{path}schedule_kind must be 'random' or 'swiss'")
        cfg.instances = int(_typed(doc.get("instances", 5), int, path + "instances"))
        return cfg


@dataclass
class CoderConfig:
    name: str
    kind: str  # static | gateway
    sources: list[str] = field(default_factory=list)     # static
    endpoint: str = ""                                   # gateway
    model: str = ""
    timeout: float = 120.0
    max_retries: int = 3

    @staticmethod
    def from_dict(doc: dict[str, Any], path: str) -> "CoderConfig":
        _check_keys(doc, {"name", "kind", "sources", "endpoint", "model",
                          "timeout", "max_retries"}, path)
        name = _typed(_require(doc, "name", path), str, path + "name")
        kind = _typed(_require(doc, "kind", path), str, path + "kind")
        if kind not in ("static", "gateway"):
            raise ConfigError(f"{path}kind must be 'static' or 'gateway'")
        cfg = CoderConfig(name=name, kind=kind)
        if kind == "static":
            sources = _typed(_require(doc, "sources", path), list, path + "sources")
            if not sources:
                raise ConfigError(f"{path}sources must list at least one file")
            cfg.sources = [str(s) for s in sources]
        else:
            cfg.endpoint = _typed(_require(doc, "endpoint", path), str, path + "endpoint")
            cfg.model = _typed(_require(doc, "model", path), str, path + "model")
            cfg.timeout = float(_typed(doc.get("timeout", 120.0), (int, float),
                                       path + "timeout"))
            cfg.max_retries = int(_typed(doc.get("max_retries", 3), int,
                                         path + "max_retries"))
        return cfg


@dataclass
class RunConfig:
    games: list[GameConfig]
    coders: list[CoderConfig] = field(default_factory=list)
    builtins: list[str] = field(default_factory=lambda: ["random", "reference"])
    seed: int = 0
    rounds: int = 5
    workers: int = 0  # 0 = logical core count
    out_dir: str = "runs"
    run_id: str = ""
    timing_mode: str = "wall"  # wall | logical (zeroed latencies, reproducible bytes)
    move_timeout_seconds: float = 45.0
    memory_bytes: int = 1 << 30
    launcher: str = "standalone"  # standalone | sdk
    rating: RatingParams = field(default_factory=RatingParams)

    def effective_workers(self) -> int:
        return self.workers if self.workers > 0 else (os.cpu_count() or 1)

    def per_game_draw(self) -> dict[str, float]:
        return {
            g.game_id: g.draw_probability
            for g in self.games
            if g.draw_probability is not None
        }


_TOP_KEYS = {"games", "coders", "builtins", "seed", "rounds", "workers", "out_dir",
             "run_id", "timing_mode", "move_timeout_seconds", "memory_bytes",
             "launcher", "rating"}
_RATING_KEYS = {"mu0", "sigma0", "beta", "tau", "draw_probability"}
_BUILTINS = {"random", "reference", "greedy"}


def parse_config(doc: dict[str, Any]) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("configuration root must be an object")
    _check_keys(doc, _TOP_KEYS, "")
    games_doc = _typed(_require(doc, "games", ""), list, "games")
    if not games_doc:
        raise ConfigError("games must list at least one game")
    games = [GameConfig.from_dict(_typed(g, dict, f"games[{i}]."), f"games[{i}].")
             for i, g in enumerate(games_doc)]
    coders = [CoderConfig.from_dict(_typed(c, dict, f"coders[{i}]."), f"coders[{i}].")
              for i, c in enumerate(doc.get("coders", []))]
    names = [c.name for c in coders]
    if len(set(names)) != len(names):
        raise ConfigError("coders[].name values must be unique")

    cfg = RunConfig(games=games, coders=coders)
    builtins = _typed(doc.get("builtins", ["random", "reference"]), list, "builtins")
    for b in builtins:
        if b not in _BUILTINS:
            raise ConfigError(f"unknown builtin agent in builtins: {b!r}")
    cfg.builtins = list(builtins)
    cfg.seed = int(_typed(doc.get("seed", 0), int, "seed"))
    cfg.rounds = int(_typed(doc.get("rounds", 5), int, "rounds"))
    if cfg.rounds < 1:
        raise ConfigError("rounds must be at least 1")
    cfg.workers = int(_typed(doc.get("workers", 0), int, "workers"))
    cfg.out_dir = _typed(doc.get("out_dir", "runs"), str, "out_dir")
    cfg.run_id = _typed(doc.get("run_id", ""), str, "run_id")
    cfg.timing_mode = _typed(doc.get("timing_mode", "wall"), str, "timing_mode")
    if cfg.timing_mode not in ("wall", "logical"):
        raise ConfigError("timing_mode must be 'wall' or 'logical'")
    cfg.move_timeout_seconds = float(_typed(doc.get("move_timeout_seconds", 45.0),
                                            (int, float), "move_timeout_seconds"))
    if cfg.move_timeout_seconds <= 0:
        raise ConfigError("move_timeout_seconds must be positive")
    cfg.memory_bytes = int(_typed(doc.get("memory_bytes", 1 << 30), int, "memory_bytes"))
    cfg.launcher = _typed(doc.get("launcher", "standalone"), str, "launcher")
    if cfg.launcher not in ("standalone", "sdk"):
        raise ConfigError("launcher must be 'standalone' or 'sdk'")
    rating_doc = _typed(doc.get("rating", {}), dict, "rating")
    _check_keys(rating_doc, _RATING_KEYS, "rating.")
    defaults = RatingParams()
    cfg.rating = RatingParams(
        mu0=float(rating_doc.get("mu0", defaults.mu0)),
        sigma0=float(rating_doc.get("sigma0", defaults.sigma0)),
        beta=float(rating_doc.get("beta", defaults.beta)),
        tau=float(rating_doc.get("tau", defaults.tau)),
        draw_probability=float(rating_doc.get("draw_probability", defaults.draw_probability)),
    )
    return cfg


def _toml_module():
    try:
        import tomllib  # 3.11+
        return tomllib
    except ModuleNotFoundError:
        try:
            import tomli
            return tomli
        except ModuleNotFoundError:
            raise ConfigError(
                "TOML configs need Python 3.11+ (tomllib) or the tomli package; "
                "JSON configs work everywhere"
            ) from None


def load_config(path: str) -> RunConfig:
    if path.endswith(".toml"):
        toml = _toml_module()
        with open(path, "rb") as fh:
            try:
                doc = toml.load(fh)
            except toml.TOMLDecodeError as exc:
                raise ConfigError(f"config is not valid TOML: {exc}") from exc
    else:
        with open(path, "r", encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(doc)
