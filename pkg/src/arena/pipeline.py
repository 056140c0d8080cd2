"""End-to-end orchestration: generate, validate/repair, compete, rate, report.

A full evaluation is `rounds` independent rounds. Each round generates a
fresh candidate per (coder, game), validates it through the layered suite
with the bounded repair loop, and runs the game's tournament: round-robin
for two-player games, sampled or swiss tables for hold'em, seeded challenge
sets for the puzzles. Ratings update in schedule order within each
(round, game) pool; the final tables average per-game ranks across rounds.

Candidate rejection is data, not an error: the pipeline exits 0 as long as
the harness itself ran to completion.
"""

from __future__ import annotations

import hashlib
import logging
import os
import shutil
import sys
from dataclasses import dataclass, field
from typing import Any

from arena.agents import (
    AgentHandle,
    AgentSpawnError,
    builtin_greedy,
    builtin_random,
    builtin_reference,
    spawn,
)
from arena.config import GATEWAY_KEY_ENV, GameConfig, RunConfig
from arena.engine import GameDescriptor, MatchRecord, ResourceLimits
from arena.games import MULTI_PLAYER, SINGLE_PLAYER, TWO_PLAYER, default_descriptor
from arena.games.puzzle import default_challenge_set
from arena.rating import Rating
from arena.reports import (
    canonical_json,
    leaderboard_csv,
    leaderboard_rows_to_dicts,
    metrics_csv,
    metrics_to_dict,
    rating_params_header,
    write_transcripts,
)
from arena.tournament import (
    RatingBook,
    Schedule,
    aggregate,
    cross_game_ranks,
    execute,
    leaderboard,
    schedule_challenge_set,
    schedule_multiplayer,
    schedule_round_robin,
)
from arena.validator import CandidateAgent, GatewayCoder, StaticCoder, generate_and_repair

log = logging.getLogger("arena.pipeline")


@dataclass
class RunResult:
    run_dir: str
    exit_code: int
    records: list[MatchRecord] = field(default_factory=list)
    candidates: list[CandidateAgent] = field(default_factory=list)
    metrics: dict[str, Any] = field(default_factory=dict)


def _derive_seed(master: int, *parts: Any) -> int:
    text = ":".join(str(p) for p in (master, *parts))
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big") >> 1


def _default_run_id(config: RunConfig) -> str:
    digest = hashlib.sha256(canonical_json(_config_fingerprint(config)).encode()).hexdigest()
    return f"run-{config.seed:08x}-{digest[:10]}"


def _config_fingerprint(config: RunConfig) -> dict[str, Any]:
    return {
        "seed": config.seed,
        "rounds": config.rounds,
        "timing_mode": config.timing_mode,
        "games": [[g.game_id, sorted(g.params.items()), g.rounds_per_pair, g.table_size,
                   g.tables_budget, g.schedule_kind, g.instances] for g in config.games],
        "coders": [[c.name, c.kind, c.sources, c.endpoint, c.model] for c in config.coders],
        "builtins": config.builtins,
        "rating": [config.rating.mu0, config.rating.sigma0, config.rating.beta,
                   config.rating.tau, config.rating.draw_probability],
    }


def descriptor_for_game(game: GameConfig, seed: int) -> GameDescriptor:
    """Game descriptor for tournament play (challenge sets carry their own)."""
    params = {k: v for k, v in game.params.items() if k != "seed"}
    return default_descriptor(game.game_id, seed=seed, **params)


def make_coder(cfg, api_key: str = ""):
    if cfg.kind == "static":
        return StaticCoder(cfg.name, cfg.sources)
    return GatewayCoder(cfg.name, cfg.endpoint, cfg.model, api_key=api_key,
                        timeout=cfg.timeout, max_retries=cfg.max_retries)


def _sdk_launcher(source_path: str) -> list[str]:
    return [sys.executable, "-m", "arena_sdk.runner", source_path]


def _standalone_launcher(source_path: str) -> list[str]:
    return [sys.executable, source_path]


def _builtin_handles(names: list[str], game_id: str, round_seed: int,
                     instance_tag: str) -> dict[str, AgentHandle]:
    handles: dict[str, AgentHandle] = {}
    for name in names:
        agent_id = f"builtin:{name}{instance_tag}"
        if name == "random":
            handles[agent_id] = builtin_random(_derive_seed(round_seed, name), agent_id)
        elif name == "reference":
            handles[agent_id] = builtin_reference(game_id, agent_id)
        elif name == "greedy":
            if game_id != "tictactoe":
                continue  # greedy baseline exists only for tic-tac-toe
            handles[agent_id] = builtin_greedy(game_id, _derive_seed(round_seed, name),
                                               agent_id)
    return handles


def owner_of(agent_id: str) -> str:
    return agent_id.split("#", 1)[0]


def _run_game_round(
    config: RunConfig,
    game: GameConfig,
    round_index: int,
    limits: ResourceLimits,
    scratch_root: str,
    book: RatingBook,
) -> tuple[list[MatchRecord], list[CandidateAgent], list[Schedule]]:
    round_seed = _derive_seed(config.seed, "round", round_index, game.game_id)
    descriptor = descriptor_for_game(game, round_seed)
    launcher = _sdk_launcher if config.launcher == "sdk" else _standalone_launcher
    tag = f"#r{round_index}"

    candidates: list[CandidateAgent] = []
    registry: dict[str, AgentHandle] = {}
    api_key = os.environ.get(GATEWAY_KEY_ENV, "")
    for coder_cfg in config.coders:
        coder = make_coder(coder_cfg, api_key)
        candidate = generate_and_repair(
            coder, descriptor, limits=limits, launcher=launcher,
            candidate_id=f"{coder_cfg.name}{tag}", scratch_root=scratch_root,
        )
        candidates.append(candidate)
        log.info("round %d %s candidate %s: %s (iteration %d)", round_index,
                 game.game_id, candidate.candidate_id,
                 "deployed" if candidate.deployed else "rejected", candidate.iteration)
        if candidate.deployed:
            try:
                registry[candidate.candidate_id] = spawn(
                    candidate.command, limits, agent_id=candidate.candidate_id,
                    game_id=descriptor.game_id, config=dict(descriptor.config),
                    scratch_root=scratch_root,
                )
            except AgentSpawnError as exc:
                log.warning("deployed candidate %s failed to respawn: %s",
                            candidate.candidate_id, exc)
                candidate.deployed = False
                candidate.rejection_cause = f"respawn failed: {exc}"

    registry.update(_builtin_handles(config.builtins, game.game_id, round_seed, tag))

    records: list[MatchRecord] = []
    schedules: list[Schedule] = []
    record_latency = config.timing_mode == "wall"
    workers = config.effective_workers()
    try:
        agent_ids = sorted(registry)
        if game.game_id in SINGLE_PLAYER:
            if agent_ids:
                instances = default_challenge_set(game.game_id, round_seed, game.instances)
                sched = schedule_challenge_set(agent_ids, instances)
                recs = execute(sched, registry, limits, workers=workers,
                               record_latency=record_latency)
                book.apply_challenge(sched, recs)
                records.extend(recs)
                schedules.append(sched)
        elif game.game_id in TWO_PLAYER:
            if len(agent_ids) >= 2:
                sched = schedule_round_robin(agent_ids, descriptor,
                                             rounds_per_pair=game.rounds_per_pair,
                                             seed=round_seed)
                recs = execute(sched, registry, limits, workers=workers,
                               record_latency=record_latency)
                for rec in recs:
                    book.apply_record(rec)
                records.extend(recs)
                schedules.append(sched)
        elif game.game_id in MULTI_PLAYER:
            table_size = min(game.table_size, len(agent_ids))
            if len(agent_ids) >= 2 and table_size >= 2:
                if game.schedule_kind == "swiss":
                    # live swiss: schedule wave by wave from current ratings
                    waves = 0
                    remaining = game.tables_budget
                    while remaining > 0:
                        per_wave = max(1, len(agent_ids) // table_size)
                        budget = min(per_wave, remaining)
                        sched = schedule_multiplayer(
                            agent_ids, descriptor, table_size, budget, kind="swiss",
                            seed=_derive_seed(round_seed, "wave", waves),
                            ratings=book.pool(game.game_id),
                        )
                        recs = execute(sched, registry, limits, workers=workers,
                                       record_latency=record_latency)
                        for rec in recs:
                            book.apply_record(rec)
                        records.extend(recs)
                        schedules.append(sched)
                        remaining -= len(sched.matches)
                        waves += 1
                else:
                    sched = schedule_multiplayer(agent_ids, descriptor, table_size,
                                                 game.tables_budget, kind="random",
                                                 seed=round_seed)
                    recs = execute(sched, registry, limits, workers=workers,
                                   record_latency=record_latency)
                    for rec in recs:
                        book.apply_record(rec)
                    records.extend(recs)
                    schedules.append(sched)
    finally:
        for handle in registry.values():
            handle.close()

    return records, candidates, schedules


def run_pipeline(config: RunConfig) -> RunResult:
    """Execute every round, write reports, and return the run directory."""
    run_id = config.run_id or _default_run_id(config)
    # absolute paths throughout: agent subprocesses run from private scratch
    # directories, so relative command/source paths would not resolve
    run_dir = os.path.abspath(os.path.join(config.out_dir, run_id))
    os.makedirs(run_dir, exist_ok=True)
    scratch_root = os.path.join(run_dir, "scratch")
    os.makedirs(scratch_root, exist_ok=True)
    limits = ResourceLimits(move_timeout_seconds=config.move_timeout_seconds,
                            memory_bytes=config.memory_bytes)

    all_records: list[MatchRecord] = []
    all_candidates: list[CandidateAgent] = []
    per_round_ranks: list[dict[str, dict[str, Rating]]] = []
    per_round_payload: list[dict[str, Any]] = []

    for round_index in range(config.rounds):
        book = RatingBook(config.rating, config.per_game_draw())
        round_records: list[MatchRecord] = []
        for game in config.games:
            recs, cands, _ = _run_game_round(config, game, round_index, limits,
                                             scratch_root, book)
            round_records.extend(recs)
            all_candidates.extend(cands)
        all_records.extend(round_records)
        pools = {g.game_id: book.pool(g.game_id) for g in config.games}
        pools = {g: p for g, p in pools.items() if p}
        per_round_ranks.append(pools)
        per_round_payload.append({
            "round": round_index,
            "records": len(round_records),
            "leaderboards": {
                g: leaderboard_rows_to_dicts(leaderboard(pool))
                for g, pool in sorted(pools.items())
            },
        })

    table = aggregate(all_records, all_candidates, owner_of=owner_of)

    # cross-round average rank per (owner, game)
    rank_sums: dict[str, dict[str, list[float]]] = {}
    for pools in per_round_ranks:
        owner_pools = {
            g: {owner_of(a): r for a, r in pool.items()} for g, pool in pools.items()
        }
        for agent, ranks in cross_game_ranks(owner_pools).items():
            for game_id, rank in ranks.items():
                if game_id == "average":
                    continue
                rank_sums.setdefault(agent, {}).setdefault(game_id, []).append(rank)
    average_ranks: dict[str, dict[str, float]] = {}
    for agent, games in sorted(rank_sums.items()):
        entry = {g: sum(rs) / len(rs) for g, rs in sorted(games.items())}
        entry["average"] = sum(entry.values()) / len(entry)
        average_ranks[agent] = entry

    final_pools: dict[str, list] = {}
    if per_round_ranks:
        last = per_round_ranks[-1]
        final_pools = {
            g: leaderboard({owner_of(a): r for a, r in pool.items()})
            for g, pool in sorted(last.items())
        }

    metrics = {
        "run_id": run_id,
        "seed": config.seed,
        "rounds": config.rounds,
        "timing_mode": config.timing_mode,
        "rating_header": rating_params_header(config.rating, config.per_game_draw()),
        "metrics": metrics_to_dict(table),
        "average_ranks": average_ranks,
        "per_round": per_round_payload,
        "final_round_leaderboards": {
            g: leaderboard_rows_to_dicts(rows) for g, rows in final_pools.items()
        },
    }

    write_transcripts(all_records, os.path.join(run_dir, "transcripts.ndjson"))
    with open(os.path.join(run_dir, "metrics.json"), "w", encoding="utf-8") as fh:
        fh.write(canonical_json(metrics) + "\n")
    with open(os.path.join(run_dir, "metrics.csv"), "w", encoding="utf-8") as fh:
        fh.write(metrics_csv(table, config.rating, config.per_game_draw()))
    with open(os.path.join(run_dir, "leaderboard.csv"), "w", encoding="utf-8") as fh:
        fh.write(leaderboard_csv(final_pools, average_ranks, config.rating,
                                 config.per_game_draw()))
    with open(os.path.join(run_dir, "leaderboard.json"), "w", encoding="utf-8") as fh:
        fh.write(canonical_json({
            "average_ranks": average_ranks,
            "per_game": {g: leaderboard_rows_to_dicts(rows)
                         for g, rows in final_pools.items()},
        }) + "\n")
    shutil.rmtree(scratch_root, ignore_errors=True)

    return RunResult(run_dir=run_dir, exit_code=0, records=all_records,
                     candidates=all_candidates, metrics=metrics)
