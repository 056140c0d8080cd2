"""Command-line front end.

Subcommands:
  run       full pipeline (generate -> validate/repair -> tournaments -> reports)
  validate  generation and layered validation only
  play      a single match between named agents, record printed as JSON
  rate      recompute ratings from a transcripts.ndjson file
  report    re-emit leaderboard tables from a run directory

Exit codes: 0 success (candidate rejections included), 2 invalid
configuration or arguments, 1 harness fault.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from arena.agents import AgentSpawnError
from arena.config import ConfigError, load_config
from arena.engine import ConfigurationError, ResourceLimits, UsageError, run_match


def _add_common_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="JSON or TOML run configuration")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--rounds", type=int, default=None)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--out", default=None, help="output directory root")
    parser.add_argument("--timeout-seconds", type=float, default=None,
                        help="per-decision timeout (default 45)")
    parser.add_argument("--run-id", default=None)


def _load_with_overrides(args: argparse.Namespace):
    config = load_config(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.rounds is not None:
        config.rounds = args.rounds
    if args.workers is not None:
        config.workers = args.workers
    if args.out is not None:
        config.out_dir = args.out
    if args.timeout_seconds is not None:
        if args.timeout_seconds <= 0:
            raise ConfigError("--timeout-seconds must be positive")
        config.move_timeout_seconds = args.timeout_seconds
    if getattr(args, "run_id", None):
        config.run_id = args.run_id
    return config


def cmd_run(args: argparse.Namespace) -> int:
    from arena.pipeline import run_pipeline

    config = _load_with_overrides(args)
    result = run_pipeline(config)
    deployed = sum(1 for c in result.candidates if c.deployed)
    print(f"run directory: {result.run_dir}")
    print(f"candidates: {deployed}/{len(result.candidates)} deployed, "
          f"{len(result.records)} matches recorded")
    return result.exit_code


def cmd_validate(args: argparse.Namespace) -> int:
    from arena.pipeline import (
        _derive_seed,
        _sdk_launcher,
        _standalone_launcher,
        descriptor_for_game,
        make_coder,
    )
    from arena.validator import generate_and_repair

    config = _load_with_overrides(args)
    limits = ResourceLimits(move_timeout_seconds=config.move_timeout_seconds,
                            memory_bytes=config.memory_bytes)
    launcher = _sdk_launcher if config.launcher == "sdk" else _standalone_launcher
    api_key = os.environ.get("ARENA_GATEWAY_KEY", "")
    for game in config.games:
        descriptor = descriptor_for_game(game, _derive_seed(config.seed, "validate",
                                                            game.game_id))
        for coder_cfg in config.coders:
            coder = make_coder(coder_cfg, api_key)
            candidate = generate_and_repair(coder, descriptor, limits=limits,
                                            launcher=launcher,
                                            candidate_id=f"{coder_cfg.name}:{game.game_id}")
            status = "PASS" if candidate.deployed else "FAIL"
            print(f"{status} {coder_cfg.name} {game.game_id} "
                  f"iterations={candidate.iteration}")
            if candidate.final_report:
                for layer, rate in sorted(candidate.final_report.layer_pass_rates.items()):
                    print(f"    {layer}: {rate * 100:.0f}%")
            if not candidate.deployed:
                print(f"    cause: {candidate.rejection_cause}")
    return 0  # rejections are data


def _parse_agent_spec(spec: str, game_id: str, seed: int, limits: ResourceLimits):
    from arena.agents import builtin_greedy, builtin_random, builtin_reference, spawn
    from arena.games import default_descriptor

    if spec.startswith("builtin:"):
        name = spec.split(":", 1)[1]
        base, _, arg = name.partition(":")
        if base == "random":
            return builtin_random(int(arg) if arg else seed, spec)
        if base == "reference":
            return builtin_reference(game_id, spec)
        if base == "greedy":
            return builtin_greedy(game_id, int(arg) if arg else seed, spec)
        raise UsageError(f"unknown builtin agent {name!r}")
    if spec.startswith("cmd:"):
        descriptor = default_descriptor(game_id)
        return spawn(spec[4:].split(), limits, agent_id=spec, game_id=game_id,
                     config=dict(descriptor.config))
    if spec.startswith("sdk:"):
        descriptor = default_descriptor(game_id)
        source = os.path.abspath(spec[4:])  # the runner starts in a scratch dir
        return spawn([sys.executable, "-m", "arena_sdk.runner", source], limits,
                     agent_id=spec, game_id=game_id, config=dict(descriptor.config))
    raise UsageError(f"agent spec must start with builtin:, cmd:, or sdk: (got {spec!r})")


def cmd_play(args: argparse.Namespace) -> int:
    from arena.games import default_descriptor
    from arena.reports import canonical_json, record_to_dict

    descriptor = default_descriptor(args.game)
    limits = ResourceLimits(move_timeout_seconds=args.timeout_seconds)
    handles = []
    try:
        for seat, spec in enumerate(args.agents):
            handles.append(_parse_agent_spec(spec, args.game, args.seed + seat, limits))
        if len(handles) != descriptor.seats:
            print(f"error: {args.game} needs {descriptor.seats} agents", file=sys.stderr)
            return 2
        record = run_match(descriptor, handles, limits, seed=args.seed)
        print(canonical_json(record_to_dict(record)))
        return 0
    finally:
        for handle in handles:
            handle.close()


def cmd_rate(args: argparse.Namespace) -> int:
    from arena.rating import RatingParams
    from arena.reports import canonical_json, leaderboard_rows_to_dicts, read_transcripts
    from arena.tournament import RatingBook, leaderboard

    records = read_transcripts(args.transcripts)
    book = RatingBook(RatingParams())
    games = []
    for record in records:  # transcripts are stored in schedule order
        if len(record.agent_ids) >= 2:
            book.apply_record(record)
        if record.game_id not in games:
            games.append(record.game_id)
    payload = {
        game_id: leaderboard_rows_to_dicts(leaderboard(book.pool(game_id)))
        for game_id in sorted(games)
        if book.pool(game_id)
    }
    print(canonical_json(payload))
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    from arena.reports import canonical_json

    metrics_path = os.path.join(args.run, "metrics.json")
    if not os.path.exists(metrics_path):
        print(f"error: no metrics.json under {args.run}", file=sys.stderr)
        return 2
    with open(metrics_path, "r", encoding="utf-8") as fh:
        metrics = json.load(fh)
    if args.format == "json":
        print(canonical_json({"average_ranks": metrics["average_ranks"],
                              "metrics": metrics["metrics"]}))
        return 0
    # CSV regenerated from the stored JSON content
    import csv as csv_mod
    import io

    buf = io.StringIO()
    writer = csv_mod.writer(buf, lineterminator="\n")
    games = sorted({g for ranks in metrics["average_ranks"].values()
                    for g in ranks if g != "average"})
    writer.writerow(["agent_id", "average_rank"] + [f"rank_{g}" for g in games])
    ordered = sorted(metrics["average_ranks"].items(), key=lambda kv: (kv[1]["average"], kv[0]))
    for agent, ranks in ordered:
        writer.writerow([agent, ranks["average"]] + [ranks.get(g, "") for g in games])
    print(buf.getvalue(), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arena",
                                     description="competitive agent evaluation harness")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="full evaluation pipeline")
    _add_common_run_flags(run_p)
    run_p.set_defaults(fn=cmd_run)

    val_p = sub.add_parser("validate", help="generation + validation suites only")
    _add_common_run_flags(val_p)
    val_p.set_defaults(fn=cmd_validate)

    play_p = sub.add_parser("play", help="single match between named agents")
    play_p.add_argument("game")
    play_p.add_argument("agents", nargs="+",
                        help="agent specs: builtin:random[:seed] | builtin:reference | "
                             "builtin:greedy[:seed] | cmd:<command> | sdk:<source.py>")
    play_p.add_argument("--seed", type=int, default=0)
    play_p.add_argument("--timeout-seconds", type=float, default=45.0)
    play_p.set_defaults(fn=cmd_play)

    rate_p = sub.add_parser("rate", help="recompute ratings from transcripts")
    rate_p.add_argument("--transcripts", required=True)
    rate_p.set_defaults(fn=cmd_rate)

    report_p = sub.add_parser("report", help="re-emit tables from a run directory")
    report_p.add_argument("--run", required=True)
    report_p.add_argument("--format", choices=("csv", "json"), default="csv")
    report_p.set_defaults(fn=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        return args.fn(args)
    except (ConfigError, ConfigurationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AgentSpawnError as exc:
        print(f"agent failed to start: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
