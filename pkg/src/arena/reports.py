"""Run artifacts: transcripts (NDJSON), metrics and leaderboards (JSON/CSV).

All serialization is canonical (sorted keys, fixed separators, repr floats)
so identical runs produce byte-identical files. CSV tables carry the rating
configuration as '#' header lines and the metric definitions as footer lines.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Any, Sequence

from arena.engine import MatchRecord, Outcome, StepRecord
from arena.rating import RatingParams
from arena.tournament import LeaderboardRow, MetricsTable


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def record_to_dict(record: MatchRecord) -> dict[str, Any]:
    return {
        "match_id": record.match_id,
        "game_id": record.game_id,
        "agent_ids": list(record.agent_ids),
        "seed": record.seed,
        "steps": [[s.seat, s.action, s.latency_seconds, s.error_flag] for s in record.steps],
        "outcome": {
            "kind": record.outcome.kind,
            "winner": record.outcome.winner,
            "forfeit_seat": record.outcome.forfeit_seat,
            "cause": record.outcome.cause,
        },
        "scores": list(record.scores),
        "wall_time": record.wall_time,
        "withdrawn": record.withdrawn,
    }


def record_from_dict(doc: dict[str, Any]) -> MatchRecord:
    return MatchRecord(
        match_id=doc["match_id"],
        game_id=doc["game_id"],
        agent_ids=tuple(doc["agent_ids"]),
        seed=doc["seed"],
        steps=[StepRecord(seat, action, latency, error)
               for seat, action, latency, error in doc["steps"]],
        outcome=Outcome(**doc["outcome"]),
        scores=tuple(doc["scores"]),
        wall_time=doc["wall_time"],
        withdrawn=doc.get("withdrawn", False),
    )


def write_transcripts(records: Sequence[MatchRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(canonical_json(record_to_dict(record)) + "\n")


def read_transcripts(path: str) -> list[MatchRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(record_from_dict(json.loads(line)))
    return records


def rating_params_header(params: RatingParams,
                         per_game_draw: dict[str, float] | None = None) -> list[str]:
    lines = [
        f"rating: mu0={params.mu0} sigma0={params.sigma0} beta={params.beta} "
        f"tau={params.tau} draw_probability={params.draw_probability} "
        "(canonical TrueSkill-style defaults; conservative estimate = mu - 3*sigma)"
    ]
    if per_game_draw:
        overrides = " ".join(f"{g}={p}" for g, p in sorted(per_game_draw.items()))
        lines.append(f"per-game draw probability overrides: {overrides}")
    return lines


def metrics_to_dict(table: MetricsTable) -> dict[str, Any]:
    return {
        "agents": {
            agent_id: {
                "matches": m.matches,
                "competitive_matches": m.competitive_matches,
                "wins": m.wins,
                "draws": m.draws,
                "losses": m.losses,
                "win_pct": m.win_pct,
                "error_pct": m.error_pct,
                "speed_seconds": m.speed_seconds,
                "decisions": m.decisions,
            }
            for agent_id, m in sorted(table.agents.items())
        },
        "coders": {
            name: {
                "generated": c.generated,
                "deployed": c.deployed,
                "participation_pct": c.participation_pct,
                "avg_repairs": c.avg_repairs,
                "pass_at_1": c.pass_at_1,
                "repair_rate": c.repair_rate,
                "layer_rates": c.layer_rates(),
            }
            for name, c in sorted(table.coders.items())
        },
        "definitions": list(table.definitions),
    }


def leaderboard_rows_to_dicts(rows: Sequence[LeaderboardRow]) -> list[dict[str, Any]]:
    return [
        {"rank": r.rank, "agent_id": r.agent_id, "mu": r.mu, "sigma": r.sigma,
         "conservative": r.conservative}
        for r in rows
    ]


def _csv_with_comments(header_lines: Sequence[str], columns: Sequence[str],
                       rows: Sequence[Sequence[Any]], footer_lines: Sequence[str]) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(row)
    for line in footer_lines:
        buf.write(f"# {line}\n")
    return buf.getvalue()


def leaderboard_csv(per_game: dict[str, list[LeaderboardRow]],
                    average_ranks: dict[str, dict[str, float]],
                    params: RatingParams,
                    per_game_draw: dict[str, float] | None = None) -> str:
    games = sorted(per_game)
    columns = ["agent_id", "average_rank"] + [f"rank_{g}" for g in games] + \
              [f"conservative_{g}" for g in games]
    conservative_of = {
        g: {row.agent_id: row.conservative for row in rows} for g, rows in per_game.items()
    }
    rank_of = {g: {row.agent_id: row.rank for row in rows} for g, rows in per_game.items()}
    ordered = sorted(average_ranks.items(), key=lambda kv: (kv[1]["average"], kv[0]))
    rows = []
    for agent_id, ranks in ordered:
        row: list[Any] = [agent_id, ranks["average"]]
        row += [rank_of[g].get(agent_id, "") for g in games]
        row += [conservative_of[g].get(agent_id, "") for g in games]
        rows.append(row)
    return _csv_with_comments(
        rating_params_header(params, per_game_draw), columns, rows,
        ["rank = position by conservative estimate (mu - 3*sigma) within each game",
         "average_rank = arithmetic mean of per-game ranks"],
    )


def metrics_csv(table: MetricsTable, params: RatingParams,
                per_game_draw: dict[str, float] | None = None) -> str:
    columns = ["agent_id", "matches", "wins", "draws", "losses",
               "win_pct", "error_pct", "speed_seconds"]
    rows = [
        [agent_id, m.matches, m.wins, m.draws, m.losses,
         f"{m.win_pct:.4f}", f"{m.error_pct:.4f}", f"{m.speed_seconds:.6f}"]
        for agent_id, m in sorted(table.agents.items())
    ]
    coder_columns = ["coder", "generated", "deployed", "participation_pct",
                     "avg_repairs", "pass_at_1", "repair_rate"]
    coder_rows = [
        [name, c.generated, c.deployed, f"{c.participation_pct:.2f}",
         f"{c.avg_repairs:.4f}", f"{c.pass_at_1:.4f}",
         "" if c.repair_rate is None else f"{c.repair_rate:.4f}"]
        for name, c in sorted(table.coders.items())
    ]
    part1 = _csv_with_comments(rating_params_header(params, per_game_draw),
                               columns, rows, table.definitions)
    part2 = _csv_with_comments([], coder_columns, coder_rows, [])
    return part1 + part2
