"""Match scheduling, execution with failure policy, and metric aggregation.

Round-robin schedules pair every ordered pair of agents (both seat orders);
multiplayer tables are dealt from shuffled permutations (random) or grouped
by conservative rating (swiss); challenge sets run every agent over identical
seeded instances. Execution applies the withdrawal policy (five consecutive
forfeits in a game removes the agent from its remaining matches, scored as
losses) and keeps records, rating updates, and reports in schedule order so
runs are reproducible regardless of worker count.
"""

from __future__ import annotations

import hashlib
import math
import random
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence

from arena.engine import (
    GameDescriptor,
    MatchRecord,
    Outcome,
    ResourceLimits,
    UsageError,
    run_match,
)
from arena.games.puzzle import PuzzleInstance, descriptor_for_instance
from arena.rating import (
    Rating,
    RatingParams,
    SinglePlayerResult,
    conservative,
    new_rating,
    rate_single_player,
    update_pair,
    update_ranked,
)
from arena.validator import CandidateAgent

WITHDRAWAL_THRESHOLD = 5


@dataclass(frozen=True)
class ScheduledMatch:
    index: int
    game_id: str
    agent_ids: tuple[str, ...]
    seed: int
    instance: PuzzleInstance | None = None  # challenge-set matches carry theirs


@dataclass
class Schedule:
    kind: str  # round_robin | swiss | sampled | challenge_set
    game_id: str
    descriptor: GameDescriptor
    matches: list[ScheduledMatch]

    def descriptor_for(self, match: ScheduledMatch) -> GameDescriptor:
        if match.instance is not None:
            return descriptor_for_instance(match.instance)
        if len(match.agent_ids) != self.descriptor.seats and self.game_id == "holdem":
            # hold'em tables seat however many agents the schedule dealt (2..9)
            from arena.games.cards import make_holdem

            cfg = self.descriptor.config
            return make_holdem(seats=len(match.agent_ids),
                               starting_stack=cfg["starting_stack"],
                               small_bet=cfg["small_bet"], num_hands=cfg["num_hands"])
        return self.descriptor


def match_seed(master_seed: int, index: int) -> int:
    """Stable per-match 63-bit seed derived from the master seed."""
    digest = hashlib.sha256(f"{master_seed}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


class SchedulingError(UsageError):
    pass


def schedule_round_robin(
    agents: Sequence[str],
    descriptor: GameDescriptor,
    rounds_per_pair: int = 1,
    seed: int = 0,
) -> Schedule:
    """Every ordered pair plays `rounds_per_pair` times (both seat orders)."""
    if len(agents) < 2:
        raise SchedulingError("round robin needs at least two agents")
    if len(set(agents)) != len(agents):
        raise SchedulingError("agent ids must be unique")
    pairs = [(a, b) for a in agents for b in agents if a != b] * rounds_per_pair
    rng = random.Random(seed)
    rng.shuffle(pairs)
    matches = [
        ScheduledMatch(i, descriptor.game_id, pair, match_seed(seed, i))
        for i, pair in enumerate(pairs)
    ]
    return Schedule("round_robin", descriptor.game_id, descriptor, matches)


def schedule_multiplayer(
    agents: Sequence[str],
    descriptor: GameDescriptor,
    table_size: int,
    budget: int,
    kind: str = "random",
    seed: int = 0,
    ratings: dict[str, Rating] | None = None,
) -> Schedule:
    """`budget` tables of `table_size` seats.

    random: agents are dealt from consecutive shuffled permutations, keeping
    appearance counts within one of each other. swiss: each wave groups
    agents by conservative rating descending (rating source = `ratings`,
    fresh ratings when omitted); pass current ratings wave by wave for a live
    swiss tournament.
    """
    n = len(agents)
    if table_size < 2 or table_size > n:
        raise SchedulingError(f"table size {table_size} infeasible for {n} agents")
    if kind not in ("random", "swiss"):
        raise SchedulingError(f"unknown multiplayer schedule kind {kind!r}")
    rng = random.Random(seed)
    tables: list[tuple[str, ...]] = []
    if kind == "random":
        pool: list[str] = []
        while len(tables) < budget:
            table: list[str] = []
            deferred: list[str] = []
            while len(table) < table_size:
                if not pool:
                    refill = list(agents)
                    rng.shuffle(refill)
                    pool.extend(refill)
                nxt = pool.pop(0)
                if nxt in table:  # permutation boundary duplicate: keep in line
                    deferred.append(nxt)
                else:
                    table.append(nxt)
            pool[:0] = deferred
            tables.append(tuple(table))
    else:  # swiss
        rating_of = ratings or {}
        groups = max(1, math.ceil(n / table_size))
        while n / groups < 2 and groups > 1:
            groups -= 1  # never deal a one-seat table
        while len(tables) < budget:
            order = sorted(
                agents,
                key=lambda a: (-conservative(rating_of.get(a, new_rating())), a),
            )
            # near-even split: strongest group first, sizes differ by at most one
            base, extra = divmod(n, groups)
            wave = []
            cursor = 0
            for g in range(groups):
                size = base + (1 if g < extra else 0)
                wave.append(order[cursor:cursor + size])
                cursor += size
            for group in wave:
                if len(tables) == budget:
                    break
                tables.append(tuple(group))
    matches = [
        ScheduledMatch(i, descriptor.game_id, table, match_seed(seed, i))
        for i, table in enumerate(tables)
    ]
    return Schedule(kind if kind == "swiss" else "sampled", descriptor.game_id,
                    descriptor, matches)


def schedule_challenge_set(
    agents: Sequence[str],
    instances: Sequence[PuzzleInstance],
) -> Schedule:
    """Every (agent, instance) pair once; identical instance order per agent."""
    if not instances:
        raise SchedulingError("challenge set needs at least one instance")
    game_id = instances[0].game_id
    matches = []
    index = 0
    for inst in instances:
        for agent in agents:
            matches.append(ScheduledMatch(index, game_id, (agent,),
                                          inst.instance_seed, instance=inst))
            index += 1
    return Schedule("challenge_set", game_id, descriptor_for_instance(instances[0]), matches)


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------


def _auto_loss_record(schedule: Schedule, match: ScheduledMatch, offender_seat: int,
                      cause: str) -> MatchRecord:
    from arena.engine import reset, rules_for

    descriptor = schedule.descriptor_for(match)
    rules = rules_for(descriptor)
    state = reset(descriptor, match.seed)
    scores = rules.forfeit_scores(descriptor, state, offender_seat)
    return MatchRecord(
        match_id=f"{match.game_id}-{match.index:05d}",
        game_id=match.game_id,
        agent_ids=match.agent_ids,
        seed=match.seed,
        steps=[],
        outcome=Outcome(kind="forfeit", forfeit_seat=offender_seat, cause=cause),
        scores=scores,
        wall_time=0.0,
        withdrawn=True,
    )


def execute(
    schedule: Schedule,
    registry: dict[str, object],
    limits: ResourceLimits,
    workers: int = 1,
    record_latency: bool = True,
    withdrawal_threshold: int = WITHDRAWAL_THRESHOLD,
) -> list[MatchRecord]:
    """Run every scheduled match; agent failures become outcomes, never raise.

    Matches may execute on a worker pool, but the returned records, the
    withdrawal policy, and any downstream rating updates follow schedule
    order, so results do not depend on completion order.
    """
    missing = {a for m in schedule.matches for a in m.agent_ids} - set(registry)
    if missing:
        raise UsageError(f"agents not in registry: {sorted(missing)}")

    match_locks: dict[str, threading.Lock] = {
        agent_id: getattr(handle, "_match_lock", None) or threading.Lock()
        for agent_id, handle in registry.items()
    }
    for agent_id, handle in registry.items():
        if not hasattr(handle, "_match_lock"):
            handle._match_lock = match_locks[agent_id]  # type: ignore[attr-defined]

    def run_one(match: ScheduledMatch) -> MatchRecord:
        descriptor = schedule.descriptor_for(match)
        handles = [registry[a] for a in match.agent_ids]
        ordered = sorted(set(match.agent_ids))
        for agent_id in ordered:
            match_locks[agent_id].acquire()
        try:
            return run_match(descriptor, handles, limits, match.seed,
                             match_id=f"{match.game_id}-{match.index:05d}",
                             record_latency=record_latency)
        finally:
            for agent_id in reversed(ordered):
                match_locks[agent_id].release()

    already_withdrawn = {
        agent_id: (getattr(handle, "withdrawal_cause", "") or "crash")
        for agent_id, handle in registry.items()
        if getattr(handle, "withdrawn", False)
    }

    raw: dict[int, MatchRecord] = {}
    if workers <= 1:
        consecutive: dict[str, int] = {}
        withdrawn_live: dict[str, str] = dict(already_withdrawn)
        for match in schedule.matches:
            offender = next((a for a in match.agent_ids if a in withdrawn_live), None)
            if offender is not None:
                seat = match.agent_ids.index(offender)
                raw[match.index] = _auto_loss_record(schedule, match, seat,
                                                     withdrawn_live[offender])
                continue
            record = run_one(match)
            raw[match.index] = record
            before = set(withdrawn_live)
            _update_withdrawals(record, consecutive, withdrawn_live, withdrawal_threshold)
            for agent_id in set(withdrawn_live) - before:
                registry[agent_id].withdraw(withdrawn_live[agent_id])  # type: ignore[attr-defined]
        return [raw[m.index] for m in schedule.matches]

    playable = [m for m in schedule.matches
                if not any(a in already_withdrawn for a in m.agent_ids)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {m.index: pool.submit(run_one, m) for m in playable}
        for idx, fut in futures.items():
            raw[idx] = fut.result()

    # Deterministic second pass: re-derive withdrawals in schedule order and
    # replace any optimistically played match with its auto-loss record.
    consecutive = {}
    withdrawn: dict[str, str] = dict(already_withdrawn)
    final: list[MatchRecord] = []
    for match in schedule.matches:
        offender = next((a for a in match.agent_ids if a in withdrawn), None)
        if offender is not None:
            record = _auto_loss_record(schedule, match, match.agent_ids.index(offender),
                                       withdrawn[offender])
        else:
            record = raw[match.index]
            _update_withdrawals(record, consecutive, withdrawn, withdrawal_threshold)
        final.append(record)
    for agent_id, cause in withdrawn.items():
        registry[agent_id].withdraw(cause)  # type: ignore[attr-defined]
    return final


def _update_withdrawals(record: MatchRecord, consecutive: dict[str, int],
                        withdrawn: dict[str, str], threshold: int) -> None:
    for seat, agent_id in enumerate(record.agent_ids):
        if record.outcome.kind == "forfeit" and record.outcome.forfeit_seat == seat:
            consecutive[agent_id] = consecutive.get(agent_id, 0) + 1
            if consecutive[agent_id] >= threshold and agent_id not in withdrawn:
                withdrawn[agent_id] = record.outcome.cause or "crash"
        else:
            consecutive[agent_id] = 0


# ---------------------------------------------------------------------------
# Ratings over record streams
# ---------------------------------------------------------------------------


def finish_ranks(record: MatchRecord) -> list[int]:
    """Competition ranking (1 = best) by score; a forfeiting seat ranks last."""
    seats = len(record.agent_ids)
    offender = record.outcome.forfeit_seat if record.outcome.kind == "forfeit" else None
    keyed = sorted(
        range(seats),
        key=lambda s: (1 if s == offender else 0, -record.scores[s]),
    )
    ranks = [0] * seats
    rank = 0
    for pos, seat in enumerate(keyed):
        key = (seat == offender, record.scores[seat])
        prev = keyed[pos - 1] if pos else None
        if prev is None or (prev == offender, record.scores[prev]) != key:
            rank = pos + 1
        ranks[seat] = rank
    return ranks


class RatingBook:
    """Per-(game, agent) Gaussian beliefs updated strictly in schedule order."""

    def __init__(self, params: RatingParams = RatingParams(),
                 per_game_draw_probability: dict[str, float] | None = None):
        self.base = params
        self.per_game = per_game_draw_probability or {}
        self.ratings: dict[tuple[str, str], Rating] = {}

    def params_for(self, game_id: str) -> RatingParams:
        p_draw = self.per_game.get(game_id)
        if p_draw is None:
            return self.base
        return replace(self.base, draw_probability=p_draw)

    def get(self, game_id: str, agent_id: str) -> Rating:
        return self.ratings.get((game_id, agent_id), new_rating(self.base))

    def _put(self, game_id: str, agent_id: str, rating: Rating) -> None:
        self.ratings[(game_id, agent_id)] = rating

    def apply_record(self, record: MatchRecord) -> None:
        params = self.params_for(record.game_id)
        seats = len(record.agent_ids)
        if seats == 1:
            return  # single-player records rate via challenge-set comparison
        ranks = finish_ranks(record)
        current = [self.get(record.game_id, a) for a in record.agent_ids]
        updated = update_ranked(current, ranks, params) if seats > 2 else None
        if seats == 2:
            if ranks[0] == ranks[1]:
                outcome = "draw"
            else:
                outcome = "a_wins" if ranks[0] < ranks[1] else "b_wins"
            ra, rb = update_pair(current[0], current[1], outcome, params)
            updated = [ra, rb]
        assert updated is not None
        for agent_id, rating in zip(record.agent_ids, updated):
            self._put(record.game_id, agent_id, rating)

    def apply_challenge(self, schedule: Schedule, records: Sequence[MatchRecord]) -> None:
        """Per-instance pairwise comparison of single-player results."""
        params = self.params_for(schedule.game_id)
        by_instance: dict[int, list[tuple[str, SinglePlayerResult]]] = {}
        order: list[int] = []
        for match, record in zip(schedule.matches, records):
            key = id(match.instance)
            if key not in by_instance:
                by_instance[key] = []
                order.append(key)
            result = SinglePlayerResult(
                success=record.outcome.kind == "winner",
                score=record.scores[0],
                steps=len(record.steps),
                time=sum(s.latency_seconds for s in record.steps),
            )
            by_instance[key].append((record.agent_ids[0], result))
        for key in order:
            entries = by_instance[key]
            results = [r for _, r in entries]
            for i, j, outcome in rate_single_player(results):
                ri = self.get(schedule.game_id, entries[i][0])
                rj = self.get(schedule.game_id, entries[j][0])
                ri2, rj2 = update_pair(ri, rj, outcome, params)
                self._put(schedule.game_id, entries[i][0], ri2)
                self._put(schedule.game_id, entries[j][0], rj2)

    def pool(self, game_id: str) -> dict[str, Rating]:
        return {a: r for (g, a), r in self.ratings.items() if g == game_id}


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


@dataclass
class AgentMetrics:
    agent_id: str
    matches: int = 0
    competitive_matches: int = 0
    wins: int = 0
    draws: int = 0
    losses: int = 0
    error_matches: int = 0
    decisions: int = 0
    latency_total: float = 0.0

    @property
    def win_pct(self) -> float:
        if not self.competitive_matches:
            return 0.0
        return 100.0 * self.wins / self.competitive_matches

    @property
    def error_pct(self) -> float:
        if not self.matches:
            return 0.0
        return 100.0 * self.error_matches / self.matches

    @property
    def speed_seconds(self) -> float:
        if not self.decisions:
            return 0.0
        return self.latency_total / self.decisions


@dataclass
class CoderMetrics:
    coder: str
    generated: int = 0
    deployed: int = 0
    repairs_total: int = 0
    pass_at_1_count: int = 0
    layer_totals: dict[str, list[int]] = field(default_factory=dict)  # layer -> [passed, total]

    @property
    def participation_pct(self) -> float:
        if not self.generated:
            return 0.0
        return 100.0 * self.deployed / self.generated

    @property
    def avg_repairs(self) -> float:
        if not self.generated:
            return 0.0
        return self.repairs_total / self.generated

    @property
    def pass_at_1(self) -> float:
        if not self.generated:
            return 0.0
        return self.pass_at_1_count / self.generated

    @property
    def repair_rate(self) -> float | None:
        failed_first = self.generated - self.pass_at_1_count
        if failed_first <= 0:
            return None
        repaired = self.deployed - self.pass_at_1_count
        return repaired / failed_first

    def layer_rates(self) -> dict[str, float]:
        return {
            layer: (passed / total if total else 0.0)
            for layer, (passed, total) in sorted(self.layer_totals.items())
        }


@dataclass
class MetricsTable:
    agents: dict[str, AgentMetrics]
    coders: dict[str, CoderMetrics]
    definitions: tuple[str, ...] = (
        "win_pct = wins / competitive matches * 100; draws count zero in the numerator",
        "error_pct = matches containing at least one failure by the agent / matches * 100",
        "speed_seconds = mean recorded decision latency",
        "avg_repairs = mean repair iterations per generated candidate (max 3)",
        "participation_pct = deployed candidates / generated candidates * 100",
        "single-player runs count toward error_pct and speed, not win_pct",
    )


def aggregate(
    records: Sequence[MatchRecord],
    candidates: Sequence[CandidateAgent] = (),
    owner_of: Callable[[str], str] | None = None,
) -> MetricsTable:
    """Fold a record stream (plus validation outcomes) into the metric table.

    `owner_of` maps a per-round agent instance id to its reporting identity
    (e.g. the coder name); identity by default.
    """
    owner_of = owner_of or (lambda agent_id: agent_id)
    agents: dict[str, AgentMetrics] = {}

    def row(agent_id: str) -> AgentMetrics:
        owner = owner_of(agent_id)
        if owner not in agents:
            agents[owner] = AgentMetrics(owner)
        return agents[owner]

    for record in records:
        competitive = len(record.agent_ids) >= 2
        winner_seat = record.outcome.winner if record.outcome.kind == "winner" else None
        if record.outcome.kind == "forfeit" and competitive:
            ranks = finish_ranks(record)
            winner_seat = ranks.index(1) if ranks.count(1) == 1 else None
        for seat, agent_id in enumerate(record.agent_ids):
            m = row(agent_id)
            m.matches += 1
            if competitive:
                m.competitive_matches += 1
                if winner_seat is not None:
                    if seat == winner_seat:
                        m.wins += 1
                    else:
                        m.losses += 1
                else:
                    m.draws += 1
            errored = record.outcome.kind == "forfeit" and record.outcome.forfeit_seat == seat
            errored = errored or any(s.error_flag for s in record.steps if s.seat == seat)
            if errored:
                m.error_matches += 1
            own_steps = [s for s in record.steps if s.seat == seat]
            m.decisions += len(own_steps)
            m.latency_total += sum(s.latency_seconds for s in own_steps)

    coders: dict[str, CoderMetrics] = {}
    for candidate in candidates:
        c = coders.setdefault(candidate.coder_name, CoderMetrics(candidate.coder_name))
        c.generated += 1
        c.repairs_total += candidate.iteration
        if candidate.deployed:
            c.deployed += 1
            if candidate.iteration == 0:
                c.pass_at_1_count += 1
        first_report = candidate.history[0][0] if candidate.history else candidate.final_report
        if first_report is not None:
            for case in first_report.cases:
                passed, total = c.layer_totals.get(case.layer, [0, 0])
                c.layer_totals[case.layer] = [passed + (case.status == "pass"), total + 1]
    return MetricsTable(agents=agents, coders=coders)


# ---------------------------------------------------------------------------
# pass@k and leaderboards
# ---------------------------------------------------------------------------


def pass_at_k(n: int, c: int, k: int) -> float:
    """P(at least one of k samples is correct), exact and overflow-free."""
    if not (0 <= c <= n and 1 <= k <= n):
        raise UsageError(f"invalid pass@k arguments n={n} c={c} k={k}")
    if c == 0:
        return 0.0
    if k > n - c:
        return 1.0
    miss = Fraction(1)
    for i in range(k):
        miss *= Fraction(n - c - i, n - i)
    return float(1 - miss)


@dataclass(frozen=True)
class LeaderboardRow:
    rank: int
    agent_id: str
    mu: float
    sigma: float
    conservative: float


def leaderboard(pool: dict[str, Rating]) -> list[LeaderboardRow]:
    """Rank one rating pool by conservative estimate, ties by mu then id."""
    ordered = sorted(pool.items(), key=lambda kv: (-conservative(kv[1]), -kv[1].mu, kv[0]))
    return [
        LeaderboardRow(rank=i + 1, agent_id=a, mu=r.mu, sigma=r.sigma,
                       conservative=conservative(r))
        for i, (a, r) in enumerate(ordered)
    ]


def cross_game_ranks(
    per_game_pools: dict[str, dict[str, Rating]],
) -> dict[str, dict[str, float]]:
    """Per-game ranks plus the cross-game average rank per agent."""
    per_game: dict[str, dict[str, int]] = {}
    for game_id, pool in sorted(per_game_pools.items()):
        per_game[game_id] = {row.agent_id: row.rank for row in leaderboard(pool)}
    agents = {a for ranks in per_game.values() for a in ranks}
    out: dict[str, dict[str, float]] = {}
    for agent in sorted(agents):
        ranks = {g: r[agent] for g, r in per_game.items() if agent in r}
        entry: dict[str, float] = {g: float(r) for g, r in ranks.items()}
        entry["average"] = math.fsum(ranks.values()) / len(ranks)
        out[agent] = entry
    return out
