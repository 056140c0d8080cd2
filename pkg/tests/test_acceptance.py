"""Acceptance criteria, one test per criterion with a printed PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and timings. The SDK conformance criterion needs the arena_sdk package
(sdk/ directory) installed alongside the harness.
"""

from __future__ import annotations

import functools
import itertools
import json
import math
import random
import sys
import time
from collections import Counter
from pathlib import Path

import pytest

from arena.agents import builtin_greedy, builtin_random, builtin_reference, spawn
from arena.engine import ActionMask, Observation, ResourceLimits, apply, legal_mask, reset, run_match
from arena.games import default_descriptor
from arena.games.cards import HandClass, evaluate_hand, make_holdem, rank5
from arena.games.puzzle import generate_maze, make_maze, shortest_path
from arena.rating import RatingParams

LIMITS = ResourceLimits(move_timeout_seconds=10.0)
FIXTURES = Path(__file__).parent / "fixtures"


def criterion(name):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            started = time.perf_counter()
            try:
                fn(*args, **kwargs)
            except BaseException as exc:
                word = "SKIP" if exc.__class__.__name__.startswith("Skipped") else "FAIL"
                print(f"\nACCEPTANCE {name}: {word} ({time.perf_counter() - started:.1f}s)")
                raise
            print(f"\nACCEPTANCE {name}: PASS ({time.perf_counter() - started:.1f}s)")

        return wrapper

    return decorate


# ---------------------------------------------------------------------------
# Game-rule oracle suite
# ---------------------------------------------------------------------------


@criterion("game-rule oracle suite")
def test_game_rule_oracles():
    started = time.perf_counter()
    ttt = default_descriptor("tictactoe")

    # minimax self-play draws 100/100
    a, b = builtin_reference("tictactoe", "mm-a"), builtin_reference("tictactoe", "mm-b")
    for k in range(100):
        rec = run_match(ttt, [a, b], LIMITS, seed=k, record_latency=False)
        assert rec.outcome.kind == "draw", f"self-play decisive at seed {k}"

    # minimax never loses to random across 1000 matches (both seats)
    mm = builtin_reference("tictactoe", "mm")
    losses = 0
    for k in range(500):
        rec = run_match(ttt, [mm, builtin_random(k, "r")], LIMITS, seed=k,
                        record_latency=False)
        if rec.outcome.kind == "winner" and rec.outcome.winner == 1:
            losses += 1
        rec = run_match(ttt, [builtin_random(10_000 + k, "r"), mm], LIMITS, seed=k,
                        record_latency=False)
        if rec.outcome.kind == "winner" and rec.outcome.winner == 0:
            losses += 1
    assert losses == 0, f"minimax lost {losses}/1000 games against random"

    # hanoi baseline is exactly optimal for n = 3..10
    for n in range(3, 11):
        rec = run_match(default_descriptor("hanoi", n=n),
                        [builtin_reference("hanoi")], LIMITS, seed=0,
                        record_latency=False)
        assert rec.outcome.kind == "winner"
        assert len(rec.steps) == 2**n - 1, f"hanoi n={n} took {len(rec.steps)} steps"

    # maze baseline matches the BFS oracle on 50 seeded mazes
    for seed in range(50):
        inst = generate_maze(11, 11, seed=seed)
        rec = run_match(make_maze(inst), [builtin_reference("maze")], LIMITS, seed=0,
                        record_latency=False)
        assert rec.outcome.kind == "winner"
        assert len(rec.steps) == shortest_path(inst), f"maze seed {seed} suboptimal"

    # reversi opening mobility
    reversi = default_descriptor("reversi")
    mask = legal_mask(reset(reversi, 0), reversi, 0)
    assert set(mask.legal_actions()) == {19, 26, 37, 44}

    elapsed = time.perf_counter() - started
    assert elapsed < 60.0, f"oracle suite took {elapsed:.1f}s (budget 60s)"


# ---------------------------------------------------------------------------
# Hold'em evaluator
# ---------------------------------------------------------------------------

FIVE_CARD_CLASS_COUNTS = {
    HandClass.STRAIGHT_FLUSH: 40,
    HandClass.QUADS: 624,
    HandClass.FULL_HOUSE: 3_744,
    HandClass.FLUSH: 5_108,
    HandClass.STRAIGHT: 10_200,
    HandClass.TRIPS: 54_912,
    HandClass.TWO_PAIR: 123_552,
    HandClass.PAIR: 1_098_240,
    HandClass.HIGH_CARD: 1_302_540,
}


@criterion("hold'em evaluator")
@pytest.mark.slow
def test_holdem_evaluator_exhaustive():
    started = time.perf_counter()

    counts: Counter = Counter()
    for combo in itertools.combinations(range(52), 5):
        counts[HandClass(rank5(combo).hand_class)] += 1
    assert sum(counts.values()) == 2_598_960
    for cls, expected in FIVE_CARD_CLASS_COUNTS.items():
        assert counts[cls] == expected, f"{cls.name}: {counts[cls]} != {expected}"

    rng = random.Random(20240817)
    deck = list(range(52))
    for _ in range(100_000):
        hand = rng.sample(deck, 7)
        direct = evaluate_hand(hand)
        brute = max(rank5(c) for c in itertools.combinations(hand, 5))
        assert direct == brute, f"7-card mismatch on {sorted(hand)}"

    # chip conservation across 10^4 random-policy hands
    hands_done = 0
    seed = 0
    while hands_done < 10_000:
        d = make_holdem(seats=4, starting_stack=60, small_bet=2, num_hands=25)
        state = reset(d, seed)
        rng2 = random.Random(seed)
        expected_total = 4 * 60
        while not state.terminal:
            table = state.board
            assert sum(table.stacks) + sum(table.committed) == expected_total
            legal = legal_mask(state, d, state.to_act).legal_actions()
            state = apply(state, d, state.to_act, rng2.choice(legal))
        assert sum(state.scores) == 0.0
        hands_done += state.board.hand_index
        seed += 1

    elapsed = time.perf_counter() - started
    assert elapsed < 300.0, f"hold'em evaluator suite took {elapsed:.1f}s (budget 300s)"


# ---------------------------------------------------------------------------
# Rating oracle
# ---------------------------------------------------------------------------


@criterion("rating oracle")
def test_rating_oracle_agreement_and_properties():
    from arena.rating import A_WINS, B_WINS, DRAW, Rating, conservative, update_pair
    from tests.test_rating import posterior_oracle

    params = RatingParams()
    rng = random.Random(7)
    for outcome in (A_WINS, B_WINS, DRAW):
        checked = 0
        while checked < 100:
            a = Rating(rng.uniform(5, 45), rng.uniform(1.0, 10.0))
            b = Rating(rng.uniform(5, 45), rng.uniform(1.0, 10.0))
            if outcome != DRAW and abs(a.mu - b.mu) > 25:
                continue  # keep quadrature well-conditioned; tails have their own guard test
            ra, rb = update_pair(a, b, outcome, params)
            oa = posterior_oracle(a, b, outcome, params)
            assert abs(ra.mu - oa.mu) < 1e-3 and abs(ra.sigma - oa.sigma) < 1e-3
            checked += 1

    for trial in range(10_000):
        a = Rating(rng.uniform(-10, 60), rng.uniform(0.05, 12.0))
        b = Rating(rng.uniform(-10, 60), rng.uniform(0.05, 12.0))
        outcome = rng.choice((A_WINS, B_WINS, DRAW))
        ra, rb = update_pair(a, b, outcome, params)
        assert ra.sigma < a.sigma + params.tau
        assert rb.sigma < b.sigma + params.tau
        if outcome == A_WINS:
            assert ra.mu >= a.mu and rb.mu <= b.mu
        elif outcome == B_WINS:
            assert rb.mu >= b.mu and ra.mu <= a.mu
        flipped = {A_WINS: B_WINS, B_WINS: A_WINS, DRAW: DRAW}[outcome]
        rb2, ra2 = update_pair(b, a, flipped, params)
        assert (ra2, rb2) == (ra, rb)

    # conservative leaderboard order invariant under mu translation
    from arena.tournament import leaderboard

    pool = {f"a{i}": Rating(rng.uniform(0, 50), rng.uniform(0.5, 9)) for i in range(12)}
    base = [row.agent_id for row in leaderboard(pool)]
    shifted = {k: Rating(v.mu + 123.456, v.sigma) for k, v in pool.items()}
    assert [row.agent_id for row in leaderboard(shifted)] == base


# ---------------------------------------------------------------------------
# pass@k
# ---------------------------------------------------------------------------


@criterion("pass@k")
def test_pass_at_k_exact_and_stable():
    from arena.tournament import pass_at_k

    for n in range(1, 11):
        for c in range(0, n + 1):
            for k in range(1, n + 1):
                items = [1] * c + [0] * (n - c)
                subsets = list(itertools.combinations(range(n), k))
                oracle = sum(1 for s in subsets if any(items[i] for i in s)) / len(subsets)
                got = pass_at_k(n, c, k)
                assert math.isclose(got, oracle, abs_tol=1e-12), (n, c, k)

    value = pass_at_k(10_000, 5_000, 100)
    assert math.isfinite(value) and 0.0 <= value <= 1.0


# ---------------------------------------------------------------------------
# Scheduling & policy
# ---------------------------------------------------------------------------


@criterion("scheduling & policy")
@pytest.mark.slow
def test_scheduling_and_policy():
    from arena.agents import BuiltinAgent, Policy
    from arena.tournament import execute, schedule_round_robin
    from arena.validator import MAX_REPAIRS, StaticCoder, generate_and_repair, run_test_suite
    from arena.validator_suites import build_suite

    ttt = default_descriptor("tictactoe")

    # round-robin: n(n-1) seat-balanced matches for n in [2, 24]
    for n in range(2, 25):
        agents = [f"a{i}" for i in range(n)]
        sched = schedule_round_robin(agents, ttt, seed=n)
        assert len(sched.matches) == n * (n - 1)
        seat0 = Counter(m.agent_ids[0] for m in sched.matches)
        seat1 = Counter(m.agent_ids[1] for m in sched.matches)
        assert all(seat0[a] == n - 1 and seat1[a] == n - 1 for a in agents)

    # default per-decision timeout is 45 s, enforced within +/- 0.5 s
    assert ResourceLimits().move_timeout_seconds == 45.0
    deadline = 0.8
    fast = spawn([sys.executable, str(FIXTURES / "sleeper.py"), str(deadline - 0.5)],
                 LIMITS, game_id="tictactoe")
    slow = spawn([sys.executable, str(FIXTURES / "sleeper.py"), str(deadline + 0.5)],
                 LIMITS, game_id="tictactoe")
    try:
        fast.begin_match("acc-fast", 0, ttt)
        slow.begin_match("acc-slow", 0, ttt)
        obs = Observation(seat=0, payload={}, to_act=0)
        mask = ActionMask((True, True))
        for _ in range(20):
            assert fast.request_action(obs, mask, deadline).failure is None
        for _ in range(20):
            assert slow.request_action(obs, mask, deadline).failure == "timeout"
    finally:
        fast.close()
        slow.close()

    # repair loop never exceeds 3 iterations
    assert MAX_REPAIRS == 3
    hopeless = StaticCoder("hopeless", ["def broken(:\n"], from_files=False)
    candidate = generate_and_repair(hopeless, ttt, limits=LIMITS)
    assert not candidate.deployed and candidate.iteration == 3

    # structure-layer failure gates all later layers
    class Broken(Policy):
        def select(self, payload, mask):
            raise RuntimeError

    report = run_test_suite(BuiltinAgent("x", Broken()), build_suite(ttt))
    assert report.overall == "FAIL"
    assert all(r.status == "not_run" for r in report.cases if r.layer != "structure")

    # withdrawal after 5 consecutive forfeits
    bad = BuiltinAgent("bad", Broken())
    sched = schedule_round_robin(["bad", "g1", "g2"], ttt, rounds_per_pair=3, seed=0)
    records = execute(sched, {"bad": bad, "g1": builtin_random(1, "g1"),
                              "g2": builtin_random(2, "g2")}, LIMITS,
                      record_latency=False)
    bad_records = [r for r in records if "bad" in r.agent_ids]
    assert sum(1 for r in bad_records if not r.withdrawn) == 5
    assert all(r.withdrawn for r in bad_records[5:])


# ---------------------------------------------------------------------------
# End-to-end determinism
# ---------------------------------------------------------------------------


@criterion("end-to-end determinism")
@pytest.mark.slow
def test_end_to_end_determinism(tmp_path):
    from arena.cli import main
    from arena.rating import conservative
    from arena.tournament import RatingBook, execute, leaderboard, schedule_round_robin

    cfg = {
        "seed": 11,
        "rounds": 2,
        "workers": 2,
        "timing_mode": "logical",
        "out_dir": str(tmp_path / "runs"),
        "run_id": "determinism",
        "move_timeout_seconds": 5.0,
        "games": [{"game_id": "tictactoe", "rounds_per_pair": 2},
                  {"game_id": "hanoi", "instances": 3}],
        "coders": [{"name": "static-good", "kind": "static",
                    "sources": [str(FIXTURES / "first_legal.py")]}],
        "builtins": ["random", "reference", "greedy"],
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["run", "--config", str(path)]) == 0
    run_dir = tmp_path / "runs" / "determinism"
    first = {name: (run_dir / name).read_bytes()
             for name in ("metrics.json", "transcripts.ndjson")}
    assert main(["run", "--config", str(path)]) == 0
    for name, data in first.items():
        assert (run_dir / name).read_bytes() == data, f"{name} differs between runs"

    # seeded 3-agent TTT tournament ranks minimax first in >= 19/20 seeds
    ttt = default_descriptor("tictactoe")
    firsts = 0
    for rep in range(20):
        registry = {
            "minimax": builtin_reference("tictactoe", "minimax"),
            "greedy": builtin_greedy("tictactoe", seed=rep, agent_id="greedy"),
            "random": builtin_random(rep, "random"),
        }
        sched = schedule_round_robin(list(registry), ttt, rounds_per_pair=50, seed=rep)
        records = execute(sched, registry, LIMITS, record_latency=False)
        book = RatingBook()
        for record in records:
            book.apply_record(record)
        if leaderboard(book.pool("tictactoe"))[0].agent_id == "minimax":
            firsts += 1
    assert firsts >= 19, f"minimax first in only {firsts}/20 seeds"


# ---------------------------------------------------------------------------
# SDK conformance (secondary component)
# ---------------------------------------------------------------------------


@criterion("SDK conformance")
@pytest.mark.slow
def test_sdk_conformance():
    arena_sdk = pytest.importorskip(
        "arena_sdk", reason="install the secondary package: pip install -e ./sdk"
    )
    from arena.validator import run_test_suite
    from arena.validator_suites import build_suite

    sdk_dir = Path(arena_sdk.__file__).resolve().parent
    random_agent = sdk_dir / "examples" / "random_agent.py"
    assert random_agent.exists()

    ttt = default_descriptor("tictactoe")
    handle = spawn([sys.executable, "-m", "arena_sdk.runner", str(random_agent)],
                   LIMITS, agent_id="sdk-random", game_id="tictactoe",
                   config=dict(ttt.config))
    try:
        report = run_test_suite(handle, build_suite(ttt))
        assert report.layer_pass_rates["structure"] == 1.0
        assert report.layer_pass_rates["function"] == 1.0

        protocol_errors = 0
        opponent = builtin_random(3, "opp")
        for k in range(100):
            rec = run_match(ttt, [handle, opponent] if k % 2 == 0 else [opponent, handle],
                            LIMITS, seed=k, record_latency=False)
            if rec.outcome.kind == "forfeit" and rec.outcome.cause == "protocol_error":
                protocol_errors += 1
        assert protocol_errors == 0
    finally:
        handle.close()

    # source_check classifies ten crafted good/bad sources
    from arena_sdk import source_check

    good = """\
from arena_sdk import BaseAgent

class Mine(BaseAgent):
    def __init__(self, name: str):
        super().__init__(name)

    def select_action(self, observation, action_mask):
        return next((i for i, b in enumerate(action_mask) if b), None)
"""
    crafted: list[tuple[str, bool, str]] = [
        (good, True, "well-formed agent"),
        (good.replace("select_action", "choose"), False, "missing select_action"),
        (good.replace("(self, observation, action_mask)", "(self)"), False,
         "bad select_action signature"),
        (good.replace("def __init__(self, name: str):", "def __init__(self):"), False,
         "bad constructor signature"),
        ("import socket\n" + good, False, "denylisted import"),
        ("def broken(:\n", False, "syntax error"),
        ("x = 1\n", False, "no agent class"),
        (good + "\nimport subprocess\n", False, "denylisted import below the class"),
        (good.replace("BaseAgent", "object").replace("from arena_sdk import object\n", ""),
         False, "does not inherit BaseAgent"),
        (good + "\nclass Extra(BaseAgent):\n    def select_action(self, observation, action_mask):\n        return None\n",
         True, "extra helper class is fine"),
    ]
    for source, expect_ok, label in crafted:
        result = source_check(source)
        assert result.ok == expect_ok, f"{label}: expected ok={expect_ok}, findings={result.findings}"
