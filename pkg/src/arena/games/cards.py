"""Limit Texas Hold'em: betting state machine, side pots, exact hand evaluation.

Cards are integers 0..51 = 13*suit + rank, with rank 0 = deuce and 12 = ace.
Actions: 0 fold, 1 check/call, 2 raise, 3 all-in. Betting is fixed-limit:
small_bet on preflop/flop, big_bet = 2*small_bet on turn/river, at most four
raises per street, blinds small_bet/2 and small_bet. All-in is only legal
when the acting stack cannot complete a full call, which keeps raise sizing
exact and confines all-in handling to side-pot construction.

A match is a fixed number of hands with button rotation; final scores are
per-seat chip deltas (they always sum to zero).
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from enum import IntEnum

from arena.engine import (
    ConfigurationError,
    GameDescriptor,
    GameState,
    RuleViolation,
    RulesEngine,
    UsageError,
    register_game,
)

FOLD, CALL, RAISE, ALL_IN = 0, 1, 2, 3
STREETS = ("preflop", "flop", "turn", "river")


class HandClass(IntEnum):
    HIGH_CARD = 0
    PAIR = 1
    TWO_PAIR = 2
    TRIPS = 3
    STRAIGHT = 4
    FLUSH = 5
    FULL_HOUSE = 6
    QUADS = 7
    STRAIGHT_FLUSH = 8


@dataclass(frozen=True, order=True)
class HandRank:
    hand_class: int
    kickers: tuple[int, ...]


def _straight_high(rank_mask: int) -> int | None:
    """Highest straight top-rank in a rank-presence bitmask, or None.

    Returns 3 for the wheel (A-2-3-4-5, a 5-high straight).
    """
    for high in range(12, 3, -1):
        need = 0b11111 << (high - 4)
        if rank_mask & need == need:
            return high
    wheel = (1 << 12) | 0b1111
    if rank_mask & wheel == wheel:
        return 3
    return None


def rank5(cards: tuple[int, ...] | list[int]) -> HandRank:
    """Classify exactly five distinct cards."""
    ranks = sorted((c % 13 for c in cards), reverse=True)
    flush = len({c // 13 for c in cards}) == 1
    mask = 0
    for r in ranks:
        mask |= 1 << r
    straight = _straight_high(mask) if len(set(ranks)) == 5 else None
    if flush and straight is not None:
        return HandRank(HandClass.STRAIGHT_FLUSH, (straight,))
    groups = sorted(Counter(ranks).items(), key=lambda kv: (kv[1], kv[0]), reverse=True)
    shape = tuple(n for _, n in groups)
    if shape == (4, 1):
        return HandRank(HandClass.QUADS, (groups[0][0], groups[1][0]))
    if shape == (3, 2):
        return HandRank(HandClass.FULL_HOUSE, (groups[0][0], groups[1][0]))
    if flush:
        return HandRank(HandClass.FLUSH, tuple(ranks))
    if straight is not None:
        return HandRank(HandClass.STRAIGHT, (straight,))
    if shape == (3, 1, 1):
        return HandRank(HandClass.TRIPS, (groups[0][0], groups[1][0], groups[2][0]))
    if shape == (2, 2, 1):
        return HandRank(HandClass.TWO_PAIR, (groups[0][0], groups[1][0], groups[2][0]))
    if shape == (2, 1, 1, 1):
        return HandRank(HandClass.PAIR, (groups[0][0], groups[1][0], groups[2][0], groups[3][0]))
    return HandRank(HandClass.HIGH_CARD, tuple(ranks))


def evaluate_hand(cards: tuple[int, ...] | list[int]) -> HandRank:
    """Best five-card rank among seven distinct cards.

    Direct rank/suit multiplicity analysis; deliberately not implemented as
    a best-of-21-combinations search so the two can cross-check each other.
    """
    cards = list(cards)
    if len(cards) != 7 or len(set(cards)) != 7 or not all(0 <= c < 52 for c in cards):
        raise UsageError("evaluate_hand needs 7 distinct cards in 0..51")
    rank_of = [c % 13 for c in cards]
    suit_of = [c // 13 for c in cards]
    counts = Counter(rank_of)
    rank_mask = 0
    for r in counts:
        rank_mask |= 1 << r

    suit_counts = Counter(suit_of)
    flush_suit = next((s for s, n in suit_counts.items() if n >= 5), None)
    if flush_suit is not None:
        suit_mask = 0
        for c in cards:
            if c // 13 == flush_suit:
                suit_mask |= 1 << (c % 13)
        sf = _straight_high(suit_mask)
        if sf is not None:
            return HandRank(HandClass.STRAIGHT_FLUSH, (sf,))

    by_count: dict[int, list[int]] = {1: [], 2: [], 3: [], 4: []}
    for r, n in counts.items():
        by_count[n].append(r)
    for n in by_count:
        by_count[n].sort(reverse=True)

    if by_count[4]:
        quad = by_count[4][0]
        kicker = max(r for r in counts if r != quad)
        return HandRank(HandClass.QUADS, (quad, kicker))

    trips = by_count[3]
    pairs = by_count[2]
    if trips:
        if len(trips) >= 2:
            return HandRank(HandClass.FULL_HOUSE, (trips[0], trips[1]))
        if pairs:
            return HandRank(HandClass.FULL_HOUSE, (trips[0], pairs[0]))

    if flush_suit is not None:
        flush_ranks = sorted((c % 13 for c in cards if c // 13 == flush_suit), reverse=True)
        return HandRank(HandClass.FLUSH, tuple(flush_ranks[:5]))

    straight = _straight_high(rank_mask)
    if straight is not None:
        return HandRank(HandClass.STRAIGHT, (straight,))

    if trips:
        others = sorted((r for r in counts if r != trips[0]), reverse=True)
        return HandRank(HandClass.TRIPS, (trips[0], others[0], others[1]))
    if len(pairs) >= 2:
        hi, lo = pairs[0], pairs[1]
        kicker = max(r for r in counts if r not in (hi, lo))
        return HandRank(HandClass.TWO_PAIR, (hi, lo, kicker))
    if pairs:
        others = sorted((r for r in counts if r != pairs[0]), reverse=True)
        return HandRank(HandClass.PAIR, (pairs[0], others[0], others[1], others[2]))
    top5 = sorted(rank_of, reverse=True)[:5]
    return HandRank(HandClass.HIGH_CARD, tuple(top5))


# ---------------------------------------------------------------------------
# Table state and betting machine
# ---------------------------------------------------------------------------


@dataclass
class TableState:
    seats: int
    small_bet: int
    num_hands: int
    hand_index: int
    button: int
    stacks: list[int]
    start_stacks: list[int]          # stacks at the start of the current hand
    hole: list[tuple[int, int] | None]
    community: list[int]
    street: int
    folded: list[bool]
    all_in: list[bool]
    committed: list[int]             # per-seat chips put in this hand
    street_put: list[int]            # per-seat chips put in this street
    current_bet: int
    raises_made: int
    queue: list[int]                 # seats still owing action this street
    deck: list[int]
    decisions_this_hand: int
    match_over: bool = False
    hand_id: int = field(default=0)  # monotone counter, tracks dealt hands

    def clone(self) -> "TableState":
        return TableState(
            seats=self.seats, small_bet=self.small_bet, num_hands=self.num_hands,
            hand_index=self.hand_index, button=self.button,
            stacks=self.stacks.copy(), start_stacks=self.start_stacks.copy(),
            hole=self.hole.copy(), community=self.community.copy(),
            street=self.street, folded=self.folded.copy(), all_in=self.all_in.copy(),
            committed=self.committed.copy(), street_put=self.street_put.copy(),
            current_bet=self.current_bet, raises_made=self.raises_made,
            queue=self.queue.copy(), deck=self.deck.copy(),
            decisions_this_hand=self.decisions_this_hand,
            match_over=self.match_over, hand_id=self.hand_id,
        )

    def bet_size(self) -> int:
        return self.small_bet if self.street < 2 else 2 * self.small_bet

    def to_call(self, seat: int) -> int:
        return self.current_bet - self.street_put[seat]

    def put(self, seat: int, amount: int) -> None:
        amount = min(amount, self.stacks[seat])
        self.stacks[seat] -= amount
        self.street_put[seat] += amount
        self.committed[seat] += amount
        if self.stacks[seat] == 0:
            self.all_in[seat] = True

    def contenders(self) -> list[int]:
        return [s for s in range(self.seats) if self.hole[s] is not None and not self.folded[s]]

    def can_act(self, seat: int) -> bool:
        return self.hole[seat] is not None and not self.folded[seat] and not self.all_in[seat]


def _order_from(table: TableState, start: int) -> list[int]:
    return [(start + k) % table.seats for k in range(table.seats)]


def _next_funded(table: TableState, start: int) -> int:
    for seat in _order_from(table, start):
        if table.stacks[seat] > 0:
            return seat
    raise UsageError("no funded seats")


def _begin_hand(table: TableState, rng: random.Random) -> bool:
    """Posts blinds and deals; returns False when the match is over instead."""
    funded = [s for s in range(table.seats) if table.stacks[s] > 0]
    if table.hand_index >= table.num_hands or len(funded) < 2:
        table.match_over = True
        return False
    table.button = _next_funded(table, table.button) if table.hand_id == 0 else _next_funded(table, table.button + 1)
    table.start_stacks = table.stacks.copy()
    table.hole = [None] * table.seats
    table.community = []
    table.street = 0
    table.folded = [False] * table.seats
    table.all_in = [False] * table.seats
    table.committed = [0] * table.seats
    table.street_put = [0] * table.seats
    table.raises_made = 0
    table.decisions_this_hand = 0
    table.hand_id += 1

    deck = list(range(52))
    rng.shuffle(deck)
    table.deck = deck
    for seat in funded:
        table.hole[seat] = (deck.pop(), deck.pop())

    heads_up = len(funded) == 2
    sb_seat = table.button if heads_up else _next_funded(table, table.button + 1)
    bb_seat = _next_funded(table, sb_seat + 1)
    table.put(sb_seat, table.small_bet // 2)
    table.put(bb_seat, table.small_bet)
    table.current_bet = table.small_bet
    first = sb_seat if heads_up else _next_funded(table, bb_seat + 1)
    order = _order_from(table, first)
    table.queue = [s for s in order if table.can_act(s)]
    if not heads_up:
        # Everyone acts once, ending with the big blind's option.
        table.queue = [s for s in table.queue if s != bb_seat]
        if table.can_act(bb_seat):
            table.queue.append(bb_seat)
    return True


def _postflop_queue(table: TableState) -> list[int]:
    order = _order_from(table, table.button + 1)
    return [s for s in order if table.can_act(s)]


def _advance_street(table: TableState) -> None:
    table.street += 1
    table.street_put = [0] * table.seats
    table.current_bet = 0
    table.raises_made = 0
    if table.street == 1:
        table.community.extend(table.deck.pop() for _ in range(3))
    else:
        table.community.append(table.deck.pop())
    actors = _postflop_queue(table)
    table.queue = actors if len(actors) >= 2 else []


def _finish_hand(table: TableState) -> None:
    deltas = settle_showdown(table)
    for seat in range(table.seats):
        table.stacks[seat] = table.start_stacks[seat] + deltas[seat]
    table.hand_index += 1


def _abort_hand(table: TableState) -> None:
    table.stacks = table.start_stacks.copy()
    table.hand_index += 1


def _resolve_until_decision(table: TableState, rng: random.Random) -> None:
    """Run dealing/settlement forward until a decision point or match end."""
    while True:
        if table.match_over:
            return
        if table.hole == [None] * table.seats:  # between hands
            if not _begin_hand(table, rng):
                return
        if table.queue:
            return
        # Street finished: deal on, or settle once the river is complete.
        if table.street == 3:
            _finish_hand(table)
            _mark_between_hands(table)
            continue
        _advance_street(table)


def _mark_between_hands(table: TableState) -> None:
    table.hole = [None] * table.seats
    table.queue = []


def settle_showdown(table: TableState) -> list[int]:
    """Per-seat chip deltas for the current hand (main and side pots).

    Precondition: either a single contender remains or the board is complete.
    Odd chips go to the earliest seat left of the button.
    """
    contenders = table.contenders()
    if not contenders:
        raise UsageError("settle_showdown with no contenders")
    total_pot = sum(table.committed)
    deltas = [-table.committed[s] for s in range(table.seats)]
    if len(contenders) == 1:
        deltas[contenders[0]] += total_pot
        return deltas
    if len(table.community) != 5:
        raise UsageError("showdown before the river is complete")

    strength = {
        s: evaluate_hand(list(table.hole[s]) + table.community)  # type: ignore[arg-type]
        for s in contenders
    }
    levels = sorted({table.committed[s] for s in contenders})
    awarded = 0
    prev = 0
    for li, level in enumerate(levels):
        if li == len(levels) - 1:
            pot = total_pot - awarded  # top pot absorbs folded money above the cap
        else:
            pot = sum(min(table.committed[s], level) - min(table.committed[s], prev)
                      for s in range(table.seats))
        prev = level
        if pot <= 0:
            continue
        eligible = [s for s in contenders if table.committed[s] >= level]
        best = max(strength[s] for s in eligible)
        winners = [s for s in eligible if strength[s] == best]
        share, odd = divmod(pot, len(winners))
        for s in winners:
            deltas[s] += share
        for s in _order_from(table, table.button + 1):
            if odd == 0:
                break
            if s in winners:
                deltas[s] += 1
                odd -= 1
        awarded += pot
    return deltas


class Holdem(RulesEngine):
    def initial(self, descriptor, seed):
        cfg = descriptor.config
        rng = random.Random(seed)
        table = TableState(
            seats=descriptor.seats, small_bet=cfg["small_bet"], num_hands=cfg["num_hands"],
            hand_index=0, button=0,
            stacks=[cfg["starting_stack"]] * descriptor.seats,
            start_stacks=[cfg["starting_stack"]] * descriptor.seats,
            hole=[None] * descriptor.seats, community=[], street=0,
            folded=[False] * descriptor.seats, all_in=[False] * descriptor.seats,
            committed=[0] * descriptor.seats, street_put=[0] * descriptor.seats,
            current_bet=0, raises_made=0, queue=[], deck=[], decisions_this_hand=0,
        )
        _resolve_until_decision(table, rng)
        state = GameState(
            game_id=descriptor.game_id, step_index=0, to_act=0, terminal=False,
            scores=None, rng_state=rng.getstate(), board=table,
        )
        return self._finalize(descriptor, state, table)

    def _finalize(self, descriptor, state: GameState, table: TableState) -> GameState:
        if table.match_over:
            start = descriptor.config["starting_stack"]
            scores = tuple(float(s - start) for s in table.stacks)
            return GameState(
                game_id=state.game_id, step_index=state.step_index, to_act=0,
                terminal=True, scores=scores, rng_state=state.rng_state, board=table,
            )
        return GameState(
            game_id=state.game_id, step_index=state.step_index, to_act=table.queue[0],
            terminal=False, scores=None, rng_state=state.rng_state, board=table,
        )

    def observe_payload(self, descriptor, state, seat):
        table: TableState = state.board
        return {
            "seat": seat,
            "hole": list(table.hole[seat]) if table.hole[seat] else [],
            "community": list(table.community),
            "street": STREETS[table.street] if table.hole != [None] * table.seats else "between",
            "stacks": table.stacks.copy(),
            "committed": table.committed.copy(),
            "street_put": table.street_put.copy(),
            "pot": sum(table.committed),
            "to_call": max(0, table.to_call(seat)),
            "current_bet": table.current_bet,
            "raises_made": table.raises_made,
            "bet_size": table.bet_size(),
            "folded": table.folded.copy(),
            "all_in": table.all_in.copy(),
            "button": table.button,
            "hand_index": table.hand_index,
            "num_hands": table.num_hands,
            "to_act": state.to_act,
        }

    def mask_bits(self, descriptor, state, seat):
        table: TableState = state.board
        if not table.queue or table.queue[0] != seat:
            return (False, False, False, False)
        to_call = table.to_call(seat)
        stack = table.stacks[seat]
        fold_ok = to_call > 0
        call_ok = to_call == 0 or stack >= to_call
        raise_ok = table.raises_made < 4 and stack >= to_call + table.bet_size()
        allin_ok = to_call > 0 and 0 < stack <= to_call
        return (fold_ok, call_ok, raise_ok, allin_ok)

    def apply(self, descriptor, state, seat, action):
        mask = self.mask_bits(descriptor, state, seat)
        if not mask[action]:
            raise RuleViolation(seat, action, "betting action not legal here")
        table = state.board.clone()
        rng = random.Random()
        rng.setstate(state.rng_state)
        table.queue.pop(0)
        table.decisions_this_hand += 1

        if action == FOLD:
            table.folded[seat] = True
        elif action == CALL:
            table.put(seat, table.to_call(seat))
        elif action == RAISE:
            table.put(seat, table.to_call(seat) + table.bet_size())
            table.current_bet += table.bet_size()
            table.raises_made += 1
            order = _order_from(table, seat + 1)
            table.queue = [s for s in order if s != seat and table.can_act(s)]
        else:  # ALL_IN: a short call of the outstanding bet
            table.put(seat, table.stacks[seat])

        if table.decisions_this_hand >= descriptor.config["decisions_per_hand_cap"]:
            _abort_hand(table)
            _mark_between_hands(table)
        elif len(table.contenders()) == 1:
            _finish_hand(table)
            _mark_between_hands(table)

        _resolve_until_decision(table, rng)
        new_state = state.advanced(board=table, rng_state=rng.getstate())
        return self._finalize(descriptor, new_state, table)

    def forfeit_scores(self, descriptor, state, offender):
        table: TableState = state.board
        start = descriptor.config["starting_stack"]
        # Abort the in-progress hand: chips return to their start-of-hand owners.
        stacks = table.start_stacks if table.hole != [None] * table.seats else table.stacks
        return tuple(float(s - start) for s in stacks)

    def cap_terminate(self, descriptor, state):
        scores = self.forfeit_scores(descriptor, state, 0)
        return state.advanced(terminal=True, scores=scores, step_index=state.step_index)


def make_holdem(seats: int = 2, starting_stack: int = 200, small_bet: int = 2,
                num_hands: int = 50) -> GameDescriptor:
    if not 2 <= seats <= 9:
        raise ConfigurationError(f"hold'em seats must be in [2, 9], got {seats}")
    if small_bet % 2 != 0 or small_bet <= 0:
        raise ConfigurationError("small_bet must be a positive even number")
    cap_per_hand = 1000
    return GameDescriptor(
        game_id="holdem", seats=seats, action_space=4,
        observation_schema={
            "hole": "your two cards (card = 13*suit + rank, rank 0=2 .. 12=A)",
            "community": "0/3/4/5 board cards",
            "stacks": "per-seat chips behind", "committed": "per-seat chips in this hand",
            "to_call": "chips you must add to continue",
            "to_act": "seat to act; actions 0=fold 1=check/call 2=raise 3=all-in",
        },
        info_kind="imperfect",
        config={
            "starting_stack": starting_stack, "small_bet": small_bet,
            "num_hands": num_hands, "decisions_per_hand_cap": cap_per_hand,
            "step_cap": num_hands * cap_per_hand,
        },
    )


register_game("holdem", Holdem())
