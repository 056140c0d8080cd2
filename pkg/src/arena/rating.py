"""Bayesian skill rating with Gaussian beliefs and conservative estimates.

Each agent's skill is a Gaussian N(mu, sigma^2). A 1v1 outcome updates both
beliefs by moment-matching the exact posterior of the performance-difference
model (performance = skill + N(0, beta^2), draws within +/- eps). Ranked
multi-seat results decompose into pairwise outcomes computed from the shared
priors and combined order-independently, so relabeling agents permutes the
outputs exactly. Leaderboards rank by the conservative estimate mu - 3*sigma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Iterable, Sequence

_N = NormalDist()
_EPS_DENOM = 1e-10  # floor for truncation normalizers on extreme upsets

A_WINS, B_WINS, DRAW = "a_wins", "b_wins", "draw"


@dataclass(frozen=True)
class Rating:
    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if not (self.sigma > 0 and math.isfinite(self.mu) and math.isfinite(self.sigma)):
            raise ValueError(f"invalid rating ({self.mu}, {self.sigma})")


@dataclass(frozen=True)
class RatingParams:
    mu0: float = 25.0
    sigma0: float = 25.0 / 3.0
    beta: float = 25.0 / 6.0
    tau: float = 25.0 / 300.0
    draw_probability: float = 0.10

    def draw_margin(self) -> float:
        """Performance-difference half-width that scores as a draw."""
        return _N.inv_cdf((self.draw_probability + 1.0) / 2.0) * math.sqrt(2.0) * self.beta


def new_rating(params: RatingParams = RatingParams()) -> Rating:
    return Rating(params.mu0, params.sigma0)


def conservative(r: Rating) -> float:
    return r.mu - 3.0 * r.sigma


def _vw_win(t: float, e: float) -> tuple[float, float]:
    """Truncated-Gaussian moment factors for a win observed at difference t.

    Below the 1e-10 mass floor the exact ratio is replaced by its Mills-ratio
    asymptote, which keeps v > 0 and w in [0, 1) on astronomical upsets
    (a hard floor alone would drive w negative and inflate sigma).
    """
    x = t - e
    denom = _N.cdf(x)
    if denom < _EPS_DENOM:
        y = -x  # y > 6: deep-tail series for pdf(x)/cdf(x)
        v = y + 1.0 / y - 2.0 / y**3
        return v, min(max(v * (v + x), 0.0), 1.0)
    v = _N.pdf(x) / denom
    return v, v * (v + x)


def _vw_draw(t: float, e: float) -> tuple[float, float]:
    # abs() keeps v exactly odd in t so mirrored updates match bit-for-bit
    at = abs(t)
    a, b = e - at, -e - at
    denom = _N.cdf(a) - _N.cdf(b)
    if denom < _EPS_DENOM:
        g = at - e  # g > 6: mass concentrates at the near truncation boundary
        v = -(g + 1.0 / g)
        w = min(max(1.0 - 1.0 / (g * g), 0.0), 1.0)
    else:
        v = (_N.pdf(b) - _N.pdf(a)) / denom
        w = v * v + (a * _N.pdf(a) - b * _N.pdf(b)) / denom
    return (-v if t < 0 else v), w


def _pair_update_no_dynamics(
    a: Rating, b: Rating, outcome: str, params: RatingParams
) -> tuple[Rating, Rating]:
    """Moment-matched posterior for one observed outcome (tau already applied)."""
    if outcome == B_WINS:
        rb, ra = _pair_update_no_dynamics(b, a, A_WINS, params)
        return ra, rb
    va, vb = a.sigma ** 2, b.sigma ** 2
    c2 = 2.0 * params.beta ** 2 + (va + vb)  # grouped so mirrored calls agree exactly
    c = math.sqrt(c2)
    t = (a.mu - b.mu) / c
    e = params.draw_margin() / c
    if outcome == A_WINS:
        v, w = _vw_win(t, e)
    elif outcome == DRAW:
        v, w = _vw_draw(t, e)
    else:
        raise ValueError(f"unknown outcome {outcome!r}")
    mu_a = a.mu + (va / c) * v
    mu_b = b.mu - (vb / c) * v
    var_a = va * (1.0 - (va / c2) * w)
    var_b = vb * (1.0 - (vb / c2) * w)
    if not (var_a > 0 and var_b > 0 and math.isfinite(mu_a) and math.isfinite(mu_b)):
        raise ArithmeticError(f"rating update left the numerical domain: {a}, {b}, {outcome}")
    return Rating(mu_a, math.sqrt(var_a)), Rating(mu_b, math.sqrt(var_b))


def _with_dynamics(r: Rating, params: RatingParams) -> Rating:
    return Rating(r.mu, math.sqrt(r.sigma ** 2 + params.tau ** 2))


def update_pair(
    a: Rating, b: Rating, outcome: str, params: RatingParams = RatingParams()
) -> tuple[Rating, Rating]:
    """Posterior ratings after one match between a and b."""
    return _pair_update_no_dynamics(
        _with_dynamics(a, params), _with_dynamics(b, params), outcome, params
    )


def update_ranked(
    ratings: Sequence[Rating],
    finish_ranks: Sequence[int],
    params: RatingParams = RatingParams(),
) -> list[Rating]:
    """Ranked multi-seat update via pairwise decomposition (lower rank = better).

    Every unordered pair contributes a win/draw update computed from the
    common priors; per-agent mean shifts and variance factors are then
    combined with order-independent reductions.
    """
    n = len(ratings)
    if len(finish_ranks) != n:
        raise ValueError(f"{n} ratings but {len(finish_ranks)} ranks")
    priors = [_with_dynamics(r, params) for r in ratings]
    if n == 1:
        return list(priors)
    mu_shifts: list[list[float]] = [[] for _ in range(n)]
    var_factors: list[list[float]] = [[] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if finish_ranks[i] < finish_ranks[j]:
                outcome = A_WINS
            elif finish_ranks[i] > finish_ranks[j]:
                outcome = B_WINS
            else:
                outcome = DRAW
            ri, rj = _pair_update_no_dynamics(priors[i], priors[j], outcome, params)
            mu_shifts[i].append(ri.mu - priors[i].mu)
            var_factors[i].append((ri.sigma / priors[i].sigma) ** 2)
            mu_shifts[j].append(rj.mu - priors[j].mu)
            var_factors[j].append((rj.sigma / priors[j].sigma) ** 2)
    out = []
    for i in range(n):
        mu = priors[i].mu + math.fsum(sorted(mu_shifts[i]))
        scale = 1.0
        for f in sorted(var_factors[i]):
            scale *= f
        out.append(Rating(mu, priors[i].sigma * math.sqrt(scale)))
    return out


@dataclass(frozen=True)
class SinglePlayerResult:
    success: bool
    score: float
    steps: int
    time: float


def rate_single_player(
    results: Sequence[SinglePlayerResult],
) -> list[tuple[int, int, str]]:
    """Pairwise outcomes from independent runs on one shared instance.

    Comparison is lexicographic: success, then score (higher better), then
    steps and time (lower better); full equality is a draw.
    """
    if len(results) < 2:
        raise ValueError("need at least two agents on the same instance")

    def key(r: SinglePlayerResult) -> tuple:
        return (not r.success, -r.score, r.steps, r.time)

    outcomes = []
    for i in range(len(results)):
        for j in range(i + 1, len(results)):
            ki, kj = key(results[i]), key(results[j])
            if ki < kj:
                outcomes.append((i, j, A_WINS))
            elif ki > kj:
                outcomes.append((i, j, B_WINS))
            else:
                outcomes.append((i, j, DRAW))
    return outcomes


def leaderboard_order(entries: Iterable[tuple[str, Rating]]) -> list[tuple[str, Rating]]:
    """Sort by conservative estimate desc, then mu desc, then agent id."""
    return sorted(entries, key=lambda kv: (-conservative(kv[1]), -kv[1].mu, kv[0]))
