"""The six review-selection strategies played by the bot travel agents.

Each strategy is a small decision tree over the current hotel and the
within-game interaction history.  All ties (equal scores, equidistant from
the mean) break toward the lowest review index, which makes every strategy
a deterministic function of its observation.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

from .game_core import hotel_quality

if TYPE_CHECKING:
    from .game_core import Hotel, RoundRecord


class StrategyClass(Enum):
    NAIVE = "naive"
    STATIONARY = "stationary"
    ADAPTIVE = "adaptive"


class ExpertStrategy(Enum):
    """Stable strategy identifiers; the values appear in dataset files and
    CLI flags."""

    GREEDY = "greedy"
    AVERAGE = "average"
    HONEST = "honest"
    AMBIGUOUS = "ambiguous"
    CHOICE_ADAPTIVE = "choice_adaptive"
    POINTS_ADAPTIVE = "points_adaptive"

    def select_review(self, obs: "ExpertObservation", tau: float) -> int:
        return select_review(self, obs, tau)

    @property
    def strategy_class(self) -> StrategyClass:
        return classify_strategy(self)


DEFAULT_EXPERT_ORDER = (
    ExpertStrategy.GREEDY,
    ExpertStrategy.AVERAGE,
    ExpertStrategy.HONEST,
    ExpertStrategy.AMBIGUOUS,
    ExpertStrategy.CHOICE_ADAPTIVE,
    ExpertStrategy.POINTS_ADAPTIVE,
)


@dataclass(frozen=True)
class ExpertObservation:
    """What the expert sees before picking a review: the current hotel,
    the within-game history, and both running point totals."""

    hotel: "Hotel"
    history: tuple["RoundRecord", ...]
    expert_cum_points: int
    dm_cum_points: int

    def __post_init__(self) -> None:
        if self.dm_cum_points != sum(r.dm_payoff_v for r in self.history):
            raise ValueError("dm_cum_points inconsistent with history")
        if self.expert_cum_points != sum(r.expert_payoff_u for r in self.history):
            raise ValueError("expert_cum_points inconsistent with history")


def _argmax_score(scores: tuple[float, ...]) -> int:
    return max(range(len(scores)), key=lambda i: (scores[i], -i))


def _argmin_score(scores: tuple[float, ...]) -> int:
    return min(range(len(scores)), key=lambda i: (scores[i], i))


def _closest_to_mean(scores: tuple[float, ...]) -> int:
    mean = sum(scores) / len(scores)
    return min(range(len(scores)), key=lambda i: (abs(scores[i] - mean), i))


def _dm_led_every_round(history: tuple["RoundRecord", ...]) -> bool:
    """True iff the DM's cumulative points strictly exceeded the expert's
    after every previous round (vacuously true on an empty history)."""
    dm_points = 0
    expert_points = 0
    for record in history:
        dm_points += record.dm_payoff_v
        expert_points += record.expert_payoff_u
        if dm_points <= expert_points:
            return False
    return True


def select_review(strategy: ExpertStrategy, obs: "ExpertObservation", tau: float) -> int:
    """Index of the review the strategy reveals for the current hotel."""
    scores = obs.hotel.scores
    if strategy is ExpertStrategy.GREEDY:
        return _argmax_score(scores)
    if strategy is ExpertStrategy.AVERAGE:
        return _closest_to_mean(scores)
    if strategy is ExpertStrategy.HONEST:
        if hotel_quality(obs.hotel, tau):
            return _argmax_score(scores)
        return _argmin_score(scores)
    if strategy is ExpertStrategy.AMBIGUOUS:
        if hotel_quality(obs.hotel, tau):
            return _argmax_score(scores)
        return _closest_to_mean(scores)
    if strategy is ExpertStrategy.CHOICE_ADAPTIVE:
        # "Went in the previous round?" is false on round 1.
        went_last_round = bool(obs.history) and obs.history[-1].dm_action_a == 1
        if went_last_round:
            return _closest_to_mean(scores)
        return _argmax_score(scores)
    if strategy is ExpertStrategy.POINTS_ADAPTIVE:
        if hotel_quality(obs.hotel, tau):
            return _closest_to_mean(scores)
        if _dm_led_every_round(obs.history):
            return _argmax_score(scores)
        return _argmin_score(scores)
    raise ValueError(f"unknown strategy {strategy!r}")


def classify_strategy(strategy: ExpertStrategy) -> StrategyClass:
    """Naive strategies ignore quality and history; stationary ones depend
    on quality only; adaptive ones read the history."""
    if strategy in (ExpertStrategy.GREEDY, ExpertStrategy.AVERAGE):
        return StrategyClass.NAIVE
    if strategy in (ExpertStrategy.HONEST, ExpertStrategy.AMBIGUOUS):
        return StrategyClass.STATIONARY
    return StrategyClass.ADAPTIVE
