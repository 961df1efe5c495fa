"""State machine for the repeated hotel persuasion game.

Each round an expert (travel agent) privately sees R scored reviews of a
hotel, reveals exactly one review text to the decision maker (DM), and the
DM chooses to go (1) or stay home (0).  The DM earns a point when its
action matches the hotel's true quality; the expert earns a point whenever
the DM goes.  Games run for a fixed number of rounds; a stage consists of
up to two games against the same expert and ends early once the DM reaches
the stage's points target.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np

if TYPE_CHECKING:
    from .experts import ExpertStrategy

DM_KINDS = ("human", "llm", "sentiment_baseline", "scripted")

# Fixed pseudonyms shown to the DM, one per stage; the pseudonym->strategy
# mapping is never exposed to the DM side.
DEFAULT_EXPERT_NAMES = ("David", "Maya", "Alex", "Sophie", "Daniel", "Noa")


class GameDataError(ValueError):
    """A record or configuration violates a game invariant."""


class DmAgentError(RuntimeError):
    """A DM agent failed to produce an action; the game must be discarded."""


@dataclass(frozen=True)
class ScoredReview:
    """One hotel review: positive text, negative text, and a 1-10 score."""

    positive_text: str
    negative_text: str
    score: float

    def __post_init__(self) -> None:
        if not (1.0 <= self.score <= 10.0):
            raise GameDataError(f"review score {self.score} outside [1, 10]")
        if not self.positive_text and not self.negative_text:
            raise GameDataError("review must have at least one non-empty text")


@dataclass(frozen=True)
class Hotel:
    hotel_id: str
    reviews: tuple[ScoredReview, ...]

    def __post_init__(self) -> None:
        if not self.reviews:
            raise GameDataError(f"hotel {self.hotel_id!r} has no reviews")

    @property
    def scores(self) -> tuple[float, ...]:
        return tuple(r.score for r in self.reviews)

    @property
    def mean_score(self) -> float:
        return sum(self.scores) / len(self.reviews)


@dataclass(frozen=True)
class GameConfig:
    """Game parameters: rounds per game, reviews per hotel, quality
    threshold, and the per-stage points target needed to end a stage after
    one game."""

    rounds_T: int = 10
    reviews_R: int = 7
    quality_threshold_tau: float = 8.0
    stage_points_target: tuple[int, ...] = (10, 10, 10, 10, 10, 10)

    def __post_init__(self) -> None:
        if self.rounds_T < 1:
            raise GameDataError("rounds_T must be >= 1")
        if self.reviews_R < 1:
            raise GameDataError("reviews_R must be >= 1")
        for target in self.stage_points_target:
            if target < 0 or target > self.rounds_T:
                raise GameDataError(
                    f"stage points target {target} outside [0, rounds_T]"
                )

    @property
    def n_stages(self) -> int:
        return len(self.stage_points_target)

    def target_for_stage(self, stage_index: int) -> int:
        return self.stage_points_target[stage_index - 1]


@dataclass(frozen=True)
class RoundRecord:
    """One decision: the review shown, the DM's action, and both payoffs."""

    round_index: int
    hotel_id: str
    shown_review_index: int
    hotel_quality_q: int
    dm_action_a: int
    dm_payoff_v: int
    expert_payoff_u: int

    def __post_init__(self) -> None:
        for name in ("hotel_quality_q", "dm_action_a", "dm_payoff_v", "expert_payoff_u"):
            if getattr(self, name) not in (0, 1):
                raise GameDataError(f"{name} must be 0 or 1")
        if self.dm_payoff_v != int(self.dm_action_a == self.hotel_quality_q):
            raise GameDataError(
                f"round {self.round_index}: dm_payoff_v must equal "
                "I(action == quality)"
            )
        if self.expert_payoff_u != self.dm_action_a:
            raise GameDataError(
                f"round {self.round_index}: expert_payoff_u must equal the action"
            )


@dataclass(frozen=True)
class RoundFeedback:
    """Outcome of the previous round, as revealed to the DM."""

    action: int
    quality: int
    payoff: int


@dataclass(frozen=True)
class DmObservation:
    """Everything the DM may see before acting.

    Never carries review scores, the full review set, or the current
    hotel's quality: those are the expert's private information.
    """

    shown_positive_text: str
    shown_negative_text: str
    round_index: int
    cumulative_points: int
    last_round_feedback: Optional[RoundFeedback]
    expert_display_name: str
    stage_index: int
    game_index: int = 1
    points_target: int = 10


@dataclass
class GameRecord:
    dm_id: str
    dm_kind: str
    persona_id: Optional[str]
    expert_strategy: str
    stage_index: int
    game_index: int
    rounds: list[RoundRecord]
    cumulative_dm_points: int

    def __post_init__(self) -> None:
        if self.dm_kind not in DM_KINDS:
            raise GameDataError(f"unknown dm_kind {self.dm_kind!r}")
        if self.game_index not in (1, 2):
            raise GameDataError("game_index must be 1 or 2")
        if not self.rounds:
            raise GameDataError("game has no rounds")
        for t, rec in enumerate(self.rounds, start=1):
            if rec.round_index != t:
                raise GameDataError(
                    f"round_index sequence broken at position {t} "
                    f"(found {rec.round_index})"
                )
        points = sum(r.dm_payoff_v for r in self.rounds)
        if self.cumulative_dm_points != points:
            raise GameDataError(
                f"cumulative_dm_points {self.cumulative_dm_points} != "
                f"sum of round payoffs {points}"
            )

    @property
    def n_rounds(self) -> int:
        return len(self.rounds)


def hotel_quality(hotel: Hotel, tau: float) -> int:
    """1 iff the arithmetic mean of the hotel's scores is at least tau."""
    return int(hotel.mean_score >= tau)


def round_payoffs(action: int, quality: int) -> tuple[int, int]:
    """(dm_payoff, expert_payoff): the DM scores on a match, the expert
    scores whenever the DM goes."""
    return int(action == quality), int(action)


def _call_hook(agent: object, name: str, *args) -> None:
    hook = getattr(agent, name, None)
    if hook is not None:
        hook(*args)


def play_game(
    expert: "ExpertStrategy",
    dm: object,
    hotels: Sequence[Hotel],
    config: GameConfig,
    rng: np.random.Generator,
    *,
    dm_id: str = "dm",
    dm_kind: str = "scripted",
    persona_id: Optional[str] = None,
    stage_index: int = 1,
    game_index: int = 1,
    expert_display_name: Optional[str] = None,
) -> GameRecord:
    """Play one full game of ``config.rounds_T`` rounds and return its record.

    The DM agent only ever receives a :class:`DmObservation`; agents that
    declare ``reveals_true_quality`` (test-only oracles) additionally get
    the quality through ``observe_quality`` before acting.
    """
    from .experts import ExpertObservation  # deferred; experts imports this module

    T = config.rounds_T
    if len(hotels) != T:
        raise GameDataError(f"need exactly {T} hotels per game, got {len(hotels)}")
    if len({h.hotel_id for h in hotels}) != T:
        raise GameDataError("hotel_ids within a game must be distinct")
    tau = config.quality_threshold_tau
    display_name = expert_display_name or DEFAULT_EXPERT_NAMES[
        (stage_index - 1) % len(DEFAULT_EXPERT_NAMES)
    ]
    target = config.target_for_stage(stage_index) if stage_index <= config.n_stages else 10

    _call_hook(dm, "begin_game", game_index)
    history: list[RoundRecord] = []
    dm_points = 0
    expert_points = 0
    feedback: Optional[RoundFeedback] = None
    for t in range(1, T + 1):
        hotel = hotels[t - 1]
        quality = hotel_quality(hotel, tau)
        expert_obs = ExpertObservation(
            hotel=hotel,
            history=tuple(history),
            expert_cum_points=expert_points,
            dm_cum_points=dm_points,
        )
        shown_index = expert.select_review(expert_obs, tau)
        review = hotel.reviews[shown_index]
        dm_obs = DmObservation(
            shown_positive_text=review.positive_text,
            shown_negative_text=review.negative_text,
            round_index=t,
            cumulative_points=dm_points,
            last_round_feedback=feedback,
            expert_display_name=display_name,
            stage_index=stage_index,
            game_index=game_index,
            points_target=target,
        )
        if getattr(dm, "reveals_true_quality", False):
            dm.observe_quality(quality)
        try:
            action = dm.decide(dm_obs, rng)
        except DmAgentError:
            raise
        except Exception as exc:  # agent bug or backend failure: abort, never truncate
            raise DmAgentError(
                f"DM agent failed in stage {stage_index} game {game_index} "
                f"round {t}: {exc}"
            ) from exc
        if action not in (0, 1):
            raise DmAgentError(f"DM returned non-binary action {action!r}")
        dm_payoff, expert_payoff = round_payoffs(action, quality)
        record = RoundRecord(
            round_index=t,
            hotel_id=hotel.hotel_id,
            shown_review_index=shown_index,
            hotel_quality_q=quality,
            dm_action_a=action,
            dm_payoff_v=dm_payoff,
            expert_payoff_u=expert_payoff,
        )
        history.append(record)
        dm_points += dm_payoff
        expert_points += expert_payoff
        feedback = RoundFeedback(action=action, quality=quality, payoff=dm_payoff)

    _call_hook(dm, "end_game", feedback, dm_points, dm_points >= target)
    return GameRecord(
        dm_id=dm_id,
        dm_kind=dm_kind,
        persona_id=persona_id,
        expert_strategy=expert.value,
        stage_index=stage_index,
        game_index=game_index,
        rounds=history,
        cumulative_dm_points=dm_points,
    )


def draw_game_hotels(
    corpus: Sequence[Hotel], config: GameConfig, rng: np.random.Generator
) -> list[Hotel]:
    """Uniform draw of T hotels without replacement (within one game)."""
    if len(corpus) < config.rounds_T:
        raise GameDataError(
            f"corpus has {len(corpus)} hotels; need at least {config.rounds_T}"
        )
    idx = rng.choice(len(corpus), size=config.rounds_T, replace=False)
    return [corpus[i] for i in idx]


def play_stage(
    expert: "ExpertStrategy",
    dm: object,
    corpus: Sequence[Hotel],
    config: GameConfig,
    rng: np.random.Generator,
    *,
    stage_index: int = 1,
    dm_id: str = "dm",
    dm_kind: str = "scripted",
    persona_id: Optional[str] = None,
    expert_display_name: Optional[str] = None,
) -> list[GameRecord]:
    """Play one stage: game 1, plus game 2 iff game 1 missed the points
    target.  Hotels are redrawn per game (with replacement across games)."""
    target = config.target_for_stage(stage_index)
    display_name = expert_display_name or DEFAULT_EXPERT_NAMES[
        (stage_index - 1) % len(DEFAULT_EXPERT_NAMES)
    ]
    _call_hook(dm, "begin_stage", stage_index, display_name, target)
    games: list[GameRecord] = []
    for game_index in (1, 2):
        hotels = draw_game_hotels(corpus, config, rng)
        record = play_game(
            expert,
            dm,
            hotels,
            config,
            rng,
            dm_id=dm_id,
            dm_kind=dm_kind,
            persona_id=persona_id,
            stage_index=stage_index,
            game_index=game_index,
            expert_display_name=display_name,
        )
        games.append(record)
        if record.cumulative_dm_points >= target:
            break
    return games


def play_full_interaction(
    dm: object,
    expert_sequence: Sequence["ExpertStrategy"],
    corpus: Sequence[Hotel],
    config: GameConfig,
    rng: np.random.Generator,
    *,
    dm_id: str = "dm",
    dm_kind: str = "scripted",
    persona_id: Optional[str] = None,
    expert_names: Sequence[str] = DEFAULT_EXPERT_NAMES,
) -> list[GameRecord]:
    """Run all six stages against ``expert_sequence`` in order."""
    if len(expert_sequence) != config.n_stages:
        raise GameDataError(
            f"expert_sequence must have {config.n_stages} entries, "
            f"got {len(expert_sequence)}"
        )
    games: list[GameRecord] = []
    for stage_index, expert in enumerate(expert_sequence, start=1):
        games.extend(
            play_stage(
                expert,
                dm,
                corpus,
                config,
                rng,
                stage_index=stage_index,
                dm_id=dm_id,
                dm_kind=dm_kind,
                persona_id=persona_id,
                expert_display_name=expert_names[(stage_index - 1) % len(expert_names)],
            )
        )
    return games
