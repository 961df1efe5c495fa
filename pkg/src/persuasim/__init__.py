"""Repeated language-based persuasion games: simulation, synthetic data
generation, and human choice prediction."""

from .game_core import (
    GameConfig,
    GameRecord,
    Hotel,
    RoundRecord,
    ScoredReview,
    hotel_quality,
    play_full_interaction,
    play_game,
    play_stage,
    round_payoffs,
)
from .experts import DEFAULT_EXPERT_ORDER, ExpertStrategy, classify_strategy, select_review

__all__ = [
    "GameConfig",
    "GameRecord",
    "Hotel",
    "RoundRecord",
    "ScoredReview",
    "hotel_quality",
    "play_full_interaction",
    "play_game",
    "play_stage",
    "round_payoffs",
    "DEFAULT_EXPERT_ORDER",
    "ExpertStrategy",
    "classify_strategy",
    "select_review",
]

__version__ = "0.1.0"
