"""Walk through the game mechanics: quality, payoffs, the six expert
strategies, and one fully traced game."""

import numpy as np

from persuasim import GameConfig, hotel_quality, play_game, round_payoffs
from persuasim.agents import GrudgerDm
from persuasim.corpus import synth_corpus
from persuasim.experts import DEFAULT_EXPERT_ORDER, ExpertObservation, ExpertStrategy

rng = np.random.default_rng(0)
config = GameConfig()
corpus = synth_corpus(50, rng)

print("== hotel quality ==")
hotel = corpus.hotels[0]
print(f"hotel {hotel.hotel_id}: scores {hotel.scores}")
print(f"mean {hotel.mean_score:.2f}, tau {config.quality_threshold_tau}"
      f" -> quality {hotel_quality(hotel, config.quality_threshold_tau)}")

print("\n== payoffs: (dm, expert) for each (action, quality) ==")
for action in (0, 1):
    for quality in (0, 1):
        print(f"  action={action} quality={quality} -> {round_payoffs(action, quality)}")

print("\n== what each strategy reveals for this hotel (no history) ==")
obs = ExpertObservation(hotel=hotel, history=(), expert_cum_points=0, dm_cum_points=0)
for strategy in ExpertStrategy:
    idx = strategy.select_review(obs, config.quality_threshold_tau)
    print(f"  {strategy.value:16s} ({strategy.strategy_class.value:10s})"
          f" -> review {idx} (score {hotel.reviews[idx].score})")

print("\n== one traced game: points-based adaptive expert vs a grudger DM ==")
hotels = corpus.hotels[:10]
record = play_game(
    ExpertStrategy.POINTS_ADAPTIVE, GrudgerDm(), hotels, config, np.random.default_rng(1)
)
for r in record.rounds:
    shown = corpus.hotel_by_id(r.hotel_id).reviews[r.shown_review_index]
    print(f"  round {r.round_index:2d}: shown score {shown.score:4.1f}"
          f"  q={r.hotel_quality_q} a={r.dm_action_a}"
          f"  dm+{r.dm_payoff_v} expert+{r.expert_payoff_u}")
print(f"grudger finished with {record.cumulative_dm_points} points"
      f" (target {config.target_for_stage(1)})")

print("\n== a full six-stage interaction ==")
from persuasim import play_full_interaction

games = play_full_interaction(
    GrudgerDm(), DEFAULT_EXPERT_ORDER, corpus.hotels, config, np.random.default_rng(2)
)
for g in games:
    print(f"  stage {g.stage_index} ({g.expert_strategy:16s}) game {g.game_index}:"
          f" {g.cumulative_dm_points} points")
print(f"{len(games)} games played (a stage replays once when game 1 misses the target)")
