"""Generate interaction datasets from scripted and sentiment-baseline
players, and show what an LLM player's conversation looks like."""

import tempfile
from pathlib import Path

import numpy as np

from persuasim import dataset as dataset_io
from persuasim.agents import PERSONA_BY_ID, build_llm_prompt
from persuasim.cli import generate_players
from persuasim.corpus import synth_corpus
from persuasim.game_core import DmObservation, GameConfig
from persuasim.sentiment import ScoreOracle, StubScoreBackend

workdir = Path(tempfile.mkdtemp(prefix="persuasim-demo-"))
config = GameConfig()
corpus = synth_corpus(100, np.random.default_rng(0))

print("== scripted grudger players ==")
grudger_path = str(workdir / "grudger.jsonl")
data = generate_players("grudger", 16, corpus, config, seed=0, out_path=grudger_path)
print(f"wrote {len(data)} games, {data.n_decisions} decisions,"
      f" {len(data.player_ids())} players -> {grudger_path}")

print("\n== sentiment-baseline players (history-free) ==")
backend = StubScoreBackend.from_corpus(corpus.hotels, spread=0.0)
oracle = ScoreOracle(backend).distribution_for_text
sent_path = str(workdir / "sentiment.jsonl")
sent = generate_players(
    "sentiment", 8, corpus, config, seed=1, out_path=sent_path, oracle=oracle
)
go_rate = np.mean([r.dm_action_a for g in sent.games for r in g.rounds])
print(f"wrote {len(sent)} games; go-rate {go_rate:.2f}"
      " (each decision depends only on the shown review)")

print("\n== mixing sources ==")
mixed = dataset_io.mix(data, sent)
print(f"mixed dataset: provenance={mixed.provenance},"
      f" {len(mixed.player_ids())} players, {mixed.n_decisions} decisions")

print("\n== the first message an LLM player would receive ==")
obs = DmObservation(
    shown_positive_text=corpus.hotels[0].reviews[0].positive_text,
    shown_negative_text=corpus.hotels[0].reviews[0].negative_text,
    round_index=1,
    cumulative_points=0,
    last_round_feedback=None,
    expert_display_name="David",
    stage_index=1,
)
print("-" * 60)
print(build_llm_prompt(PERSONA_BY_ID["price"], obs))
print("-" * 60)
print("(live llm generation: persuasim generate --kind llm --personas"
      " --cache-dir .llmcache, with LLM_API_URL/KEY/MODEL set)")
