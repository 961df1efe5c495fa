"""Analysis drivers: expert winning rates, training-size sweeps, and the
global-vs-local comparison for a single expert."""

import tempfile
from pathlib import Path

import numpy as np

from persuasim.cli import generate_players, sweep
from persuasim.corpus import synth_corpus
from persuasim.evaluation import expert_winning_rates, global_vs_local
from persuasim.game_core import GameConfig
from persuasim.predictor import TrainConfig
from persuasim.sentiment import StubScoreBackend, build_oracle_table

workdir = Path(tempfile.mkdtemp(prefix="persuasim-demo-"))
config = GameConfig()
corpus = synth_corpus(150, np.random.default_rng(0))
table = build_oracle_table(corpus.hotels, StubScoreBackend.from_corpus(corpus.hotels))

train = generate_players("grudger", 48, corpus, config, seed=0,
                         out_path=str(workdir / "train.jsonl"))
test = generate_players("grudger", 12, corpus, config, seed=99,
                        out_path=str(workdir / "test.jsonl"))

print("== expert winning rates against the grudger ==")
print(f"{'strategy':18s} {'go rate':>8s} {'go | low quality':>17s}")
for expert, (go, low) in sorted(expert_winning_rates(train).items()):
    low_text = f"{low:.3f}" if low is not None else "undefined"
    print(f"{expert:18s} {go:8.3f} {low_text:>17s}")
print("(the expert scores exactly when the DM goes; the conditional column"
      "\n shows persuasion power on hotels the DM should skip)")

print("\n== training-size sweep (baseline model for speed) ==")
rows = sweep([8, 16, 48], train, test, table, config, TrainConfig(seed=0), kind="baseline")
for row in rows:
    print(f"  {row['train_players']:3d} players -> accuracy {row['accuracy']:.3f}"
          f"  ci95 [{row['ci95_lo']:.3f}, {row['ci95_hi']:.3f}]")

print("\n== global vs local model for the greedy expert ==")
tc = TrainConfig(seed=0, epochs=8)
global_acc, local_acc = global_vs_local("greedy", train, test, table, config, tc, kind="lstm")
print(f"  trained on all experts:        {global_acc:.3f}")
print(f"  trained on greedy games only:  {local_acc:.3f}")
