import json
import os

import numpy as np
import pytest

from persuasim import dataset as dataset_io
from persuasim.cli import load_config_file, main, sweep
from persuasim.corpus import load_corpus


def run(*argv):
    return main(list(argv))


@pytest.fixture(scope="module")
def corpus_path(tmp_path_factory):
    path = str(tmp_path_factory.mktemp("corpus") / "corpus.tsv")
    assert run("corpus", "synth", "--n", "30", "--seed", "9", "--out", path) == 0
    return path


@pytest.fixture(scope="module")
def grudger_data(tmp_path_factory, corpus_path):
    path = str(tmp_path_factory.mktemp("data") / "grudger.jsonl")
    assert (
        run(
            "generate", "--kind", "grudger", "--n-players", "8",
            "--corpus", corpus_path, "--out", path, "--seed", "1",
        )
        == 0
    )
    return path


class TestCorpusCommands:
    def test_synth_writes_manifest(self, corpus_path):
        manifest = json.load(open(corpus_path + ".manifest.json"))
        assert manifest["seeds"] == {"seed": 9}
        assert corpus_path in manifest["outputs"]

    def test_validate_reports_counts(self, corpus_path, capsys):
        assert run("corpus", "validate", corpus_path) == 0
        out = capsys.readouterr().out
        assert "hotels: 30" in out
        assert "high_quality_fraction" in out


class TestGenerate:
    def test_scripted_generation_deterministic(self, tmp_path, corpus_path):
        p1 = str(tmp_path / "a.jsonl")
        p2 = str(tmp_path / "b.jsonl")
        for p in (p1, p2):
            run("generate", "--kind", "grudger", "--n-players", "4",
                "--corpus", corpus_path, "--out", p, "--seed", "3")
        assert open(p1, "rb").read() == open(p2, "rb").read()

    def test_game_counts_in_range(self, grudger_data):
        data = dataset_io.load(grudger_data)
        assert 48 <= len(data) <= 96
        assert len(data.player_ids()) == 8

    def test_resume_reproduces_fresh_run_bytes(self, tmp_path, corpus_path):
        fresh = str(tmp_path / "fresh.jsonl")
        run("generate", "--kind", "always_go", "--n-players", "6",
            "--corpus", corpus_path, "--out", fresh, "--seed", "4")
        partial = str(tmp_path / "partial.jsonl")
        run("generate", "--kind", "always_go", "--n-players", "3",
            "--corpus", corpus_path, "--out", partial, "--seed", "4")
        run("generate", "--kind", "always_go", "--n-players", "6",
            "--corpus", corpus_path, "--out", partial, "--seed", "4", "--resume")
        assert open(fresh, "rb").read() == open(partial, "rb").read()

    def test_worker_pool_output_matches_sequential(self, tmp_path, corpus_path):
        sequential = str(tmp_path / "seq.jsonl")
        pooled = str(tmp_path / "pool.jsonl")
        run("generate", "--kind", "grudger", "--n-players", "6",
            "--corpus", corpus_path, "--out", sequential, "--seed", "8")
        run("generate", "--kind", "grudger", "--n-players", "6",
            "--corpus", corpus_path, "--out", pooled, "--seed", "8", "--workers", "4")
        assert open(sequential, "rb").read() == open(pooled, "rb").read()

    def test_sentiment_generation_matches_rule(self, tmp_path, corpus_path):
        out = str(tmp_path / "sent.jsonl")
        run("generate", "--kind", "sentiment", "--n-players", "4",
            "--corpus", corpus_path, "--out", out, "--seed", "5")
        data = dataset_io.load(out)
        assert data.provenance == "sentiment_baseline"
        corpus = load_corpus(corpus_path)
        score = {}
        for hotel in corpus.hotels:
            for i, review in enumerate(hotel.reviews):
                score[(hotel.hotel_id, i)] = review.score
        # spread-0 stub: every decision equals I(bucket(true score) >= 8)
        for game in data.games:
            for r in game.rounds:
                bucket = int(np.floor(score[(r.hotel_id, r.shown_review_index)]))
                assert r.dm_action_a == int(bucket >= 8)


class TestDatasetCommands:
    def test_stats(self, grudger_data, capsys):
        run("dataset", "stats", grudger_data)
        out = capsys.readouterr().out
        assert "players: 8" in out

    def test_split(self, tmp_path, grudger_data):
        out_dir = str(tmp_path / "splits")
        run("dataset", "split", "--data", grudger_data, "--test-players", "2",
            "--n-splits", "3", "--out-dir", out_dir, "--seed", "0")
        train = dataset_io.load(os.path.join(out_dir, "split000.train.jsonl"))
        test = dataset_io.load(os.path.join(out_dir, "split000.test.jsonl"))
        assert len(test.player_ids()) == 2
        assert set(train.player_ids()) & set(test.player_ids()) == set()

    def test_mix(self, tmp_path, corpus_path, grudger_data):
        other = str(tmp_path / "sent.jsonl")
        run("generate", "--kind", "sentiment", "--n-players", "3",
            "--corpus", corpus_path, "--out", other, "--seed", "6")
        mixed = str(tmp_path / "mixed.jsonl")
        run("dataset", "mix", "--a", grudger_data, "--b", other, "--out", mixed)
        data = dataset_io.load(mixed)
        assert data.provenance == "mixed"
        assert len(data.player_ids()) == 11


class TestTrainEvalPipeline:
    def test_train_predict_eval(self, tmp_path, corpus_path, grudger_data):
        model_path = str(tmp_path / "model.bin")
        run("train", "--data", grudger_data, "--corpus", corpus_path,
            "--out", model_path, "--model", "baseline", "--seed", "0")
        assert os.path.exists(model_path)

        pred_path = str(tmp_path / "preds.tsv")
        run("predict", "--model", model_path, "--data", grudger_data,
            "--corpus", corpus_path, "--out", pred_path)
        lines = open(pred_path).read().splitlines()
        data = dataset_io.load(grudger_data)
        assert len(lines) == 1 + data.n_decisions

        report_path = str(tmp_path / "report.jsonl")
        run("eval", "--model", model_path, "--data", grudger_data,
            "--corpus", corpus_path, "--out", report_path, "--per-expert", "--seed", "0")
        metrics = [json.loads(l) for l in open(report_path)]
        names = {m["metric"] for m in metrics}
        assert {"overall_accuracy", "ece", "ci95_lo", "ci95_hi"} <= names
        per_expert = [m for m in metrics if m["metric"] == "per_expert_accuracy"]
        assert len(per_expert) == 6

    def test_winning_rates(self, tmp_path, grudger_data):
        out = str(tmp_path / "rates.jsonl")
        run("eval", "--winning-rates", "--data", grudger_data, "--out", out)
        rows = [json.loads(l) for l in open(out)]
        assert len(rows) == 6
        assert all(0.0 <= r["go_rate"] <= 1.0 for r in rows)

    def test_lstm_end_to_end_determinism(self, tmp_path, corpus_path):
        """generate -> train -> eval twice with one seed: identical bytes."""
        artifacts = []
        for run_dir in ("r1", "r2"):
            base = tmp_path / run_dir
            base.mkdir()
            data = str(base / "data.jsonl")
            model = str(base / "model.bin")
            report = str(base / "report.jsonl")
            run("generate", "--kind", "grudger", "--n-players", "4",
                "--corpus", corpus_path, "--out", data, "--seed", "21")
            run("train", "--data", data, "--corpus", corpus_path, "--out", model,
                "--model", "lstm", "--seed", "21", "--epochs", "2",
                "--hidden-dim", "8", "--n-layers", "1")
            run("eval", "--model", model, "--data", data, "--corpus", corpus_path,
                "--out", report, "--seed", "21")
            artifacts.append(tuple(open(p, "rb").read() for p in (data, model, report)))
        assert artifacts[0] == artifacts[1]


class TestExperimentCommands:
    def test_sweep_rows_and_dedup(self, tmp_path, corpus_path, grudger_data, capsys):
        out = str(tmp_path / "sweep.jsonl")
        run("experiment", "sweep", "--sizes", "2,4,4", "--train", grudger_data,
            "--test", grudger_data, "--corpus", corpus_path, "--out", out,
            "--model", "baseline", "--seed", "0")
        err = capsys.readouterr().err
        assert "duplicate sweep size" in err
        rows = [json.loads(l) for l in open(out)]
        assert [r["train_players"] for r in rows] == [2, 4]
        assert all("accuracy" in r for r in rows)

    def test_sweep_insufficient_players(self, corpus_path, grudger_data):
        data = dataset_io.load(grudger_data)
        with pytest.raises(ValueError, match="exceeds"):
            from persuasim.game_core import GameConfig
            from persuasim.predictor import TrainConfig
            from persuasim.sentiment import StubScoreBackend, build_oracle_table

            corpus = load_corpus(corpus_path)
            table = build_oracle_table(corpus.hotels, StubScoreBackend.from_corpus(corpus.hotels))
            sweep([999], data, data, table, GameConfig(), TrainConfig(epochs=1), kind="baseline")

    def test_learning_curve_sanity(self, tmp_path, corpus_path):
        # more grudger players must not hurt: acc(256) >= acc(32) - ci width
        train = str(tmp_path / "curve_train.jsonl")
        test = str(tmp_path / "curve_test.jsonl")
        run("generate", "--kind", "grudger", "--n-players", "256",
            "--corpus", corpus_path, "--out", train, "--seed", "40")
        run("generate", "--kind", "grudger", "--n-players", "32",
            "--corpus", corpus_path, "--out", test, "--seed", "41")
        from persuasim.game_core import GameConfig
        from persuasim.predictor import TrainConfig
        from persuasim.sentiment import StubScoreBackend, build_oracle_table

        corpus = load_corpus(corpus_path)
        table = build_oracle_table(corpus.hotels, StubScoreBackend.from_corpus(corpus.hotels))
        rows = sweep(
            [32, 256], dataset_io.load(train), dataset_io.load(test), table,
            GameConfig(), TrainConfig(seed=0), kind="lstm",
        )
        small, large = rows
        ci_width = small["ci95_hi"] - small["ci95_lo"]
        assert large["accuracy"] >= small["accuracy"] - ci_width

    def test_global_vs_local(self, tmp_path, corpus_path, grudger_data):
        out = str(tmp_path / "gvl.jsonl")
        run("experiment", "global-vs-local", "--expert", "greedy",
            "--train", grudger_data, "--test", grudger_data, "--corpus", corpus_path,
            "--out", out, "--model", "baseline", "--seed", "0")
        rows = [json.loads(l) for l in open(out)]
        assert {r["metric"] for r in rows} == {"global_accuracy", "local_accuracy"}

    def test_grids_recipe(self, capsys):
        run("experiment", "grids")
        grids = json.loads(capsys.readouterr().out)
        assert grids["human_train_sizes"] == [32, 64, 110]
        assert grids["synthetic_train_sizes"] == [64, 128, 256, 512, 1024, 2048, 4096]
        assert grids["test_players"] == 100 and grids["n_splits"] == 50


class TestConfigFile:
    def test_config_supplies_defaults(self, tmp_path, corpus_path):
        config_path = str(tmp_path / "run.cfg")
        with open(config_path, "w") as fh:
            fh.write("# desk-scale settings\nseed = 33\nepochs = 1\nhidden_dim = 4\nn_layers = 1\n")
        values = load_config_file(config_path)
        assert values["seed"] == "33"

        data = str(tmp_path / "data.jsonl")
        run("generate", "--kind", "always_go", "--n-players", "2",
            "--corpus", corpus_path, "--out", data, "--seed", "33")
        model = str(tmp_path / "m.bin")
        run("--config", config_path, "train", "--data", data, "--corpus", corpus_path,
            "--out", model, "--model", "lstm")
        manifest = json.load(open(model + ".manifest.json"))
        assert manifest["seeds"] == {"seed": 33}
        assert manifest["config"]["epochs"] == 1

    def test_malformed_config_rejected(self, tmp_path):
        path = str(tmp_path / "bad.cfg")
        open(path, "w").write("not a key value line\n")
        with pytest.raises(ValueError, match="key = value"):
            load_config_file(path)
