import csv
import json

import numpy as np
import pytest

from persuasim import dataset as dataset_io
from persuasim.agents import GrudgerDm
from persuasim.dataset import DatasetError, InteractionDataset
from persuasim.experts import DEFAULT_EXPERT_ORDER
from persuasim.game_core import GameConfig, play_full_interaction


def make_dataset(n_players=4, seed=0, provenance="scripted", prefix="scripted:grudger"):
    config = GameConfig()
    from persuasim.corpus import synth_corpus

    corpus = synth_corpus(30, np.random.default_rng(99))
    games = []
    for i in range(n_players):
        games.extend(
            play_full_interaction(
                GrudgerDm(),
                DEFAULT_EXPERT_ORDER,
                corpus.hotels,
                config,
                np.random.default_rng([seed, i]),
                dm_id=f"{prefix}:{i:05d}",
            )
        )
    return InteractionDataset(games, provenance, config.rounds_T)


@pytest.fixture(scope="module")
def data():
    return make_dataset()


class TestRoundTrip:
    def test_empty_dataset_roundtrips(self, tmp_path):
        path = str(tmp_path / "empty.jsonl")
        dataset_io.save(InteractionDataset([], "scripted"), path)
        assert open(path).read().count("\n") == 1  # header only
        loaded = dataset_io.load(path)
        assert len(loaded) == 0
        assert loaded.provenance == "scripted"

    def test_single_game_roundtrip_equality(self, tmp_path, data):
        path = str(tmp_path / "one.jsonl")
        one = InteractionDataset([data.games[0]], data.provenance)
        dataset_io.save(one, path)
        loaded = dataset_io.load(path)
        assert loaded.games == one.games

    def test_full_roundtrip_bytes_stable(self, tmp_path, data):
        p1, p2 = str(tmp_path / "d1.jsonl"), str(tmp_path / "d2.jsonl")
        dataset_io.save(data, p1)
        dataset_io.save(dataset_io.load(p1), p2)
        assert open(p1, "rb").read() == open(p2, "rb").read()

    def test_invariant_breach_rejected_at_load(self, tmp_path, data):
        path = str(tmp_path / "bad.jsonl")
        dataset_io.save(data, path)
        lines = open(path).read().splitlines()
        game = json.loads(lines[1])
        game["rounds"][0]["dm_payoff_v"] = 1 - game["rounds"][0]["dm_payoff_v"]
        lines[1] = json.dumps(game, ensure_ascii=False)
        open(path, "w").write("\n".join(lines) + "\n")
        with pytest.raises(DatasetError, match=":2:"):
            dataset_io.load(path)

    def test_malformed_line_reports_number(self, tmp_path, data):
        path = str(tmp_path / "trunc.jsonl")
        dataset_io.save(data, path)
        lines = open(path).read().splitlines()
        lines[3] = lines[3][: len(lines[3]) // 2]
        open(path, "w").write("\n".join(lines) + "\n")
        with pytest.raises(DatasetError, match=":4:"):
            dataset_io.load(path)

    def test_duplicate_game_key_rejected(self, data):
        with pytest.raises(DatasetError, match="duplicate"):
            InteractionDataset([data.games[0], data.games[0]], "scripted")

    def test_orphan_second_game_rejected(self, data):
        orphan = next(g for g in data.games if g.game_index == 2)
        with pytest.raises(DatasetError, match="no game 1"):
            InteractionDataset([orphan], "scripted")


class TestSplits:
    def test_player_disjointness(self, data):
        splits = dataset_io.split_by_player(
            data, test_players=1, n_splits=10, rng=np.random.default_rng(0)
        )
        for train, test in splits:
            assert set(train.player_ids()) & set(test.player_ids()) == set()
            assert len(test.player_ids()) == 1
            assert len(train.player_ids()) == 3

    def test_same_seed_same_splits(self, data):
        a = dataset_io.split_by_player(data, 1, 5, np.random.default_rng(3))
        b = dataset_io.split_by_player(data, 1, 5, np.random.default_rng(3))
        for (ta, sa), (tb, sb) in zip(a, b):
            assert ta.games == tb.games and sa.games == sb.games

    def test_insufficient_players(self, data):
        with pytest.raises(DatasetError):
            dataset_io.split_by_player(data, test_players=4, rng=np.random.default_rng(0))

    def test_no_decision_in_both_sides(self, data):
        train, test = dataset_io.split_by_player(
            data, 2, 1, np.random.default_rng(1)
        )[0]
        train_keys = {(g.dm_id, g.stage_index, g.game_index) for g in train.games}
        test_keys = {(g.dm_id, g.stage_index, g.game_index) for g in test.games}
        assert train_keys & test_keys == set()
        assert len(train_keys) + len(test_keys) == len(data)


class TestMix:
    def test_mix_with_empty_side_equals_other(self, data):
        empty = InteractionDataset([], "human")
        mixed = dataset_io.mix(data, empty)
        assert mixed.games == data.games
        assert mixed.provenance == "mixed"

    def test_counts_are_additive(self, data):
        other = make_dataset(n_players=2, seed=77, prefix="sentiment")
        mixed = dataset_io.mix(data, other)
        assert len(mixed.player_ids()) == len(data.player_ids()) + len(other.player_ids())
        assert mixed.n_decisions == data.n_decisions + other.n_decisions

    def test_collision_rejected(self, data):
        with pytest.raises(DatasetError, match="collision"):
            dataset_io.mix(data, data)


def write_human_csv(path, n_players=3, rounds=10, games_per_stage=3):
    """Synthetic file in the published dataset's column layout."""
    rows = []
    rng = np.random.default_rng(0)
    for player in range(n_players):
        for stage in range(1, 7):
            for game in range(1, games_per_stage + 1):
                for t in range(1, rounds + 1):
                    action = int(rng.integers(0, 2))
                    quality = int(rng.integers(0, 2))
                    rows.append(
                        {
                            "user_id": f"u{player}",
                            "strategy_id": DEFAULT_EXPERT_ORDER[stage - 1].value,
                            "stage": stage,
                            "game_in_stage": game,
                            "round": t,
                            "didGo": action,
                            "didWin": int(action == quality),
                            "hotelId": f"hotel{t}",
                            "reviewId": int(rng.integers(0, 7)),
                        }
                    )
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)


class TestIngestHuman:
    def test_keeps_only_first_two_games(self, tmp_path):
        path = str(tmp_path / "human.csv")
        write_human_csv(path, n_players=3, games_per_stage=3)
        data = dataset_io.ingest_human(path)
        assert len(data.player_ids()) == 3
        # 6 stages x 2 kept games x 3 players
        assert len(data) == 36
        assert all(g.game_index in (1, 2) for g in data.games)
        assert data.n_decisions == 36 * 10

    def test_quality_reconstruction(self, tmp_path):
        path = str(tmp_path / "human.csv")
        write_human_csv(path, n_players=1, games_per_stage=1)
        data = dataset_io.ingest_human(path)
        for game in data.games:
            for r in game.rounds:
                assert r.dm_payoff_v == int(r.dm_action_a == r.hotel_quality_q)

    def test_missing_column_is_hard_error(self, tmp_path):
        path = str(tmp_path / "human.csv")
        write_human_csv(path, n_players=1)
        rows = open(path).read().splitlines()
        rows[0] = rows[0].replace("didWin", "outcome")
        open(path, "w").write("\n".join(rows) + "\n")
        with pytest.raises(DatasetError, match="missing columns"):
            dataset_io.ingest_human(path)

    def test_truncated_file_is_hard_error(self, tmp_path):
        path = str(tmp_path / "human.csv")
        write_human_csv(path, n_players=1, games_per_stage=1)
        lines = open(path).read().splitlines()
        open(path, "w").write("\n".join(lines[:-3]) + "\n")
        with pytest.raises(DatasetError):
            dataset_io.ingest_human(path)

    def test_ingestion_is_idempotent(self, tmp_path):
        src = str(tmp_path / "human.csv")
        write_human_csv(src, n_players=2)
        d1 = dataset_io.ingest_human(src)
        d2 = dataset_io.ingest_human(src)
        p1, p2 = str(tmp_path / "d1.jsonl"), str(tmp_path / "d2.jsonl")
        dataset_io.save(d1, p1)
        dataset_io.save(d2, p2)
        assert open(p1, "rb").read() == open(p2, "rb").read()
