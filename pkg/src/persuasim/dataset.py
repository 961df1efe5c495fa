"""Interaction-dataset persistence, ingestion, and player-level splitting.

On disk a dataset is line-delimited JSON: one header line describing the
file, then one game per line with a fixed field order.  All loads
re-validate the game invariants, so a corrupted or hand-edited file fails
with the offending line number.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .game_core import GameDataError, GameRecord, RoundRecord

FORMAT_TAG = "persuasim.dataset.v1"

BASE_PROVENANCES = ("human", "sentiment_baseline", "scripted", "mixed")


class DatasetError(ValueError):
    """Dataset file is malformed or violates an invariant."""


def validate_provenance(provenance: str) -> None:
    if provenance in BASE_PROVENANCES or provenance.startswith("llm:"):
        return
    raise DatasetError(
        f"provenance must be one of {BASE_PROVENANCES} or 'llm:<model>', "
        f"got {provenance!r}"
    )


@dataclass
class InteractionDataset:
    games: list[GameRecord]
    provenance: str = "scripted"
    rounds_T: int = 10

    def __post_init__(self) -> None:
        validate_provenance(self.provenance)
        seen: set[tuple[str, int, int]] = set()
        for game in self.games:
            key = (game.dm_id, game.stage_index, game.game_index)
            if key in seen:
                raise DatasetError(f"duplicate game key {key}")
            seen.add(key)
            if len(game.rounds) != self.rounds_T:
                raise DatasetError(
                    f"game {key} has {len(game.rounds)} rounds, expected {self.rounds_T}"
                )
        for dm_id, stage_index, game_index in seen:
            if game_index == 2 and (dm_id, stage_index, 1) not in seen:
                raise DatasetError(
                    f"game 2 of ({dm_id}, stage {stage_index}) has no game 1"
                )

    def __len__(self) -> int:
        return len(self.games)

    @property
    def n_decisions(self) -> int:
        return sum(len(g.rounds) for g in self.games)

    def player_ids(self) -> list[str]:
        seen: dict[str, None] = {}
        for game in self.games:
            seen.setdefault(game.dm_id, None)
        return list(seen)

    def games_of(self, player_ids: Iterable[str]) -> list[GameRecord]:
        wanted = set(player_ids)
        return [g for g in self.games if g.dm_id in wanted]


def _game_to_json(game: GameRecord) -> str:
    payload = {
        "dm_id": game.dm_id,
        "dm_kind": game.dm_kind,
        "persona_id": game.persona_id,
        "expert_strategy": game.expert_strategy,
        "stage_index": game.stage_index,
        "game_index": game.game_index,
        "cumulative_dm_points": game.cumulative_dm_points,
        "rounds": [
            {
                "round_index": r.round_index,
                "hotel_id": r.hotel_id,
                "shown_review_index": r.shown_review_index,
                "hotel_quality_q": r.hotel_quality_q,
                "dm_action_a": r.dm_action_a,
                "dm_payoff_v": r.dm_payoff_v,
                "expert_payoff_u": r.expert_payoff_u,
            }
            for r in game.rounds
        ],
    }
    return json.dumps(payload, ensure_ascii=False)


def _game_from_json(payload: dict) -> GameRecord:
    rounds = [RoundRecord(**r) for r in payload["rounds"]]
    return GameRecord(
        dm_id=payload["dm_id"],
        dm_kind=payload["dm_kind"],
        persona_id=payload.get("persona_id"),
        expert_strategy=payload["expert_strategy"],
        stage_index=payload["stage_index"],
        game_index=payload["game_index"],
        rounds=rounds,
        cumulative_dm_points=payload["cumulative_dm_points"],
    )


def header_line(provenance: str, rounds_T: int) -> str:
    return json.dumps(
        {"format": FORMAT_TAG, "provenance": provenance, "rounds_T": rounds_T}
    )


def save(dataset: InteractionDataset, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header_line(dataset.provenance, dataset.rounds_T) + "\n")
        for game in dataset.games:
            fh.write(_game_to_json(game) + "\n")


def append_games(path: str, games: Sequence[GameRecord], provenance: str, rounds_T: int) -> None:
    """Append completed games, creating the file (with header) if needed.
    Each game is one line written in a single call, so concurrent readers
    only ever see whole records."""
    new_file = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", encoding="utf-8", newline="\n") as fh:
        if new_file:
            fh.write(header_line(provenance, rounds_T) + "\n")
        for game in games:
            fh.write(_game_to_json(game) + "\n")


def load(path: str) -> InteractionDataset:
    games: list[GameRecord] = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header:
            raise DatasetError(f"{path}: empty file (missing header line)")
        try:
            meta = json.loads(header)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{path}:1: malformed header: {exc}") from exc
        if meta.get("format") != FORMAT_TAG:
            raise DatasetError(f"{path}:1: not a {FORMAT_TAG} file")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                games.append(_game_from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, GameDataError) as exc:
                raise DatasetError(f"{path}:{lineno}: {exc}") from exc
    try:
        return InteractionDataset(
            games=games, provenance=meta["provenance"], rounds_T=meta["rounds_T"]
        )
    except DatasetError as exc:
        raise DatasetError(f"{path}: {exc}") from exc


def split_by_player(
    dataset: InteractionDataset,
    test_players: int = 100,
    n_splits: int = 50,
    rng: Optional[np.random.Generator] = None,
) -> list[tuple[InteractionDataset, InteractionDataset]]:
    """Player-disjoint train/test splits: each test set holds all games of
    exactly ``test_players`` distinct players."""
    rng = rng or np.random.default_rng()
    players = dataset.player_ids()
    if len(players) <= test_players:
        raise DatasetError(
            f"need more than {test_players} players to split, have {len(players)}"
        )
    splits: list[tuple[InteractionDataset, InteractionDataset]] = []
    for _ in range(n_splits):
        test_ids = set(
            players[i] for i in rng.choice(len(players), size=test_players, replace=False)
        )
        test_games = [g for g in dataset.games if g.dm_id in test_ids]
        train_games = [g for g in dataset.games if g.dm_id not in test_ids]
        splits.append(
            (
                InteractionDataset(train_games, dataset.provenance, dataset.rounds_T),
                InteractionDataset(test_games, dataset.provenance, dataset.rounds_T),
            )
        )
    return splits


def mix(a: InteractionDataset, b: InteractionDataset) -> InteractionDataset:
    """Concatenate two datasets (e.g. human + LLM players) into one with
    provenance "mixed"; player id namespaces must not collide."""
    if a.rounds_T != b.rounds_T:
        raise DatasetError("cannot mix datasets with different rounds_T")
    collisions = set(a.player_ids()) & set(b.player_ids())
    if collisions:
        raise DatasetError(f"dm_id collision between datasets: {sorted(collisions)[:5]}")
    return InteractionDataset(a.games + b.games, "mixed", a.rounds_T)


# --- human-data ingestion ----------------------------------------------------

# Column adapter for the published human dataset.  Logical fields on the
# left; the source CSV column on the right can be remapped via a JSON file
# when the release uses different names (see docs/formats.md).
DEFAULT_HUMAN_COLUMNS = {
    "dm_id": "user_id",
    "expert_strategy": "strategy_id",
    "stage_index": "stage",
    "game_index": "game_in_stage",
    "round_index": "round",
    "action": "didGo",
    "payoff": "didWin",
    "hotel_id": "hotelId",
    "shown_review_index": "reviewId",
}

# Bot strategy ids in the source data -> our strategy identifiers.
DEFAULT_STRATEGY_MAP = {
    "greedy": "greedy",
    "average": "average",
    "honest": "honest",
    "ambiguous": "ambiguous",
    "choice_adaptive": "choice_adaptive",
    "points_adaptive": "points_adaptive",
}


def _as_int(value: str) -> int:
    if isinstance(value, str) and value.strip().lower() in ("true", "false"):
        return int(value.strip().lower() == "true")
    return int(float(value))


def ingest_human(
    path: str,
    columns: Optional[dict[str, str]] = None,
    strategy_map: Optional[dict[str, str]] = None,
    rounds_T: int = 10,
) -> InteractionDataset:
    """Convert the published human-play CSV into an interaction dataset.

    Keeps only the first two games per (player, stage).  Quality per round
    is derived from (action, payoff): a correct action reveals quality =
    action, an incorrect one quality = 1 - action.
    """
    columns = dict(DEFAULT_HUMAN_COLUMNS, **(columns or {}))
    strategy_map = dict(DEFAULT_STRATEGY_MAP, **(strategy_map or {}))

    rows_by_game: dict[tuple[str, int, int], list[dict]] = {}
    strategies: dict[tuple[str, int, int], str] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DatasetError(f"{path}: empty file")
        missing = [c for c in columns.values() if c not in reader.fieldnames]
        if missing:
            raise DatasetError(f"{path}: missing columns {missing}")
        for lineno, row in enumerate(reader, start=2):
            try:
                dm_id = "human:" + str(row[columns["dm_id"]])
                stage = _as_int(row[columns["stage_index"]])
                game_in_stage = _as_int(row[columns["game_index"]])
                key = (dm_id, stage, game_in_stage)
                strategies[key] = strategy_map.get(
                    str(row[columns["expert_strategy"]]),
                    str(row[columns["expert_strategy"]]),
                )
                action = _as_int(row[columns["action"]])
                payoff = _as_int(row[columns["payoff"]])
                quality = action if payoff == 1 else 1 - action
                rows_by_game.setdefault(key, []).append(
                    {
                        "round_index": _as_int(row[columns["round_index"]]),
                        "hotel_id": str(row[columns["hotel_id"]]),
                        "shown_review_index": _as_int(row[columns["shown_review_index"]]),
                        "hotel_quality_q": quality,
                        "dm_action_a": action,
                        "dm_payoff_v": payoff,
                        "expert_payoff_u": action,
                    }
                )
            except (KeyError, ValueError) as exc:
                raise DatasetError(f"{path}:{lineno}: {exc}") from exc

    games: list[GameRecord] = []
    for key in sorted(rows_by_game):
        dm_id, stage, game_in_stage = key
        if game_in_stage > 2:  # only the first two games per stage are kept
            continue
        rows = sorted(rows_by_game[key], key=lambda r: r["round_index"])
        if len(rows) != rounds_T:
            raise DatasetError(
                f"{path}: game {key} has {len(rows)} rounds, expected {rounds_T}"
            )
        rounds = [RoundRecord(**row) for row in rows]
        games.append(
            GameRecord(
                dm_id=dm_id,
                dm_kind="human",
                persona_id=None,
                expert_strategy=strategies[key],
                stage_index=stage,
                game_index=game_in_stage,
                rounds=rounds,
                cumulative_dm_points=sum(r.dm_payoff_v for r in rounds),
            )
        )
    return InteractionDataset(games, "human", rounds_T)
