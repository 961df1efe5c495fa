"""Metrics and experiment drivers.

The task metric is per-DM per-expert accuracy: decisions are grouped by
(dm_id, expert) pair, accuracy is computed within each pair, and the
overall score is the unweighted mean over pairs.  Calibration is measured
with expected calibration error over confidence max(p, 1-p); uncertainty
with a player-level percentile bootstrap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .dataset import InteractionDataset
from .game_core import GameConfig
from .predictor import OracleTable, TrainConfig, predict_dataset, train_on_dataset

Pair = tuple[str, str]


class EvaluationError(ValueError):
    pass


@dataclass
class EvalReport:
    overall_accuracy: float
    per_pair_accuracy: dict[Pair, float]
    per_expert_accuracy: dict[str, float]
    ece: float
    ci95: Optional[tuple[float, float]]
    n_decisions: int
    n_players: int

    def to_dict(self) -> dict:
        return {
            "overall_accuracy": self.overall_accuracy,
            "per_expert_accuracy": dict(sorted(self.per_expert_accuracy.items())),
            "per_pair_accuracy": {
                f"{dm}|{expert}": acc
                for (dm, expert), acc in sorted(self.per_pair_accuracy.items())
            },
            "ece": self.ece,
            "ci95": list(self.ci95) if self.ci95 is not None else None,
            "n_decisions": self.n_decisions,
            "n_players": self.n_players,
        }


def hard_labels(probs: np.ndarray) -> np.ndarray:
    """Probability 0.5 classifies as action 1."""
    return (np.asarray(probs) >= 0.5).astype(int)


def _group_by_pair(pairs: Sequence[Pair]) -> dict[Pair, list[int]]:
    groups: dict[Pair, list[int]] = {}
    for i, pair in enumerate(pairs):
        groups.setdefault(pair, []).append(i)
    return groups


def pair_mean_accuracy(
    probs: np.ndarray, truths: np.ndarray, pairs: Sequence[Pair]
) -> tuple[float, dict[Pair, float]]:
    groups = _group_by_pair(pairs)
    if not groups:
        raise EvaluationError("no decisions to evaluate")
    correct = hard_labels(probs) == np.asarray(truths).astype(int)
    per_pair = {
        pair: float(np.mean(correct[idx])) for pair, idx in groups.items()
    }
    return float(np.mean(list(per_pair.values()))), per_pair


def ece(probs: np.ndarray, truths: np.ndarray, n_bins: int = 10) -> float:
    """Expected calibration error with confidence max(p, 1-p) and
    ``n_bins`` equal-width bins over [0.5, 1]."""
    probs = np.asarray(probs, dtype=float)
    truths = np.asarray(truths).astype(int)
    if probs.size == 0:
        raise EvaluationError("no predictions")
    if np.any(probs < 0) or np.any(probs > 1):
        raise EvaluationError("probabilities must lie in [0, 1]")
    confidence = np.maximum(probs, 1.0 - probs)
    correct = (hard_labels(probs) == truths).astype(float)
    bin_index = np.minimum(
        ((confidence - 0.5) / (0.5 / n_bins)).astype(int), n_bins - 1
    )
    total = len(probs)
    value = 0.0
    for b in range(n_bins):
        mask = bin_index == b
        count = int(mask.sum())
        if count == 0:
            continue
        gap = abs(float(correct[mask].mean()) - float(confidence[mask].mean()))
        value += (count / total) * gap
    return value


def bootstrap_ci(
    per_player_items: dict[str, object],
    statistic: Callable[[list[object]], float],
    n_resamples: int = 1000,
    level: float = 0.95,
    rng: Optional[np.random.Generator] = None,
) -> tuple[float, float]:
    """Percentile bootstrap over players: resample players with
    replacement, apply the statistic to the resampled collection, and
    return order-statistic endpoints at the requested level."""
    if len(per_player_items) < 2:
        raise EvaluationError("bootstrap needs at least 2 players")
    rng = rng or np.random.default_rng()
    players = list(per_player_items)
    items = [per_player_items[p] for p in players]
    n = len(players)
    values = np.empty(n_resamples)
    for i in range(n_resamples):
        idx = rng.integers(0, n, size=n)
        values[i] = statistic([items[j] for j in idx])
    alpha = (1.0 - level) / 2.0
    lo = float(np.quantile(values, alpha, method="lower"))
    hi = float(np.quantile(values, 1.0 - alpha, method="higher"))
    return lo, hi


def _pair_mean_of_player_groups(groups: list[object]) -> float:
    """Statistic for the bootstrap: pair-mean accuracy over the pairs of
    every (possibly repeated) resampled player."""
    accs: list[float] = []
    for pair_accs in groups:
        accs.extend(pair_accs)  # type: ignore[arg-type]
    return float(np.mean(accs))


def evaluate(
    probs: np.ndarray,
    truths: np.ndarray,
    pairs: Sequence[Pair],
    n_bins: int = 10,
    rng: Optional[np.random.Generator] = None,
    n_resamples: int = 1000,
) -> EvalReport:
    """Full report: pair-mean accuracy, per-expert breakdown, ECE, and
    (when an rng is supplied) a player-level bootstrap CI."""
    overall, per_pair = pair_mean_accuracy(probs, truths, pairs)
    per_expert: dict[str, list[float]] = {}
    per_player: dict[str, list[float]] = {}
    for (dm_id, expert), acc in per_pair.items():
        per_expert.setdefault(expert, []).append(acc)
        per_player.setdefault(dm_id, []).append(acc)
    ci = None
    if rng is not None and len(per_player) >= 2:
        ci = bootstrap_ci(
            per_player, _pair_mean_of_player_groups, n_resamples=n_resamples, rng=rng
        )
    return EvalReport(
        overall_accuracy=overall,
        per_pair_accuracy=per_pair,
        per_expert_accuracy={e: float(np.mean(a)) for e, a in per_expert.items()},
        ece=ece(probs, truths, n_bins=n_bins),
        ci95=ci,
        n_decisions=len(probs),
        n_players=len(per_player),
    )


def evaluate_model(
    model,
    test_data: InteractionDataset,
    oracle_table: OracleTable,
    game_config: GameConfig,
    rng: Optional[np.random.Generator] = None,
) -> EvalReport:
    probs, truths, pairs = predict_dataset(model, test_data, oracle_table, game_config)
    return evaluate(probs, truths, pairs, rng=rng)


def per_expert_eval(
    model,
    test_data: InteractionDataset,
    oracle_table: OracleTable,
    game_config: GameConfig,
) -> dict[str, float]:
    """Pair-mean accuracy restricted to each expert present in the data."""
    probs, truths, pairs = predict_dataset(model, test_data, oracle_table, game_config)
    experts = sorted({expert for _, expert in pairs})
    result: dict[str, float] = {}
    for expert in experts:
        idx = [i for i, (_, e) in enumerate(pairs) if e == expert]
        overall, _ = pair_mean_accuracy(
            probs[idx], truths[idx], [pairs[i] for i in idx]
        )
        result[expert] = overall
    return result


def global_vs_local(
    expert: str,
    train_data: InteractionDataset,
    test_data: InteractionDataset,
    oracle_table: OracleTable,
    game_config: GameConfig,
    train_config: TrainConfig,
    kind: str = "lstm",
) -> tuple[float, float]:
    """Accuracy on one expert's test decisions for a model trained on all
    experts (global) vs only that expert's games (local)."""
    local_games = [g for g in train_data.games if g.expert_strategy == expert]
    if not local_games:
        raise EvaluationError(f"no training games for expert {expert!r}")
    test_games = [g for g in test_data.games if g.expert_strategy == expert]
    if not test_games:
        raise EvaluationError(f"no test games for expert {expert!r}")
    local_train = InteractionDataset(local_games, train_data.provenance, train_data.rounds_T)
    expert_test = InteractionDataset(test_games, test_data.provenance, test_data.rounds_T)

    global_model = train_on_dataset(train_data, oracle_table, game_config, train_config, kind)
    local_model = train_on_dataset(local_train, oracle_table, game_config, train_config, kind)
    global_acc = evaluate_model(global_model, expert_test, oracle_table, game_config).overall_accuracy
    local_acc = evaluate_model(local_model, expert_test, oracle_table, game_config).overall_accuracy
    return global_acc, local_acc


def expert_winning_rates(
    data: InteractionDataset,
) -> dict[str, tuple[float, Optional[float]]]:
    """Per strategy: the expert's per-round opt-in rate, overall and
    conditional on the hotel being low quality (None when a strategy has
    no low-quality rounds)."""
    actions: dict[str, list[int]] = {}
    low_q_actions: dict[str, list[int]] = {}
    for game in data.games:
        for record in game.rounds:
            actions.setdefault(game.expert_strategy, []).append(record.dm_action_a)
            if record.hotel_quality_q == 0:
                low_q_actions.setdefault(game.expert_strategy, []).append(record.dm_action_a)
    if not actions:
        raise EvaluationError("dataset has no rounds")
    result: dict[str, tuple[float, Optional[float]]] = {}
    for expert, acts in actions.items():
        low = low_q_actions.get(expert)
        result[expert] = (
            float(np.mean(acts)),
            float(np.mean(low)) if low else None,
        )
    return result
