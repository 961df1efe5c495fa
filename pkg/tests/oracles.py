"""Independent brute-force evaluators used as test oracles.

These re-derive each expert strategy directly from its tree wording with
explicit index scans, deliberately sharing no code with the library
implementation.
"""

from __future__ import annotations


def brute_force_select(strategy_name, hotel, history, tau):
    scores = [r.score for r in hotel.reviews]

    def highest():
        best = 0
        for i in range(1, len(scores)):
            if scores[i] > scores[best]:
                best = i
        return best

    def lowest():
        best = 0
        for i in range(1, len(scores)):
            if scores[i] < scores[best]:
                best = i
        return best

    def closest_to_mean():
        mean = 0.0
        for s in scores:
            mean += s
        mean /= len(scores)
        best = 0
        for i in range(1, len(scores)):
            if abs(scores[i] - mean) < abs(scores[best] - mean):
                best = i
        return best

    def high_quality():
        total = 0.0
        for s in scores:
            total += s
        return total / len(scores) >= tau

    if strategy_name == "greedy":
        return highest()
    if strategy_name == "average":
        return closest_to_mean()
    if strategy_name == "honest":
        return highest() if high_quality() else lowest()
    if strategy_name == "ambiguous":
        return highest() if high_quality() else closest_to_mean()
    if strategy_name == "choice_adaptive":
        if len(history) > 0 and history[-1].dm_action_a == 1:
            return closest_to_mean()
        return highest()
    if strategy_name == "points_adaptive":
        if high_quality():
            return closest_to_mean()
        dm_total = 0
        expert_total = 0
        led_every_round = True
        for record in history:
            dm_total += record.dm_payoff_v
            expert_total += record.expert_payoff_u
            if not dm_total > expert_total:
                led_every_round = False
        if led_every_round:
            return highest()
        return lowest()
    raise ValueError(strategy_name)


def random_history(rng, length):
    """Arbitrary but invariant-consistent round records."""
    from persuasim.game_core import RoundRecord

    records = []
    for t in range(1, length + 1):
        action = int(rng.integers(0, 2))
        quality = int(rng.integers(0, 2))
        records.append(
            RoundRecord(
                round_index=t,
                hotel_id=f"past{t}",
                shown_review_index=int(rng.integers(0, 7)),
                hotel_quality_q=quality,
                dm_action_a=action,
                dm_payoff_v=int(action == quality),
                expert_payoff_u=action,
            )
        )
    return tuple(records)


def observation_for(history):
    dm_points = sum(r.dm_payoff_v for r in history)
    expert_points = sum(r.expert_payoff_u for r in history)
    return dm_points, expert_points
