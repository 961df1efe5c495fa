"""Pluggable decision-maker agents.

Three families: a chat-LLM player whose transcript mirrors the mobile-app
conversation (optionally prefixed with one of eight behavioral personas),
a history-free sentiment player that samples a score from a review-text
oracle, and a roster of scripted agents for tests and synthetic data.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .game_core import DmObservation, RoundFeedback
from .llm_client import ChatClient, LlmError
from .sentiment import ScoreDistribution, review_text_key

TextOracle = Callable[[str, str], ScoreDistribution]


@dataclass(frozen=True)
class Persona:
    persona_id: str
    prompt_prefix: str


PERSONAS = (
    Persona("optimistic", "Behave like an optimistic person."),
    Persona("pessimistic", "Behave like a pessimistic person."),
    Persona("price", "Behave like a person to whom the hotel's price is important."),
    Persona("facilities", "Behave like a person who values the facilities offered by the hotel."),
    Persona("room", "Behave like a person who cares about the quality of the room in the hotel."),
    Persona("location", "Behave like a person for whom the location of the hotel is important."),
    Persona("staff", "Behave like a person who cares about the treatment they will receive from the hotel staff."),
    Persona("sanitary", "Behave like a person to whom the sanitary conditions of the hotel are important."),
)

PERSONA_BY_ID = {p.persona_id: p for p in PERSONAS}


class DmAgent:
    """Base agent: override ``decide``; the lifecycle hooks are optional."""

    dm_kind = "scripted"

    def begin_stage(self, stage_index: int, expert_name: str, points_target: int) -> None:
        pass

    def begin_game(self, game_index: int) -> None:
        pass

    def end_game(self, feedback: Optional[RoundFeedback], points: int, reached_target: bool) -> None:
        pass

    def decide(self, obs: DmObservation, rng: np.random.Generator) -> int:
        raise NotImplementedError


# --- conversation templates (the fixed app wording) --------------------------

INTRO_TEMPLATE = (
    "Let's play a game!\n"
    "###\n"
    "Introduction: \n"
    "Are you the vacation planner at your house? Think you always know how to "
    "choose the best hotel? Start to plan your {rounds}-days trip with our travel "
    "agents. Just remember - they don't always want the best for you, and might "
    "have their own strategy to make you book the hotel they try to promote! "
    "Travel or Trouble is a strategy game in which you will try to outsmart our "
    "traveling agents and plan the perfect vacation for you. Each game consists "
    "of {rounds} rounds, in each round, one of our traveling agents will introduce "
    "you to a review for a new hotel they think might suit you, and you will "
    "have to choose: either book the hotel or stay home.\n"
    "###\n"
    "The game: \n"
    "You will play as the traveler and encounter several travel agents in the "
    "game. In each round, the agent will provide you with a message about the "
    "hotel, and you will decide whether to go to the hotel or stay at home. "
    "Your goal is to go to the good hotels and avoid the bad ones.\n"
    "Meet your new travel agent: {expert}! \n"
    "You'll be playing the next game with {expert} as your travel agent. \n"
    "You need to earn {target} points to win the game."
)

ROUND_TEMPLATE = (
    "### \n"
    "Round: {round} | You have {points} points\n"
    "{expert}'s review about the hotel: \n"
    "~\n"
    "Positive: {positive}\n"
    "Negative: {negative}\n"
    "~\n"
    "Choose your action: [ Go | Don't Go ]"
)

FEEDBACK_LINES = {
    # (action, quality) -> the two result lines shown to the DM
    (1, 0): ("This hotel is bad, You should have skipped it. ", "This round, you earn no points. "),
    (1, 1): ("This hotel is good, You did well to book it. ", "This round, you earn 1 point. "),
    (0, 1): ("This hotel is good, You should have booked it. ", "This round, you earn no points. "),
    (0, 0): ("This hotel is bad, You did well to skip it. ", "This round, you earn 1 point. "),
}

RETRY_TEMPLATE = (
    "The game is over, you earned {points} points.\n"
    "You need to earn {target} points to win the game, so let's play another game!"
)

CLARIFY_TEXT = 'Please answer with exactly "Go" or "Don\'t Go".'


def feedback_block(feedback: RoundFeedback) -> str:
    line1, line2 = FEEDBACK_LINES[(feedback.action, feedback.quality)]
    return f"Round results: \n{line1}\n{line2}"


def round_block(obs: DmObservation) -> str:
    return ROUND_TEMPLATE.format(
        round=obs.round_index,
        points=obs.cumulative_points,
        expert=obs.expert_display_name,
        positive=obs.shown_positive_text,
        negative=obs.shown_negative_text,
    )


def intro_text(
    persona: Optional[Persona], expert_name: str, points_target: int, rounds_T: int = 10
) -> str:
    intro = INTRO_TEMPLATE.format(rounds=rounds_T, expert=expert_name, target=points_target)
    if persona is not None:
        return persona.prompt_prefix + "\n" + intro
    return intro


def build_llm_prompt(persona: Optional[Persona], obs: DmObservation, rounds_T: int = 10) -> str:
    """The nature message sent to the LLM for this observation: the full
    introduction on a stage's first round, otherwise the previous round's
    results, followed by the current round block."""
    parts = []
    if obs.round_index == 1 and obs.game_index == 1:
        parts.append(
            intro_text(persona, obs.expert_display_name, obs.points_target, rounds_T)
        )
    if obs.last_round_feedback is not None:
        parts.append(feedback_block(obs.last_round_feedback))
    parts.append(round_block(obs))
    return "\n".join(parts)


_NEGATIVE_RE = re.compile(r"\bdon[’']?t\s+go\b", re.IGNORECASE)
_POSITIVE_RE = re.compile(r"\bgo\b", re.IGNORECASE)


def parse_llm_action(reply: str) -> Optional[int]:
    """Map a free-text reply to an action; None means unparsable."""
    if _NEGATIVE_RE.search(reply):
        return 0
    if _POSITIVE_RE.search(reply):
        return 1
    return None


class LlmDm(DmAgent):
    """Chat-model DM.  Keeps one transcript per stage (both games of the
    stage share it); all nature text since the last reply is concatenated
    into a single message."""

    dm_kind = "llm"

    def __init__(
        self,
        client: ChatClient,
        persona: Optional[Persona] = None,
        rounds_T: int = 10,
    ):
        self.client = client
        self.persona = persona
        self.rounds_T = rounds_T
        self.transcript: list[tuple[str, str]] = []
        self._pending: list[str] = []
        self._points_target = 10

    def begin_stage(self, stage_index: int, expert_name: str, points_target: int) -> None:
        self.transcript = []
        self._points_target = points_target
        self._pending = [intro_text(self.persona, expert_name, points_target, self.rounds_T)]

    def end_game(self, feedback: Optional[RoundFeedback], points: int, reached_target: bool) -> None:
        if feedback is not None:
            self._pending.append(feedback_block(feedback))
        if not reached_target:
            self._pending.append(
                RETRY_TEMPLATE.format(points=points, target=self._points_target)
            )

    def _messages(self) -> list[dict]:
        roles = {"nature": "user", "agent": "assistant"}
        return [{"role": roles[role], "content": text} for role, text in self.transcript]

    def _ask(self) -> str:
        reply = self.client.complete(self._messages())
        self.transcript.append(("agent", reply))
        return reply

    def decide(self, obs: DmObservation, rng: np.random.Generator) -> int:
        if obs.last_round_feedback is not None:
            self._pending.append(feedback_block(obs.last_round_feedback))
        self._pending.append(round_block(obs))
        self.transcript.append(("nature", "\n".join(self._pending)))
        self._pending = []
        action = parse_llm_action(self._ask())
        if action is None:
            self.transcript.append(("nature", CLARIFY_TEXT))
            action = parse_llm_action(self._ask())
        if action is None:
            raise LlmError("unparsable reply after clarification re-prompt")
        return action


def per_review_rng(seed: int, positive_text: str, negative_text: str) -> np.random.Generator:
    """Generator keyed by review content, so a review's decision draw does
    not depend on where the review appears in a game."""
    key = int(review_text_key(positive_text, negative_text)[:16], 16)
    return np.random.default_rng([seed, key])


def sentiment_decide(dist: ScoreDistribution, tau: float, rng: np.random.Generator) -> int:
    """Sample a score from the distribution; go iff it is at least tau."""
    return int(dist.sample_score(rng) >= tau)


class SentimentDm(DmAgent):
    """History-free baseline DM: samples a score for the shown review from
    a text oracle and goes iff the sample clears the quality threshold.
    Decision draws are keyed per review text, never per round."""

    dm_kind = "sentiment_baseline"

    def __init__(self, oracle: TextOracle, tau: float = 8.0, seed: int = 0):
        self.oracle = oracle
        self.tau = tau
        self.seed = seed

    def decide(self, obs: DmObservation, rng: np.random.Generator) -> int:
        dist = self.oracle(obs.shown_positive_text, obs.shown_negative_text)
        review_rng = per_review_rng(self.seed, obs.shown_positive_text, obs.shown_negative_text)
        return sentiment_decide(dist, self.tau, review_rng)


# --- scripted roster ---------------------------------------------------------


class AlwaysGoDm(DmAgent):
    name = "always_go"

    def decide(self, obs: DmObservation, rng: np.random.Generator) -> int:
        return 1


class NeverGoDm(DmAgent):
    name = "never_go"

    def decide(self, obs: DmObservation, rng: np.random.Generator) -> int:
        return 0


class QualityOracleDm(DmAgent):
    """Test-only agent that is told the true quality before acting and
    matches it.  Information-leaking by construction: never use it to
    generate data that claims to respect the DM's information set."""

    name = "quality_oracle"
    reveals_true_quality = True

    def __init__(self) -> None:
        self._quality: Optional[int] = None

    def observe_quality(self, quality: int) -> None:
        self._quality = quality

    def decide(self, obs: DmObservation, rng: np.random.Generator) -> int:
        if self._quality is None:
            raise RuntimeError("quality was not revealed before decide()")
        quality, self._quality = self._quality, None
        return quality


class GrudgerDm(DmAgent):
    """Goes every round until the expert first lures it into a bad hotel
    (a go that earned nothing), then never goes again within the game."""

    name = "grudger"

    def __init__(self) -> None:
        self._betrayed = False

    def begin_game(self, game_index: int) -> None:
        self._betrayed = False

    def decide(self, obs: DmObservation, rng: np.random.Generator) -> int:
        feedback = obs.last_round_feedback
        if feedback is not None and feedback.action == 1 and feedback.quality == 0:
            self._betrayed = True
        return 0 if self._betrayed else 1


class ThresholdDm(DmAgent):
    """Goes iff the majority of the oracle's score mass clears tau; with
    ``noise`` > 0 the decision is flipped with that probability."""

    name = "threshold"

    def __init__(self, oracle: TextOracle, tau: float = 8.0, noise: float = 0.0):
        self.oracle = oracle
        self.tau = tau
        self.noise = noise

    def decide(self, obs: DmObservation, rng: np.random.Generator) -> int:
        dist = self.oracle(obs.shown_positive_text, obs.shown_negative_text)
        action = int(dist.mass_at_or_above(self.tau) >= 0.5)
        if self.noise > 0 and rng.random() < self.noise:
            action = 1 - action
        return action


SCRIPTED_AGENT_NAMES = ("always_go", "never_go", "quality_oracle", "grudger", "threshold")


def make_scripted_agent(name: str, oracle: Optional[TextOracle] = None, tau: float = 8.0, noise: float = 0.0) -> DmAgent:
    if name == "always_go":
        return AlwaysGoDm()
    if name == "never_go":
        return NeverGoDm()
    if name == "quality_oracle":
        return QualityOracleDm()
    if name == "grudger":
        return GrudgerDm()
    if name == "threshold":
        if oracle is None:
            raise ValueError("threshold agent needs a text oracle")
        return ThresholdDm(oracle, tau=tau, noise=noise)
    raise ValueError(f"unknown scripted agent {name!r}")
