"""HTTP session service for live human play.

Exposes the game round-by-round over JSON (see docs/api.md for the wire
contract): POST /sessions starts a six-stage interaction, GET .../round
returns the current review, POST .../action resolves it.  Completed
interactions are appended to a standard dataset file with dm_kind=human.
No response ever carries a review score or the current hotel's quality
before the action for that round.
"""

from __future__ import annotations

import itertools
import threading
import uuid
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import dataset as dataset_io
from .agents import FEEDBACK_LINES, intro_text
from .experts import DEFAULT_EXPERT_ORDER, ExpertObservation, ExpertStrategy
from .game_core import (
    DEFAULT_EXPERT_NAMES,
    GameConfig,
    GameRecord,
    Hotel,
    RoundRecord,
    draw_game_hotels,
    hotel_quality,
    play_full_interaction,
    round_payoffs,
)

ACTION_STRINGS = {"go": 1, "dont_go": 0}


def feedback_payload(action: int, quality: int, payoff: int) -> dict:
    line1, line2 = FEEDBACK_LINES[(action, quality)]
    return {
        "action": "go" if action else "dont_go",
        "hotel_was_good": bool(quality),
        "earned_point": bool(payoff),
        "result_text": f"{line1}\n{line2}",
    }


@dataclass
class SessionEngine:
    """One player's six-stage interaction, advanced one action at a time.

    Consumes its random stream exactly like ``play_full_interaction`` (one
    hotel draw per game), so a completed session can be replayed through
    the batch engine and must reproduce the same records.
    """

    session_id: str
    player_alias: str
    corpus: Sequence[Hotel]
    config: GameConfig
    rng: np.random.Generator
    expert_order: Sequence[ExpertStrategy] = DEFAULT_EXPERT_ORDER
    expert_names: Sequence[str] = DEFAULT_EXPERT_NAMES

    stage_index: int = 1
    game_index: int = 1
    round_index: int = 1
    dm_points: int = 0
    expert_points: int = 0
    status: str = "active"
    pending_review_index: Optional[int] = None
    history: list[RoundRecord] = field(default_factory=list)
    hotels: list[Hotel] = field(default_factory=list)
    games: list[GameRecord] = field(default_factory=list)
    action_log: list[int] = field(default_factory=list)
    last_feedback: Optional[dict] = None
    lock: threading.Lock = field(default_factory=threading.Lock)

    def __post_init__(self) -> None:
        self.hotels = draw_game_hotels(self.corpus, self.config, self.rng)

    @property
    def expert(self) -> ExpertStrategy:
        return self.expert_order[self.stage_index - 1]

    @property
    def expert_name(self) -> str:
        return self.expert_names[(self.stage_index - 1) % len(self.expert_names)]

    @property
    def points_target(self) -> int:
        return self.config.target_for_stage(self.stage_index)

    def intro_payload(self) -> dict:
        return {
            "text": intro_text(None, self.expert_name, self.points_target, self.config.rounds_T),
            "points_target": self.points_target,
            "rounds_per_game": self.config.rounds_T,
            "n_stages": self.config.n_stages,
            "stage_index": self.stage_index,
            "expert_name": self.expert_name,
        }

    def round_payload(self) -> dict:
        if self.status != "active":
            raise HTTPException(status_code=409, detail="session is not active")
        hotel = self.hotels[self.round_index - 1]
        if self.pending_review_index is None:
            obs = ExpertObservation(
                hotel=hotel,
                history=tuple(self.history),
                expert_cum_points=self.expert_points,
                dm_cum_points=self.dm_points,
            )
            self.pending_review_index = self.expert.select_review(
                obs, self.config.quality_threshold_tau
            )
        review = hotel.reviews[self.pending_review_index]
        return {
            "stage_index": self.stage_index,
            "game_index": self.game_index,
            "round_index": self.round_index,
            "points": self.dm_points,
            "points_target": self.points_target,
            "expert_name": self.expert_name,
            "positive_text": review.positive_text,
            "negative_text": review.negative_text,
            "feedback": self.last_feedback,
        }

    def submit_action(self, action_string: str) -> dict:
        if self.status != "active":
            raise HTTPException(status_code=409, detail="session is not active")
        if action_string not in ACTION_STRINGS:
            raise HTTPException(
                status_code=400, detail='action must be "go" or "dont_go"'
            )
        if self.pending_review_index is None:
            raise HTTPException(
                status_code=409, detail="no pending round (fetch the round first)"
            )
        action = ACTION_STRINGS[action_string]
        hotel = self.hotels[self.round_index - 1]
        quality = hotel_quality(hotel, self.config.quality_threshold_tau)
        dm_payoff, expert_payoff = round_payoffs(action, quality)
        self.history.append(
            RoundRecord(
                round_index=self.round_index,
                hotel_id=hotel.hotel_id,
                shown_review_index=self.pending_review_index,
                hotel_quality_q=quality,
                dm_action_a=action,
                dm_payoff_v=dm_payoff,
                expert_payoff_u=expert_payoff,
            )
        )
        self.action_log.append(action)
        self.dm_points += dm_payoff
        self.expert_points += expert_payoff
        self.pending_review_index = None
        feedback = feedback_payload(action, quality, dm_payoff)
        self.last_feedback = feedback

        game_points = self.dm_points
        game_complete = self.round_index == self.config.rounds_T
        stage_complete = False
        interaction_complete = False
        if game_complete:
            stage_complete, interaction_complete = self._finish_game()
        else:
            self.round_index += 1
        return {
            **feedback,
            "points": self.dm_points,
            "game_points": game_points,
            "game_complete": game_complete,
            "stage_complete": stage_complete,
            "interaction_complete": interaction_complete,
        }

    def _finish_game(self) -> tuple[bool, bool]:
        record = GameRecord(
            dm_id=f"human:{self.session_id}",
            dm_kind="human",
            persona_id=None,
            expert_strategy=self.expert.value,
            stage_index=self.stage_index,
            game_index=self.game_index,
            rounds=list(self.history),
            cumulative_dm_points=self.dm_points,
        )
        self.games.append(record)
        stage_over = self.dm_points >= self.points_target or self.game_index == 2
        self.history = []
        self.last_feedback = None
        self.round_index = 1
        self.dm_points = 0
        self.expert_points = 0
        if not stage_over:
            self.game_index = 2
            self.hotels = draw_game_hotels(self.corpus, self.config, self.rng)
            return False, False
        if self.stage_index == self.config.n_stages:
            self.status = "completed"
            return True, True
        self.stage_index += 1
        self.game_index = 1
        self.hotels = draw_game_hotels(self.corpus, self.config, self.rng)
        return True, False

    def summary_payload(self) -> dict:
        return {
            "session_id": self.session_id,
            "player_alias": self.player_alias,
            "status": self.status,
            "stage_index": self.stage_index,
            "game_index": self.game_index,
            "round_index": self.round_index,
            "points": self.dm_points,
            "games_completed": len(self.games),
            "decisions": len(self.action_log),
        }


class _ReplayDm:
    """Feeds a recorded action log back through the batch engine."""

    def __init__(self, actions: Sequence[int]):
        self._actions = iter(actions)

    def decide(self, obs, rng) -> int:
        return next(self._actions)


def replay_action_log(
    actions: Sequence[int],
    corpus: Sequence[Hotel],
    config: GameConfig,
    session_seed,
    session_id: str,
    expert_order: Sequence[ExpertStrategy] = DEFAULT_EXPERT_ORDER,
    expert_names: Sequence[str] = DEFAULT_EXPERT_NAMES,
) -> list[GameRecord]:
    """Re-run a completed session's actions through play_full_interaction;
    the result must equal the session's persisted records."""
    return play_full_interaction(
        _ReplayDm(actions),
        expert_order,
        corpus,
        config,
        np.random.default_rng(session_seed),
        dm_id=f"human:{session_id}",
        dm_kind="human",
        expert_names=expert_names,
    )


class CreateSessionRequest(BaseModel):
    player_alias: str


class ActionRequest(BaseModel):
    action: str


def create_app(
    corpus: Sequence[Hotel],
    config: Optional[GameConfig] = None,
    out_dataset: Optional[str] = None,
    seed: int = 0,
    expert_order: Sequence[ExpertStrategy] = DEFAULT_EXPERT_ORDER,
    expert_names: Sequence[str] = DEFAULT_EXPERT_NAMES,
) -> FastAPI:
    if not corpus:
        raise ValueError("service needs a loaded corpus")
    config = config or GameConfig()
    app = FastAPI(title="persuasim play service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET", "POST"],
        allow_headers=["Content-Type"],
    )
    sessions: dict[str, SessionEngine] = {}
    counter = itertools.count()
    registry_lock = threading.Lock()
    app.state.sessions = sessions
    app.state.seed = seed

    def get_session(session_id: str) -> SessionEngine:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return session

    @app.post("/sessions", status_code=201)
    def create_session(request: CreateSessionRequest) -> dict:
        alias = request.player_alias.strip()
        if not alias:
            raise HTTPException(status_code=400, detail="player_alias must be non-empty")
        with registry_lock:
            session_number = next(counter)
            session_id = uuid.uuid4().hex
            session = SessionEngine(
                session_id=session_id,
                player_alias=alias,
                corpus=corpus,
                config=config,
                rng=np.random.default_rng([seed, session_number]),
                expert_order=expert_order,
                expert_names=expert_names,
            )
            session.session_seed = [seed, session_number]  # type: ignore[attr-defined]
            sessions[session_id] = session
        return {"session_id": session_id, "intro": session.intro_payload()}

    @app.get("/sessions/{session_id}/round")
    def get_round(session_id: str) -> dict:
        session = get_session(session_id)
        with session.lock:
            return session.round_payload()

    @app.post("/sessions/{session_id}/action")
    def post_action(session_id: str, request: ActionRequest) -> dict:
        session = get_session(session_id)
        with session.lock:
            result = session.submit_action(request.action)
            if session.status == "completed" and out_dataset is not None:
                dataset_io.append_games(
                    out_dataset, session.games, "human", config.rounds_T
                )
        return result

    @app.get("/sessions/{session_id}/summary")
    def get_summary(session_id: str) -> dict:
        session = get_session(session_id)
        with session.lock:
            return session.summary_payload()

    return app
