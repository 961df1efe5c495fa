"""Record API fixtures for the frontend test suite.

Plays one deterministic six-stage walkthrough against the real session
service (in-process) and writes every request/response pair to
frontend/fixtures/walkthrough.json, so the client tests run with no
server. Re-run after any API change.
"""

import json
import os
import sys

import numpy as np
from fastapi.testclient import TestClient

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from persuasim.corpus import synth_corpus
from persuasim.game_core import GameConfig
from persuasim.service import create_app

FIXTURE_PATH = os.path.join(
    os.path.dirname(__file__), "..", "frontend", "fixtures", "walkthrough.json"
)


def policy(round_payload: dict) -> str:
    """Deterministic action choice: go on odd rounds."""
    return "go" if round_payload["round_index"] % 2 == 1 else "dont_go"


def main() -> None:
    corpus = synth_corpus(40, np.random.default_rng(777))
    app = create_app(corpus.hotels, config=GameConfig(), seed=11)
    steps = []
    with TestClient(app) as client:
        create_request = {"player_alias": "fixture-player"}
        created = client.post("/sessions", json=create_request)
        assert created.status_code == 201
        steps.append(
            {"kind": "create", "request": create_request, "response": created.json()}
        )
        session_id = created.json()["session_id"]

        for _ in range(10_000):
            round_response = client.get(f"/sessions/{session_id}/round")
            if round_response.status_code == 409:
                break
            body = round_response.json()
            steps.append({"kind": "round", "response": body})
            action_request = {"action": policy(body)}
            result = client.post(
                f"/sessions/{session_id}/action", json=action_request
            )
            assert result.status_code == 200
            steps.append(
                {"kind": "action", "request": action_request, "response": result.json()}
            )
            if result.json()["interaction_complete"]:
                break
        summary = client.get(f"/sessions/{session_id}/summary")
        steps.append({"kind": "summary", "response": summary.json()})

    n_rounds = sum(1 for s in steps if s["kind"] == "round")
    stages = {s["response"]["stage_index"] for s in steps if s["kind"] == "round"}
    assert stages == {1, 2, 3, 4, 5, 6}, stages

    os.makedirs(os.path.dirname(FIXTURE_PATH), exist_ok=True)
    with open(FIXTURE_PATH, "w", encoding="utf-8") as fh:
        json.dump({"session_id": session_id, "steps": steps}, fh, indent=1)
        fh.write("\n")
    print(f"recorded {n_rounds} rounds across {len(stages)} stages -> {FIXTURE_PATH}")


if __name__ == "__main__":
    main()
