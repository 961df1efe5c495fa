// Wire types for the play-service JSON API (docs/api.md in the repo root).

export type DmAction = "go" | "dont_go";

export interface IntroPayload {
  text: string;
  points_target: number;
  rounds_per_game: number;
  n_stages: number;
  stage_index: number;
  expert_name: string;
}

export interface CreateSessionResponse {
  session_id: string;
  intro: IntroPayload;
}

export interface FeedbackPayload {
  action: DmAction;
  hotel_was_good: boolean;
  earned_point: boolean;
  result_text: string;
}

export interface RoundPayload {
  stage_index: number;
  game_index: number;
  round_index: number;
  points: number;
  points_target: number;
  expert_name: string;
  positive_text: string;
  negative_text: string;
  feedback: FeedbackPayload | null;
}

export interface ActionResult extends FeedbackPayload {
  points: number;
  game_points: number;
  game_complete: boolean;
  stage_complete: boolean;
  interaction_complete: boolean;
}

export interface SummaryPayload {
  session_id: string;
  player_alias: string;
  status: "active" | "completed";
  stage_index: number;
  game_index: number;
  round_index: number;
  points: number;
  games_completed: number;
  decisions: number;
}
