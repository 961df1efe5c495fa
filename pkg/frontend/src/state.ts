import { ApiClient, ApiError } from "./api.js";
import type {
  ActionResult,
  DmAction,
  IntroPayload,
  RoundPayload,
  SummaryPayload,
} from "./types.js";

export type Phase =
  | "start" // no session: show the alias form
  | "busy" // a request is in flight; inputs disabled
  | "round" // a round is on screen awaiting Go / Don't Go
  | "transition" // game- or stage-complete screen
  | "completed" // all six stages done
  | "error"; // request failed; state preserved, retry offered

export interface ClientState {
  phase: Phase;
  sessionId: string | null;
  alias: string | null;
  intro: IntroPayload | null;
  round: RoundPayload | null;
  /** Result that ended a game/stage, shown on the transition screen. */
  transition: ActionResult | null;
  summary: SummaryPayload | null;
  /** Non-blocking banner (e.g. a gracefully absorbed double submit). */
  notice: string | null;
  errorMessage: string | null;
}

export interface SessionStore {
  get(key: string): string | null;
  set(key: string, value: string): void;
  remove(key: string): void;
}

export const SESSION_KEY = "persuasim.session_id";

const INITIAL: ClientState = {
  phase: "start",
  sessionId: null,
  alias: null,
  intro: null,
  round: null,
  transition: null,
  summary: null,
  notice: null,
  errorMessage: null,
};

type Listener = (state: ClientState) => void;

/**
 * Client-side session state machine. One action per round: submissions
 * are rejected while a request is in flight, and every transition waits
 * for the server's resolution (nothing is rendered optimistically).
 */
export class GameClient {
  state: ClientState = { ...INITIAL };
  private listeners: Listener[] = [];
  private inFlight = false;
  private retryFn: (() => Promise<void>) | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly store: SessionStore,
  ) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private setState(partial: Partial<ClientState>): void {
    this.state = { ...this.state, ...partial };
    for (const listener of this.listeners) listener(this.state);
  }

  private fail(message: string, retryFn: () => Promise<void>): void {
    this.retryFn = retryFn;
    this.setState({ phase: "error", errorMessage: message });
  }

  /** Re-attempt the operation that failed; all prior state is intact. */
  async retry(): Promise<void> {
    if (this.state.phase !== "error" || this.retryFn === null) return;
    const fn = this.retryFn;
    this.retryFn = null;
    this.setState({ phase: "busy", errorMessage: null });
    await fn();
  }

  async start(alias: string): Promise<void> {
    if (this.inFlight) return;
    this.inFlight = true;
    this.setState({ phase: "busy", alias, notice: null });
    try {
      const created = await this.api.createSession(alias);
      this.store.set(SESSION_KEY, created.session_id);
      this.setState({ sessionId: created.session_id, intro: created.intro });
      await this.loadRound();
    } catch (error) {
      this.inFlight = false;
      this.fail(describeError(error), () => this.restart(alias));
      return;
    }
    this.inFlight = false;
  }

  private async restart(alias: string): Promise<void> {
    this.inFlight = false;
    await this.start(alias);
  }

  /**
   * Reload an unfinished session from the stored session id. Resolves
   * true when a session was resumed (or found already completed), false
   * when there is nothing to resume.
   */
  async resume(): Promise<boolean> {
    const sessionId = this.store.get(SESSION_KEY);
    if (!sessionId) return false;
    this.setState({ phase: "busy", sessionId });
    try {
      const round = await this.api.getRound(sessionId);
      this.setState({ phase: "round", round, notice: null });
      return true;
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        await this.finish(sessionId);
        return true;
      }
      if (error instanceof ApiError && error.status === 404) {
        this.store.remove(SESSION_KEY);
        this.setState({ ...INITIAL });
        return false;
      }
      this.fail(describeError(error), async () => {
        await this.resume();
      });
      return true;
    }
  }

  /** Submit the pending round's action. No-op unless a round is shown. */
  async submit(action: DmAction): Promise<void> {
    if (this.inFlight || this.state.phase !== "round" || this.state.sessionId === null) {
      return;
    }
    this.inFlight = true;
    const sessionId = this.state.sessionId;
    this.setState({ phase: "busy", notice: null });
    try {
      const result = await this.api.postAction(sessionId, action);
      if (result.interaction_complete) {
        await this.finish(sessionId);
      } else if (result.game_complete) {
        this.setState({ phase: "transition", transition: result, round: null });
      } else {
        await this.loadRound();
      }
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        // double submit reached the server (e.g. a second tab): show the
        // authoritative current round instead of erroring out
        this.setState({ notice: "That action was already received." });
        await this.loadRound();
      } else {
        this.fail(describeError(error), async () => {
          this.inFlight = false;
          this.setState({ phase: "round" });
          await this.submit(action);
        });
      }
    }
    this.inFlight = false;
  }

  /** Leave the game/stage-complete screen and fetch the next round. */
  async continueNext(): Promise<void> {
    if (this.state.phase !== "transition") return;
    this.setState({ phase: "busy", transition: null });
    await this.loadRound();
  }

  private async loadRound(): Promise<void> {
    const sessionId = this.state.sessionId;
    if (sessionId === null) return;
    this.setState({ phase: "busy" });
    try {
      const round = await this.api.getRound(sessionId);
      this.setState({ phase: "round", round });
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        await this.finish(sessionId);
        return;
      }
      this.fail(describeError(error), () => this.loadRound());
    }
  }

  private async finish(sessionId: string): Promise<void> {
    const summary = await this.api.getSummary(sessionId);
    this.store.remove(SESSION_KEY);
    this.setState({ phase: "completed", summary, round: null, transition: null });
  }
}

function describeError(error: unknown): string {
  if (error instanceof ApiError) return error.message;
  return "Network problem - your progress is safe.";
}
