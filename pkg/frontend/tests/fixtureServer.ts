// Replays the recorded walkthrough fixture as a fake HTTP server,
// enforcing the real service's contract: GET round is idempotent, POST
// action consumes the pending round, a second POST conflicts.

import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import type { FetchLike, FetchResponse } from "../src/api.js";
import type { DmAction } from "../src/types.js";

interface CreateStep {
  kind: "create";
  request: { player_alias: string };
  response: Record<string, unknown>;
}
interface RoundStep {
  kind: "round";
  response: Record<string, unknown>;
}
interface ActionStep {
  kind: "action";
  request: { action: DmAction };
  response: Record<string, unknown>;
}
interface SummaryStep {
  kind: "summary";
  response: Record<string, unknown>;
}
export type Step = CreateStep | RoundStep | ActionStep | SummaryStep;

export interface WalkthroughFixture {
  session_id: string;
  steps: Step[];
}

export function loadWalkthrough(): WalkthroughFixture {
  const path = fileURLToPath(new URL("../fixtures/walkthrough.json", import.meta.url));
  return JSON.parse(readFileSync(path, "utf-8")) as WalkthroughFixture;
}

function reply(status: number, body: unknown): FetchResponse {
  return { status, json: async () => body };
}

export class FixtureServer {
  private pointer = 0;
  private roundServed = false;
  postActionCount = 0;
  createCount = 0;
  /** When > 0, that many upcoming requests fail at the network level. */
  failNextRequests = 0;

  constructor(private readonly fixture: WalkthroughFixture) {}

  private get steps(): Step[] {
    return this.fixture.steps;
  }

  private current(): Step | undefined {
    return this.steps[this.pointer];
  }

  /** The action the recorded player took for the pending round. */
  peekAction(): DmAction {
    const step = this.steps[this.pointer + 1];
    if (step === undefined || step.kind !== "action") {
      throw new Error(`no recorded action at step ${this.pointer + 1}`);
    }
    return step.request.action;
  }

  roundsRemaining(): boolean {
    return this.current()?.kind === "round";
  }

  fetch: FetchLike = async (url, init) => {
    if (this.failNextRequests > 0) {
      this.failNextRequests -= 1;
      throw new TypeError("fetch failed (simulated network problem)");
    }
    const method = init?.method ?? "GET";

    if (method === "POST" && url.endsWith("/sessions")) {
      const step = this.current();
      if (step === undefined || step.kind !== "create") {
        throw new Error("unexpected session creation");
      }
      this.createCount += 1;
      this.pointer += 1;
      return reply(201, step.response);
    }

    if (method === "GET" && url.endsWith("/round")) {
      const step = this.current();
      if (step === undefined || step.kind === "summary") {
        return reply(409, { detail: "session is not active" });
      }
      if (step.kind !== "round") throw new Error(`unexpected round GET at ${this.pointer}`);
      this.roundServed = true;
      return reply(200, step.response);
    }

    if (method === "POST" && url.endsWith("/action")) {
      this.postActionCount += 1;
      const step = this.current();
      if (step === undefined || step.kind !== "round" || !this.roundServed) {
        return reply(409, { detail: "no pending round (fetch the round first)" });
      }
      const actionStep = this.steps[this.pointer + 1];
      if (actionStep === undefined || actionStep.kind !== "action") {
        throw new Error("fixture exhausted");
      }
      const body = JSON.parse(init?.body ?? "{}") as { action?: string };
      if (body.action !== actionStep.request.action) {
        throw new Error(
          `client diverged from the recorded walkthrough: sent ${body.action}, ` +
            `recorded ${actionStep.request.action}`,
        );
      }
      this.pointer += 2;
      this.roundServed = false;
      return reply(200, actionStep.response);
    }

    if (method === "GET" && url.endsWith("/summary")) {
      const summary = this.steps[this.steps.length - 1];
      if (summary.kind !== "summary") throw new Error("fixture has no summary");
      return reply(200, summary.response);
    }

    return reply(404, { detail: "unknown session" });
  };
}

export class MemoryStore {
  private readonly values = new Map<string, string>();

  get(key: string): string | null {
    return this.values.get(key) ?? null;
  }

  set(key: string, value: string): void {
    this.values.set(key, value);
  }

  remove(key: string): void {
    this.values.delete(key);
  }
}
