import { describe, expect, test } from "vitest";

import { ApiClient, type FetchLike } from "../src/api.js";
import { GameClient } from "../src/state.js";
import { renderView } from "../src/view.js";
import { FixtureServer, MemoryStore, loadWalkthrough } from "./fixtureServer.js";

const BASE = "http://testserver";

function makeClient(server: FixtureServer) {
  return new GameClient(new ApiClient(BASE, server.fetch), new MemoryStore());
}

describe("double-submit guard", () => {
  test("a double click sends exactly one POST", async () => {
    const server = new FixtureServer(loadWalkthrough());
    const client = makeClient(server);
    await client.start("fixture-player");

    const before = server.postActionCount;
    const action = server.peekAction();
    await Promise.all([client.submit(action), client.submit(action)]);
    expect(server.postActionCount).toBe(before + 1);
    expect(client.state.phase).toBe("round");
    expect(client.state.round?.round_index).toBe(2);
  });

  test("action buttons are disabled while a submission is in flight", async () => {
    const server = new FixtureServer(loadWalkthrough());
    const client = makeClient(server);
    await client.start("fixture-player");
    expect(renderView(client.state).actionButtons).toEqual({
      visible: true,
      disabled: false,
    });

    const pending = client.submit(server.peekAction());
    expect(renderView(client.state).actionButtons.disabled).toBe(true);
    await pending;
    expect(renderView(client.state).actionButtons.disabled).toBe(false);
  });

  test("a conflict from the server is absorbed gracefully", async () => {
    // simulate a second tab having already submitted: the server rejects
    // the POST with 409 and the client re-syncs from GET round
    const server = new FixtureServer(loadWalkthrough());
    const conflictOnce: FetchLike = async (url, init) => {
      if (init?.method === "POST" && url.endsWith("/action") && !conflicted) {
        conflicted = true;
        return { status: 409, json: async () => ({ detail: "no pending round" }) };
      }
      return server.fetch(url, init);
    };
    let conflicted = false;
    const client = new GameClient(new ApiClient(BASE, conflictOnce), new MemoryStore());
    await client.start("fixture-player");
    const round = client.state.round;
    await client.submit(server.peekAction());
    expect(client.state.phase).toBe("round");
    expect(client.state.notice).toBe("That action was already received.");
    expect(client.state.round).toEqual(round); // still the authoritative round
  });
});

describe("network failure", () => {
  test("failed submit shows a retry banner and preserves state", async () => {
    const server = new FixtureServer(loadWalkthrough());
    const client = makeClient(server);
    await client.start("fixture-player");
    const roundBefore = client.state.round;

    server.failNextRequests = 1;
    await client.submit(server.peekAction());
    expect(client.state.phase).toBe("error");
    const view = renderView(client.state);
    expect(view.screen).toBe("error");
    expect(view.retryVisible).toBe(true);
    expect(client.state.round).toEqual(roundBefore);

    await client.retry();
    expect(client.state.phase).toBe("round");
    expect(client.state.round?.round_index).toBe(2);
  });

  test("failed round load recovers on retry", async () => {
    const server = new FixtureServer(loadWalkthrough());
    const client = makeClient(server);
    await client.start("fixture-player");
    await client.submit(server.peekAction());

    server.failNextRequests = 1;
    await client.submit(server.peekAction()); // POST ok, follow-up GET fails
    expect(client.state.phase).toBe("error");
    await client.retry();
    expect(client.state.phase).toBe("round");
    expect(client.state.round?.round_index).toBe(3);
  });

  test("failed session creation can be retried", async () => {
    const server = new FixtureServer(loadWalkthrough());
    const client = makeClient(server);
    server.failNextRequests = 1;
    await client.start("fixture-player");
    expect(client.state.phase).toBe("error");
    await client.retry();
    expect(client.state.phase).toBe("round");
    expect(server.createCount).toBe(1);
  });
});
