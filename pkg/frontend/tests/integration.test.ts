/** Console round trip against a real environment server.
 *
 * Spawns the Python server, builds a one-scenario benchmark over the wire,
 * opens a session, attaches the console data layer mid-episode (backlog +
 * tail), injects a tier-1 hint through the console API, verifies the hint
 * lands in the agent's next observation as a Mentor message, and checks that
 * the displayed final score equals the server report's value.
 */

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { spawn, type ChildProcess } from "node:child_process";

import { ConsoleApi } from "../src/api.js";
import { applyEvents, displayedScore, initialState, type ConsoleState } from "../src/model.js";

const PORT = 8873;
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;

async function waitForHealth(timeoutMs = 20_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/health`);
      if (response.ok) return;
    } catch {
      /* not up yet */
    }
    await new Promise((resolve) => setTimeout(resolve, 100));
  }
  throw new Error("environment server did not come up");
}

async function post(path: string, body: unknown): Promise<any> {
  const response = await fetch(`${BASE}${path}`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
  if (!response.ok) throw new Error(`${path} -> ${response.status}`);
  return response.json();
}

beforeAll(async () => {
  server = spawn("python3", ["-m", "worksim.cli", "serve", "--port", String(PORT)], {
    stdio: "ignore",
  });
  await waitForHealth();
}, 30_000);

afterAll(() => {
  server.kill();
});

describe("console round trip", () => {
  it("attaches with backlog + tail, delivers a hint, and shows the server score", async () => {
    const api = new ConsoleApi(BASE);

    const built = await post("/benchmarks", { seed: 424, n: 1 });
    const scenarioId = built.scenario_ids[0];
    const created = await post("/sessions", { scenario_id: scenarioId });
    const sessionId = created.session_id;

    // the agent takes a few steps before the console attaches
    await post(`/sessions/${sessionId}/actions`, { tool: "ListContacts", arguments: {} });
    await post(`/sessions/${sessionId}/actions`, { tool: "CheckCalendar", arguments: {} });

    // attach: session info + backlog
    const info = await api.session(sessionId);
    expect(info.scenario.scenario_id).toBe(scenarioId);
    let state: ConsoleState = { ...initialState(), scenario: info.scenario, tools: await api.tools() };
    const backlog = await api.events(sessionId, state.nextSeq);
    state = applyEvents(state, backlog.events);
    const backlogSeqs = state.feed.length;
    expect(backlogSeqs).toBeGreaterThanOrEqual(3); // created + 2 steps with results

    // tier-1 hint through the console path
    const hintText = "Check the shared database tables before answering.";
    const ack = await api.sendHint(sessionId, 1, hintText);
    expect(ack.tier).toBe(1);

    // the agent's next observation carries the hint as a Mentor message
    const outcome = await post(`/sessions/${sessionId}/actions`, {
      tool: "TakeNote",
      arguments: { text: "noted" },
    });
    const messages = (outcome.observation.messages ?? []) as { sender: string; content: string }[];
    const mentor = messages.find((m) => m.sender === "Mentor");
    expect(mentor?.content).toBe(hintText);

    // live tail keeps extending the same fold
    const tail = await api.events(sessionId, state.nextSeq);
    state = applyEvents(state, tail.events);
    expect(state.feed.length).toBeGreaterThan(backlogSeqs);
    expect(state.feed.some((line) => line.text.includes("[hint tier 1]"))).toBe(true);

    // finalize; displayed score equals the server-reported value exactly
    await post(`/sessions/${sessionId}/finalize`, {});
    const finalBatch = await api.events(sessionId, state.nextSeq);
    state = applyEvents(state, finalBatch.events);
    expect(state.phase).toBe("finalized");
    const report = await api.report(sessionId);
    expect(displayedScore(state)).toBe(report.score.display);

    // two independent subscribers read identical sequences
    const again = await api.events(sessionId, 0);
    const replayed = applyEvents({ ...initialState(), scenario: state.scenario, tools: state.tools }, again.events);
    expect(replayed.feed).toEqual(state.feed);
    expect(displayedScore(replayed)).toBe(displayedScore(state));
  }, 60_000);
});
