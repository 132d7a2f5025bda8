/** Fetch wrappers for the read + hint endpoints the console is allowed to use.
 *
 * The console never calls the act endpoint: it watches sessions and injects
 * guidance, nothing else.
 */

import type { Report, ScenarioView, SessionInfo, ToolSpec, WireEvent } from "./types.js";

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(detail, response.status);
  }
  return (await response.json()) as T;
}

export class ConsoleApi {
  constructor(readonly base: string) {}

  session(sessionId: string): Promise<SessionInfo> {
    return request(`${this.base}/sessions/${sessionId}`);
  }

  scenario(scenarioId: string): Promise<ScenarioView> {
    return request(`${this.base}/scenarios/${scenarioId}`);
  }

  async tools(): Promise<ToolSpec[]> {
    const doc = await request<{ tools: ToolSpec[] }>(`${this.base}/tools`);
    return doc.tools;
  }

  async events(sessionId: string, since: number): Promise<{ events: WireEvent[]; next: number }> {
    return request(`${this.base}/sessions/${sessionId}/events?since=${since}`);
  }

  async sendHint(sessionId: string, tier: number, text: string): Promise<{ ok: boolean; tier: number }> {
    return request(`${this.base}/sessions/${sessionId}/hints`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ tier, text }),
    });
  }

  async report(sessionId: string): Promise<Report> {
    const doc = await request<{ report: Report }>(`${this.base}/sessions/${sessionId}/report`);
    return doc.report;
  }
}
