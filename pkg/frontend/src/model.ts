/** Pure console state: a fold over the session's ordered event log.
 *
 * Everything rendered comes from server data; in particular the score shown
 * is always the server-reported display string, never recomputed here.
 */

import type { CheckpointView, Report, ScenarioView, ToolSpec, WireEvent } from "./types.js";

export interface FeedLine {
  seq: number;
  kind: string;
  text: string;
}

export interface ConsoleState {
  scenario: ScenarioView | null;
  tools: ToolSpec[];
  phase: "open" | "finalized";
  nextSeq: number;
  feed: FeedLine[];
  checkpoints: CheckpointView[];
  report: Report | null;
  lastHintTier: number;
}

export function initialState(): ConsoleState {
  return {
    scenario: null,
    tools: [],
    phase: "open",
    nextSeq: 0,
    feed: [],
    checkpoints: [],
    report: null,
    lastHintTier: 0,
  };
}

function short(value: unknown, max = 120): string {
  const text = typeof value === "string" ? value : JSON.stringify(value);
  return text === undefined ? "" : text.length > max ? text.slice(0, max) + "…" : text;
}

function feedText(event: WireEvent): string | null {
  const d = event.data as Record<string, any>;
  switch (event.kind) {
    case "created":
      return `session opened on ${d.scenario_id}`;
    case "step":
      return d.tool_name
        ? `step ${d.step}: ${d.tool_name}(${short(d.arguments, 80)})`
        : `step ${d.step}: (thinking)`;
    case "tool_result":
      return `  → ${d.status}: ${short(d.payload)}`;
    case "env_event":
      return `[event] ${d.kind} at ${d.time}${d.title ? `: ${d.title}` : ""}`;
    case "hint":
      return `[hint tier ${d.tier}] ${short(d.text)}`;
    case "checkpoint_update":
      return null; // shown in the evaluation pane, not the feed
    case "finalized":
      return `episode finalized, score ${d.report?.score?.display}`;
    default:
      return `${event.kind}`;
  }
}

/** Fold one event into the state. Events below nextSeq are duplicates from
 * overlapping polls and are dropped, which makes backlog replay and live
 * tailing land on identical states. */
export function applyEvent(state: ConsoleState, event: WireEvent): ConsoleState {
  if (event.seq < state.nextSeq) return state;
  const next: ConsoleState = {
    ...state,
    nextSeq: event.seq + 1,
    feed: [...state.feed],
    checkpoints: [...state.checkpoints],
  };
  if (event.kind === "hint") {
    const tier = (event.data as any).tier as number;
    next.lastHintTier = Math.max(next.lastHintTier, tier);
  }
  if (event.kind === "checkpoint_update") {
    next.checkpoints.push(event.data as unknown as CheckpointView);
  }
  if (event.kind === "finalized") {
    next.phase = "finalized";
    next.report = (event.data as any).report as Report;
  }
  const line = feedText(event);
  if (line !== null) {
    next.feed.push({ seq: event.seq, kind: event.kind, text: line });
  }
  return next;
}

export function applyEvents(state: ConsoleState, events: WireEvent[]): ConsoleState {
  return events.reduce(applyEvent, state);
}

/** Composer guard mirroring the server's rule; the server still has the
 * final say and its rejections are surfaced inline. */
export function canSendHint(state: ConsoleState, tier: number): { ok: boolean; reason?: string } {
  if (state.phase === "finalized") {
    return { ok: false, reason: "session is finalized; hints are closed" };
  }
  if (tier < state.lastHintTier) {
    return { ok: false, reason: `tiers are non-decreasing (last sent: ${state.lastHintTier})` };
  }
  if (tier < 0 || tier > 3) {
    return { ok: false, reason: "tier must be between 0 and 3" };
  }
  return { ok: true };
}

const TOOL_FAMILIES: Record<string, string> = {
  OpenFolderInCloudDisk: "files",
  ReadFile: "files",
  WriteFile: "files",
  SendMessage: "messaging",
  ListContacts: "messaging",
  AskNPC: "messaging",
  CheckCalendar: "calendar",
  ScheduleMeeting: "calendar",
  AttendMeeting: "calendar",
  LeaveMeeting: "calendar",
  QueryDatabase: "data",
  BrowseWebsite: "data",
  WaitUntil: "misc",
  SubmitResult: "misc",
  TakeNote: "misc",
};

export const FAMILY_ORDER = ["files", "messaging", "calendar", "data", "misc"];

export function toolTabs(state: ConsoleState): Map<string, ToolSpec[]> {
  const tabs = new Map<string, ToolSpec[]>();
  for (const family of FAMILY_ORDER) tabs.set(family, []);
  for (const tool of state.tools) {
    const family = TOOL_FAMILIES[tool.name] ?? "misc";
    tabs.get(family)!.push(tool);
  }
  return tabs;
}

/** The score string shown in the evaluation pane: server value, verbatim. */
export function displayedScore(state: ConsoleState): string {
  return state.report ? state.report.score.display : "–";
}

export function evaluationRows(state: ConsoleState): CheckpointView[] {
  if (state.report) {
    return state.report.tasks.flatMap((t) => t.checkpoints);
  }
  return state.checkpoints;
}
