/** HTML renderers for the three panes and the feed. Pure string builders so
 * they are testable without a DOM. */

import type { ConsoleState } from "./model.js";
import { displayedScore, evaluationRows, toolTabs, FAMILY_ORDER } from "./model.js";

function esc(text: unknown): string {
  return String(text)
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

/** Left pane: persona and the released task descriptions. */
export function renderRolePane(state: ConsoleState): string {
  if (!state.scenario) return "<p>loading…</p>";
  const s = state.scenario;
  const tasks = s.tasks
    .map(
      (t) =>
        `<li><b>${esc(t.task_id)}</b>${t.priority === "time_critical" ? " ⏰" : ""}<br>${esc(t.description)}` +
        (t.deadline ? `<br><small>deadline ${esc(t.deadline)}</small>` : "") +
        `</li>`,
    )
    .join("");
  const contacts = s.contacts
    .map((c) => `<li>${esc(c.name)} <small>(${esc(c.role)}, ${esc(c.department)})</small></li>`)
    .join("");
  return (
    `<h2>${esc(s.agent_name)}</h2>` +
    `<p><small>workday ${esc(s.workday[0])} – ${esc(s.workday[1])}</small></p>` +
    `<h3>Tasks</h3><ul>${tasks || "<li>(none released yet)</li>"}</ul>` +
    `<h3>Contacts</h3><ul>${contacts}</ul>`
  );
}

/** Center pane: the tool catalog, one tab per tool family. */
export function renderToolsPane(state: ConsoleState, activeTab: string): string {
  const tabs = toolTabs(state);
  const header = FAMILY_ORDER.map(
    (family) =>
      `<button class="tab${family === activeTab ? " active" : ""}" data-tab="${family}">${family}</button>`,
  ).join("");
  const tools = (tabs.get(activeTab) ?? [])
    .map((tool) => {
      const params = tool.params.map((p) => p.name + (p.required ? "" : "?")).join(", ");
      return `<li><code>${esc(tool.name)}(${esc(params)})</code><br><small>${esc(tool.description)}</small></li>`;
    })
    .join("");
  return `<div class="tabs">${header}</div><ul class="tools">${tools}</ul>`;
}

/** Right pane: checkpoint statuses and the (server-reported) score. */
export function renderEvaluationPane(state: ConsoleState): string {
  const rows = evaluationRows(state)
    .map((cp) => {
      const mark = cp.status === "completed" ? "✅" : cp.status === "missed" ? "❌" : "⬜";
      return `<li>${mark} ${esc(cp.description)} <small>[${esc(cp.kind)}]</small></li>`;
    })
    .join("");
  const ratios = state.report
    ? state.report.tasks.map((t) => `<li>${esc(t.task_id)}: ${esc(t.ratio)}</li>`).join("")
    : "";
  return (
    `<h3>Score: <span id="score">${esc(displayedScore(state))}</span></h3>` +
    (ratios ? `<ul class="ratios">${ratios}</ul>` : "") +
    `<ul class="checkpoints">${rows || "<li>⬜ all pending</li>"}</ul>`
  );
}

/** Bottom pane: the live trajectory feed. */
export function renderFeed(state: ConsoleState): string {
  return state.feed.map((line) => `<div class="line ${esc(line.kind)}">${esc(line.text)}</div>`).join("");
}
