/** Console bootstrap: attach to a session given by URL parameters and keep
 * the panes in sync with the event stream.
 *
 *   index.html?server=http://127.0.0.1:8800&session=sess-000001
 */

import { ConsoleApi, ApiError } from "./api.js";
import { applyEvents, canSendHint, initialState, type ConsoleState } from "./model.js";
import { renderEvaluationPane, renderFeed, renderRolePane, renderToolsPane } from "./view.js";

const POLL_MS = 1000;

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const server = params.get("server") ?? "http://127.0.0.1:8800";
  const sessionId = params.get("session") ?? "";
  const api = new ConsoleApi(server);
  let state: ConsoleState = initialState();
  let activeTab = "files";

  const render = () => {
    el("role-pane").innerHTML = renderRolePane(state);
    el("tools-pane").innerHTML = renderToolsPane(state, activeTab);
    el("eval-pane").innerHTML = renderEvaluationPane(state);
    const feed = el("feed");
    feed.innerHTML = renderFeed(state);
    feed.scrollTop = feed.scrollHeight;
    for (const button of document.querySelectorAll<HTMLButtonElement>("button.tab")) {
      button.onclick = () => {
        activeTab = button.dataset.tab ?? "files";
        render();
      };
    }
  };

  if (!sessionId) {
    el("banner").textContent = "add ?session=<id> (and optionally &server=<url>) to attach";
    return;
  }

  try {
    const info = await api.session(sessionId);
    state = { ...state, scenario: info.scenario, tools: await api.tools() };
    state.lastHintTier = info.hints.reduce((acc, h) => Math.max(acc, h.tier), 0);
  } catch (error) {
    el("banner").textContent =
      error instanceof ApiError && error.status === 404
        ? `unknown session '${sessionId}'`
        : `cannot reach ${server}`;
    return;
  }
  render();

  // hint composer
  const tierInput = el("hint-tier") as HTMLSelectElement;
  const textInput = el("hint-text") as HTMLTextAreaElement;
  const status = el("hint-status");
  el("hint-send").onclick = async () => {
    const tier = Number(tierInput.value);
    const guard = canSendHint(state, tier);
    if (!guard.ok) {
      status.textContent = `blocked: ${guard.reason}`;
      return;
    }
    try {
      await api.sendHint(sessionId, tier, textInput.value);
      status.textContent = `tier-${tier} hint delivered`;
      textInput.value = "";
    } catch (error) {
      status.textContent = error instanceof ApiError ? `rejected: ${error.message}` : String(error);
    }
  };

  // backlog then live tail, same fold for both
  const poll = async () => {
    try {
      const batch = await api.events(sessionId, state.nextSeq);
      if (batch.events.length > 0) {
        state = applyEvents(state, batch.events);
        render();
      }
      if (state.phase !== "finalized") {
        window.setTimeout(poll, POLL_MS);
      }
    } catch {
      el("banner").textContent = "connection lost; retrying";
      window.setTimeout(poll, POLL_MS * 3);
    }
  };
  await poll();
}

void boot();
