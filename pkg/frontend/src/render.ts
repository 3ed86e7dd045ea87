/** Pure HTML rendering: the whole view is a function of the session state.
 *
 * Answer text is escaped but otherwise untouched — what the service returned
 * is exactly what the user reads.
 */

import type { AskResponse, ModelSummary } from "./api";
import type { ChatTurn, SessionState } from "./state";
import { activeModel, canSend } from "./state";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

const CYPHER_KEYWORDS = new Set([
  "MATCH", "WHERE", "RETURN", "AS", "AND", "OR", "NOT", "CONTAINS",
  "COUNT", "LIMIT",
]);

/** Keyword/string/number spans over plain text tokens — no editor involved. */
export function highlightCypher(cypher: string): string {
  const pattern = /("[^"]*"|'[^']*'|[A-Za-z_][A-Za-z0-9_]*|\d+(?:\.\d+)?|\s+|.)/g;
  let html = "";
  for (const match of cypher.matchAll(pattern)) {
    const token = match[0];
    const escaped = escapeHtml(token);
    if (CYPHER_KEYWORDS.has(token.toUpperCase())) {
      html += `<span class="cy-kw">${escaped}</span>`;
    } else if (token.startsWith('"') || token.startsWith("'")) {
      html += `<span class="cy-str">${escaped}</span>`;
    } else if (/^\d/.test(token)) {
      html += `<span class="cy-num">${escaped}</span>`;
    } else {
      html += escaped;
    }
  }
  return html;
}

export function renderStatsBanner(model: ModelSummary | null): string {
  if (model === null) {
    return `<div class="banner muted">No model selected — upload or pick one to start asking.</div>`;
  }
  return (
    `<div class="banner">` +
    `<strong>${escapeHtml(model.source_name)}</strong> — ` +
    `${model.node_count} nodes, ${model.edge_count} edges</div>`
  );
}

export function renderTimings(timings: Record<string, number>): string {
  const parts = Object.entries(timings).map(
    ([name, seconds]) => `${escapeHtml(name)} ${(seconds * 1000).toFixed(1)} ms`,
  );
  return parts.join(" · ");
}

export function renderTracePanel(response: AskResponse): string {
  return (
    `<div class="trace">` +
    `<div class="trace-row"><span class="trace-label">cypher</span>` +
    `<code class="cypher">${highlightCypher(response.cypher)}</code></div>` +
    `<div class="trace-row"><span class="trace-label">context</span>` +
    `<code>${escapeHtml(response.context)}</code></div>` +
    `<div class="trace-row"><span class="trace-label">outcome</span>` +
    `<span class="outcome-${response.outcome}">${escapeHtml(response.outcome)}</span></div>` +
    (response.error
      ? `<div class="trace-row"><span class="trace-label">error</span>` +
        `<code>${escapeHtml(response.error)}</code></div>`
      : "") +
    `<div class="trace-row"><span class="trace-label">timings</span>` +
    `<span>${renderTimings(response.timings)}</span></div>` +
    `</div>`
  );
}

export function renderTurn(turn: ChatTurn, index: number): string {
  let html =
    `<div class="turn">` +
    `<div class="bubble question">${escapeHtml(turn.question)}</div>`;
  if (turn.response === null) {
    html += `<div class="bubble answer pending">…</div>`;
  } else {
    const r = turn.response;
    const mood =
      r.outcome === "answered" ? "" : r.outcome === "no_answer" ? " shrug" : " broken";
    html +=
      `<div class="bubble answer${mood}">${escapeHtml(r.answer)}</div>` +
      `<button class="trace-toggle" data-turn="${index}">` +
      `${turn.expanded ? "hide trace" : "show trace"}</button>` +
      (turn.expanded ? renderTracePanel(r) : "");
  }
  return html + `</div>`;
}

export function renderModelPicker(state: SessionState): string {
  const options = state.models
    .map(
      (m) =>
        `<option value="${escapeHtml(m.model_id)}"` +
        `${m.model_id === state.activeModelId ? " selected" : ""}>` +
        `${escapeHtml(m.source_name)} (${escapeHtml(m.model_id)})</option>`,
    )
    .join("");
  return (
    `<select id="model-picker"${state.models.length === 0 ? " disabled" : ""}>` +
    options +
    `</select>`
  );
}

export function renderApp(state: SessionState): string {
  const disabled = !canSend(state);
  const hint =
    state.activeModelId === null
      ? `<div class="hint">Select a model to enable questions.</div>`
      : "";
  const errorBanner = state.networkError
    ? `<div class="banner error">${escapeHtml(state.networkError)}` +
      ` <button id="retry-dismiss">dismiss</button></div>`
    : "";
  return (
    `<header>` +
    renderModelPicker(state) +
    `<input type="file" id="upload" accept=".ifc" />` +
    renderStatsBanner(activeModel(state)) +
    `</header>` +
    errorBanner +
    `<main id="chat">` +
    state.turns.map(renderTurn).join("") +
    `</main>` +
    hint +
    `<footer>` +
    `<input id="question" placeholder="Ask about the building…"` +
    ` value="${escapeHtml(state.draft)}"` +
    `${state.activeModelId === null || state.inFlight ? " disabled" : ""} />` +
    `<button id="send"${disabled ? " disabled" : ""}>Ask</button>` +
    `</footer>`
  );
}
