/** Session state and its pure transitions.
 *
 * The view is a pure function of this state; turns are append-only and the
 * displayed answer is always the AskResponse payload verbatim.
 */

import type { AskResponse, ModelSummary } from "./api";

export interface ChatTurn {
  question: string;
  response: AskResponse | null; // null while in flight
  expanded: boolean;
}

export interface SessionState {
  models: ModelSummary[];
  activeModelId: string | null;
  turns: ChatTurn[];
  inFlight: boolean;
  /** Last network failure, shown as a retry banner; input is preserved. */
  networkError: string | null;
  draft: string;
}

export function initialState(): SessionState {
  return {
    models: [],
    activeModelId: null,
    turns: [],
    inFlight: false,
    networkError: null,
    draft: "",
  };
}

export function withModels(
  state: SessionState,
  models: ModelSummary[],
): SessionState {
  const stillThere = models.some((m) => m.model_id === state.activeModelId);
  const activeModelId = stillThere
    ? state.activeModelId
    : models.length > 0
      ? models[0].model_id
      : null;
  return { ...state, models, activeModelId };
}

export function withActiveModel(
  state: SessionState,
  modelId: string,
): SessionState {
  if (!state.models.some((m) => m.model_id === modelId)) {
    return state;
  }
  return { ...state, activeModelId: modelId };
}

export function activeModel(state: SessionState): ModelSummary | null {
  return state.models.find((m) => m.model_id === state.activeModelId) ?? null;
}

/** Asking requires an active model and no request already in flight. */
export function canSend(state: SessionState): boolean {
  return (
    state.activeModelId !== null && !state.inFlight && state.draft.trim() !== ""
  );
}

export function beginAsk(state: SessionState, question: string): SessionState {
  return {
    ...state,
    turns: [...state.turns, { question, response: null, expanded: false }],
    inFlight: true,
    networkError: null,
    draft: "",
  };
}

export function completeAsk(
  state: SessionState,
  response: AskResponse,
): SessionState {
  const turns = state.turns.slice();
  const last = turns[turns.length - 1];
  turns[turns.length - 1] = { ...last, response };
  return { ...state, turns, inFlight: false };
}

/** A transport failure: drop the pending turn, keep the typed question. */
export function failAsk(
  state: SessionState,
  question: string,
  message: string,
): SessionState {
  return {
    ...state,
    turns: state.turns.slice(0, -1),
    inFlight: false,
    networkError: message,
    draft: question,
  };
}

export function withDraft(state: SessionState, draft: string): SessionState {
  return { ...state, draft };
}

export function toggleTrace(state: SessionState, index: number): SessionState {
  const turns = state.turns.map((turn, i) =>
    i === index ? { ...turn, expanded: !turn.expanded } : turn,
  );
  return { ...state, turns };
}

export function dismissError(state: SessionState): SessionState {
  return { ...state, networkError: null };
}
