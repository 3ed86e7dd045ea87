/** DOM glue: keeps a single SessionState and re-renders the app on change.
 *
 * All logic lives in api.ts / state.ts / render.ts; this file only wires
 * events to transitions.
 */

import { ApiClient, ApiError } from "./api";
import {
  beginAsk,
  canSend,
  completeAsk,
  dismissError,
  failAsk,
  initialState,
  toggleTrace,
  withActiveModel,
  withDraft,
  withModels,
  type SessionState,
} from "./state";
import { renderApp } from "./render";

const api = new ApiClient();
let state: SessionState = initialState();

function setState(next: SessionState): void {
  state = next;
  const root = document.getElementById("app");
  if (root !== null) {
    root.innerHTML = renderApp(state);
    bind(root);
  }
}

async function refreshModels(): Promise<void> {
  try {
    setState(withModels(state, await api.listModels()));
  } catch (exc) {
    setState({ ...state, networkError: describe(exc) });
  }
}

function describe(exc: unknown): string {
  if (exc instanceof ApiError) {
    return exc.message;
  }
  return exc instanceof Error ? exc.message : String(exc);
}

async function send(): Promise<void> {
  if (!canSend(state) || state.activeModelId === null) {
    return;
  }
  const question = state.draft.trim();
  const modelId = state.activeModelId;
  setState(beginAsk(state, question));
  try {
    setState(completeAsk(state, await api.ask(modelId, question)));
  } catch (exc) {
    setState(failAsk(state, question, describe(exc)));
  }
  document.getElementById("question")?.focus();
}

async function upload(file: File): Promise<void> {
  try {
    const result = await api.uploadModel(file.name, await file.text());
    const models = await api.listModels();
    setState(withActiveModel(withModels(state, models), result.model_id));
  } catch (exc) {
    setState({ ...state, networkError: describe(exc) });
  }
}

function bind(root: HTMLElement): void {
  const picker = root.querySelector<HTMLSelectElement>("#model-picker");
  picker?.addEventListener("change", () => {
    setState(withActiveModel(state, picker.value));
  });

  const uploader = root.querySelector<HTMLInputElement>("#upload");
  uploader?.addEventListener("change", () => {
    const file = uploader.files?.[0];
    if (file !== undefined) {
      void upload(file);
    }
  });

  const question = root.querySelector<HTMLInputElement>("#question");
  question?.addEventListener("input", () => {
    // Keep state in sync without re-rendering (that would drop the caret).
    state = withDraft(state, question.value);
    const sendButton = root.querySelector<HTMLButtonElement>("#send");
    if (sendButton !== null) {
      sendButton.disabled = !canSend(state);
    }
  });
  question?.addEventListener("keydown", (event) => {
    if (event.key === "Enter") {
      void send();
    }
  });

  root.querySelector("#send")?.addEventListener("click", () => void send());
  root
    .querySelector("#retry-dismiss")
    ?.addEventListener("click", () => setState(dismissError(state)));

  for (const button of root.querySelectorAll<HTMLButtonElement>(".trace-toggle")) {
    button.addEventListener("click", () => {
      setState(toggleTrace(state, Number(button.dataset.turn)));
    });
  }
}

setState(state);
void refreshModels();
