import { ApiClient, ApiError } from "./api.js";
import { canGenerate, initialState, reduce } from "./state.js";
import type { DraftEvent, DraftState } from "./types.js";

export interface AppHandle {
  state(): DraftState;
  dispatch(event: DraftEvent): void;
  generate(): Promise<void>;
  loadLanguages(): Promise<void>;
  root: HTMLElement;
}

const SKELETON = `
  <header class="bar">
    <h1>Question title drafting</h1>
    <label>Language
      <select data-testid="lang-select"></select>
    </label>
  </header>
  <div class="banner" data-testid="error-banner" hidden>
    <span data-testid="error-message"></span>
    <button type="button" data-testid="retry-button">Retry</button>
  </div>
  <main class="panes">
    <label class="pane">Problem description
      <textarea data-testid="description-input" rows="10"
        placeholder="Describe the problem in plain language"></textarea>
    </label>
    <label class="pane">Code snippet
      <textarea data-testid="code-input" rows="10" class="mono"
        placeholder="Paste the relevant code"></textarea>
    </label>
  </main>
  <div class="actions">
    <button type="button" data-testid="generate-button" disabled>Suggest titles</button>
    <span class="spinner" data-testid="loading-indicator" hidden>generating…</span>
  </div>
  <section class="results">
    <ol data-testid="candidate-list"></ol>
    <label class="title-row">Draft title
      <input type="text" data-testid="title-input" placeholder="Adopt a suggestion or write your own" />
    </label>
  </section>
`;

function el<T extends HTMLElement>(root: HTMLElement, testId: string): T {
  const node = root.querySelector(`[data-testid="${testId}"]`);
  if (!node) throw new Error(`missing element ${testId}`);
  return node as T;
}

export function mountApp(root: HTMLElement, client: ApiClient): AppHandle {
  root.innerHTML = SKELETON;
  const langSelect = el<HTMLSelectElement>(root, "lang-select");
  const banner = el<HTMLElement>(root, "error-banner");
  const errorMessage = el<HTMLElement>(root, "error-message");
  const retryButton = el<HTMLButtonElement>(root, "retry-button");
  const descInput = el<HTMLTextAreaElement>(root, "description-input");
  const codeInput = el<HTMLTextAreaElement>(root, "code-input");
  const generateButton = el<HTMLButtonElement>(root, "generate-button");
  const loading = el<HTMLElement>(root, "loading-indicator");
  const candidateList = el<HTMLOListElement>(root, "candidate-list");
  const titleInput = el<HTMLInputElement>(root, "title-input");

  let state: DraftState = initialState;
  let inFlight: AbortController | null = null;

  function render(): void {
    if (langSelect.options.length !== state.languages.length) {
      langSelect.innerHTML = "";
      for (const lang of state.languages) {
        const option = document.createElement("option");
        option.value = lang;
        option.textContent = lang;
        langSelect.appendChild(option);
      }
    }
    if (state.lang !== null) langSelect.value = state.lang;
    if (descInput.value !== state.description) descInput.value = state.description;
    if (codeInput.value !== state.code) codeInput.value = state.code;
    if (titleInput.value !== state.title) titleInput.value = state.title;
    generateButton.disabled = !canGenerate(state);
    loading.hidden = state.status !== "loading";
    banner.hidden = state.status !== "error";
    errorMessage.textContent = state.error ?? "";

    candidateList.innerHTML = "";
    state.candidates.forEach((candidate, index) => {
      const item = document.createElement("li");
      item.dataset.testid = "candidate";
      if (index === state.selectedIndex) item.classList.add("selected");
      const text = document.createElement("span");
      text.className = "candidate-title";
      text.textContent = candidate.title;
      const score = document.createElement("span");
      score.className = "candidate-score";
      score.textContent = candidate.score.toFixed(3);
      const adopt = document.createElement("button");
      adopt.type = "button";
      adopt.dataset.testid = "adopt-button";
      adopt.textContent = "Use";
      adopt.addEventListener("click", () => {
        dispatch({ kind: "adopt", index });
        void navigator.clipboard?.writeText(candidate.title).catch(() => undefined);
      });
      item.append(text, score, adopt);
      candidateList.appendChild(item);
    });
  }

  function dispatch(event: DraftEvent): void {
    state = reduce(state, event);
    render();
  }

  async function loadLanguages(): Promise<void> {
    try {
      const languages = await client.languages();
      dispatch({ kind: "languages_loaded", languages });
    } catch (err) {
      dispatch({
        kind: "languages_failed",
        message: err instanceof Error ? err.message : String(err),
      });
    }
  }

  async function generate(): Promise<void> {
    if (!canGenerate(state) || state.lang === null) return;
    inFlight = new AbortController();
    const controller = inFlight;
    dispatch({ kind: "request_started" });
    try {
      const response = await client.generate(
        {
          lang: state.lang,
          description: state.description,
          code: state.code,
          num_candidates: 3,
        },
        controller.signal,
      );
      if (controller.signal.aborted) return;
      dispatch({ kind: "request_succeeded", candidates: response.candidates });
    } catch (err) {
      if (controller.signal.aborted) return;
      const message =
        err instanceof ApiError
          ? err.message
          : err instanceof Error
            ? err.message
            : String(err);
      dispatch({ kind: "request_failed", message });
    } finally {
      if (inFlight === controller) inFlight = null;
    }
  }

  langSelect.addEventListener("change", () => {
    if (inFlight) {
      inFlight.abort();
      inFlight = null;
      dispatch({ kind: "request_cancelled" });
    }
    dispatch({ kind: "set_lang", lang: langSelect.value });
  });
  descInput.addEventListener("input", () =>
    dispatch({ kind: "edit_description", text: descInput.value }),
  );
  codeInput.addEventListener("input", () => dispatch({ kind: "edit_code", text: codeInput.value }));
  titleInput.addEventListener("input", () =>
    dispatch({ kind: "edit_title", text: titleInput.value }),
  );
  generateButton.addEventListener("click", () => void generate());
  retryButton.addEventListener("click", () => void generate());

  render();
  return {
    state: () => state,
    dispatch,
    generate,
    loadLanguages,
    root,
  };
}
