import type { DraftEvent, DraftState } from "./types.js";

export const initialState: DraftState = {
  languages: [],
  lang: null,
  description: "",
  code: "",
  title: "",
  candidates: [],
  selectedIndex: null,
  status: "idle",
  error: null,
};

/** True when the generate action is allowed: not loading, a language picked,
 *  and at least one editor pane nonempty. */
export function canGenerate(state: DraftState): boolean {
  if (state.status === "loading" || state.lang === null) return false;
  return state.description.trim().length > 0 || state.code.trim().length > 0;
}

/** Pure transition function; the rendered UI is a function of the event history. */
export function reduce(state: DraftState, event: DraftEvent): DraftState {
  switch (event.kind) {
    case "languages_loaded": {
      const lang =
        state.lang !== null && event.languages.includes(state.lang)
          ? state.lang
          : event.languages[0] ?? null;
      return { ...state, languages: event.languages, lang, error: null };
    }
    case "languages_failed":
      return { ...state, status: "error", error: event.message };
    case "set_lang":
      // An in-flight request for the old language is cancelled by the caller;
      // state-wise the change always lands and loading ends.
      return { ...state, lang: event.lang, status: "idle", error: null };
    case "edit_description":
      return { ...state, description: event.text };
    case "edit_code":
      return { ...state, code: event.text };
    case "edit_title":
      return { ...state, title: event.text };
    case "request_started":
      if (!canGenerate(state)) return state;
      return { ...state, status: "loading", error: null };
    case "request_succeeded":
      return {
        ...state,
        status: "idle",
        error: null,
        candidates: event.candidates,
        selectedIndex: null,
      };
    case "request_failed":
      return { ...state, status: "error", error: event.message };
    case "request_cancelled":
      return { ...state, status: "idle" };
    case "adopt": {
      if (event.index < 0 || event.index >= state.candidates.length) return state;
      return {
        ...state,
        selectedIndex: event.index,
        title: state.candidates[event.index].title,
      };
    }
  }
}

export function replay(events: DraftEvent[], from: DraftState = initialState): DraftState {
  return events.reduce(reduce, from);
}
