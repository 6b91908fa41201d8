import { describe, expect, it } from "vitest";

import { canGenerate, initialState, reduce, replay } from "../src/state.js";
import type { Candidate, DraftEvent } from "../src/types.js";

const CANDIDATES: Candidate[] = [
  { title: "how to parse lazy queues", score: -0.2 },
  { title: "parse queues lazily", score: -0.9 },
];

function draftReady(): DraftEvent[] {
  return [
    { kind: "languages_loaded", languages: ["python", "java"] },
    { kind: "edit_description", text: "my queues will not parse" },
    { kind: "edit_code", text: "queues = parse ( lazy )" },
  ];
}

describe("draft state reducer", () => {
  it("starts idle with nothing generatable", () => {
    expect(initialState.status).toBe("idle");
    expect(canGenerate(initialState)).toBe(false);
  });

  it("loading languages picks the first as default", () => {
    const state = replay([{ kind: "languages_loaded", languages: ["java", "python"] }]);
    expect(state.lang).toBe("java");
    expect(state.languages).toEqual(["java", "python"]);
  });

  it("empty draft can never generate", () => {
    const state = replay([{ kind: "languages_loaded", languages: ["python"] }]);
    expect(canGenerate(state)).toBe(false);
    expect(reduce(state, { kind: "request_started" })).toEqual(state);
  });

  it("one nonempty pane is enough to generate", () => {
    const base = replay([{ kind: "languages_loaded", languages: ["python"] }]);
    expect(canGenerate(reduce(base, { kind: "edit_description", text: "words" }))).toBe(true);
    expect(canGenerate(reduce(base, { kind: "edit_code", text: "x = 1" }))).toBe(true);
    expect(canGenerate(reduce(base, { kind: "edit_code", text: "   " }))).toBe(false);
  });

  it("success replaces candidates and clears the selection", () => {
    const state = replay([
      ...draftReady(),
      { kind: "request_started" },
      { kind: "request_succeeded", candidates: [CANDIDATES[0]] },
      { kind: "adopt", index: 0 },
      { kind: "request_started" },
      { kind: "request_succeeded", candidates: CANDIDATES },
    ]);
    expect(state.candidates).toEqual(CANDIDATES);
    expect(state.selectedIndex).toBeNull();
    expect(state.status).toBe("idle");
  });

  it("loading blocks a second request", () => {
    const loading = replay([...draftReady(), { kind: "request_started" }]);
    expect(loading.status).toBe("loading");
    expect(canGenerate(loading)).toBe(false);
    expect(reduce(loading, { kind: "request_started" })).toEqual(loading);
  });

  it("failure surfaces the server message", () => {
    const state = replay([
      ...draftReady(),
      { kind: "request_started" },
      { kind: "request_failed", message: "model not loaded" },
    ]);
    expect(state.status).toBe("error");
    expect(state.error).toBe("model not loaded");
  });

  it("adopt copies the candidate into the title field and records it", () => {
    const base = replay([
      ...draftReady(),
      { kind: "request_started" },
      { kind: "request_succeeded", candidates: CANDIDATES },
    ]);
    const adopted = reduce(base, { kind: "adopt", index: 0 });
    expect(adopted.title).toBe(CANDIDATES[0].title);
    expect(adopted.selectedIndex).toBe(0);
    const readopted = reduce(adopted, { kind: "adopt", index: 1 });
    expect(readopted.title).toBe(CANDIDATES[1].title);
    expect(readopted.selectedIndex).toBe(1);
  });

  it("adopt then edit then regenerate clears the previous selection", () => {
    const state = replay([
      ...draftReady(),
      { kind: "request_started" },
      { kind: "request_succeeded", candidates: CANDIDATES },
      { kind: "adopt", index: 1 },
      { kind: "edit_description", text: "edited draft text" },
      { kind: "request_started" },
      { kind: "request_succeeded", candidates: [CANDIDATES[0]] },
    ]);
    expect(state.selectedIndex).toBeNull();
    expect(state.candidates).toEqual([CANDIDATES[0]]);
  });

  it("out-of-range adoption is ignored", () => {
    const base = replay([
      ...draftReady(),
      { kind: "request_started" },
      { kind: "request_succeeded", candidates: CANDIDATES },
    ]);
    expect(reduce(base, { kind: "adopt", index: 7 })).toEqual(base);
    expect(reduce(base, { kind: "adopt", index: -1 })).toEqual(base);
  });

  it("language change ends loading (caller aborts the request)", () => {
    const state = replay([
      ...draftReady(),
      { kind: "request_started" },
      { kind: "set_lang", lang: "java" },
    ]);
    expect(state.status).toBe("idle");
    expect(state.lang).toBe("java");
  });

  it("state is a pure function of the event history", () => {
    const history: DraftEvent[] = [
      ...draftReady(),
      { kind: "request_started" },
      { kind: "request_succeeded", candidates: CANDIDATES },
      { kind: "adopt", index: 1 },
      { kind: "edit_title", text: "manual tweak" },
    ];
    expect(replay(history)).toEqual(replay(history));
  });

  it("selected index always points into candidates", () => {
    const events: DraftEvent[] = [
      ...draftReady(),
      { kind: "request_started" },
      { kind: "request_succeeded", candidates: CANDIDATES },
      { kind: "adopt", index: 1 },
      { kind: "request_started" },
      { kind: "request_succeeded", candidates: [CANDIDATES[0]] },
      { kind: "adopt", index: 0 },
      { kind: "adopt", index: 5 },
    ];
    let state = initialState;
    for (const event of events) {
      state = reduce(state, event);
      if (state.selectedIndex !== null) {
        expect(state.selectedIndex).toBeGreaterThanOrEqual(0);
        expect(state.selectedIndex).toBeLessThan(state.candidates.length);
      }
    }
  });
});
