import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

describe("ApiClient", () => {
  it("fetches the language list", async () => {
    const fetchFn = vi.fn(async () => jsonResponse({ languages: ["java", "python"] }));
    const client = new ApiClient("http://svc", fetchFn as unknown as typeof fetch);
    expect(await client.languages()).toEqual(["java", "python"]);
    expect(fetchFn).toHaveBeenCalledWith("http://svc/api/languages", expect.anything());
  });

  it("posts a generate request and parses the response", async () => {
    const body = {
      candidates: [{ title: "how to parse", score: -0.5 }],
      model_version: "abc",
      latency_ms: 12.5,
    };
    const fetchFn = vi.fn(async (_url: string, init?: RequestInit) => {
      expect(init?.method).toBe("POST");
      expect(JSON.parse(String(init?.body))).toMatchObject({ lang: "python", num_candidates: 3 });
      return jsonResponse(body);
    });
    const client = new ApiClient("http://svc", fetchFn as unknown as typeof fetch);
    const res = await client.generate({
      lang: "python",
      description: "d",
      code: "c",
      num_candidates: 3,
    });
    expect(res).toEqual(body);
  });

  it("surfaces string error details", async () => {
    const fetchFn = vi.fn(async () => jsonResponse({ detail: "model not loaded" }, 503));
    const client = new ApiClient("http://svc", fetchFn as unknown as typeof fetch);
    const err = await client.languages().catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.message).toBe("model not loaded");
    expect(err.status).toBe(503);
    expect(err.retriable).toBe(true);
  });

  it("surfaces structured 422 details without marking them retriable", async () => {
    const detail = { error: "unsupported language 'cobol'", supported: ["python"] };
    const fetchFn = vi.fn(async () => jsonResponse({ detail }, 422));
    const client = new ApiClient("http://svc", fetchFn as unknown as typeof fetch);
    const err = await client
      .generate({ lang: "cobol", description: "d", code: "", num_candidates: 3 })
      .catch((e) => e);
    expect(err.message).toContain("unsupported language");
    expect(err.status).toBe(422);
    expect(err.retriable).toBe(false);
  });

  it("wraps network failures as retriable errors", async () => {
    const fetchFn = vi.fn(async () => {
      throw new TypeError("fetch failed");
    });
    const client = new ApiClient("http://svc", fetchFn as unknown as typeof fetch);
    const err = await client.languages().catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(0);
    expect(err.retriable).toBe(true);
  });

  it("lets aborts pass through untouched", async () => {
    const fetchFn = vi.fn(async () => {
      throw new DOMException("The operation was aborted.", "AbortError");
    });
    const client = new ApiClient("http://svc", fetchFn as unknown as typeof fetch);
    const err = await client.languages().catch((e) => e);
    expect(err).toBeInstanceOf(DOMException);
    expect(err.name).toBe("AbortError");
  });
});
