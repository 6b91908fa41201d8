import type { ApiGenerateRequest, ApiGenerateResponse } from "./types.js";

export class ApiError extends Error {
  status: number;
  retriable: boolean;

  constructor(message: string, status: number, retriable = false) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.retriable = retriable;
  }
}

/** Pull a human-readable message out of a FastAPI error body. */
function extractDetail(body: unknown, fallback: string): string {
  if (body && typeof body === "object" && "detail" in body) {
    const detail = (body as { detail: unknown }).detail;
    if (typeof detail === "string") return detail;
    if (detail && typeof detail === "object" && "error" in detail) {
      return String((detail as { error: unknown }).error);
    }
    return JSON.stringify(detail);
  }
  return fallback;
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let res: Response;
    try {
      res = await this.fetchFn(`${this.baseUrl}${path}`, {
        headers: { "Content-Type": "application/json" },
        ...init,
      });
    } catch (err) {
      if (err instanceof DOMException && err.name === "AbortError") throw err;
      throw new ApiError(`network failure: ${String(err)}`, 0, true);
    }
    if (!res.ok) {
      const body = await res.json().catch(() => null);
      throw new ApiError(
        extractDetail(body, `${res.status} ${res.statusText}`),
        res.status,
        res.status >= 500,
      );
    }
    return res.json() as Promise<T>;
  }

  async languages(signal?: AbortSignal): Promise<string[]> {
    const body = await this.request<{ languages: string[] }>("/api/languages", { signal });
    return body.languages;
  }

  async generate(req: ApiGenerateRequest, signal?: AbortSignal): Promise<ApiGenerateResponse> {
    return this.request<ApiGenerateResponse>("/api/generate", {
      method: "POST",
      body: JSON.stringify(req),
      signal,
    });
  }
}
