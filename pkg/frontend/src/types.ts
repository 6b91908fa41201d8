export interface Candidate {
  title: string;
  score: number;
}

export interface ApiGenerateRequest {
  lang: string;
  description: string;
  code: string;
  num_candidates: number;
}

export interface ApiGenerateResponse {
  candidates: Candidate[];
  model_version: string;
  latency_ms: number;
}

export type DraftStatus = "idle" | "loading" | "error";

export interface DraftState {
  languages: string[];
  lang: string | null;
  description: string;
  code: string;
  title: string;
  candidates: Candidate[];
  selectedIndex: number | null;
  status: DraftStatus;
  error: string | null;
}

export type DraftEvent =
  | { kind: "languages_loaded"; languages: string[] }
  | { kind: "languages_failed"; message: string }
  | { kind: "set_lang"; lang: string }
  | { kind: "edit_description"; text: string }
  | { kind: "edit_code"; text: string }
  | { kind: "edit_title"; text: string }
  | { kind: "request_started" }
  | { kind: "request_succeeded"; candidates: Candidate[] }
  | { kind: "request_failed"; message: string }
  | { kind: "request_cancelled" }
  | { kind: "adopt"; index: number };
