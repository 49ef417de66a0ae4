// Typed client for the session service. fetch-based so the same code runs in
// the browser and in node tests; the event stream reads SSE over fetch.

import type { Layout } from "./flicker.js";

export type EegWindow = {
  channel_labels: string[];
  sampling_rate: number;
  samples: number[][];
};

export type SearchResult = {
  result_id: string;
  title: string;
  url: string;
  snippet: string;
  subtopics: string[];
};

export type Feedback = { verdict: string; probability: number; source: string };

export type SessionState = {
  phase: "spelling" | "candidate_select" | "landing_exam" | "serp_browse" | "done";
  typed_keys: string;
  candidates: string[];
  query: string | null;
  serp: { query: string; results: SearchResult[] } | null;
  landing: SearchResult | null;
  feedback: Feedback | null;
  viewport_offset: number;
  sat_probs: number[];
  event_log: Record<string, unknown>[];
};

export type DecodedEvent =
  | { kind: "key"; key: string; rho?: number; ts?: number }
  | { kind: "interaction"; action: string; rho?: number; ts?: number }
  | { kind: "sat_prob"; probability: number; ts?: number }
  | { kind: "feedback"; verdict?: string; probability?: number; source?: string; ts?: number }
  | { kind: "end"; ts?: number };

export type StepResponse = {
  event: DecodedEvent;
  actions: string[];
  state: SessionState;
  decode_ms?: number;
};

export type EegResponse =
  | StepResponse
  | { no_decision: true; retry_window_s: number };

export type SynthRequest =
  | { kind: "speller"; k: number; duration_s?: number; snr_db?: number | null; seed?: number }
  | { kind: "satisfaction"; satisfied: boolean; duration_s?: number; strength?: number; seed?: number }
  | { kind: "background"; duration_s?: number; n_channels?: number; seed?: number };

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

async function request<T>(base: string, method: string, path: string, body?: unknown): Promise<T> {
  const resp = await fetch(base + path, {
    method,
    headers: body === undefined ? undefined : { "Content-Type": "application/json" },
    body: body === undefined ? undefined : JSON.stringify(body),
  });
  const text = await resp.text();
  const parsed = text ? JSON.parse(text) : {};
  if (!resp.ok) throw new ApiError(resp.status, parsed.error ?? resp.statusText);
  return parsed as T;
}

export class Client {
  constructor(readonly base: string) {}

  getLayout(): Promise<Layout> {
    return request(this.base, "GET", "/layout");
  }

  getSchedule(k: number, frames: number): Promise<{ k: number; f: number; phi: number; frames: number[] }> {
    return request(this.base, "GET", `/schedule?k=${k}&frames=${frames}`);
  }

  getConfig(): Promise<Record<string, number | string>> {
    return request(this.base, "GET", "/config");
  }

  getMetrics(): Promise<Record<string, number>> {
    return request(this.base, "GET", "/metrics");
  }

  async newSession(): Promise<string> {
    const body = await request<{ session_id: string }>(this.base, "POST", "/session");
    return body.session_id;
  }

  getState(sessionId: string): Promise<SessionState> {
    return request(this.base, "GET", `/session/${sessionId}`);
  }

  postEeg(sessionId: string, window: EegWindow): Promise<EegResponse> {
    return request(this.base, "POST", `/session/${sessionId}/eeg`, window);
  }

  postFeedback(
    sessionId: string,
    body: { verdict?: string; probability?: number } = {},
  ): Promise<StepResponse> {
    return request(this.base, "POST", `/session/${sessionId}/feedback`, body);
  }

  postEvent(sessionId: string, event: DecodedEvent): Promise<StepResponse> {
    return request(this.base, "POST", `/session/${sessionId}/event`, event);
  }

  synth(req: SynthRequest): Promise<EegWindow> {
    return request(this.base, "POST", "/synth", req);
  }

  /**
   * Subscribe to the session's server-sent events. Returns an abort function.
   * Parses `data:` lines only; comment heartbeats are ignored.
   */
  stream(sessionId: string, onEvent: (payload: StepResponse) => void): () => void {
    const controller = new AbortController();
    void (async () => {
      try {
        const resp = await fetch(`${this.base}/session/${sessionId}/stream`, {
          signal: controller.signal,
        });
        if (!resp.ok || !resp.body) return;
        const reader = resp.body.getReader();
        const decoder = new TextDecoder();
        let buffer = "";
        for (;;) {
          const { done, value } = await reader.read();
          if (done) break;
          buffer += decoder.decode(value, { stream: true });
          let nl: number;
          while ((nl = buffer.indexOf("\n")) >= 0) {
            const line = buffer.slice(0, nl).trimEnd();
            buffer = buffer.slice(nl + 1);
            if (line.startsWith("data:")) {
              onEvent(JSON.parse(line.slice(5)) as StepResponse);
            }
          }
        }
      } catch {
        // aborted or connection dropped; the UI reconciles via getState
      }
    })();
    return () => controller.abort();
  }
}

export function isNoDecision(resp: EegResponse): resp is { no_decision: true; retry_window_s: number } {
  return (resp as { no_decision?: boolean }).no_decision === true;
}
