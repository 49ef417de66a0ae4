// Local mirror of the server session. The server is the source of truth:
// every accepted event carries a fresh snapshot, and reconcile() can verify
// the mirror against GET /session at any time.

import type { DecodedEvent, SessionState, StepResponse } from "./api.js";

export type UiSessionView = {
  sessionId: string | null;
  state: SessionState | null;
  lastEvent: DecodedEvent | null;
  lastConfidence: number | null;
  lastDecodeMs: number | null;
  eventCount: number;
};

export const emptyView: UiSessionView = {
  sessionId: null,
  state: null,
  lastEvent: null,
  lastConfidence: null,
  lastDecodeMs: null,
  eventCount: 0,
};

export function applyStep(view: UiSessionView, step: StepResponse): UiSessionView {
  const rho = (step.event as { rho?: number }).rho;
  return {
    ...view,
    state: step.state,
    lastEvent: step.event,
    lastConfidence: rho ?? view.lastConfidence,
    lastDecodeMs: step.decode_ms ?? view.lastDecodeMs,
    eventCount: view.eventCount + 1,
  };
}

/** Fields that must agree between the mirror and an authoritative snapshot. */
export function mismatches(local: SessionState, server: SessionState): string[] {
  const out: string[] = [];
  if (local.phase !== server.phase) out.push("phase");
  if (local.typed_keys !== server.typed_keys) out.push("typed_keys");
  if (JSON.stringify(local.candidates) !== JSON.stringify(server.candidates)) out.push("candidates");
  if (local.query !== server.query) out.push("query");
  if (local.viewport_offset !== server.viewport_offset) out.push("viewport_offset");
  const ids = (s: SessionState) => s.serp?.results.map((r) => r.result_id) ?? [];
  if (JSON.stringify(ids(local)) !== JSON.stringify(ids(server))) out.push("serp");
  if ((local.landing?.result_id ?? null) !== (server.landing?.result_id ?? null)) out.push("landing");
  if (JSON.stringify(local.feedback) !== JSON.stringify(server.feedback)) out.push("feedback");
  if (local.event_log.length !== server.event_log.length) out.push("event_log");
  return out;
}

/** The 5-result viewport the SERP page shows. */
export function viewport(state: SessionState, size = 5) {
  if (!state.serp) return [];
  const start = state.viewport_offset;
  return state.serp.results.slice(start, start + size);
}
