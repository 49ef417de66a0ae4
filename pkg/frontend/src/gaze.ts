// Simulated gaze: the desk-scale substitute for a headset. Selecting a key
// asks the server to synthesize SSVEP windows for that key's tag and streams
// them to the session's EEG endpoint; a low-confidence decode extends the
// dwell once with a longer window, mirroring the session's retry policy.

import { Client, StepResponse, isNoDecision } from "./api.js";

export type GazeOptions = {
  snrDb: number | null; // null = noise-free
  windowS: number;
  retryWindowS: number;
  seed?: number;
};

export const DEFAULT_GAZE: GazeOptions = { snrDb: 5, windowS: 1.0, retryWindowS: 1.5 };

let gazeCounter = 0;

export async function simulateGaze(
  client: Client,
  sessionId: string,
  k: number,
  opts: GazeOptions = DEFAULT_GAZE,
): Promise<StepResponse | null> {
  const seed = opts.seed ?? 1000 + gazeCounter++;
  const window = await client.synth({
    kind: "speller",
    k,
    duration_s: opts.windowS,
    snr_db: opts.snrDb,
    seed,
  });
  const resp = await client.postEeg(sessionId, window);
  if (!isNoDecision(resp)) return resp;
  // One retry with the longer window the server suggested.
  const retry = await client.synth({
    kind: "speller",
    k,
    duration_s: resp.retry_window_s ?? opts.retryWindowS,
    snr_db: opts.snrDb,
    seed: seed + 7919,
  });
  const second = await client.postEeg(sessionId, retry);
  return isNoDecision(second) ? null : second;
}

/**
 * Stream n satisfaction-class windows during a landing exam, then request the
 * pooled decoded verdict.
 */
export async function streamSatisfaction(
  client: Client,
  sessionId: string,
  satisfied: boolean,
  nWindows = 2,
  seedBase?: number,
): Promise<StepResponse> {
  const base = seedBase ?? 5000 + gazeCounter++ * 100;
  for (let i = 0; i < nWindows; i++) {
    const window = await client.synth({
      kind: "satisfaction",
      satisfied,
      duration_s: 1.0,
      seed: base + i,
    });
    await client.postEeg(sessionId, window);
  }
  return client.postFeedback(sessionId, {});
}
