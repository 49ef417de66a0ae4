// Browser wiring: flickering speller grid, simulated gaze, candidate row,
// landing card with the satisfaction control, and the re-ranked SERP with
// its flicker blocks. The server is always the source of truth; this file
// only renders snapshots and forwards intents.

import { ApiError, Client, StepResponse } from "./api.js";
import {
  Layout,
  LayoutKey,
  RefreshMismatchDetector,
  luminance,
  maxScheduleDelta,
  schedule,
} from "./flicker.js";
import { DEFAULT_GAZE, GazeOptions, simulateGaze, streamSatisfaction } from "./gaze.js";
import { UiSessionView, applyStep, emptyView, mismatches, viewport } from "./state.js";

const BLOCK_ACTIONS = [
  "click 1",
  "click 2",
  "click 3",
  "click 4",
  "click 5",
  "scroll up",
  "scroll down",
];

class App {
  client = new Client("");
  layout: Layout | null = null;
  view: UiSessionView = emptyView;
  frame = 0;
  frozen = false;
  detector: RefreshMismatchDetector | null = null;
  keyEls = new Map<number, HTMLElement>();
  blockEls = new Map<number, HTMLElement>();
  stopStream: (() => void) | null = null;

  gazeOptions(): GazeOptions {
    const snr = (document.getElementById("snr") as HTMLInputElement).valueAsNumber;
    const dwell = (document.getElementById("dwell") as HTMLInputElement).valueAsNumber;
    return { ...DEFAULT_GAZE, snrDb: snr >= 20 ? null : snr, windowS: dwell };
  }

  async start() {
    this.layout = await this.client.getLayout();
    this.detector = new RefreshMismatchDetector(this.layout.refresh_rate);
    this.buildKeyboard(this.layout);
    this.buildBlocks(this.layout);
    await this.newSession();
    requestAnimationFrame((t) => this.tick(t));
    this.wireControls();
    setInterval(() => this.pollMetrics(), 2500);
  }

  async newSession() {
    this.stopStream?.();
    const sid = await this.client.newSession();
    this.view = { ...emptyView, sessionId: sid };
    this.view.state = await this.client.getState(sid);
    this.stopStream = this.client.stream(sid, (step) => this.onStep(step));
    this.render();
  }

  onStep(step: StepResponse) {
    this.view = applyStep(this.view, step);
    this.render();
  }

  // --- flicker loop -------------------------------------------------------------

  tick(timestampMs: number) {
    if (!this.frozen && this.layout) {
      const rate = this.layout.refresh_rate;
      for (const key of this.layout.keys) {
        const el = this.keyEls.get(key.k);
        if (el) el.style.opacity = luminance(key, this.frame, rate).toFixed(3);
        const block = this.blockEls.get(key.k);
        if (block) block.style.opacity = luminance(key, this.frame, rate).toFixed(3);
      }
      this.frame += 1;
      const measured = this.detector!.sample(timestampMs);
      const banner = document.getElementById("mismatch")!;
      if (this.detector!.mismatched(measured)) {
        banner.textContent = `display runs at ${measured!.toFixed(1)} Hz, flicker coded for ${
          this.layout.refresh_rate
        } Hz`;
        banner.classList.remove("hidden");
      } else {
        banner.classList.add("hidden");
      }
    }
    requestAnimationFrame((t) => this.tick(t));
  }

  // --- building the panels --------------------------------------------------------

  buildKeyboard(layout: Layout) {
    const grid = document.getElementById("keyboard")!;
    grid.innerHTML = "";
    for (const key of layout.keys) {
      const el = document.createElement("button");
      el.className = "key";
      el.textContent = key.key === "DELETE" ? "DEL" : key.key === "SEARCH" ? "GO" : key.key;
      el.title = `k=${key.k} f=${key.f.toFixed(2)} Hz`;
      el.style.gridRow = String(key.row + 1);
      el.addEventListener("click", () => void this.gaze(key));
      grid.appendChild(el);
      this.keyEls.set(key.k, el);
    }
  }

  buildBlocks(layout: Layout) {
    const bar = document.getElementById("blocks")!;
    bar.innerHTML = "";
    for (let k = 1; k <= 7; k++) {
      const el = document.createElement("button");
      el.className = "block";
      el.textContent = BLOCK_ACTIONS[k - 1];
      el.title = `block k=${k} f=${layout.keys[k - 1].f.toFixed(2)} Hz`;
      el.addEventListener("click", () => void this.gazeBlock(k));
      bar.appendChild(el);
      this.blockEls.set(k, el);
    }
  }

  // --- intents ---------------------------------------------------------------------

  async gaze(key: LayoutKey) {
    if (!this.view.sessionId) return;
    this.note(`gazing at ${key.key} (${key.f.toFixed(2)} Hz)`);
    try {
      const step = await simulateGaze(this.client, this.view.sessionId, key.k, this.gazeOptions());
      if (step === null) this.note("no decision twice; extend the dwell or raise the SNR");
    } catch (err) {
      this.noteError(err);
    }
  }

  async gazeBlock(k: number) {
    if (!this.view.sessionId) return;
    try {
      const step = await simulateGaze(this.client, this.view.sessionId, k, this.gazeOptions());
      if (step === null) this.note("no decision on the interaction block");
    } catch (err) {
      this.noteError(err);
    }
  }

  async satisfaction(satisfied: boolean, manual: boolean) {
    if (!this.view.sessionId) return;
    try {
      if (manual) {
        await this.client.postFeedback(this.view.sessionId, {
          verdict: satisfied ? "satisfied" : "unsatisfied",
        });
      } else {
        this.note(`streaming ${satisfied ? "satisfied" : "unsatisfied"} EEG...`);
        await streamSatisfaction(this.client, this.view.sessionId, satisfied, 3);
      }
    } catch (err) {
      this.noteError(err);
    }
  }

  async reconcile() {
    if (!this.view.sessionId || !this.view.state) return;
    const server = await this.client.getState(this.view.sessionId);
    const diff = mismatches(this.view.state, server);
    this.note(diff.length === 0 ? "view matches server state" : `MISMATCH: ${diff.join(", ")}`);
    this.view = { ...this.view, state: server };
    this.render();
  }

  async dumpSchedule() {
    if (!this.layout) return;
    const key = this.layout.keys[0];
    const server = await this.client.getSchedule(key.k, 60);
    const local = schedule(key, 60, this.layout.refresh_rate);
    const delta = maxScheduleDelta(local, server.frames);
    this.note(
      `schedule dump k=${key.k}: max |local - server| = ${delta.toExponential(2)} ` +
        (delta < 1e-6 ? "(match)" : "(MISMATCH)"),
    );
    console.table(local.map((v, i) => ({ frame: i, local: v, server: server.frames[i] })));
  }

  async pollMetrics() {
    try {
      const m = await this.client.getMetrics();
      document.getElementById("metrics")!.textContent =
        `decodes ${m.decode_count} | mean ${Number(m.latency_mean_ms).toFixed(1)} ms | ` +
        `max ${Number(m.latency_max_ms).toFixed(1)} ms | violations ${m.latency_violations}`;
    } catch {
      /* server away; keep the last reading */
    }
  }

  // --- rendering ---------------------------------------------------------------------

  note(text: string) {
    document.getElementById("status")!.textContent = text;
  }

  noteError(err: unknown) {
    this.note(err instanceof ApiError ? `rejected: ${err.message}` : String(err));
  }

  render() {
    const state = this.view.state;
    if (!state) return;
    document.getElementById("phase")!.textContent = state.phase;
    document.getElementById("typed")!.textContent = state.typed_keys || " ";
    const last = this.view.lastEvent as { key?: string; action?: string; kind?: string } | null;
    document.getElementById("decoded")!.textContent = last
      ? `${last.kind}: ${last.key ?? last.action ?? ""} ` +
        (this.view.lastConfidence !== null ? `(rho ${this.view.lastConfidence.toFixed(3)})` : "") +
        (this.view.lastDecodeMs !== null ? ` in ${this.view.lastDecodeMs.toFixed(1)} ms` : "")
      : " ";

    const candidates = document.getElementById("candidates")!;
    candidates.innerHTML = "";
    state.candidates.forEach((query, i) => {
      const el = document.createElement("span");
      el.className = "candidate" + (state.query === query ? " selected" : "");
      el.textContent = `${i + 1}. ${query}`;
      candidates.appendChild(el);
    });

    const landing = document.getElementById("landing")!;
    if (state.landing && (state.phase === "landing_exam" || state.phase === "serp_browse")) {
      landing.classList.remove("hidden");
      landing.querySelector(".title")!.textContent = state.landing.title;
      (landing.querySelector(".url") as HTMLAnchorElement).textContent = state.landing.url;
      landing.querySelector(".snippet")!.textContent = state.landing.snippet;
      landing.querySelector(".probes")!.textContent =
        state.sat_probs.length > 0
          ? `decoded probabilities: ${state.sat_probs.map((p) => p.toFixed(2)).join(", ")}`
          : "";
      (document.getElementById("sat-controls")!).classList.toggle(
        "hidden",
        state.phase !== "landing_exam",
      );
    } else {
      landing.classList.add("hidden");
    }

    const serpPanel = document.getElementById("serp")!;
    serpPanel.classList.toggle("hidden", state.phase !== "serp_browse");
    if (state.phase === "serp_browse" && state.serp) {
      const list = document.getElementById("results")!;
      list.innerHTML = "";
      for (const r of viewport(state)) {
        const el = document.createElement("div");
        el.className = "result";
        el.innerHTML = `<div class="rtitle"></div><div class="rurl"></div><div class="rsnip"></div>`;
        (el.querySelector(".rtitle") as HTMLElement).textContent = r.title;
        (el.querySelector(".rurl") as HTMLElement).textContent = r.url;
        (el.querySelector(".rsnip") as HTMLElement).textContent =
          r.snippet + (r.subtopics.length ? `  [${r.subtopics.join(", ")}]` : "");
        list.appendChild(el);
      }
      document.getElementById("offset")!.textContent =
        `results ${state.viewport_offset + 1}-${Math.min(
          state.viewport_offset + 5,
          state.serp.results.length,
        )} of ${state.serp.results.length}` +
        (state.feedback ? ` | re-ranked: ${state.feedback.verdict}` : "");
    }
  }

  wireControls() {
    document.getElementById("new-session")!.addEventListener("click", () => void this.newSession());
    document.getElementById("reconcile")!.addEventListener("click", () => void this.reconcile());
    document.getElementById("freeze")!.addEventListener("click", (ev) => {
      this.frozen = !this.frozen;
      (ev.target as HTMLElement).textContent = this.frozen ? "resume flicker" : "freeze flicker";
    });
    document.getElementById("dump")!.addEventListener("click", () => void this.dumpSchedule());
    document
      .getElementById("sat-stream-yes")!
      .addEventListener("click", () => void this.satisfaction(true, false));
    document
      .getElementById("sat-stream-no")!
      .addEventListener("click", () => void this.satisfaction(false, false));
    document
      .getElementById("sat-manual-yes")!
      .addEventListener("click", () => void this.satisfaction(true, true));
    document
      .getElementById("sat-manual-no")!
      .addEventListener("click", () => void this.satisfaction(false, true));
  }
}

const app = new App();
void app.start();
