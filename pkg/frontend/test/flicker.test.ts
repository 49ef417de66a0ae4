import assert from "node:assert/strict";
import { test } from "node:test";

import {
  RefreshMismatchDetector,
  luminance,
  maxScheduleDelta,
  schedule,
} from "../src/flicker.js";
import { pythonCli } from "./helpers.js";

test("luminance anchors: sin(0) and sin(pi/2)", () => {
  assert.ok(Math.abs(luminance({ f: 8, phi: 0 }, 0, 60) - 0.5) < 1e-12);
  assert.ok(Math.abs(luminance({ f: 8, phi: Math.PI / 2 }, 0, 60) - 1.0) < 1e-12);
});

test("schedule stays inside [0, 1] and repeats with the tag period", () => {
  const frames = schedule({ f: 8, phi: 0 }, 600, 60); // 8 Hz at 60 fps: 15-frame cycle
  assert.ok(frames.every((v) => v >= 0 && v <= 1));
  for (let i = 0; i + 15 < frames.length; i++) {
    assert.ok(Math.abs(frames[i] - frames[i + 15]) < 1e-9);
  }
});

test("aliasing refresh rate is rejected", () => {
  assert.throws(() => luminance({ f: 31, phi: 0 }, 0, 60));
});

test("60-frame schedule matches the backend within 1e-6 for every key", () => {
  const layout = JSON.parse(pythonCli(["layout", "--json"])) as {
    key: string;
    k: number;
    f: number;
    phi: number;
  }[];
  assert.equal(layout.length, 33);
  const distinct = new Set(layout.map((row) => row.f));
  assert.equal(distinct.size, 33);
  for (const key of layout) {
    const server = JSON.parse(
      pythonCli(["schedule", "--k", String(key.k), "--frames", "60", "--json"]),
    ) as { frames: number[] };
    const local = schedule(key, 60, 60);
    assert.ok(
      maxScheduleDelta(local, server.frames) < 1e-6,
      `schedule mismatch for k=${key.k}`,
    );
  }
});

test("refresh mismatch detector measures rAF cadence", () => {
  const detector = new RefreshMismatchDetector(60);
  let measured: number | null = null;
  for (let i = 0; i < 60; i++) measured = detector.sample(i * (1000 / 60));
  assert.ok(measured !== null && Math.abs(measured - 60) < 0.5);
  assert.equal(detector.mismatched(measured), false);

  const slow = new RefreshMismatchDetector(60);
  let slowMeasured: number | null = null;
  for (let i = 0; i < 60; i++) slowMeasured = slow.sample(i * (1000 / 30));
  assert.equal(slow.mismatched(slowMeasured), true);
});
